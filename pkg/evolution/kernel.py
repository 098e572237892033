"""Compiled diamond sweep over the characteristic rectangle.

Three rows of the grid are alive at any time (row n lives in slot n % 3):
two for the diamond update itself and one more for the residual audit,
which checks the wave equation on diamonds of size 2h.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _record(
    n, row, h, obs_base, obs_w, obs_dw, samples, slopes, cols, col_values
):
    for k in range(obs_base.shape[0]):
        base = obs_base[k, n]
        if base < 0:
            continue
        value = 0.0
        slope = 0.0
        for i in range(4):
            value += obs_w[k, n, i] * row[base + i]
            slope += obs_dw[k, n, i] * row[base + i]
        samples[k, n] = value
        slopes[k, n] = slope / h
    for m in range(cols.shape[0]):
        c = cols[m]
        for i in range(4):
            col_values[m, n, i] = row[c - 3 + i]


@njit(cache=True)
def diamond_sweep(
    first_row,
    first_column,
    coeff,
    d_axis,
    h,
    obs_base,
    obs_w,
    obs_dw,
    cols,
    stride,
    audit_n,
    audit_j,
):
    """Evolve phi from row 0 to the last row.

    ``coeff[d + n_u]`` is (h^2/2) V on the diagonal j - n = d. Nodes with
    d < d_axis lie beyond the regular centre and stay zero, as does the
    centre itself. Returns the sampled observer values and v-slopes, the
    retained columns, the snapshot, the audit residuals, the last row and
    the (row, column) of the first non-finite value, or (-1, -1).
    """
    n_u = first_column.shape[0] - 1
    n_v = first_row.shape[0] - 1
    rows = np.zeros((3, n_v + 1))
    n_obs = obs_base.shape[0]
    samples = np.full((n_obs, n_u + 1), np.nan)
    slopes = np.full((n_obs, n_u + 1), np.nan)
    col_values = np.zeros((cols.shape[0], n_u + 1, 4))
    if stride > 0:
        snapshot = np.zeros((n_u // stride + 1, n_v // stride + 1))
    else:
        snapshot = np.zeros((0, 0))
    residuals = np.full(audit_n.shape[0], np.nan)
    bad_n = -1
    bad_j = -1

    for j in range(n_v + 1):
        rows[0, j] = first_row[j] if j > d_axis else 0.0
    _record(
        0, rows[0], h, obs_base, obs_w, obs_dw, samples, slopes, cols,
        col_values,
    )
    if stride > 0:
        snapshot[0, :] = rows[0, ::stride]
    p = 0

    for n in range(1, n_u + 1):
        new = rows[n % 3]
        old = rows[(n - 1) % 3]
        new[0] = first_column[n] if -n > d_axis else 0.0
        for j in range(n_v):
            d = j + 1 - n
            if d <= d_axis:
                new[j + 1] = 0.0
                continue
            c = coeff[d + n_u]
            # Minkowski (c = 0) transports F(u) + G(v) without rounding
            new[j + 1] = old[j + 1] + (new[j] - old[j]) - c * (
                new[j] + old[j + 1]
            )
            if not np.isfinite(new[j + 1]):
                bad_n = n
                bad_j = j + 1
                break
        if bad_n >= 0:
            break
        _record(
            n, new, h, obs_base, obs_w, obs_dw, samples, slopes, cols,
            col_values,
        )
        if stride > 0 and n % stride == 0:
            snapshot[n // stride, :] = new[::stride]

        while p < audit_n.shape[0] and audit_n[p] < n:
            p += 1
        older = rows[(n - 2) % 3]
        while p < audit_n.shape[0] and audit_n[p] == n:
            j = audit_j[p]
            d = j - n
            if d - 2 >= d_axis:
                potential = 2.0 * coeff[d + n_u] / h**2
                north = new[j]
                west = new[j - 2]
                east = older[j]
                south = older[j - 2]
                residuals[p] = (north - east - west + south) / (
                    4.0 * h**2
                ) + potential * 0.5 * (east + west)
            p += 1

    last = rows[n_u % 3].copy()
    return samples, slopes, col_values, snapshot, residuals, last, bad_n, bad_j
