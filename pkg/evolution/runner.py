import logging
import math

import numpy as np
from django.conf import settings
from numpy.polynomial import polynomial

from evolution.exceptions import (
    BudgetExceeded,
    ColumnNotRetained,
    GridMisaligned,
    NaNDetected,
    ObserverOutsideGrid,
)
from evolution.kernel import diamond_sweep
from evolution.models import (
    Diagnostics,
    EvolutionResult,
    NullGrid,
    ObserverKind,
)
from evolution.observers import (
    build_scri_series,
    build_series,
    plan_observer,
    scri_columns,
)
from geometry.models import potential_offset
from initial_data.exceptions import SupportOutsideGrid
from initial_data.models import CharacteristicData, MixedSurfaceData

logger = logging.getLogger(__name__)

NP_SAMPLES = 9
MIN_NP_COLUMNS = 3


def check_budget(grid: NullGrid, budget_cells: int | None = None) -> None:
    if budget_cells is None:
        budget_cells = settings.LAB["BUDGET_CELLS"]
    if grid.cells > budget_cells:
        raise BudgetExceeded(
            f"{grid.cells} cells exceed the budget of {budget_cells}"
        )


def axis_diagonal(cmap, grid: NullGrid) -> int | None:
    """Diagonal j - n of the regular centre r = 0, if the model has one."""
    if cmap.model.is_black_hole:
        return None
    return int(round((2.0 * cmap.rstar_min - grid.v0) / grid.h))


def diagonal_coefficients(cmap, ell: int, grid: NullGrid, d_axis: int):
    """(h^2/2) V at the cell centres of every diagonal d = -n_u .. n_v."""
    d = np.arange(-grid.n_u, grid.n_v + 1)
    active = d > d_axis
    rstar = 0.5 * (grid.v0 + d[active] * grid.h)
    coeff = np.zeros(d.size)
    offsets = cmap.horizon_offset(rstar)
    coeff[active] = (
        0.5 * grid.h**2 * potential_offset(cmap.model, ell, offsets)
    )
    return coeff


def _boundaries(data: CharacteristicData, grid: NullGrid, d_axis: int):
    cmap = data.cmap
    first_row = np.asarray(data.phi(grid.v), dtype=float) * np.ones(
        grid.n_v + 1
    )
    first_column = np.zeros(grid.n_u + 1)
    n = np.arange(grid.n_u + 1)
    active = -n > d_axis
    rstar = 0.5 * (grid.v0 - grid.u[active])
    radii = np.atleast_1d(cmap.inverse_tortoise(rstar))
    first_column[active] = np.asarray(data.ingoing(radii), dtype=float)
    first_column[0] = first_row[0]
    return first_row, first_column


def _audit_cells(grid: NullGrid):
    lab = settings.LAB
    if grid.n_u < 2 or grid.n_v < 2:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty
    count = min(
        lab["AUDIT_MAX_CELLS"], math.ceil(lab["AUDIT_FRACTION"] * grid.cells)
    )
    rng = np.random.default_rng(lab["AUDIT_SEED"])
    n = rng.integers(2, grid.n_u + 1, count)
    j = rng.integers(2, grid.n_v + 1, count)
    order = np.lexsort((j, n))
    return n[order].astype(np.int64), j[order].astype(np.int64)


def evolve(
    data,
    grid: NullGrid,
    observers=(),
    keep_columns=(),
    keep_outer_columns: bool = True,
    snapshot_stride: int = 0,
    budget_cells: int | None = None,
) -> EvolutionResult:
    """Solve the l-mode wave equation on the characteristic rectangle.

    The data fix phi on the cone u = 0 and on the ingoing ray v = v0. With a
    regular centre the field vanishes on the diagonal of r = 0 and the
    nodes beyond it stay inactive. ``keep_outer_columns`` retains the
    columns near v_max that the NP diagnostics need, and
    ``snapshot_stride`` keeps every stride-th row and column of the full
    field.
    """
    if isinstance(data, MixedSurfaceData):
        data = data.cone
    check_budget(grid, budget_cells)
    if abs(grid.v0 - data.v0) > 1e-9 * max(1.0, abs(data.v0)):
        raise GridMisaligned(
            f"grid v0 = {grid.v0:g} differs from the data's v0 = "
            f"{data.v0:g}"
        )
    if data.v_max < grid.v_max:
        raise SupportOutsideGrid(
            f"data end at v = {data.v_max:g}, before v_max = {grid.v_max:g}"
        )

    cmap = data.cmap
    axis = axis_diagonal(cmap, grid)
    d_axis = -(grid.n_u + 1) if axis is None else axis
    coeff = diagonal_coefficients(cmap, data.ell, grid, d_axis)
    first_row, first_column = _boundaries(data, grid, d_axis)

    plans = [plan_observer(curve, cmap, grid) for curve in observers]
    retained = set(keep_columns)
    if keep_outer_columns:
        retained.update(outer_columns(grid))
    for plan in plans:
        retained.update(plan.columns)
    if any(c < 3 or c > grid.n_v for c in retained):
        raise ColumnNotRetained(
            "retained columns must lie between 3 and n_v"
        )
    cols = np.array(sorted(retained), dtype=np.int64)

    n_rows = grid.n_u + 1
    stencil = [plan for plan in plans if not plan.is_scri]
    obs_base = np.array(
        [plan.base for plan in stencil], dtype=np.int64
    ).reshape(len(stencil), n_rows)
    obs_w = np.array([plan.weights for plan in stencil]).reshape(
        len(stencil), n_rows, 4
    )
    obs_dw = np.array([plan.slopes for plan in stencil]).reshape(
        len(stencil), n_rows, 4
    )
    audit_n, audit_j = _audit_cells(grid)

    logger.info(
        "Evolving %s (l = %d) on %d cells, h = %g",
        data.label or "data",
        data.ell,
        grid.cells,
        grid.h,
    )
    (
        samples,
        slopes,
        col_values,
        snapshot,
        residuals,
        final_row,
        bad_n,
        bad_j,
    ) = diamond_sweep(
        first_row,
        first_column,
        coeff,
        d_axis,
        grid.h,
        obs_base,
        obs_w,
        obs_dw,
        cols,
        snapshot_stride,
        audit_n,
        audit_j,
    )
    if bad_n >= 0:
        raise NaNDetected(u=bad_n * grid.h, v=grid.v0 + bad_j * grid.h)

    columns = {int(c): col_values[m] for m, c in enumerate(cols)}
    series = {}
    k = 0
    for plan in plans:
        if plan.is_scri:
            series[plan.curve.id] = build_scri_series(plan, columns, grid)
            continue
        series[plan.curve.id] = build_series(
            plan, samples[k], slopes[k], grid
        )
        k += 1

    audited = residuals[np.isfinite(residuals)]
    diagnostics = Diagnostics(
        cells=grid.cells,
        h=grid.h,
        audited_cells=int(audited.size),
        residual_max=float(np.abs(audited).max()) if audited.size else 0.0,
        residual_rms=(
            float(np.sqrt(np.mean(audited**2))) if audited.size else 0.0
        ),
        tau_offsets={key: s.tau_offset for key, s in series.items()},
    )
    result = EvolutionResult(
        cmap=cmap,
        ell=data.ell,
        grid=grid,
        series=series,
        columns=columns,
        final_row=final_row,
        diagnostics=diagnostics,
        snapshot=snapshot if snapshot_stride > 0 else None,
        snapshot_stride=snapshot_stride,
        axis_diagonal=axis,
    )
    _np_diagnostics(result)
    logger.info(
        "Evolution finished: residual max %.3g over %d audited cells",
        diagnostics.residual_max,
        diagnostics.audited_cells,
    )
    return result


def _np_diagnostics(result: EvolutionResult) -> None:
    diagnostics = result.diagnostics
    grid = result.grid
    rows = np.unique(np.linspace(0, grid.n_u, NP_SAMPLES).round())
    u_list = grid.u[rows.astype(int)]
    try:
        diagnostics.np_scalar = sample_np_scalar(result, u_list)
        diagnostics.np_drift = np_drift(diagnostics.np_scalar)
        diagnostics.derivative_scalar = sample_derivative_scalar(
            result, u_list, k=1
        )
    except ColumnNotRetained:
        logger.debug("No column retained for the NP diagnostics")


def np_drift(scalar) -> float | None:
    """max |I0(u) - I0(0)| / |I0(0)|; None when I0(0) vanishes."""
    values = np.array([value for _, value in scalar])
    if values.size == 0 or abs(values[0]) <= settings.LAB["VANISHING_FLOOR"]:
        return None
    return float(np.max(np.abs(values - values[0])) / abs(values[0]))


def _gamma_series(result: EvolutionResult):
    for series in result.series.values():
        if series.curve.kind == ObserverKind.GAMMA_ALPHA:
            return series
    return None


def outer_columns(grid: NullGrid) -> tuple[int, ...]:
    """Columns the NP diagnostics extrapolate across, largest first."""
    try:
        return scri_columns(grid)
    except ObserverOutsideGrid:
        return (grid.n_v,)


def _column_scalar(f, n, h, v, k, norm):
    f3, f2, f1, f0 = f[n, 3], f[n, 2], f[n, 1], f[n, 0]
    if k == 0:
        derivative = (3.0 * f3 - 4.0 * f2 + f1) / (2.0 * h)
    else:
        derivative = (2.0 * f3 - 5.0 * f2 + 4.0 * f1 - f0) / h**2
    return v ** (k + 2) * derivative / norm


def _limit(x, values) -> float:
    """Value at x = 0 of the quadratic through (x, values)."""
    return float(polynomial.polyfit(x, values, 2)[0])


def sample_np_scalar(result: EvolutionResult, u_list):
    """(u, I0(u)) from v^2 d_v phi / 2, pushed to v = infinity.

    Falls back to the samples of a gamma_alpha observer when no column was
    kept.
    """
    return sample_derivative_scalar(result, u_list, k=0)


def sample_derivative_scalar(result: EvolutionResult, u_list, k: int = 0):
    """(u, v^(k+2) d_v^(k+1) phi / ((-1)^k (k+1)! 2)) for k = 0 or 1.

    With three or more outer columns retained the limit v -> infinity is
    taken in two parts: the cone values in 1/v, and the change since
    u = 0 along the outgoing ray in 1/(v - u). The change vanishes
    identically without a potential. A single column is read as it is.
    """
    if k not in (0, 1):
        raise ValueError(f"k must be 0 or 1, got {k}")
    grid = result.grid
    h = grid.h
    norm = (-1) ** k * math.factorial(k + 1) * 2.0
    pairs = []
    if not result.columns:
        gamma = _gamma_series(result)
        if gamma is None or k != 0:
            raise ColumnNotRetained(
                "no retained column and no gamma_alpha samples"
            )
        for u in u_list:
            hits = np.flatnonzero(np.isclose(gamma.u, u, atol=1e-9 * h))
            if hits.size == 0:
                raise ColumnNotRetained(
                    f"gamma_alpha samples do not cover u = {u:g}"
                )
            pairs.append((float(u), float(gamma.v2dvphi[hits[0]] / norm)))
        return pairs

    outer = [c for c in outer_columns(grid) if c in result.columns]
    if len(outer) < MIN_NP_COLUMNS:
        outer = [max(result.columns)]
    v = grid.v0 + h * np.array(outer)
    cone = np.array(
        [
            _column_scalar(result.columns[c], 0, h, v[m], k, norm)
            for m, c in enumerate(outer)
        ]
    )
    at_infinity = cone[0] if len(outer) == 1 else _limit(1.0 / v, cone)
    for u in u_list:
        n = grid.row(u)
        values = np.array(
            [
                _column_scalar(result.columns[c], n, h, v[m], k, norm)
                for m, c in enumerate(outer)
            ]
        )
        ahead = v - u > 0.0
        if np.count_nonzero(ahead) < MIN_NP_COLUMNS:
            value = values[0]
        else:
            change = values[ahead] - cone[ahead]
            value = at_infinity + _limit(1.0 / (v[ahead] - u), change)
        pairs.append((float(u), float(value)))
    return pairs
