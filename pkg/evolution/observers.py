"""Observer curves on the characteristic rectangle.

Each curve is planned before the sweep: for every row it crosses, the
kernel receives the first of four neighbouring columns and the cubic
Lagrange weights for phi and its v-derivative at the crossing point.
"""

import logging
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from numpy.polynomial import polynomial

from evolution.exceptions import ObserverOutsideGrid
from evolution.models import (
    NullGrid,
    ObserverCurve,
    ObserverKind,
    ObserverSeries,
)
from geometry.coordinates import CoordinateMap

logger = logging.getLogger(__name__)

SCRI_FRACTIONS = (1.0, 7.0 / 8.0, 3.0 / 4.0, 5.0 / 8.0)
NEWTON_ITERATIONS = 60
MIN_SAMPLES = 3


def lagrange_weights(t):
    """Weights of nodes 0..3 at offset t, and of the derivative there."""
    t = np.asarray(t, dtype=float)
    weights = np.stack(
        (
            -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0,
            t * (t - 2.0) * (t - 3.0) / 2.0,
            -t * (t - 1.0) * (t - 3.0) / 2.0,
            t * (t - 1.0) * (t - 2.0) / 6.0,
        ),
        axis=-1,
    )
    slopes = np.stack(
        (
            -(3.0 * t**2 - 12.0 * t + 11.0) / 6.0,
            (3.0 * t**2 - 10.0 * t + 6.0) / 2.0,
            -(3.0 * t**2 - 8.0 * t + 3.0) / 2.0,
            (3.0 * t**2 - 6.0 * t + 2.0) / 6.0,
        ),
        axis=-1,
    )
    return weights, slopes


def gamma_curve(alpha: float, u):
    """v(u) on v - u = v^alpha, by Newton's method on a convex function."""
    u = np.asarray(u, dtype=float)
    v = u + (u + 1.0) ** alpha + 1.0
    for _ in range(NEWTON_ITERATIONS):
        step = (v - v**alpha - u) / (1.0 - alpha * v ** (alpha - 1.0))
        v = v - step
        if np.all(np.abs(step) <= 4e-16 * v):
            break
    return v


def scri_columns(grid: NullGrid) -> tuple[int, ...]:
    """Grid columns nearest to v_max (1, 7/8, 3/4, 5/8), largest first."""
    columns = []
    for fraction in SCRI_FRACTIONS:
        c = int(round((fraction * grid.v_max - grid.v0) / grid.h))
        if c >= 3 and c not in columns:
            columns.append(c)
    if len(columns) < 3:
        raise ObserverOutsideGrid(
            "the scri proxy needs three columns between v0 and v_max"
        )
    return tuple(columns)


@dataclass(frozen=True, eq=False)
class ObserverPlan:
    curve: ObserverCurve
    rows: np.ndarray
    v: np.ndarray
    r: np.ndarray
    base: np.ndarray
    weights: np.ndarray
    slopes: np.ndarray
    tau_offset: float = 0.0
    columns: tuple[int, ...] = ()

    @property
    def is_scri(self) -> bool:
        return self.curve.kind == ObserverKind.SCRI_PROXY


def _rstar(curve: ObserverCurve, cmap: CoordinateMap) -> float:
    kind = ObserverKind(curve.kind)
    if kind == ObserverKind.CONSTANT_R:
        return float(cmap.tortoise(curve.value))
    if kind == ObserverKind.HORIZON_PROXY and curve.value is None:
        return settings.LAB["HORIZON_PROXY_RSTAR"] * cmap.model.scale
    return float(curve.value)


def plan_observer(
    curve: ObserverCurve, cmap: CoordinateMap, grid: NullGrid
) -> ObserverPlan:
    n_rows = grid.n_u + 1
    u = grid.u
    if curve.kind == ObserverKind.SCRI_PROXY:
        columns = scri_columns(grid)
        return ObserverPlan(
            curve=curve,
            rows=np.ones(n_rows, dtype=bool),
            v=np.full(n_rows, grid.v0 + columns[0] * grid.h),
            r=np.full(n_rows, np.inf),
            base=np.full(n_rows, -1, dtype=np.int64),
            weights=np.zeros((n_rows, 4)),
            slopes=np.zeros((n_rows, 4)),
            columns=columns,
        )

    if curve.kind == ObserverKind.GAMMA_ALPHA:
        v = gamma_curve(curve.value, u)
        v0 = grid.v0
        tau_offset = max(0.0, v0 - v0**curve.value)
    else:
        rstar = _rstar(curve, cmap)
        if rstar < cmap.rstar_min:
            raise ObserverOutsideGrid(
                f"r* = {rstar:g} lies beyond the centre of the model"
            )
        v = u + 2.0 * rstar
        tau_offset = max(0.0, grid.v0 - 2.0 * rstar)
        if curve.uses_advanced_time:
            tau_offset += 2.0 * rstar

    slack = 1e-9 * grid.h
    rows = (v >= grid.v0 - slack) & (v <= grid.v_max + slack)
    if np.count_nonzero(rows) < MIN_SAMPLES:
        raise ObserverOutsideGrid(
            f"observer {curve.id} crosses fewer than {MIN_SAMPLES} rows"
        )

    position = (v - grid.v0) / grid.h
    base = np.clip(np.floor(position) - 1, 0, grid.n_v - 3).astype(np.int64)
    weights, slopes = lagrange_weights(position - base)
    base[~rows] = -1
    weights[~rows] = 0.0
    slopes[~rows] = 0.0

    if curve.kind == ObserverKind.GAMMA_ALPHA:
        r = np.full(n_rows, np.nan)
        r[rows] = cmap.inverse_tortoise(0.5 * (v[rows] - u[rows]))
    else:
        r = np.full(n_rows, float(cmap.inverse_tortoise(rstar)))
    logger.debug(
        "Observer %s crosses %d rows", curve.id, np.count_nonzero(rows)
    )
    return ObserverPlan(
        curve=curve,
        rows=rows,
        v=v,
        r=r,
        base=base,
        weights=weights,
        slopes=slopes,
        tau_offset=tau_offset,
    )


def _t_derivatives(values, tau):
    if values.size < MIN_SAMPLES:
        nan = np.full_like(values, np.nan)
        return nan, nan
    first = np.gradient(values, tau, edge_order=2)
    return first, np.gradient(first, tau, edge_order=2)


def build_series(
    plan: ObserverPlan, samples, slopes, grid: NullGrid
) -> ObserverSeries:
    """Turn the kernel's samples along a planned curve into a series."""
    rows = plan.rows
    u = grid.u[rows]
    v = plan.v[rows]
    r = plan.r[rows]
    phi = samples[rows]
    psi = phi / r
    tau = v if plan.curve.uses_advanced_time else u
    if plan.curve.kind == ObserverKind.GAMMA_ALPHA:
        Tpsi = np.full_like(psi, np.nan)
        T2psi = np.full_like(psi, np.nan)
    else:
        Tpsi, T2psi = _t_derivatives(psi, tau)
    return ObserverSeries(
        curve=plan.curve,
        tau=tau,
        u=u,
        v=v,
        r=r,
        phi=phi,
        psi=psi,
        Tpsi=Tpsi,
        T2psi=T2psi,
        v2dvphi=v**2 * slopes[rows],
        tau_offset=plan.tau_offset,
    )


def build_scri_series(
    plan: ObserverPlan, columns: dict[int, np.ndarray], grid: NullGrid
) -> ObserverSeries:
    """Radiation field rpsi at null infinity, extrapolated in 1/v.

    A quadratic in 1/v through the retained columns gives the limit; the
    linear fit's limit serves as the error estimate. ``r`` is infinite on
    this curve and ``psi`` holds the radiation field itself.
    """
    x = 1.0 / (grid.v0 + grid.h * np.array(plan.columns))
    values = np.stack([columns[c][:, 3] for c in plan.columns])
    quadratic = polynomial.polyfit(x, values, 2)[0]
    linear = polynomial.polyfit(x, values, 1)[0]
    logger.debug(
        "Scri extrapolation spread %.3g", np.max(np.abs(quadratic - linear))
    )
    last = columns[plan.columns[0]]
    v_last = grid.v0 + grid.h * plan.columns[0]
    slope = (3.0 * last[:, 3] - 4.0 * last[:, 2] + last[:, 1]) / (
        2.0 * grid.h
    )
    u = grid.u
    Tpsi, T2psi = _t_derivatives(quadratic, u)
    return ObserverSeries(
        curve=plan.curve,
        tau=u,
        u=u,
        v=np.full_like(u, v_last),
        r=np.full_like(u, np.inf),
        phi=quadratic,
        psi=quadratic,
        Tpsi=Tpsi,
        T2psi=T2psi,
        v2dvphi=v_last**2 * slope,
    )
