import logging

import numpy as np

from evolution.models import EvolutionResult
from initial_data.exceptions import GridMismatch
from initial_data.families import same_background
from time_integral.models import TimeIntegralData

logger = logging.getLogger(__name__)


def _check_compatible(result: EvolutionResult, tdata: TimeIntegralData):
    if result.snapshot is None:
        raise GridMismatch(
            "the run kept no snapshot; evolve with snapshot_stride > 0"
        )
    if not same_background(result.model, tdata.data.model):
        raise GridMismatch("run and time integral use different models")
    if abs(result.grid.v0 - tdata.data.v0) > 1e-9 * max(1.0, tdata.data.v0):
        raise GridMismatch("run and time integral start at different v0")
    if result.ell != tdata.data.ell:
        raise GridMismatch(
            f"run has l = {result.ell}, time integral l = {tdata.data.ell}"
        )


def propagate_time_integral(
    result: EvolutionResult, tdata: TimeIntegralData
) -> np.ndarray:
    """phi^(1) on the run's snapshot, from T phi^(1) = phi.

    r is constant along the diagonals v - u = const and T moves along them,
    so phi^(1) at (u + s, v + s) is its value at the start of the diagonal
    plus the integral of phi, accumulated with the trapezoidal rule. The
    diagonals start on the cone u = 0 or on the ingoing ray v = v0. Nodes
    beyond a regular centre are NaN.
    """
    _check_compatible(result, tdata)
    phi = result.snapshot
    stride = result.snapshot_stride
    grid = result.grid
    H = stride * grid.h
    rows, cols = phi.shape
    u = H * np.arange(rows)
    v = grid.v0 + H * np.arange(cols)
    cmap = result.cmap

    d_axis = result.axis_diagonal
    if d_axis is None:
        d_axis = -(grid.n_u + 1)
    diagonal = stride * (np.arange(cols)[None, :] - np.arange(rows)[:, None])
    inactive = diagonal < d_axis

    field = np.empty_like(phi)
    field[0] = np.asarray(tdata.data.phi(v), dtype=float)
    column = np.zeros(rows)
    ray = stride * np.arange(rows) < -d_axis
    ray[0] = False
    radii = np.atleast_1d(cmap.inverse_tortoise(0.5 * (grid.v0 - u[ray])))
    column[ray] = np.asarray(tdata.data.ingoing(radii), dtype=float)
    for n in range(1, rows):
        field[n, 1:] = field[n - 1, :-1] + 0.5 * H * (
            phi[n - 1, :-1] + phi[n, 1:]
        )
        field[n, 0] = column[n]
    field[inactive] = np.nan
    logger.info(
        "Transported phi^(%d) over a %d x %d snapshot", tdata.order, rows, cols
    )
    return field


def t_residual(field: np.ndarray, phi: np.ndarray, H: float) -> float:
    """max |(F(u+H, v+H) - F(u-H, v-H)) / 2H - phi(u, v)| at inner nodes."""
    derivative = (field[2:, 2:] - field[:-2, :-2]) / (2.0 * H)
    residual = np.abs(derivative - phi[1:-1, 1:-1])
    return float(np.nanmax(residual))
