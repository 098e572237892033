import logging

import numpy as np
from django.conf import settings
from numpy.polynomial import polynomial as P
from scipy.interpolate import PchipInterpolator

from asymptotics.exceptions import (
    FieldUnavailable,
    SignChangeInWindow,
    WindowTooShort,
)
from asymptotics.models import LocalIndex, Scenario, TailFit, TailScenario
from evolution.models import ObserverKind, ObserverSeries
from np_constants.models import NpReport

logger = logging.getLogger(__name__)

POWER_LAW_DRIFT = 0.5
MIN_FIT_POINTS = 4
HALF_DECADE = np.sqrt(10.0)

CONSISTENCY = {
    "interior/scri": (
        TailScenario.INTERIOR_ZERO_NP,
        TailScenario.SCRI_ZERO_NP,
        4.0,
    ),
    "horizon/interior": (
        TailScenario.HORIZON_ZERO_NP,
        TailScenario.INTERIOR_ZERO_NP,
        1.0,
    ),
}


def local_power_index(tau, y, samples: int | None = None) -> LocalIndex:
    """Local decay rate p = -d ln|y| / d ln tau.

    ln|y| is resampled on a uniform grid in ln tau with a monotone cubic
    and differentiated with centred differences. The series is flagged
    as a power law when p settles over the second half of the range.
    """
    tau = np.asarray(tau, dtype=float)
    y = np.asarray(y, dtype=float)
    if tau.size < 3:
        raise WindowTooShort(f"{tau.size} samples cannot fix a slope")
    if np.any(tau <= 0) or np.any(np.diff(tau) <= 0):
        raise ValueError("tau must be positive and increasing")
    sign = np.sign(y)
    if np.any(sign == 0) or np.any(sign != sign[0]):
        raise SignChangeInWindow(
            f"the series changes sign in [{tau[0]:g}, {tau[-1]:g}]"
        )

    samples = samples or settings.LAB["INDEX_SAMPLES"]
    log_tau = np.log(tau)
    grid = np.linspace(log_tau[0], log_tau[-1], samples)
    log_y = PchipInterpolator(log_tau, np.log(np.abs(y)))(grid)
    p = -np.gradient(log_y, grid, edge_order=2)

    mid = samples // 2
    drift = abs(p[-1] - p[mid])
    power_law = bool(
        np.isfinite(p).all()
        and drift <= POWER_LAW_DRIFT * max(1.0, abs(p[mid]))
    )
    return LocalIndex(tau=np.exp(grid), p=p, power_law=power_law)


def limit_index(index: LocalIndex) -> tuple[float, float]:
    """p_inf from a linear fit of p against 1/tau, with a quadratic check."""
    x = index.tau[0] / index.tau
    linear = P.polyfit(x, index.p, 1)
    quadratic = P.polyfit(x, index.p, 2)
    return float(linear[0]), float(abs(linear[0] - quadratic[0]))


def field_values(series: ObserverSeries, name: str, k: int) -> np.ndarray:
    """T^k of ``psi``, ``rpsi`` or ``v2dvphi`` along the curve.

    Orders the observer does not carry are taken by second-order
    differences in the curve's clock, which moves along T on every curve
    except gamma_alpha.
    """
    if name == "v2dvphi":
        if k:
            raise FieldUnavailable("v^2 d_v phi takes no T-derivatives")
        return series.v2dvphi
    if k and series.curve.kind == ObserverKind.GAMMA_ALPHA:
        raise FieldUnavailable(
            f"T is not tangent to '{series.curve.id}'; T^{k} unavailable"
        )
    columns = (series.psi, series.Tpsi, series.T2psi)
    if name == "rpsi":
        factor = np.where(np.isfinite(series.r), series.r, 1.0)
        columns = tuple(factor * column for column in columns)
    elif name != "psi":
        raise FieldUnavailable(f"unknown tail field '{name}'")

    start = min(k, len(columns) - 1)
    y = columns[start]
    for _ in range(k - start):
        y = np.gradient(y, series.tau, edge_order=2)
    if not np.isfinite(y).all():
        raise FieldUnavailable(
            f"T^{k} {name} is not finite on '{series.curve.id}'"
        )
    return y


def _noise_floor(y: np.ndarray) -> float:
    return 64.0 * np.finfo(float).eps * float(np.abs(y).max(initial=0.0))


def select_window(tau, y, window=None, noise: float | None = None):
    """Indices of the fit window.

    The window opens after the last sign change inside ``window`` and
    closes where |y| first falls to the noise floor.
    """
    lab = settings.LAB
    tau = np.asarray(tau, dtype=float)
    y = np.asarray(y, dtype=float)
    if window is None:
        window = (0.0, lab["FIT_WINDOW_FRACTION"] * tau[-1])
    if noise is None:
        noise = _noise_floor(y)
    idx = np.flatnonzero((tau > 0) & (tau >= window[0]) & (tau <= window[1]))
    if idx.size < MIN_FIT_POINTS:
        raise WindowTooShort(f"window {window} holds {idx.size} samples")

    sign = np.sign(y[idx])
    changes = np.flatnonzero(sign[1:] != sign[:-1])
    if changes.size:
        idx = idx[changes[-1] + 1 :]
    quiet = np.flatnonzero(
        np.abs(y[idx]) <= lab["SIGNAL_NOISE_FACTOR"] * noise
    )
    if quiet.size:
        idx = idx[: quiet[0]]
    if idx.size < MIN_FIT_POINTS:
        raise WindowTooShort("no decaying signal above the noise floor")
    decades = np.log10(tau[idx[-1]] / tau[idx[0]])
    if decades < lab["MIN_WINDOW_DECADES"]:
        raise WindowTooShort(
            f"window [{tau[idx[0]]:g}, {tau[idx[-1]]:g}] spans "
            f"{decades:.2f} decades"
        )
    return idx


def fit_amplitude(tau, ratio) -> tuple[float, float]:
    """lim of ``ratio`` from A + B/tau over the last half-decade."""
    tau = np.asarray(tau, dtype=float)
    ratio = np.asarray(ratio, dtype=float)
    late = tau >= tau[-1] / HALF_DECADE
    if late.sum() < MIN_FIT_POINTS:
        late = np.arange(tau.size) >= tau.size - MIN_FIT_POINTS
    x = tau[late][-1] / tau[late]
    linear = P.polyfit(x, ratio[late], 1)
    quadratic = P.polyfit(x, ratio[late], 2)
    return float(linear[0]), float(abs(linear[0] - quadratic[0]))


def _deviation(amplitude: float, target: float) -> float:
    if target == 0:
        return abs(amplitude)
    return abs(amplitude - target) / abs(target)


def _null_fit(series, scenario, y, window, constant, reason) -> TailFit:
    tau = series.tau
    if window is None:
        window = (0.0, settings.LAB["FIT_WINDOW_FRACTION"] * tau[-1])
    start = max(window[0], 0.5 * window[1])
    inside = (tau >= start) & (tau <= window[1])
    amplitude = float(np.abs(y[inside]).max(initial=0.0))
    logger.info(
        "No tail on %s for %s; max |%s| = %.3g",
        series.curve.id,
        scenario.kind,
        scenario.field,
        amplitude,
    )
    return TailFit(
        scenario=scenario,
        curve=series.curve.id,
        field=scenario.field,
        window=(float(start), float(window[1])),
        index=None,
        p_inf=None,
        p_inf_error=None,
        amplitude=amplitude,
        amplitude_error=0.0,
        constant=constant,
        target=0.0,
        deviation=amplitude,
        notes=[f"null comparison: {reason}"],
    )


def extrapolate_and_compare(
    series: ObserverSeries,
    np_report: NpReport,
    scenario: Scenario,
    window=None,
    noise: float | None = None,
) -> TailFit:
    """Fit the tail of T^k of the scenario's field and compare it.

    p_inf extrapolates the local index linearly in 1/tau over the window;
    the amplitude is the limit of y / shape over the last half-decade.
    Comparisons are on signed amplitudes. When the predicted amplitude
    vanishes and the field never settles into a decaying signal, the fit
    reports the largest |y| over the late half of the window instead.
    """
    constant = np_report.constant(scenario.n)
    target = scenario.coefficient * constant
    window = window or scenario.window
    y = field_values(series, scenario.base_field, scenario.k)
    try:
        idx = select_window(series.tau, y, window, noise)
    except WindowTooShort as exc:
        if target != 0:
            raise
        return _null_fit(series, scenario, y, window, constant, str(exc))

    tau = series.tau[idx]
    index = local_power_index(tau, y[idx])
    p_inf, p_error = limit_index(index)
    shape = scenario.shape(tau, series.u[idx], series.v[idx])
    amplitude, amplitude_error = fit_amplitude(tau, y[idx] / shape)
    notes = []
    if not index.power_law:
        notes.append("local index does not settle; not a power law")
    fit = TailFit(
        scenario=scenario,
        curve=series.curve.id,
        field=scenario.field,
        window=(float(tau[0]), float(tau[-1])),
        index=index,
        p_inf=p_inf,
        p_inf_error=p_error,
        amplitude=amplitude,
        amplitude_error=amplitude_error,
        constant=constant,
        target=target,
        deviation=_deviation(amplitude, target),
        notes=notes,
    )
    logger.info(
        "Fitted %s on %s: p = %.4f +- %.2g, A = %.6g (target %.6g)",
        scenario.field,
        fit.curve,
        p_inf,
        p_error,
        amplitude,
        target,
    )
    return fit


def scenario_consistency(fits, rtol: float = 0.15) -> dict:
    """Amplitude ratios that a single I0^(1) fixes across observers."""
    by_kind = {}
    for fit in fits:
        if fit.scenario.k == 0 and fit.index is not None:
            by_kind.setdefault(fit.scenario.kind, fit)
    checks = {}
    for name, (top, bottom, expected) in CONSISTENCY.items():
        a, b = by_kind.get(top), by_kind.get(bottom)
        if a is None or b is None or a.amplitude == 0 or b.amplitude == 0:
            continue
        ratio = a.amplitude / b.amplitude
        error = abs(ratio) * (
            a.amplitude_error / abs(a.amplitude)
            + b.amplitude_error / abs(b.amplitude)
        )
        bound = error + rtol * expected
        checks[name] = {
            "ratio": ratio,
            "expected": expected,
            "error": error,
            "consistent": bool(abs(ratio - expected) <= bound),
        }
    return checks


def t_ladder(fits, tolerance: float = 0.2) -> list[dict]:
    """p_inf[T^k f] - p_inf[f] against k for each scenario and curve."""
    base = {}
    for fit in fits:
        if fit.scenario.k == 0 and fit.p_inf is not None:
            base[(fit.scenario.kind, fit.curve)] = fit
    rungs = []
    for fit in fits:
        ground = base.get((fit.scenario.kind, fit.curve))
        if fit.scenario.k == 0 or ground is None or fit.p_inf is None:
            continue
        step = fit.p_inf - ground.p_inf
        rungs.append(
            {
                "scenario": fit.scenario.kind,
                "curve": fit.curve,
                "k": fit.scenario.k,
                "step": step,
                "ok": bool(abs(step - fit.scenario.k) <= tolerance),
            }
        )
    return rungs
