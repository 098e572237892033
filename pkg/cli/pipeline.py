import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import django
import numpy as np
from django.conf import settings
from rest_framework import serializers

from asymptotics.fitting import (
    extrapolate_and_compare,
    scenario_consistency,
    t_ladder,
)
from asymptotics.models import Scenario, TailScenario
from asymptotics.serializers import TailFitSerializer
from cli.exceptions import ConfigError
from cli.output import write_json, write_series
from cli.serializers import flatten_errors
from evolution.models import ObserverCurve, ObserverKind
from evolution.runner import check_budget, evolve
from evolution.serializers import GridBlockSerializer
from geometry.coordinates import build_coordinate_map, model_table
from geometry.exceptions import LabError
from geometry.serializers import ModelBlockSerializer
from initial_data.serializers import DataBlockSerializer
from np_constants.closed_forms import estimate_I0, vanishes
from np_constants.reports import (
    build_report,
    chain_report,
    static_slice_remark,
)
from np_constants.serializers import NpReportSerializer
from time_integral.construction import iterate_time_integral

logger = logging.getLogger(__name__)

MODEL_TABLE_ROWS = 400
CONVERGENCE_BAND = (3.6, 4.4)
EXACT_FLOOR = 1e-11
TWO_ORACLE_RTOL = 1e-6
STATIC_SLICE_RTOL = 1e-8
HORIZON_SHIFT_TOLERANCE = 0.05
CHAIN_EXTENT = 100.0
CONVERGENCE_FIELDS = ("phi", "psi")


@dataclass(frozen=True, eq=False)
class Run:
    config: dict
    cmap: object
    data: object
    grid: object
    observers: tuple
    scenarios: tuple

    @property
    def model(self):
        return self.cmap.model

    @property
    def budget_cells(self) -> int:
        return self.config["budget_cells"] or settings.LAB["BUDGET_CELLS"]


def _build(serializer, attrs, path: str):
    try:
        return serializer.create(attrs)
    except serializers.ValidationError as exc:
        raise ConfigError(flatten_errors(exc.detail, path)) from exc


def prepare(config: dict, h: float | None = None) -> Run:
    """Objects for a validated config; ``h`` overrides the grid step.

    The cell budget is checked here, before anything is evolved.
    """
    model = _build(ModelBlockSerializer(), config["model"], "model")
    cmap = build_coordinate_map(model)
    context = {"cmap": cmap}
    if config["grid"] is not None:
        context["v_max"] = config["grid"]["v_max"]
    data = _build(
        DataBlockSerializer(context=context), config["data"], "data"
    )
    grid = None
    if config["grid"] is not None:
        grid_block = dict(config["grid"])
        if h is not None:
            grid_block["h"] = h
        grid = _build(
            GridBlockSerializer(
                context={"v0": 2.0 * model.reference_radius}
            ),
            grid_block,
            "grid",
        )
    run = Run(
        config=config,
        cmap=cmap,
        data=data,
        grid=grid,
        observers=tuple(ObserverCurve(**o) for o in config["observers"]),
        scenarios=tuple(Scenario(**s) for s in config["scenarios"]),
    )
    if grid is not None:
        check_budget(grid, run.budget_cells)
    logger.info(
        "Prepared %s on %s", getattr(data, "label", "mixed data"), model.kind
    )
    return run


def require_grid(config: dict) -> None:
    if config["grid"] is None:
        raise ConfigError(["grid: This field is required."])


def run_model(run: Run) -> dict:
    model = run.model
    radii = model.r_min + model.scale * np.geomspace(
        1e-6, 1e4, MODEL_TABLE_ROWS
    )
    return model_table(run.cmap, radii)


def required_order(run: Run) -> int:
    orders = [run.config["np_order"]]
    orders.extend(scenario.n for scenario in run.scenarios)
    return max(orders)


def run_constants(run: Run, order=None, construct=None):
    """NpReport, static-slice remark and the constructed chain.

    The chain is empty unless ``construct`` is set and I0 vanishes.
    """
    order = required_order(run) if order is None else order
    construct = run.config["construct"] if construct is None else construct
    I0 = estimate_I0(run.data)
    chain = []
    if construct and order >= 1 and vanishes(I0, run.data.scale):
        chain = iterate_time_integral(run.data, k=order)
        report = chain_report(run.data, chain)
    else:
        report = build_report(run.data, order=order)
    return report, static_slice_remark(run.data), chain


def chain_profiles(run: Run, chain) -> dict[int, dict]:
    """(v, phi^(k)) along the outgoing cone for every constructed level."""
    if run.grid is not None:
        h, v_max = run.grid.h, run.grid.v_max
    else:
        radius = run.model.reference_radius
        h, v_max = radius / 16.0, 2.0 * radius + CHAIN_EXTENT * radius
    profiles = {}
    for tdata in chain:
        v, phi = tdata.data.cone_samples(h, v_max)
        profiles[tdata.order] = {"v": v, "phi": phi}
    return profiles


def sensitivity_curve(run: Run) -> ObserverCurve | None:
    """The deeper horizon proxy, when the run observes a horizon tail."""
    if not any(
        s.kind == TailScenario.HORIZON_ZERO_NP for s in run.scenarios
    ):
        return None
    rstar = settings.LAB["HORIZON_SENSITIVITY_RSTAR"] * run.model.scale
    return ObserverCurve(ObserverKind.HORIZON_PROXY, rstar)


def with_sensitivity_proxy(run: Run) -> tuple:
    observers = list(run.observers)
    deeper = sensitivity_curve(run)
    if deeper is not None and deeper not in observers:
        observers.append(deeper)
    return tuple(observers)


def run_evolve(run: Run, observers=None):
    require_grid(run.config)
    return evolve(
        run.data,
        run.grid,
        observers=run.observers if observers is None else observers,
        snapshot_stride=run.config["grid"]["snapshot_stride"],
        budget_cells=run.budget_cells,
    )


def diagnostics_payload(result) -> dict:
    grid = result.grid
    return {
        "schema": settings.LAB["SCHEMA_VERSION"],
        "grid": {
            "h": grid.h,
            "u_max": grid.u_max,
            "v0": grid.v0,
            "v_max": grid.v_max,
        },
        "observers": sorted(result.series),
        "diagnostics": result.diagnostics.as_dict(),
    }


def run_tail(series: dict, report, scenarios) -> tuple[list, dict]:
    """Fits for every scenario; failed scenarios are listed, not raised."""
    fits, failures = [], []
    for scenario in scenarios:
        try:
            if scenario.curve not in series:
                raise ConfigError(
                    [f"scenarios: no series for curve '{scenario.curve}'"]
                )
            fit = extrapolate_and_compare(
                series[scenario.curve], report, scenario
            )
        except LabError as exc:
            logger.warning("Scenario %s failed: %s", scenario.id, exc)
            failures.append(_failure(scenario.id, exc))
            continue
        fits.append(fit)
    payload = {
        "schema": settings.LAB["SCHEMA_VERSION"],
        "fits": [TailFitSerializer(fit).data for fit in fits],
        "consistency": scenario_consistency(fits),
        "t_ladder": t_ladder(fits),
        "failures": failures,
    }
    return fits, payload


def _failure(step: str, exc: LabError) -> dict:
    return {"step": step, "module": exc.module, "error": str(exc)}


def _init_worker():
    django.setup()


def run_pool(function, tasks, threads: int | None = None) -> list:
    """``function`` over ``tasks`` in a process pool of ``threads``."""
    threads = threads or settings.LAB["THREADS"]
    if threads == 1 or len(tasks) < 2:
        return [function(task) for task in tasks]
    with ProcessPoolExecutor(
        max_workers=min(threads, len(tasks)), initializer=_init_worker
    ) as pool:
        return list(pool.map(function, tasks))


def _level_series(task) -> dict:
    config, h = task
    run = prepare(config, h=h)
    result = run_evolve(run)
    return {
        curve: {name: s.field(name) for name in ("tau", *CONVERGENCE_FIELDS)}
        for curve, s in result.series.items()
    }


def convergence_steps(h: float, levels: int, coarsen: bool) -> list[float]:
    """Steps coarsest first; ``coarsen`` keeps ``h`` as the finest."""
    if levels < 3:
        raise ConfigError(
            [f"levels: at least 3 levels are needed, got {levels}"]
        )
    if coarsen:
        return [h * 2 ** (levels - 1 - level) for level in range(levels)]
    return [h / 2**level for level in range(levels)]


def _triplets(values: list, steps: list[float]) -> list[dict]:
    scale = max(float(np.abs(values[-1]).max(initial=0.0)), 1e-300)
    entries = []
    for i in range(len(steps) - 2):
        top = float(np.abs(values[i] - values[i + 1]).max(initial=0.0))
        bottom = float(np.abs(values[i + 1] - values[i + 2]).max(initial=0.0))
        exact = bottom <= EXACT_FLOOR * scale
        entries.append(
            {
                "h": steps[i],
                "factor": None if exact else top / bottom,
                "exact": exact and top <= EXACT_FLOOR * scale,
            }
        )
    return entries


def self_convergence(levels: list[dict], steps: list[float]) -> dict:
    """|f_h - f_h/2| / |f_h/2 - f_h/4| on the rows of the coarsest level."""
    factors = {}
    for curve in sorted(levels[0]):
        coarse = levels[0][curve]
        tau_end = min(level[curve]["tau"][-1] for level in levels)
        tau = coarse["tau"][coarse["tau"] <= tau_end]
        factors[curve] = {
            name: _triplets(
                [
                    np.interp(tau, level[curve]["tau"], level[curve][name])
                    for level in levels
                ],
                steps,
            )
            for name in CONVERGENCE_FIELDS
        }
    return factors


def convergence_passes(factors: dict) -> bool:
    low, high = CONVERGENCE_BAND
    for fields in factors.values():
        for entries in fields.values():
            # the finest triple carries the verdict
            entry = entries[-1]
            if entry["exact"]:
                continue
            if entry["factor"] is None or not low <= entry["factor"] <= high:
                return False
    return True


def run_convergence(
    config: dict,
    levels: int = 3,
    threads: int | None = None,
    coarsen: bool = False,
) -> dict:
    require_grid(config)
    steps = convergence_steps(config["grid"]["h"], levels, coarsen)
    prepare(config, h=steps[-1])
    series = run_pool(
        _level_series, [(config, h) for h in steps], threads=threads
    )
    factors = self_convergence(series, steps)
    logger.info("Self-convergence over h = %s done", steps)
    return {
        "schema": settings.LAB["SCHEMA_VERSION"],
        "steps": steps,
        "factors": factors,
        "passes": convergence_passes(factors),
    }


def two_oracle_check(report) -> bool:
    scale = abs(report.C0.value) if report.C0 is not None else 0.0
    for entry in report.inverted:
        if entry.constructed is None:
            continue
        closed, built = entry.closed_form.value, entry.constructed.value
        bound = TWO_ORACLE_RTOL * max(abs(closed), scale, 1.0)
        if abs(built - closed) > bound:
            return False
    return True


def horizon_sensitivity(run: Run, series, report, fits) -> dict | None:
    """Re-fit the horizon tail at the deeper proxy and record the shift."""
    base = next(
        (
            fit
            for fit in fits
            if fit.scenario.kind == TailScenario.HORIZON_ZERO_NP
            and fit.index is not None
        ),
        None,
    )
    deeper = sensitivity_curve(run)
    if base is None or deeper is None or deeper.id not in series:
        return None
    scenario = Scenario(TailScenario.HORIZON_ZERO_NP, deeper.id)
    fit = extrapolate_and_compare(series[deeper.id], report, scenario)
    shift = float(abs(fit.amplitude - base.amplitude) / abs(base.amplitude))
    return {
        "curve": deeper.id,
        "amplitude": fit.amplitude,
        "reference_amplitude": base.amplitude,
        "shift": shift,
        "passes": bool(shift < HORIZON_SHIFT_TOLERANCE),
    }


def run_verify(config: dict, threads: int | None = None):
    """constants, construction, evolution, tails and convergence in turn.

    Returns the verification payload, the EvolutionResult (None if the run
    failed) and the step timings. Module errors are recorded as failures
    and stop the steps that depend on them.
    """
    timings, failures, checks = {}, [], {}
    payload = {"schema": settings.LAB["SCHEMA_VERSION"]}
    require_grid(config)
    result = None

    started = time.perf_counter()
    run = prepare(config)
    try:
        report, remark, _ = run_constants(run, construct=True)
    except LabError as exc:
        failures.append(_failure("constants", exc))
        report = None
    else:
        payload["npreport"] = NpReportSerializer(report).data
        payload["static_slice"] = remark
        checks["two_oracle"] = two_oracle_check(report)
        if remark is not None:
            bound = STATIC_SLICE_RTOL * max(abs(remark["static_slice"]), 1.0)
            checks["static_slice"] = bool(remark["difference"] <= bound)
    timings["constants"] = time.perf_counter() - started

    started = time.perf_counter()
    try:
        result = run_evolve(run, with_sensitivity_proxy(run))
    except LabError as exc:
        failures.append(_failure("evolve", exc))
    else:
        payload["diagnostics"] = diagnostics_payload(result)
        drift = result.diagnostics.np_drift
        if drift is not None:
            tolerance = config["np_drift_tolerance"]
            checks["np_drift"] = bool(drift <= tolerance)
    timings["evolve"] = time.perf_counter() - started

    if result is not None and report is not None:
        started = time.perf_counter()
        fits, tail = run_tail(result.series, report, run.scenarios)
        failures.extend(tail["failures"])
        payload["tail"] = tail
        checks["tails"] = all(fit.passes() for fit in fits)
        checks["consistency"] = all(
            c["consistent"] for c in tail["consistency"].values()
        )
        checks["t_ladder"] = all(rung["ok"] for rung in tail["t_ladder"])
        try:
            sensitivity = horizon_sensitivity(
                run, result.series, report, fits
            )
        except LabError as exc:
            failures.append(_failure("horizon_sensitivity", exc))
            sensitivity = None
        payload["horizon_sensitivity"] = sensitivity
        if sensitivity is not None:
            checks["horizon_sensitivity"] = sensitivity["passes"]
        timings["tail"] = time.perf_counter() - started

    levels = config["convergence_levels"]
    if levels:
        started = time.perf_counter()
        try:
            convergence = run_convergence(
                config, levels, threads=threads, coarsen=True
            )
        except LabError as exc:
            failures.append(_failure("convergence", exc))
        else:
            payload["convergence"] = convergence
            checks["convergence"] = convergence["passes"]
        timings["convergence"] = time.perf_counter() - started

    payload["checks"] = checks
    payload["failures"] = failures
    payload["passed"] = not failures and all(checks.values())
    logger.info(
        "Verification %s", "passed" if payload["passed"] else "failed"
    )
    return payload, result, timings


def write_evolution(out, result) -> list:
    """One CSV per observer plus diagnostics.json."""
    paths = [
        write_series(out, series)
        for _, series in sorted(result.series.items())
    ]
    paths.append(
        write_json(
            Path(out) / "diagnostics.json",
            diagnostics_payload(result),
            schema="diagnostics",
        )
    )
    return paths
