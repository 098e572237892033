import numpy as np
from django.test import SimpleTestCase, tag

from cli.exceptions import ConfigError
from cli.pipeline import (
    convergence_passes,
    convergence_steps,
    prepare,
    run_constants,
    run_convergence,
    run_evolve,
    run_model,
    run_tail,
    run_verify,
    self_convergence,
    sensitivity_curve,
    with_sensitivity_proxy,
)
from cli.serializers import schema_errors, validate_config
from evolution.exceptions import BudgetExceeded
from initial_data.exceptions import SupportOutsideGrid


def sample_config(**kwargs):
    config = {
        "schema": 1,
        "model": {"kind": "minkowski"},
        "data": {
            "family": "bump",
            "v_center": 30.0,
            "width": 4.0,
            "amplitude": 1.0,
        },
        "grid": {"h": 0.5, "u_max": 160.0, "v_max": 200.0},
        "observers": [
            {"kind": "constant_r", "value": 10.0},
            {"kind": "scri_proxy"},
        ],
        "scenarios": [
            {"kind": "interior_zeroNP", "curve": "r=10"},
            {"kind": "scri_zeroNP", "curve": "scri"},
        ],
    }
    config.update(kwargs)
    return validate_config(config)


def sample_schwarzschild_config(**kwargs):
    kwargs.setdefault("model", {"kind": "schwarzschild", "M": 1.0})
    kwargs.setdefault(
        "data",
        {
            "family": "bump",
            "v_center": 40.0,
            "width": 4.0,
            "amplitude": 1.0,
        },
    )
    kwargs.setdefault("grid", {"h": 0.5, "u_max": 100.0, "v_max": 200.0})
    return sample_config(**kwargs)


def sample_levels(steps, fine_error):
    """Series with an error of fine_error(h) on top of a smooth field."""
    levels = []
    for h in steps:
        tau = np.arange(0.0, 10.0 + h / 2, h)
        psi = np.sin(tau) + fine_error(h) * np.cos(tau)
        levels.append({"r=10": {"tau": tau, "phi": 10 * psi, "psi": psi}})
    return levels


class TestPrepare(SimpleTestCase):
    def test_grid_starts_on_the_data_cone(self):
        run = prepare(sample_config())

        self.assertEqual(run.grid.v0, 20.0)
        self.assertEqual(run.grid.h, 0.5)
        self.assertEqual([o.id for o in run.observers], ["r=10", "scri"])
        self.assertEqual(run.scenarios[1].field, "rpsi")

    def test_step_override(self):
        self.assertEqual(prepare(sample_config(), h=0.25).grid.h, 0.25)

    def test_budget_checked_before_running(self):
        with self.assertRaises(BudgetExceeded):
            prepare(sample_config(budget_cells=100))

    def test_misaligned_grid_names_the_step(self):
        grid = {"h": 0.3, "u_max": 40.0, "v_max": 80.0}

        with self.assertRaises(ConfigError) as context:
            prepare(sample_config(grid=grid))
        self.assertTrue(context.exception.messages[0].startswith("grid.h: "))

    def test_support_must_fit_the_grid(self):
        data = {
            "family": "bump",
            "v_center": 195.0,
            "width": 10.0,
            "amplitude": 1.0,
        }

        with self.assertRaises(SupportOutsideGrid):
            prepare(sample_config(data=data))

    def test_failed_tuning_names_the_block(self):
        bump = {
            "family": "bump",
            "v_center": 30.0,
            "width": 4.0,
            "amplitude": 1.0,
        }
        data = {
            "family": "superpose",
            "first": bump,
            "second": dict(bump, v_center=60.0),
            "tune": "I0_1",
        }

        with self.assertRaises(ConfigError) as context:
            prepare(sample_config(data=data))
        self.assertTrue(
            context.exception.messages[0].startswith("data.tune: ")
        )

    def test_evolution_needs_a_grid(self):
        run = prepare(sample_config(grid=None, observers=[], scenarios=[]))

        self.assertIsNone(run.grid)
        with self.assertRaises(ConfigError):
            run_evolve(run)

    def test_model_table(self):
        table = run_model(prepare(sample_schwarzschild_config()))

        self.assertEqual(set(table), {"r", "D", "dD", "rstar"})
        self.assertTrue(np.all(table["r"] > 2.0))
        self.assertTrue(np.all(np.diff(table["rstar"]) > 0))


class TestConstants(SimpleTestCase):
    def test_order_follows_the_scenarios(self):
        data = {
            "family": "superpose",
            "first": {
                "family": "bump",
                "v_center": 30.0,
                "width": 4.0,
                "amplitude": 1.0,
            },
            "second": {
                "family": "bump",
                "v_center": 60.0,
                "width": 8.0,
                "amplitude": 1.0,
            },
            "tune": "I0_1",
        }
        scenarios = [{"kind": "higher_order", "curve": "r=10", "order": 2}]
        run = prepare(
            sample_schwarzschild_config(
                data=data, np_order=1, scenarios=scenarios
            )
        )
        report, remark, chain = run_constants(run, construct=True)

        self.assertEqual([entry.k for entry in report.inverted], [1, 2])
        self.assertEqual([tdata.order for tdata in chain], [1, 2])
        self.assertIsNone(remark)

    def test_no_chain_without_construct(self):
        run = prepare(sample_config())
        report, _, chain = run_constants(run)

        self.assertEqual(chain, [])
        self.assertEqual(report.inverted[0].k, 1)
        self.assertAlmostEqual(report.inverted[0].value, 0.0, places=12)


class TestHorizonSensitivity(SimpleTestCase):
    def test_deeper_proxy_added_for_horizon_tails(self):
        observers = [{"kind": "horizon_proxy"}]
        scenarios = [{"kind": "horizon_zeroNP", "curve": "horizon"}]
        run = prepare(
            sample_schwarzschild_config(
                observers=observers, scenarios=scenarios
            )
        )

        self.assertEqual(sensitivity_curve(run).id, "horizon=-75")
        self.assertEqual(
            [o.id for o in with_sensitivity_proxy(run)],
            ["horizon", "horizon=-75"],
        )

    def test_no_proxy_without_horizon_tails(self):
        run = prepare(sample_schwarzschild_config())

        self.assertIsNone(sensitivity_curve(run))
        self.assertEqual(with_sensitivity_proxy(run), run.observers)


class TestTail(SimpleTestCase):
    def test_huygens_run_has_no_tail(self):
        run = prepare(sample_config())
        report, _, _ = run_constants(run)
        result = run_evolve(run)
        fits, payload = run_tail(result.series, report, run.scenarios)

        self.assertEqual(len(fits), 2)
        for fit in fits:
            self.assertLess(abs(fit.amplitude), 1e-10)
            self.assertTrue(fit.passes())
        self.assertEqual(payload["failures"], [])
        self.assertEqual(schema_errors(payload, "tailfit"), [])

    def test_missing_series_is_a_failure(self):
        run = prepare(sample_config())
        report, _, _ = run_constants(run)
        fits, payload = run_tail({}, report, run.scenarios)

        self.assertEqual(fits, [])
        self.assertEqual(
            [failure["module"] for failure in payload["failures"]],
            ["cli", "cli"],
        )


class TestSelfConvergence(SimpleTestCase):
    def test_steps(self):
        self.assertEqual(
            convergence_steps(0.5, 3, coarsen=False), [0.5, 0.25, 0.125]
        )
        self.assertEqual(
            convergence_steps(0.125, 3, coarsen=True), [0.5, 0.25, 0.125]
        )
        with self.assertRaises(ConfigError):
            convergence_steps(0.5, 2, coarsen=False)

    def test_second_order_error_gives_four(self):
        steps = [0.5, 0.25, 0.125, 0.0625]
        factors = self_convergence(
            sample_levels(steps, lambda h: h**2), steps
        )
        entries = factors["r=10"]["psi"]

        self.assertEqual(len(entries), 2)
        for entry in entries:
            self.assertAlmostEqual(entry["factor"], 4.0, places=8)
            self.assertFalse(entry["exact"])
        self.assertTrue(convergence_passes(factors))

    def test_first_order_error_fails(self):
        steps = [0.5, 0.25, 0.125]
        factors = self_convergence(sample_levels(steps, lambda h: h), steps)

        self.assertAlmostEqual(factors["r=10"]["phi"][0]["factor"], 2.0)
        self.assertFalse(convergence_passes(factors))

    def test_identical_levels_are_exact(self):
        steps = [0.5, 0.25, 0.125]
        factors = self_convergence(sample_levels(steps, lambda h: 0.0), steps)
        entry = factors["r=10"]["psi"][0]

        self.assertTrue(entry["exact"])
        self.assertIsNone(entry["factor"])
        self.assertTrue(convergence_passes(factors))

    def test_minkowski_scheme_is_exact(self):
        config = sample_config(scenarios=[])
        report = run_convergence(config, 3, threads=1)

        self.assertEqual(report["steps"], [0.5, 0.25, 0.125])
        for fields in report["factors"].values():
            for entries in fields.values():
                self.assertTrue(entries[0]["exact"])
        self.assertTrue(report["passes"])
        self.assertEqual(schema_errors(report, "convergence"), [])


class TestNpDriftCheck(SimpleTestCase):
    def test_tail_run_checks_the_drift(self):
        config = sample_config(
            data={"family": "tail", "I0": 1.0}, scenarios=[]
        )
        payload, result, _ = run_verify(config, threads=1)

        self.assertLess(result.diagnostics.np_drift, 1e-8)
        self.assertTrue(payload["checks"]["np_drift"])

    def test_tolerance_comes_from_the_config(self):
        config = sample_config(
            model={"kind": "schwarzschild", "M": 1.0},
            data={"family": "tail", "I0": 1.0},
            grid={"h": 0.5, "u_max": 100.0, "v_max": 220.0},
            scenarios=[],
            np_drift_tolerance=0.0,
        )
        payload, result, _ = run_verify(config, threads=1)

        self.assertGreater(result.diagnostics.np_drift, 0.0)
        self.assertFalse(payload["checks"]["np_drift"])
        self.assertFalse(payload["passed"])


@tag("slow")
class TestSchwarzschildConvergence(SimpleTestCase):
    def test_three_levels_in_a_pool(self):
        config = sample_schwarzschild_config(
            observers=[{"kind": "constant_r", "value": 10.0}], scenarios=[]
        )
        report = run_convergence(config, 3, threads=2)
        factor = report["factors"]["r=10"]["phi"][0]["factor"]

        self.assertTrue(3.6 <= factor <= 4.4, factor)
        self.assertTrue(report["passes"])


@tag("slow")
class TestVerify(SimpleTestCase):
    def test_huygens_run_passes(self):
        config = sample_config(construct=True, convergence_levels=3)
        payload, result, timings = run_verify(config, threads=1)

        self.assertTrue(payload["passed"], payload["failures"])
        self.assertEqual(
            set(payload["checks"]),
            {"two_oracle", "tails", "consistency", "t_ladder", "convergence"},
        )
        self.assertIsNotNone(result)
        self.assertIn("convergence", timings)
        self.assertEqual(schema_errors(payload, "verify"), [])

    def test_failures_are_tagged_by_module(self):
        observers = [{"kind": "gamma_alpha", "value": 0.8}]
        scenarios = [
            {"kind": "interior_nonzeroNP", "curve": "gamma=0.8", "k": 1}
        ]
        config = sample_config(observers=observers, scenarios=scenarios)
        payload, _, _ = run_verify(config, threads=1)

        self.assertFalse(payload["passed"])
        self.assertEqual(payload["failures"][0]["module"], "asymptotics")
