import warnings

import numpy as np
from django.test import SimpleTestCase
from scipy import integrate, optimize
from scipy.integrate import IntegrationWarning

from geometry.coordinates import (
    build_coordinate_map,
    inverse_tortoise,
    model_table,
    tortoise,
)
from geometry.exceptions import BelowHorizon, TableDomainExceeded
from geometry.metrics import HaywardMetric
from geometry.models import SpacetimeKind, make_model, potential_offset


def sample_map(kind=SpacetimeKind.SCHWARZSCHILD, **kwargs):
    if kind == SpacetimeKind.SCHWARZSCHILD:
        kwargs.setdefault("M", 1.0)
    return build_coordinate_map(make_model(kind, **kwargs))


def schwarzschild_rstar(r, M=1.0, R=10.0):
    return (
        r
        + 2 * M * np.log(r / (2 * M) - 1)
        - 2 * M * np.log(R / (2 * M) - 1)
    )


def schwarzschild_rstar_of_offset(x, M=1.0, R=10.0):
    """The closed form written in x = r - 2M, free of cancellation."""
    return (
        2 * M
        + x
        + 2 * M * np.log(x / (2 * M))
        - 2 * M * np.log(R / (2 * M) - 1)
    )


def reissner_nordstrom_rstar_of_offset(model, x):
    r_plus, r_minus = model.r_plus, model.r_minus
    gap = r_plus - r_minus

    def primitive(offset):
        return (
            r_plus
            + offset
            + r_plus**2 / gap * np.log(offset)
            - r_minus**2 / gap * np.log(offset + gap)
        )

    R = model.reference_radius
    return R + primitive(x) - primitive(R - r_plus)


def quadrature_rstar(model, r):
    R = model.reference_radius
    value, _ = integrate.quad(
        lambda s: 1.0 / float(model.D(s)),
        R,
        r,
        epsabs=0.0,
        epsrel=1e-13,
        limit=400,
    )
    return R + value


class TestTortoise(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.schwarzschild = sample_map()
        cls.minkowski = sample_map(SpacetimeKind.MINKOWSKI)
        cls.reissner_nordstrom = sample_map(
            SpacetimeKind.REISSNER_NORDSTROM, M=1.0, e=0.5
        )

    def test_normalisation(self):
        for cmap in (self.schwarzschild, self.minkowski):
            R = cmap.model.reference_radius
            self.assertEqual(tortoise(cmap, R), R)
            self.assertEqual(inverse_tortoise(cmap, R), R)

    def test_minkowski_identity(self):
        r = np.array([0.0, 0.5, 3.0, 7.0, 123.4, 5e4])

        np.testing.assert_allclose(
            tortoise(self.minkowski, r), r, rtol=0, atol=1e-12 * r.max()
        )
        self.assertAlmostEqual(
            inverse_tortoise(self.minkowski, 7.0), 7.0, places=12
        )

    def test_schwarzschild_point_against_quadrature(self):
        value = tortoise(self.schwarzschild, 4.0)

        self.assertAlmostEqual(
            value, quadrature_rstar(self.schwarzschild.model, 4.0), places=10
        )
        self.assertAlmostEqual(value, schwarzschild_rstar(4.0), places=11)

    def test_schwarzschild_against_closed_form(self):
        rng = np.random.default_rng(7)
        r = 2.0 + np.exp(rng.uniform(np.log(1e-7), np.log(1e4), 10_000))
        # r - 2 is exact for r in [2, 4]
        expected = schwarzschild_rstar_of_offset(r - 2.0)

        np.testing.assert_array_less(
            np.abs(tortoise(self.schwarzschild, r) - expected),
            1e-10 * np.maximum(np.abs(expected), 1.0),
        )

    def test_reissner_nordstrom_near_horizon(self):
        model = self.reissner_nordstrom.model
        x = np.geomspace(1e-7, 1e-1, 200)
        r = model.r_plus + x
        expected = reissner_nordstrom_rstar_of_offset(model, r - model.r_plus)

        np.testing.assert_array_less(
            np.abs(tortoise(self.reissner_nordstrom, r) - expected),
            1e-10 * np.maximum(np.abs(expected), 1.0),
        )

    def test_table_builds_without_quadrature_warnings(self):
        for kind, kwargs in (
            (SpacetimeKind.SCHWARZSCHILD, {}),
            (SpacetimeKind.REISSNER_NORDSTROM, {"M": 1.0, "e": 0.5}),
        ):
            with self.subTest(kind=kind):
                with warnings.catch_warnings():
                    warnings.simplefilter("error", IntegrationWarning)
                    sample_map(kind, **kwargs)

    def test_reissner_nordstrom_against_quadrature(self):
        model = self.reissner_nordstrom.model
        r = model.r_plus + np.geomspace(1e-2, 2e3, 60)
        expected = np.array([quadrature_rstar(model, s) for s in r])

        np.testing.assert_array_less(
            np.abs(tortoise(self.reissner_nordstrom, r) - expected),
            1e-10 * np.maximum(np.abs(expected), 1.0),
        )

    def test_monotone_and_divergent_at_horizon(self):
        r = 2.0 + np.geomspace(1e-9, 1e5, 400)
        rstar = tortoise(self.schwarzschild, r)

        self.assertTrue(np.all(np.diff(rstar) > 0))
        self.assertLess(rstar[0], -30.0)

    def test_below_horizon(self):
        with self.assertRaises(BelowHorizon):
            tortoise(self.schwarzschild, 2.0)
        with self.assertRaises(BelowHorizon):
            tortoise(self.schwarzschild, np.array([3.0, 1.0]))


class TestInverseTortoise(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.maps = [
            sample_map(),
            sample_map(SpacetimeKind.MINKOWSKI),
            sample_map(SpacetimeKind.REISSNER_NORDSTROM, M=1.0, e=0.5),
            sample_map(
                SpacetimeKind.CUSTOM, custom_D=HaywardMetric(1.0, 1.5)
            ),
        ]

    def test_round_trip(self):
        rng = np.random.default_rng(11)
        for cmap in self.maps:
            model = cmap.model
            r = model.r_min + np.exp(
                rng.uniform(np.log(1e-3), np.log(1e5), 10_000)
            )
            back = inverse_tortoise(cmap, tortoise(cmap, r))

            np.testing.assert_array_less(
                np.abs(back - r), 1e-11 * np.maximum(r, model.scale)
            )

    def test_rstar_residual_away_from_horizon(self):
        cmap = self.maps[0]
        rstar = np.linspace(-10.0, 5e4, 2000)
        r = inverse_tortoise(cmap, rstar)

        np.testing.assert_array_less(
            np.abs(tortoise(cmap, r) - rstar),
            1e-10 * np.maximum(np.abs(rstar), 1.0),
        )

    def test_near_horizon_branch(self):
        cmap = self.maps[0]
        r = inverse_tortoise(cmap, -50.0)
        offset = cmap.horizon_offset(-50.0)
        oracle = np.exp(
            optimize.brentq(
                lambda y: 2.0 + np.exp(y) + 2 * y - 2 * np.log(2.0)
                - 2 * np.log(4.0) + 50.0,
                -60.0,
                0.0,
                xtol=1e-15,
            )
        )

        self.assertGreater(r, 2.0)
        self.assertLess(r - 2.0, 1e-8)
        self.assertAlmostEqual(offset / oracle, 1.0, places=9)

    def test_deep_horizon_clamps_above_r_plus(self):
        cmap = self.maps[0]
        r = inverse_tortoise(cmap, np.array([-200.0, -2000.0]))

        self.assertTrue(np.all(r > 2.0))
        self.assertGreater(cmap.horizon_offset(-200.0), 0.0)

    def test_potential_decays_toward_horizon(self):
        cmap = self.maps[0]
        x = cmap.horizon_offset(-200.0)

        self.assertLess(abs(float(potential_offset(cmap.model, 0, x))), 1e-12)
        self.assertLess(abs(float(potential_offset(cmap.model, 2, x))), 1e-12)

    def test_case_two_below_centre(self):
        with self.assertRaises(TableDomainExceeded):
            inverse_tortoise(self.maps[1], -1.0)

    def test_above_table(self):
        with self.assertRaises(TableDomainExceeded):
            inverse_tortoise(self.maps[0], 1e9)


class TestModelTable(SimpleTestCase):
    def test_columns(self):
        cmap = sample_map()
        table = model_table(cmap, [4.0, 10.0])

        self.assertEqual(set(table), {"r", "D", "dD", "rstar"})
        self.assertEqual(table["D"][0], 0.5)
        self.assertEqual(table["rstar"][1], 10.0)
