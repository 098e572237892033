import numpy as np
from django.test import SimpleTestCase

from geometry.coordinates import build_coordinate_map
from geometry.models import SpacetimeKind, make_model
from initial_data.families import (
    bump_data,
    make_foliation,
    mixed_data,
    superpose,
    tail_data,
)
from initial_data.models import FoliationKind
from initial_data.profiles import SpacelikeBump
from np_constants.closed_forms import time_inverted_I0
from np_constants.exceptions import (
    InapplicableFormula,
    NonvanishingI0,
    PreconditionChainBroken,
)
from time_integral.construction import (
    construct_time_integral,
    iterate_time_integral,
    level_rtol,
    ray_derivative,
)


def sample_cmap(kind=SpacetimeKind.SCHWARZSCHILD, **kwargs):
    if kind == SpacetimeKind.SCHWARZSCHILD:
        kwargs.setdefault("M", 1.0)
    return build_coordinate_map(make_model(kind, **kwargs))


def sample_bump(cmap, v_center=40.0, width=4.0, amplitude=1.0):
    return bump_data(cmap, v_center, width, amplitude)


def sample_regression_suite():
    suite = []
    for kind, kwargs in (
        (SpacetimeKind.MINKOWSKI, {}),
        (SpacetimeKind.SCHWARZSCHILD, {"M": 1.0}),
        (SpacetimeKind.REISSNER_NORDSTROM, {"M": 1.0, "e": 0.5}),
    ):
        cmap = sample_cmap(kind, **kwargs)
        suite.append(sample_bump(cmap))
        suite.append(sample_bump(cmap, v_center=70.0, width=10.0))
        suite.append(tail_data(cmap, 0.0, p_coeffs=(1.0,)))
    cmap = sample_cmap()
    suite.append(tail_data(cmap, 0.0, p_coeffs=(1.0, -3.0)))
    return suite


def sample_tuned_pair(cmap):
    """Two bumps combined so that I0^(1) of the sum vanishes."""
    first = sample_bump(cmap)
    second = sample_bump(cmap, v_center=60.0, width=6.0)
    a = -time_inverted_I0(second).value / time_inverted_I0(first).value
    return superpose(a, first, 1.0, second)


class TestConstruction(SimpleTestCase):
    def test_zero_data(self):
        data = sample_bump(sample_cmap(), amplitude=0.0)
        tdata = construct_time_integral(data)
        r = np.geomspace(10.0, 1e6, 20)

        self.assertEqual(tdata.C0.value, 0.0)
        np.testing.assert_array_equal(tdata.data.phi_r(r), 0.0)
        self.assertIsNone(tdata.agreement)

    def test_two_oracles_agree(self):
        for data in sample_regression_suite():
            with self.subTest(data=data.label, model=data.model.kind):
                tdata = construct_time_integral(data)
                closed = tdata.closed_form.value
                extracted = tdata.extracted.value
                scale = max(abs(closed), abs(tdata.C0.value), 1.0)

                self.assertLessEqual(abs(extracted - closed), 1e-6 * scale)

    def test_exact_tail_value(self):
        tdata = construct_time_integral(
            tail_data(sample_cmap(), 0.0, p_coeffs=(1.0,))
        )

        self.assertAlmostEqual(tdata.extracted.value, -0.8, places=6)
        self.assertAlmostEqual(tdata.C0_used, 0.2, places=10)

    def test_time_integral_vanishes_at_infinity(self):
        tdata = construct_time_integral(sample_bump(sample_cmap()))
        psi = tdata.data.profile.psi(np.array([1e3, 1e5, 1e7]))

        self.assertLess(abs(psi[-1]), 1e-6 * abs(tdata.C0.value))
        self.assertLess(abs(psi[2]), abs(psi[0]))

    def test_cone_table(self):
        tdata = construct_time_integral(sample_bump(sample_cmap()))
        table = tdata.cone_table(0.5, 100.0)

        self.assertEqual(table["v"][0], 20.0)
        self.assertEqual(table["v"].size, 161)
        np.testing.assert_allclose(
            table["phi"], tdata.data.phi(table["v"]), rtol=0, atol=0
        )

    def test_nonvanishing_I0_rejected(self):
        with self.assertRaises(NonvanishingI0):
            construct_time_integral(tail_data(sample_cmap(), 1.0))


class TestUniquenessSurrogate(SimpleTestCase):
    def setUp(self):
        self.data = sample_bump(sample_cmap())
        self.near = 2.0 + np.array([1e-2, 1e-3, 1e-4])

    def test_true_constant_stays_regular(self):
        tdata = construct_time_integral(self.data)
        slope = ray_derivative(tdata, self.near)

        self.assertLess(np.abs(slope).max(), 1e-4)

    def test_shifted_constant_blows_up_like_inverse_D(self):
        tdata = construct_time_integral(self.data, c0_shift=1e-3)
        slope = np.abs(ray_derivative(tdata, self.near))

        self.assertGreater(slope[-1], 1.0)
        self.assertAlmostEqual(slope[-1] / slope[-2], 10.0, delta=0.5)

    def test_needs_characteristic_source(self):
        cmap = sample_cmap()
        foliation = make_foliation(FoliationKind.UNIT, cmap)
        spacelike = SpacelikeBump(center=6.0, width=2.0, t_amplitude=1.0)
        data = mixed_data(foliation, spacelike, sample_bump(cmap, amplitude=0))
        tdata = construct_time_integral(data)

        with self.assertRaises(InapplicableFormula):
            ray_derivative(tdata, self.near)


class TestChain(SimpleTestCase):
    def test_level_tolerances_tighten(self):
        self.assertEqual(level_rtol(3, 3, 1e-10), 1e-10)
        self.assertAlmostEqual(level_rtol(1, 3, 1e-10), 1e-12)
        self.assertEqual(level_rtol(1, 5, 1e-12), 1e-13)

    def test_single_level_matches_construction(self):
        data = sample_bump(sample_cmap())
        (tdata,) = iterate_time_integral(data, k=1)

        self.assertEqual(tdata.order, 1)
        self.assertAlmostEqual(
            tdata.extracted.value,
            construct_time_integral(data).extracted.value,
            places=8,
        )

    def test_second_time_integral_of_tuned_pair(self):
        data = sample_tuned_pair(sample_cmap())
        first, second = iterate_time_integral(data, k=2)

        self.assertAlmostEqual(first.closed_form.value, 0.0, places=8)
        self.assertEqual(second.order, 2)
        self.assertTrue(np.isfinite(second.extracted.value))
        self.assertNotEqual(second.closed_form.value, 0.0)
        self.assertAlmostEqual(
            second.extracted.value / second.closed_form.value,
            1.0,
            delta=1e-3,
        )

    def test_chain_breaks_at_nonvanishing_order(self):
        with self.assertRaises(PreconditionChainBroken) as cm:
            iterate_time_integral(sample_bump(sample_cmap()), k=2)
        self.assertEqual(cm.exception.order, 1)

    def test_chain_needs_positive_depth(self):
        with self.assertRaises(ValueError):
            iterate_time_integral(sample_bump(sample_cmap()), k=0)
