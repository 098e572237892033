import numpy as np
from django.test import SimpleTestCase
from scipy import integrate

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
from np_constants.closed_forms import (
    I0_fit,
    compute_C0,
    cubic_limit,
    estimate_I0,
    static_slice_I0_inverted,
    time_inverted_I0,
)
from np_constants.exceptions import (
    DivergentCubicLimit,
    InapplicableFormula,
    InsufficientRange,
    NonvanishingI0,
)
from np_constants.extrapolation import extraction_radii, extrapolate_limit


def sample_cmap(kind=SpacetimeKind.SCHWARZSCHILD, **kwargs):
    if kind == SpacetimeKind.SCHWARZSCHILD:
        kwargs.setdefault("M", 1.0)
    return build_coordinate_map(make_model(kind, **kwargs))


def sample_bump(cmap, v_center=40.0, width=4.0, amplitude=1.0, **kwargs):
    return bump_data(cmap, v_center, width, amplitude, **kwargs)


class TestExtrapolation(SimpleTestCase):
    def test_default_radii(self):
        radii = extraction_radii(1.0)

        np.testing.assert_allclose(radii, 200.0 * 2.0 ** np.arange(6))

    def test_radii_shift_below_the_data_extent(self):
        radii = extraction_radii(1.0, r_extent=1e3)

        self.assertEqual(radii[-1], 1e3)
        self.assertGreaterEqual(radii[0], 50.0)

    def test_insufficient_range(self):
        with self.assertRaises(InsufficientRange):
            extraction_radii(1.0, r_extent=100.0)

    def test_polynomial_in_inverse_radius_is_recovered(self):
        radii = extraction_radii(1.0)
        fit = extrapolate_limit(radii, 3.0 + 2.0 / radii - 1.0 / radii**2)

        self.assertAlmostEqual(fit.value, 3.0, places=12)
        self.assertAlmostEqual(fit.coefficients[1], 2.0, places=8)
        self.assertLess(fit.error, 1e-10)


class TestNpConstant(SimpleTestCase):
    def setUp(self):
        self.cmap = sample_cmap()

    def test_compact_data_have_no_np_constant(self):
        estimate = estimate_I0(sample_bump(self.cmap))

        self.assertEqual(estimate.value, 0.0)

    def test_tail_data_carry_their_constant(self):
        estimate = estimate_I0(tail_data(self.cmap, 1.0))

        self.assertAlmostEqual(estimate.value, 1.0, places=10)

    def test_subleading_coefficient(self):
        fit = I0_fit(tail_data(self.cmap, 0.5, p_coeffs=(1.0, -2.0)))

        self.assertAlmostEqual(fit.value, 0.5, places=10)
        self.assertAlmostEqual(fit.coefficients[1], 1.0, places=6)

    def test_cubic_limit_diverges_with_nonzero_I0(self):
        with self.assertRaises(DivergentCubicLimit):
            cubic_limit(tail_data(self.cmap, 1.0))


class TestTimeInvertedConstant(SimpleTestCase):
    def setUp(self):
        self.cmap = sample_cmap()

    def test_exact_tail_values(self):
        # J(R) = 2/R and lim r^3 d(phi)/dr = 1 for r^2 d(phi)/dr = 1/r
        data = tail_data(self.cmap, 0.0, p_coeffs=(1.0,))

        self.assertAlmostEqual(compute_C0(data).value, 0.2, places=10)
        self.assertAlmostEqual(time_inverted_I0(data).value, -0.8, places=9)

    def test_compact_bump_against_simpson(self):
        data = sample_bump(self.cmap)
        v = np.linspace(36.0, 44.0, 20001)
        r = self.cmap.inverse_tortoise(v / 2.0)
        oracle = integrate.simpson(2.0 * r * data.dphi_dv(v), x=v)

        C0 = compute_C0(data).value
        self.assertAlmostEqual(C0 / oracle, 1.0, places=8)
        self.assertAlmostEqual(
            time_inverted_I0(data).value / C0, 1.0, places=12
        )

    def test_minkowski_factor_kills_the_constant(self):
        data = sample_bump(sample_cmap(SpacetimeKind.MINKOWSKI))

        self.assertNotEqual(compute_C0(data).value, 0.0)
        self.assertEqual(time_inverted_I0(data).value, 0.0)

    def test_linearity_and_scaling(self):
        first = sample_bump(self.cmap)
        second = sample_bump(self.cmap, v_center=60.0, width=6.0)
        combined = superpose(2.0, first, -3.0, second)
        expected = 2.0 * time_inverted_I0(first).value - 3.0 * (
            time_inverted_I0(second).value
        )

        self.assertAlmostEqual(
            time_inverted_I0(combined).value / expected, 1.0, places=10
        )
        scaled = sample_bump(self.cmap, amplitude=7.5)
        self.assertAlmostEqual(
            time_inverted_I0(scaled).value / time_inverted_I0(first).value,
            7.5,
            places=10,
        )

    def test_nonvanishing_I0_has_no_time_integral(self):
        with self.assertRaises(NonvanishingI0):
            time_inverted_I0(tail_data(self.cmap, 1.0))

    def test_higher_modes_rejected(self):
        with self.assertRaises(InapplicableFormula):
            time_inverted_I0(sample_bump(self.cmap, ell=1))

    def test_null_data_need_the_null_foliation(self):
        data = tail_data(self.cmap, 0.0, p_coeffs=(1.0,), phi_vertex=1.0)
        foliation = make_foliation(FoliationKind.UNIT, self.cmap)

        with self.assertRaises(InapplicableFormula):
            time_inverted_I0(data, foliation)


class TestStaticSlice(SimpleTestCase):
    def setUp(self):
        self.cmap = sample_cmap()
        self.cone = sample_bump(self.cmap, amplitude=0.0)
        self.foliation = make_foliation(FoliationKind.STATIC, self.cmap)

    def test_time_symmetric_data_have_no_inverted_constant(self):
        spacelike = SpacelikeBump(center=6.0, width=2.0, amplitude=1.0)
        data = mixed_data(self.foliation, spacelike, self.cone)

        self.assertAlmostEqual(time_inverted_I0(data).value, 0.0, places=14)

    def test_static_oracle_matches_closed_form(self):
        spacelike = SpacelikeBump(center=6.0, width=2.0, t_amplitude=1.0)
        data = mixed_data(self.foliation, spacelike, self.cone)
        static = static_slice_I0_inverted(data).value

        self.assertGreater(static, 0.0)
        self.assertAlmostEqual(
            time_inverted_I0(data).value / static, 1.0, places=10
        )

    def test_static_oracle_needs_the_static_slice(self):
        foliation = make_foliation(FoliationKind.UNIT, self.cmap)
        spacelike = SpacelikeBump(center=6.0, width=2.0, t_amplitude=1.0)
        data = mixed_data(foliation, spacelike, self.cone)

        with self.assertRaises(InapplicableFormula):
            static_slice_I0_inverted(data)
        with self.assertRaises(InapplicableFormula):
            static_slice_I0_inverted(self.cone)
