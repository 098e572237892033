"""Closed formulas for the NP constant I0, the integrability constant C0
and the time-inverted constant I0^(1) of spherically symmetric data.

The field is the spherical mode itself; no 1/(4 pi) spherical-mean
prefactor appears anywhere.
"""

import logging

import numpy as np
from django.conf import settings
from scipy import integrate

from initial_data.families import make_foliation
from initial_data.models import (
    CharacteristicData,
    FoliationKind,
    FoliationSpec,
    MixedSurfaceData,
)
from np_constants.exceptions import (
    DivergentCubicLimit,
    InapplicableFormula,
    NonvanishingI0,
)
from np_constants.extrapolation import (
    extraction_radii,
    extrapolate_limit,
    tail_integral,
)
from np_constants.models import Estimate, LimitFit, Method

logger = logging.getLogger(__name__)

QUAD_RTOL = 1e-12
# log2 of the growth of r^3 d(phi)/dr per doubling of r that flags a
# divergent limit; a finite limit approaches at rate 1/r, i.e. -1.
DIVERGENCE_SLOPE = 0.5


def _cone(data) -> CharacteristicData:
    if isinstance(data, MixedSurfaceData):
        return data.cone
    return data


def _quad(f, a: float, b: float) -> tuple[float, float]:
    if not b > a:
        return 0.0, 0.0
    value, error = integrate.quad(
        f, a, b, epsabs=0.0, epsrel=QUAD_RTOL, limit=400
    )
    return value, error


def radial_support(cone: CharacteristicData) -> tuple[float, float] | None:
    """The r-interval carrying the cone data, or None for tails."""
    if not cone.is_compact:
        return None
    a, b = cone.support
    r = np.atleast_1d(cone.profile.radius(np.array([a, b])))
    return float(r[0]), float(r[1])


def _radii(cone: CharacteristicData) -> np.ndarray:
    scale = cone.model.scale
    radii = extraction_radii(scale, cone.profile.r_extent)
    support = radial_support(cone)
    if support is not None and radii[0] <= support[1]:
        # every radius outside the data, keeping the doubling ratio
        radii = 2.0 * support[1] * radii / radii[0]
    return radii


def vanishes(estimate: Estimate, scale: float) -> bool:
    floor = settings.LAB["VANISHING_FLOOR"] * scale
    return abs(estimate.value) <= max(10.0 * estimate.error, floor)


def I0_fit(data) -> LimitFit:
    """Fit of r^2 d(phi)/dr = I0 + sum_m p_m r^-m on the outgoing cone."""
    cone = _cone(data)
    radii = _radii(cone)
    values = radii**2 * np.asarray(cone.dphi_dr(radii), dtype=float)
    return extrapolate_limit(radii, values)


def estimate_I0(data) -> Estimate:
    """lim r^2 d(phi)/dr on the outgoing cone, extrapolated in 1/r."""
    fit = I0_fit(data)
    logger.info("I0 = %.16g +- %.3g", fit.value, fit.error)
    return fit.estimate()


def require_vanishing_I0(data) -> Estimate:
    estimate = estimate_I0(data)
    if not vanishes(estimate, data.scale):
        raise NonvanishingI0(
            f"I0 = {estimate.value:.6g} +- {estimate.error:.2g} does not "
            "vanish; the time integral does not exist"
        )
    return estimate


def cubic_limit(data) -> LimitFit:
    """lim r^3 d(phi)/dr on the cone with divergence detection."""
    cone = _cone(data)
    radii = _radii(cone)
    values = radii**3 * np.asarray(cone.dphi_dr(radii), dtype=float)
    last, previous = abs(values[-1]), abs(values[-2])
    floor = settings.LAB["VANISHING_FLOOR"] * max(cone.scale, 1e-300)
    if last > floor and previous > 0.0:
        if np.log2(last / previous) > DIVERGENCE_SLOPE:
            raise DivergentCubicLimit(
                "r^3 d(phi)/dr grows like r^"
                f"{np.log2(last / previous):.2f} on the cone"
            )
    fit = extrapolate_limit(radii, values)
    logger.debug("lim r^3 dphi/dr = %.16g +- %.3g", fit.value, fit.error)
    return fit


def cone_flux(
    data, r_from: float, c3fit: LimitFit | None = None
) -> tuple[float, float]:
    """J(r) = 2 int_r^oo r' d(phi)/dr' dr' along the cone, with an error.

    Compact data are integrated over their support in v, where the
    integrand is 2 r d(phi)/dv. Otherwise the quadrature stops at the
    outermost extraction radius and the fitted expansion of r^3 d(phi)/dr
    supplies the rest.
    """
    cone = _cone(data)
    support = radial_support(cone)
    if support is not None:
        if r_from >= support[1]:
            return 0.0, 0.0
        a, b = cone.support
        if r_from > support[0]:
            a = 2.0 * float(cone.cmap.tortoise(r_from))

        def integrand(v):
            return 2.0 * float(cone.profile.radius(v)) * float(
                cone.dphi_dv(v)
            )

        return _quad(integrand, a, b)

    if c3fit is None:
        c3fit = cubic_limit(cone)
    r_split = max(c3fit.radii[-1], r_from)

    def integrand_log(s):
        r = np.exp(s)
        return 2.0 * r**2 * float(cone.dphi_dr(r))

    value, error = _quad(integrand_log, np.log(r_from), np.log(r_split))
    tail = tail_integral(c3fit, r_split)
    return value + tail, error + 2.0 * c3fit.error / r_split


def ray_flux(cone: CharacteristicData) -> tuple[float, float]:
    """K(R) = int_{r_min}^R 2 rho d(phi)/d(rho) along the ingoing ray."""
    if cone.profile.ingoing_is_constant:
        return 0.0, 0.0
    model = cone.model
    return _quad(
        lambda rho: 2.0 * rho * float(cone.ingoing_dr(rho)),
        model.r_min,
        model.reference_radius,
    )


def _spacelike_flux(
    data: MixedSurfaceData, foliation: FoliationSpec
) -> tuple[float, float]:
    spacelike = data.spacelike
    model = data.model
    low = max(spacelike.support[0], model.r_min)
    high = min(spacelike.support[1], model.reference_radius)

    def integrand(rho):
        h = float(foliation.h(rho))
        Dh = float(foliation.Dh(rho))
        return (
            2.0 * (1.0 - Dh) * rho * float(spacelike.dphi(rho))
            - (2.0 - Dh) * rho * h * float(spacelike.tphi(rho))
            - rho * float(foliation.dDh(rho)) * float(spacelike.phi(rho))
        )

    return _quad(integrand, low, high)


def _integrability_constant(data, foliation, c3fit: LimitFit) -> Estimate:
    cone = _cone(data)
    model = cone.model
    R = model.reference_radius
    if isinstance(data, MixedSurfaceData):
        foliation = data.foliation
    elif foliation is None:
        foliation = make_foliation(FoliationKind.INGOING_NULL, cone.cmap)

    phi_R = float(cone.phi_r(R))
    boundary = R * (2.0 - float(foliation.Dh(R))) * phi_R
    flux, flux_error = cone_flux(cone, R, c3fit)
    if isinstance(data, MixedSurfaceData):
        spacelike, spacelike_error = _spacelike_flux(data, foliation)
    elif foliation.is_null:
        spacelike, spacelike_error = ray_flux(cone)
    elif phi_R == 0.0 and cone.profile.ingoing_is_constant:
        # characteristic data seen from a spacelike slice carrying nothing
        spacelike, spacelike_error = 0.0, 0.0
    else:
        raise InapplicableFormula(
            f"characteristic data with phi(R) = {phi_R:g} or a varying "
            "ingoing ray need the ingoing_null foliation, not "
            f"'{foliation.kind}'"
        )

    value = boundary + flux - spacelike
    roundoff = 16 * np.finfo(float).eps * (
        abs(boundary) + abs(flux) + abs(spacelike)
    )
    estimate = Estimate(
        value=value, error=flux_error + spacelike_error + roundoff
    )
    logger.debug(
        "C0 pieces: boundary %.16g, cone %.16g, spacelike %.16g",
        boundary,
        flux,
        spacelike,
    )
    return estimate


def inversion_terms(data, foliation=None) -> tuple[Estimate, LimitFit]:
    """(C0, lim r^3 d(phi)/dr), after checking that both exist."""
    if data.ell != 0:
        raise InapplicableFormula(
            "time inversion is defined for the l = 0 mode, not l = "
            f"{data.ell}"
        )
    require_vanishing_I0(data)
    c3fit = cubic_limit(data)
    C0 = _integrability_constant(data, foliation, c3fit)
    logger.info("C0 = %.16g +- %.3g", C0.value, C0.error)
    return C0, c3fit


def compute_C0(data, foliation=None) -> Estimate:
    """C0 = lim r^2 d(psi^(1))/d(rho) on the initial surface.

    ``foliation`` only matters for characteristic data, which default to
    the ingoing null ray; mixed data carry their own.
    """
    return inversion_terms(data, foliation)[0]


def time_inverted_I0(data, foliation=None) -> Estimate:
    """I0^(1) = -lim r^3 d(phi)/dr + M C0."""
    C0, c3fit = inversion_terms(data, foliation)
    M = _cone(data).model.mass
    estimate = Estimate(
        value=-c3fit.value + M * C0.value,
        error=c3fit.error + M * C0.error,
    )
    logger.info(
        "I0^(1) = %.16g +- %.3g (closed form)",
        estimate.value,
        estimate.error,
    )
    return estimate


def static_slice_I0_inverted(data: MixedSurfaceData) -> Estimate:
    """M int D^-1 T(phi) rho d(rho) for data on the static slice only."""
    if not isinstance(data, MixedSurfaceData):
        raise InapplicableFormula(
            "the formula needs data on a spacelike slice"
        )
    if data.foliation.kind != FoliationKind.STATIC:
        raise InapplicableFormula(
            "the formula holds on the static slice, not "
            f"'{data.foliation.kind}'"
        )
    if data.cone.scale != 0.0:
        raise InapplicableFormula(
            "the formula needs data supported on the spacelike part only"
        )
    model = data.model
    spacelike = data.spacelike
    low = max(spacelike.support[0], model.r_min)
    high = min(spacelike.support[1], model.reference_radius)
    value, error = _quad(
        lambda rho: rho * float(spacelike.tphi(rho)) / float(model.D(rho)),
        low,
        high,
    )
    return Estimate(
        value=model.mass * value,
        error=model.mass * error,
        method=Method.CLOSED_FORM,
    )
