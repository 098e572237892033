"""Time integrals psi^(1) with T psi^(1) = psi on the initial data.

On the cone u = 0 the radial equation
    D r^2 d(psi^(1))/dr = C0 - J(r),   J(r) = 2 int_r^oo r' d(phi)/dr' dr'
is integrated inward from a far radius, where psi^(1) is matched to its
1/r expansion with psi^(1)(oo) = 0. On the ingoing ray v = v0 the same
equation reads D r^2 d(psi^(1))/dr = -K(r), with K the flux of the source
along the ray from r_min.
"""

import logging

import numpy as np
from django.conf import settings
from scipy import integrate

from initial_data.models import CharacteristicData, MixedSurfaceData
from np_constants.closed_forms import (
    I0_fit,
    cone_flux,
    inversion_terms,
    radial_support,
    ray_flux,
)
from np_constants.exceptions import (
    InapplicableFormula,
    NonvanishingI0,
    PreconditionChainBroken,
)
from np_constants.models import Estimate
from time_integral.exceptions import IntegrationFailed
from time_integral.models import TimeIntegralData
from time_integral.profiles import TimeIntegralProfile, far_integrals

logger = logging.getLogger(__name__)

MAX_LOG_STEP = 0.05
# distance from r_min, in units of max(M, 1), below which the ray is held
RAY_STOP_CASE_I = 1e-6
RAY_STOP_CASE_II = 1e-3


def level_rtol(level: int, depth: int, base: float | None = None) -> float:
    """ODE tolerance for level ``level`` of a chain ``depth`` levels deep.

    Earlier levels feed every later one, so they are solved tighter by a
    factor 10 per remaining level.
    """
    if base is None:
        base = settings.LAB["TIME_INTEGRAL_RTOL"]
    return max(1e-13, base / 10.0 ** (depth - level))


def _solve(fun, span, y0, rtol, atol, max_step=np.inf):
    solution = integrate.solve_ivp(
        fun,
        span,
        y0,
        method="DOP853",
        rtol=rtol,
        atol=atol,
        dense_output=True,
        max_step=max_step,
    )
    if not solution.success:
        raise IntegrationFailed(solution.message)
    return solution


def construct_time_integral(
    data,
    foliation=None,
    r_far: float | None = None,
    rtol: float | None = None,
    c0_shift: float = 0.0,
    order: int = 1,
) -> TimeIntegralData:
    """Build psi^(1) from data with vanishing I0.

    Mixed data yield psi^(1) on the cone only; their ingoing ray holds the
    vertex value. ``c0_shift`` perturbs the integrability constant and
    exists to exhibit the resulting blow-up at the horizon.
    """
    cone = data.cone if isinstance(data, MixedSurfaceData) else data
    model = cone.model
    cmap = cone.cmap
    R = model.reference_radius
    lab = settings.LAB
    if r_far is None:
        r_far = lab["TIME_INTEGRAL_FAR_FACTOR"] * model.scale
    if rtol is None:
        rtol = lab["TIME_INTEGRAL_RTOL"]

    C0_estimate, c3fit = inversion_terms(data, foliation)
    C0 = C0_estimate.value + c0_shift
    J_far, _ = cone_flux(cone, r_far, c3fit)
    second, third = far_integrals(r_far, model.d_coeffs)
    psi_far = -C0 * second + J_far * r_far * third
    Q_far = r_far**2 * psi_far + r_far * (C0 - J_far) / float(
        model.D(r_far)
    )

    def outer_rhs(s, y):
        r = np.exp(s)
        J, Q = y
        D = float(model.D(r))
        source = r**2 * float(cone.dphi_dr(r))
        return [
            -2.0 * source,
            2.0 * Q
            + 2.0 * r * source / D
            - r**2 * (C0 - J) * float(model.dD(r)) / D**2,
        ]

    max_step = MAX_LOG_STEP
    support = radial_support(cone)
    if support is not None:
        max_step = min(max_step, np.log(support[1] / support[0]) / 8.0)
    atol = max(1e-15 * (abs(C0) + cone.scale), 1e-300)
    outer = _solve(
        outer_rhs,
        (np.log(r_far), np.log(R)),
        [J_far, Q_far],
        rtol,
        atol,
        max_step,
    )
    J_R, Q_R = outer.sol(np.log(R))
    psi_R = Q_R / R**2 - (C0 - J_R) / (float(model.D(R)) * R)

    ray, r_stop, K_R = None, model.r_min, 0.0
    if not (
        isinstance(data, MixedSurfaceData) or cone.profile.ingoing_is_constant
    ):
        K_R, _ = ray_flux(cone)
        stop = RAY_STOP_CASE_I if model.is_black_hole else RAY_STOP_CASE_II
        r_stop = model.r_min + stop * model.scale

        def ray_rhs(r, y):
            K, _ = y
            D = float(model.D_offset(r - model.r_min))
            return [2.0 * r * float(cone.ingoing_dr(r)), -K / (D * r**2)]

        ray = _solve(ray_rhs, (R, r_stop), [K_R, psi_R], rtol, atol).sol

    profile = TimeIntegralProfile(
        cmap=cmap,
        C0=C0,
        r_far=r_far,
        J_far=J_far,
        outer=outer.sol,
        psi_R=psi_R,
        ray=ray,
        r_stop=r_stop,
    )
    integrated = CharacteristicData(
        profile=profile,
        ell=0,
        v_max=cone.v_max,
        label=f"T^-{order}[{cone.label}]",
    )
    extracted = I0_fit(integrated)
    M = model.mass
    closed_form = Estimate(
        value=-c3fit.value + M * C0_estimate.value,
        error=c3fit.error + M * C0_estimate.error,
    )
    tdata = TimeIntegralData(
        order=order,
        data=integrated,
        C0=C0_estimate,
        c3=c3fit,
        extracted=extracted,
        closed_form=closed_form,
        source=data,
        c0_shift=c0_shift,
        ray_constant=J_R + 2.0 * R * float(cone.phi_r(R)) - K_R,
    )
    logger.info(
        "Time integral of order %d: C0 = %.16g, I0 extracted %.16g, "
        "closed form %.16g",
        order,
        C0,
        extracted.value,
        closed_form.value,
    )
    return tdata


def ray_derivative(tdata: TimeIntegralData, r):
    """d(psi^(1))/dr along the ingoing ray implied by the C0 in use.

    D r^2 d(psi^(1))/dr = C0 - (J(R) + 2R phi(R) - K(R)) - K(r); the
    bracket equals C0 exactly for the true constant, and any other value
    leaves a remainder that blows up like 1/D toward r_+.
    """
    if not isinstance(tdata.source, CharacteristicData):
        raise InapplicableFormula(
            "the ray derivative needs characteristic source data"
        )
    model = tdata.data.model
    r = np.asarray(r, dtype=float)
    K = np.asarray(tdata.data.profile.source_flux(r), dtype=float)
    numerator = tdata.C0_used - tdata.ray_constant - K
    return numerator / (model.D_offset(r - model.r_min) * r**2)


def iterate_time_integral(
    data,
    foliation=None,
    k: int = 1,
    r_far: float | None = None,
    rtol: float | None = None,
) -> list[TimeIntegralData]:
    """The chain psi^(1), ..., psi^(k); later levels use the null ray."""
    if k < 1:
        raise ValueError(f"the chain needs k >= 1, got {k}")
    if k > 1 and not isinstance(data, CharacteristicData):
        raise InapplicableFormula(
            "time integrals beyond the first need characteristic data"
        )
    chain = []
    source = data
    for level in range(1, k + 1):
        try:
            tdata = construct_time_integral(
                source,
                foliation if level == 1 else None,
                r_far=r_far,
                rtol=level_rtol(level, k, rtol),
                order=level,
            )
        except NonvanishingI0 as exc:
            raise PreconditionChainBroken(order=level - 1) from exc
        chain.append(tdata)
        source = tdata.data
    return chain
