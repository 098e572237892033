import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from django.conf import settings
from django.db import models
from scipy import optimize

from geometry.exceptions import (
    CustomSignViolation,
    ExtremalOrSuperextremal,
    NegativeMass,
)

logger = logging.getLogger(__name__)

# Allowance for the rounding of 1 - 2M/r + 2M/r - 1 in the flatness audit.
ROUNDOFF = 8.0 * np.finfo(float).eps


class SpacetimeKind(models.TextChoices):
    MINKOWSKI = "minkowski", "Minkowski"
    SCHWARZSCHILD = "schwarzschild", "Schwarzschild"
    REISSNER_NORDSTROM = "reissner_nordstrom", "Reissner-Nordstrom"
    CUSTOM = "custom", "Custom"


@dataclass(frozen=True, eq=False)
class SpacetimeModel:
    """Static spherically symmetric background g = -D dt^2 + D^-1 dr^2 + ...

    Case I models have a non-degenerate horizon at ``r_plus`` (D vanishes
    simply there); Case II models have ``r_plus == 0`` and D bounded away
    from zero on [0, oo).
    """

    kind: str
    mass: float
    charge: float
    beta: float
    reference_radius: float
    r_plus: float
    d_coeffs: tuple[float, ...]
    custom: Any = field(default=None, repr=False)

    @property
    def r_min(self) -> float:
        return self.r_plus

    @property
    def is_black_hole(self) -> bool:
        return self.r_plus > 0.0

    @property
    def is_flat(self) -> bool:
        return self.custom is None and self.mass == 0 and self.charge == 0

    @property
    def scale(self) -> float:
        return max(self.mass, 1.0)

    @property
    def r_minus(self) -> float:
        if self.kind == SpacetimeKind.REISSNER_NORDSTROM:
            return self.charge**2 / self.r_plus
        return 0.0

    @property
    def exact_offset(self) -> bool:
        """Whether D near r_min is evaluated without cancellation."""
        if self.custom is None:
            return True
        return hasattr(self.custom, "D_offset")

    @property
    def surface_gravity(self) -> float:
        """D'(r_+); the rate of the logarithmic divergence of r*."""
        if not self.is_black_hole:
            return 0.0
        return float(self.dD(self.r_plus))

    def D(self, r):
        if self.custom is not None:
            return self.custom.D(r)
        r = np.asarray(r, dtype=float)
        if self.is_flat:
            return np.ones_like(r)
        return 1.0 - 2.0 * self.mass / r + self.charge**2 / r**2

    def dD(self, r):
        if self.custom is not None:
            return self.custom.dD(r)
        r = np.asarray(r, dtype=float)
        if self.is_flat:
            return np.zeros_like(r)
        return 2.0 * self.mass / r**2 - 2.0 * self.charge**2 / r**3

    def d2D(self, r):
        if self.custom is not None:
            return self.custom.d2D(r)
        r = np.asarray(r, dtype=float)
        if self.is_flat:
            return np.zeros_like(r)
        return -4.0 * self.mass / r**3 + 6.0 * self.charge**2 / r**4

    def D_offset(self, x):
        """D at r = r_min + x, factored so that small x keeps its digits."""
        x = np.asarray(x, dtype=float)
        if self.custom is not None:
            if hasattr(self.custom, "D_offset"):
                return self.custom.D_offset(x)
            return self.custom.D(self.r_min + x)
        if not self.is_black_hole:
            return self.D(x)
        r = self.r_plus + x
        return x * (x + self.r_plus - self.r_minus) / r**2


def potential(model: SpacetimeModel, ell: int, r):
    """V(r) = (D/4) (l(l+1)/r^2 + D'/r); l = 0 gives D D' / (4r)."""
    r = np.asarray(r, dtype=float)
    return (
        model.D(r) * (ell * (ell + 1) / r**2 + model.dD(r) / r) / 4.0
    )


def potential_offset(model: SpacetimeModel, ell: int, x):
    """The potential at r = r_min + x with D taken from ``D_offset``."""
    x = np.asarray(x, dtype=float)
    r = model.r_min + x
    return (
        model.D_offset(x)
        * (ell * (ell + 1) / r**2 + model.dD(r) / r)
        / 4.0
    )


def _find_custom_horizon(custom, scale: float) -> float:
    r = np.geomspace(
        1e-6 * scale, settings.LAB["AUDIT_RADIUS_FACTOR"] * scale, 4000
    )
    d = np.asarray(custom.D(r), dtype=float)
    nonpositive = np.flatnonzero(d <= 0.0)
    if nonpositive.size == 0:
        return 0.0
    last = nonpositive[-1]
    if last == r.size - 1:
        raise CustomSignViolation(
            "D is not positive at large radius; the model is not "
            "asymptotically flat"
        )
    if d[last] == 0.0:
        return float(r[last])
    return float(
        optimize.brentq(
            lambda s: float(custom.D(s)),
            r[last],
            r[last + 1],
            xtol=1e-15 * scale,
            rtol=4 * np.finfo(float).eps,
        )
    )


def audit_model(model: SpacetimeModel) -> None:
    """Sample the sign structure and asymptotic flatness of ``model``."""
    scale = model.scale
    r_hi = settings.LAB["AUDIT_RADIUS_FACTOR"] * scale

    if model.is_black_hole:
        x = np.geomspace(1e-6 * model.r_plus, r_hi - model.r_plus, 2000)
        if np.any(model.D_offset(x) <= 0.0):
            raise CustomSignViolation(
                "D must be positive outside the horizon"
            )
        if abs(float(model.D(model.r_plus))) > 1e-10:
            raise CustomSignViolation(
                f"D(r_+) = {float(model.D(model.r_plus))!r} is not zero"
            )
        if model.surface_gravity <= 1e-10:
            raise CustomSignViolation(
                "D'(r_+) must be positive; extremal horizons are rejected"
            )
        r = model.r_plus + x
    else:
        r = np.concatenate(([0.0], np.geomspace(1e-6 * scale, r_hi, 2000)))
        d = np.asarray(model.D(r), dtype=float)
        if not np.all(np.isfinite(d)) or d.min() <= 0.0:
            raise CustomSignViolation(
                "D must stay bounded away from zero when there is no "
                "horizon"
            )
        r = r[1:]

    if model.custom is not None:
        step = 1e-5 * r
        slope = (model.D(r + step) - model.D(r - step)) / (2 * step)
        curvature = (model.dD(r + step) - model.dD(r - step)) / (2 * step)
        slope_scale = np.abs(model.dD(r)) + 1.0 / r
        curvature_scale = np.abs(model.d2D(r)) + 1.0 / r**2
        if np.any(np.abs(slope - model.dD(r)) > 1e-6 * slope_scale):
            raise CustomSignViolation("dD does not match D")
        if np.any(
            np.abs(curvature - model.d2D(r)) > 1e-6 * curvature_scale
        ):
            raise CustomSignViolation("d2D does not match dD")

    far = np.geomspace(model.reference_radius, r_hi, 200)
    remainder = np.abs(model.D(far) - 1.0 + 2.0 * model.mass / far)
    remainder = np.maximum(remainder - ROUNDOFF, 0.0)
    ratio = remainder * far ** (1.0 + model.beta)
    if ratio[-50:].max() > 10.0 * ratio[:50].max() + 1e-300:
        raise CustomSignViolation(
            f"|D - 1 + 2M/r| does not decay like r^-(1+{model.beta})"
        )


def make_model(
    kind: str,
    M: float = 0.0,
    e: float = 0.0,
    beta: float = 1.0,
    custom_D=None,
    R: float | None = None,
) -> SpacetimeModel:
    kind = SpacetimeKind(kind)
    if M < 0:
        raise NegativeMass(f"mass must be non-negative, got {M}")
    if (custom_D is None) == (kind == SpacetimeKind.CUSTOM):
        raise CustomSignViolation(
            "a custom metric is required for kind 'custom' and only there"
        )

    charge = 0.0
    if kind == SpacetimeKind.MINKOWSKI:
        M = 0.0
        r_plus = 0.0
        d_coeffs = ()
    elif kind == SpacetimeKind.SCHWARZSCHILD:
        if M == 0:
            raise NegativeMass("a Schwarzschild horizon needs M > 0")
        r_plus = 2.0 * M
        d_coeffs = (-2.0 * M,)
    elif kind == SpacetimeKind.REISSNER_NORDSTROM:
        if abs(e) >= M:
            raise ExtremalOrSuperextremal(
                f"|e| = {abs(e)} must be below M = {M}"
            )
        charge = float(e)
        r_plus = M + np.sqrt(M**2 - e**2)
        d_coeffs = (-2.0 * M, e**2)
    else:
        M = float(getattr(custom_D, "mass", M))
        beta = float(getattr(custom_D, "beta", beta))
        r_plus = _find_custom_horizon(custom_D, max(M, 1.0))
        d_coeffs = tuple(getattr(custom_D, "d_coeffs", (-2.0 * M,)))

    if R is None:
        R = settings.LAB["REFERENCE_RADIUS_FACTOR"] * max(M, 1.0)
    if R <= r_plus:
        raise CustomSignViolation(
            f"reference radius R = {R} must lie outside r_+ = {r_plus}"
        )

    model = SpacetimeModel(
        kind=kind.value,
        mass=float(M),
        charge=charge,
        beta=float(beta),
        reference_radius=float(R),
        r_plus=float(r_plus),
        d_coeffs=d_coeffs,
        custom=custom_D,
    )
    audit_model(model)
    logger.info(
        "Built %s model M=%g e=%g r_+=%.12g R=%g",
        model.kind,
        model.mass,
        model.charge,
        model.r_plus,
        model.reference_radius,
    )
    return model
