from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from django.db import models

from geometry.coordinates import CoordinateMap
from geometry.models import SpacetimeModel
from initial_data.profiles import ConeProfile, SpacelikeBump


class FoliationKind(models.TextChoices):
    INGOING_NULL = "ingoing_null", "Ingoing null ray (h = 0)"
    UNIT = "unit", "Unit slope (h = 1)"
    STATIC = "static", "Static slice (h = 1/D)"


@dataclass(frozen=True, eq=False)
class FoliationSpec:
    """Slope h of the spacelike part {v = v_Sigma(r), r <= R} of Sigma_0.

    ``ingoing_null`` is the degenerate h = 0 member: the spacelike part
    collapses onto the ingoing ray v = v0 of the characteristic rectangle.
    """

    kind: str
    cmap: CoordinateMap

    @property
    def model(self) -> SpacetimeModel:
        return self.cmap.model

    @property
    def junction_radius(self) -> float:
        return self.model.reference_radius

    @property
    def is_null(self) -> bool:
        return self.kind == FoliationKind.INGOING_NULL

    def h(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == FoliationKind.INGOING_NULL:
            return np.zeros_like(r)
        if self.kind == FoliationKind.UNIT:
            return np.ones_like(r)
        return 1.0 / self.model.D(r)

    def dh(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == FoliationKind.STATIC:
            return -self.model.dD(r) / self.model.D(r) ** 2
        return np.zeros_like(r)

    def Dh(self, r):
        """D h, which stays finite at r_+ for every member."""
        r = np.asarray(r, dtype=float)
        if self.kind == FoliationKind.STATIC:
            return np.ones_like(r)
        return self.model.D(r) * self.h(r)

    def dDh(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == FoliationKind.STATIC:
            return np.zeros_like(r)
        return self.model.dD(r) * self.h(r) + self.model.D(r) * self.dh(r)

    def v_sigma(self, r):
        """v on the spacelike part, with v_Sigma(R) = 2 r*(R)."""
        r = np.asarray(r, dtype=float)
        R = self.junction_radius
        if self.kind == FoliationKind.INGOING_NULL:
            return np.full_like(r, 2.0 * R)
        if self.kind == FoliationKind.UNIT:
            return 2.0 * R - (R - r)
        return R + self.cmap.tortoise(r)


@dataclass(frozen=True)
class TailParameters:
    I0_target: float
    p_coeffs: tuple[float, ...] = ()
    beta: float = 1.0


@dataclass(frozen=True, eq=False)
class CharacteristicData:
    """phi on the cone u = 0 (v >= v0) and on the ingoing ray v = v0."""

    profile: ConeProfile
    ell: int = 0
    v_max: float = np.inf
    tail: TailParameters | None = None
    label: str = ""

    @property
    def cmap(self) -> CoordinateMap:
        return self.profile.cmap

    @property
    def model(self) -> SpacetimeModel:
        return self.profile.cmap.model

    @property
    def v0(self) -> float:
        return 2.0 * self.model.reference_radius

    @property
    def support(self):
        return self.profile.support

    @property
    def is_compact(self) -> bool:
        return self.profile.support is not None

    def phi(self, v):
        return self.profile.phi(v)

    def dphi_dv(self, v):
        return self.profile.dphi_dv(v)

    def phi_r(self, r):
        return self.profile.phi_r(r)

    def dphi_dr(self, r):
        return self.profile.dphi_dr(r)

    def ingoing(self, r):
        return self.profile.ingoing(r)

    def ingoing_dr(self, r):
        return self.profile.ingoing_dr(r)

    @cached_property
    def scale(self) -> float:
        """Magnitude of the data, used to floor vanishing tolerances."""
        R = self.model.reference_radius
        if self.is_compact:
            a, b = self.support
            v = np.linspace(a, b, 1025)
            r = np.atleast_1d(self.profile.radius(v))
        else:
            r = np.geomspace(R, 1e4 * R, 1025)
        values = np.concatenate(
            (
                np.abs(np.atleast_1d(self.phi_r(r))),
                np.abs(np.atleast_1d(r**2 * self.dphi_dr(r))),
                np.abs(np.atleast_1d(self.ingoing(np.array([R])))),
            )
        )
        return float(values.max())

    def cone_samples(self, h: float, v_max: float | None = None):
        v_max = self.v_max if v_max is None else v_max
        count = int(round((v_max - self.v0) / h)) + 1
        v = self.v0 + h * np.arange(count)
        return v, np.atleast_1d(self.phi(v))


@dataclass(frozen=True, eq=False)
class MixedSurfaceData:
    foliation: FoliationSpec
    spacelike: SpacelikeBump
    cone: CharacteristicData = field(repr=False)

    @property
    def model(self) -> SpacetimeModel:
        return self.cone.model

    @property
    def ell(self) -> int:
        return self.cone.ell

    @cached_property
    def scale(self) -> float:
        a, b = self.spacelike.support
        rho = np.linspace(a, b, 513)
        return max(
            self.cone.scale,
            float(np.abs(self.spacelike.phi(rho)).max()),
            float(np.abs(rho * self.spacelike.tphi(rho)).max()),
        )
