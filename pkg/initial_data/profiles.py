"""Evaluators for phi = r psi on the outgoing cone u = 0 and on the
ingoing ray v = v0, plus profiles on the spacelike part of the initial
surface.

On the cone r* = v/2, so a profile can be written natively in v or in r;
each class implements one pair and inherits the conversion
d/dv = (D/2) d/dr for the other.
"""

from dataclasses import dataclass

import numpy as np

from geometry.coordinates import CoordinateMap


def smooth_bump(x):
    """e^4 exp(-1/(x(1-x))) on (0, 1), zero elsewhere; equals 1 at 1/2."""
    x = np.asarray(x, dtype=float)
    inside = (x > 0.0) & (x < 1.0)
    xs = np.where(inside, x, 0.5)
    return np.where(inside, np.exp(4.0 - 1.0 / (xs * (1.0 - xs))), 0.0)


def smooth_bump_slope(x):
    x = np.asarray(x, dtype=float)
    inside = (x > 0.0) & (x < 1.0)
    xs = np.where(inside, x, 0.5)
    q = xs * (1.0 - xs)
    return np.where(
        inside, np.exp(4.0 - 1.0 / q) * (1.0 - 2.0 * xs) / q**2, 0.0
    )


@dataclass(frozen=True, eq=False)
class ConeProfile:
    cmap: CoordinateMap

    #: closed v-interval outside of which the cone profile vanishes
    support: tuple[float, float] | None = None

    @property
    def ingoing_is_constant(self) -> bool:
        return True

    @property
    def r_extent(self) -> float:
        """Largest radius at which the evaluators are meaningful."""
        return np.inf

    def radius(self, v):
        return self.cmap.inverse_tortoise(np.asarray(v, dtype=float) / 2.0)

    def phi(self, v):
        return self.phi_r(self.radius(v))

    def dphi_dv(self, v):
        r = self.radius(v)
        return 0.5 * self.cmap.model.D(r) * self.dphi_dr(r)

    def phi_r(self, r):
        return self.phi(2.0 * self.cmap.tortoise(r))

    def dphi_dr(self, r):
        v = 2.0 * self.cmap.tortoise(r)
        return 2.0 * self.dphi_dv(v) / self.cmap.model.D(r)

    def ingoing(self, r):
        """phi along v = v0 as a function of r <= R."""
        R = self.cmap.model.reference_radius
        return np.full_like(np.asarray(r, dtype=float), self.phi_r(R))

    def ingoing_dr(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))


@dataclass(frozen=True, eq=False)
class BumpProfile(ConeProfile):
    center: float = 0.0
    width: float = 1.0
    amplitude: float = 0.0

    def _x(self, v):
        v = np.asarray(v, dtype=float)
        return (v - self.center + self.width) / (2.0 * self.width)

    def phi(self, v):
        return self.amplitude * smooth_bump(self._x(v))

    def dphi_dv(self, v):
        return (
            self.amplitude
            * smooth_bump_slope(self._x(v))
            / (2.0 * self.width)
        )


@dataclass(frozen=True, eq=False)
class TailProfile(ConeProfile):
    """r^2 d(phi)/dr = I0 + sum_m p_m r^-m exactly on the cone."""

    I0: float = 0.0
    p_coeffs: tuple[float, ...] = ()
    phi_vertex: float = 0.0

    def phi_r(self, r):
        r = np.asarray(r, dtype=float)
        R = self.cmap.model.reference_radius
        value = self.phi_vertex + self.I0 * (1.0 / R - 1.0 / r)
        for m, p in enumerate(self.p_coeffs, start=1):
            value = value + p * (R ** (-m - 1) - r ** (-m - 1)) / (m + 1)
        return value

    def dphi_dr(self, r):
        r = np.asarray(r, dtype=float)
        value = self.I0 + np.zeros_like(r)
        for m, p in enumerate(self.p_coeffs, start=1):
            value = value + p * r ** (-m)
        return value / r**2

    def ingoing(self, r):
        return np.full_like(np.asarray(r, dtype=float), self.phi_vertex)


@dataclass(frozen=True, eq=False)
class CombinedProfile(ConeProfile):
    terms: tuple[tuple[float, ConeProfile], ...] = ()

    @property
    def ingoing_is_constant(self) -> bool:
        return all(p.ingoing_is_constant for _, p in self.terms)

    @property
    def r_extent(self) -> float:
        return min((p.r_extent for _, p in self.terms), default=np.inf)

    def _combine(self, method, arg):
        total = np.zeros_like(np.asarray(arg, dtype=float))
        for coefficient, profile in self.terms:
            if coefficient != 0.0:
                total = total + coefficient * getattr(profile, method)(arg)
        return total

    def phi(self, v):
        return self._combine("phi", v)

    def dphi_dv(self, v):
        return self._combine("dphi_dv", v)

    def phi_r(self, r):
        return self._combine("phi_r", r)

    def dphi_dr(self, r):
        return self._combine("dphi_dr", r)

    def ingoing(self, r):
        return self._combine("ingoing", r)

    def ingoing_dr(self, r):
        return self._combine("ingoing_dr", r)


@dataclass(frozen=True)
class SpacelikeBump:
    """phi, d(phi)/d(rho) and T(phi) on the spacelike part of Sigma_0.

    Both phi and T(phi) are smooth bumps on [center - width, center +
    width]; ``amplitude`` scales phi and ``t_amplitude`` scales T(phi).
    """

    center: float = 0.0
    width: float = 1.0
    amplitude: float = 0.0
    t_amplitude: float = 0.0

    @property
    def support(self) -> tuple[float, float]:
        return (self.center - self.width, self.center + self.width)

    def _x(self, rho):
        rho = np.asarray(rho, dtype=float)
        return (rho - self.center + self.width) / (2.0 * self.width)

    def phi(self, rho):
        return self.amplitude * smooth_bump(self._x(rho))

    def dphi(self, rho):
        return (
            self.amplitude
            * smooth_bump_slope(self._x(rho))
            / (2.0 * self.width)
        )

    def tphi(self, rho):
        return self.t_amplitude * smooth_bump(self._x(rho))
