from dataclasses import dataclass, field
from typing import Any

import numpy as np

from initial_data.profiles import ConeProfile


def far_integrals(r, d_coeffs):
    """int_r^oo dr'/(D r'^2) and int_r^oo dr'/(D r'^3) to O(r^-3)."""
    d1 = d_coeffs[0] if len(d_coeffs) > 0 else 0.0
    d2 = d_coeffs[1] if len(d_coeffs) > 1 else 0.0
    second = 1.0 / r - d1 / (2.0 * r**2) + (d1**2 - d2) / (3.0 * r**3)
    third = 1.0 / (2.0 * r**2) - d1 / (3.0 * r**3)
    return second, third


@dataclass(frozen=True, eq=False)
class TimeIntegralProfile(ConeProfile):
    """phi^(1) = r psi^(1) on the cone and on the ingoing ray.

    On the cone the solution of the inward radial integration is kept as
    the dense output ``outer`` over s = ln r with state (J, Q), where
    J(r) = 2 int_r^oo r' d(phi)/dr' of the source and Q = r^2 d(phi^(1))/dr.
    Beyond ``r_far`` the leading terms of the 1/r expansion take over. On
    the ray ``ray`` holds (K, psi^(1)) against r, with K the flux of the
    source along the ray; None stands for a source whose ray is constant.
    """

    C0: float = 0.0
    r_far: float = np.inf
    J_far: float = 0.0
    outer: Any = field(default=None, repr=False)
    psi_R: float = 0.0
    ray: Any = field(default=None, repr=False)
    r_stop: float = 0.0

    @property
    def ingoing_is_constant(self) -> bool:
        return False

    def _cone_state(self, r):
        """(J, psi, Q) at radii r >= R."""
        model = self.cmap.model
        r = np.atleast_1d(np.asarray(r, dtype=float))
        J = np.empty_like(r)
        Q = np.empty_like(r)
        psi = np.empty_like(r)
        near = r <= self.r_far
        if np.any(near):
            s = np.clip(
                np.log(r[near]),
                np.log(model.reference_radius),
                np.log(self.r_far),
            )
            J[near], Q[near] = self.outer(s)
            psi[near] = (
                Q[near] / r[near] ** 2
                - (self.C0 - J[near]) / (model.D(r[near]) * r[near])
            )
        far = ~near
        if np.any(far):
            second, third = far_integrals(r[far], model.d_coeffs)
            J[far] = self.J_far * self.r_far / r[far]
            psi[far] = -self.C0 * second + self.J_far * self.r_far * third
            Q[far] = r[far] ** 2 * psi[far] + r[far] * (
                self.C0 - J[far]
            ) / model.D(r[far])
        return J, psi, Q

    def _restore(self, r, values):
        if np.ndim(r) == 0:
            return float(values[0])
        return values.reshape(np.shape(r))

    def psi(self, r):
        return self._restore(r, self._cone_state(r)[1])

    def flux(self, r):
        """J(r) of the source along the cone."""
        return self._restore(r, self._cone_state(r)[0])

    def phi_r(self, r):
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        return self._restore(r, r_arr * self._cone_state(r_arr)[1])

    def dphi_dr(self, r):
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        return self._restore(r, self._cone_state(r_arr)[2] / r_arr**2)

    def _ray_state(self, r):
        """(K, psi^(1)) at radii r <= R; both held below ``r_stop``."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if self.ray is None:
            return np.zeros_like(r), np.full_like(r, self.psi_R)
        R = self.cmap.model.reference_radius
        K, psi = self.ray(np.clip(r, self.r_stop, R))
        held = r < self.r_stop
        K = np.where(held, 0.0, K)
        return K, psi

    def source_flux(self, r):
        """K(r) = int_{r_min}^r 2 r' d(phi)/dr' of the source ray."""
        return self._restore(r, self._ray_state(r)[0])

    def ingoing(self, r):
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        return self._restore(r, r_arr * self._ray_state(r_arr)[1])

    def ingoing_dr(self, r):
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        K, psi = self._ray_state(r_arr)
        D = np.asarray(self.cmap.model.D(r_arr), dtype=float)
        safe = np.where(K != 0.0, D * r_arr, 1.0)
        return self._restore(r, psi - K / safe)
