import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from django.conf import settings
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from geometry.exceptions import BelowHorizon, TableDomainExceeded
from geometry.models import SpacetimeModel

logger = logging.getLogger(__name__)

GAUSS_NODES, GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(16)
NEWTON_ITERATIONS = 12


def _as_array(value):
    array = np.asarray(value, dtype=float)
    return np.atleast_1d(array), array.ndim == 0


def _restore(values, scalar):
    return float(values[0]) if scalar else values


@dataclass(frozen=True, eq=False)
class CoordinateMap:
    """Tortoise coordinate r*(r) = R + int_R^r dr'/D and its inverse.

    Radii are handled through the offset x = r - r_min. In Case I the
    integrand is split into ln(x)/kappa, kappa = D'(r_+), plus a regular
    remainder whose integral is tabulated on geometrically spaced nodes.
    """

    model: SpacetimeModel
    offsets: np.ndarray
    regular_nodes: np.ndarray
    shift: float

    @classmethod
    def build(cls, model: SpacetimeModel, table_max: float | None = None):
        lab = settings.LAB
        scale = model.scale
        if table_max is None:
            table_max = lab["TABLE_RADIUS_FACTOR"] * scale
        x_hi = table_max - model.r_min
        ratio = lab["TABLE_RATIO"]

        if model.is_black_hole:
            x_lo = (1e-8 if model.exact_offset else 1e-5) * model.r_plus
            count = math.ceil(math.log(x_hi / x_lo) / math.log(ratio)) + 1
            offsets = np.geomspace(x_lo, x_hi, count)
        else:
            count = math.ceil(math.log(x_hi / scale) / math.log(ratio)) + 1
            offsets = np.concatenate(
                (
                    np.linspace(0.0, scale, 65)[:-1],
                    np.geomspace(scale, x_hi, count),
                )
            )

        cmap = cls(
            model=model,
            offsets=offsets,
            regular_nodes=np.zeros_like(offsets),
            shift=0.0,
        )
        segments = [
            integrate.quad(
                cmap._regular_integrand,
                a,
                b,
                epsabs=0.0,
                epsrel=lab["TORTOISE_RTOL"],
                limit=200,
            )[0]
            for a, b in zip(offsets[:-1], offsets[1:])
        ]
        object.__setattr__(
            cmap,
            "regular_nodes",
            np.concatenate(([0.0], np.cumsum(segments))),
        )
        R = model.reference_radius
        raw = cmap._raw(np.array([R - model.r_min]))[0]
        object.__setattr__(cmap, "shift", R - raw)
        logger.debug(
            "Tortoise table with %d nodes on x in [%g, %g]",
            offsets.size,
            offsets[0],
            offsets[-1],
        )
        return cmap

    @property
    def kappa(self) -> float:
        return self.model.surface_gravity

    @cached_property
    def rstar_nodes(self) -> np.ndarray:
        return self.shift + self._raw(self.offsets)

    @cached_property
    def rstar_min(self) -> float:
        """r*(r = 0) in Case II, -inf in Case I."""
        if self.model.is_black_hole:
            return -np.inf
        return float(self.rstar_nodes[0])

    @cached_property
    def rstar_max(self) -> float:
        return float(self.rstar_nodes[-1])

    @cached_property
    def _interpolant(self) -> PchipInterpolator:
        if self.model.is_black_hole:
            return PchipInterpolator(self.rstar_nodes, np.log(self.offsets))
        return PchipInterpolator(self.rstar_nodes, self.offsets)

    @cached_property
    def _edge(self) -> tuple[float, float, float]:
        x0, x1 = self.offsets[0], self.offsets[1]
        g0, g1 = self._regular_integrand(np.array([x0, x1]))
        return x0, g0, (g1 - g0) / (x1 - x0)

    def _regular_integrand(self, x):
        x = np.asarray(x, dtype=float)
        model = self.model
        if not model.is_black_hole:
            return 1.0 / model.D_offset(x)
        if model.custom is None:
            # 1/D - 1/(kappa x) over a common denominator
            r_plus = model.r_plus
            gap = r_plus - model.r_minus
            return (2.0 * gap * r_plus - r_plus**2 + gap * x) / (
                gap * (x + gap)
            )
        return 1.0 / model.D_offset(x) - 1.0 / (self.kappa * x)

    def _regular(self, x: np.ndarray) -> np.ndarray:
        """int_{x_0}^x of the regular integrand."""
        offsets = self.offsets
        out = np.empty_like(x)
        idx = np.searchsorted(offsets, x, side="right") - 1
        below = idx < 0
        above = x >= offsets[-1]
        inside = ~below & ~above

        if np.any(inside):
            k = idx[inside]
            a = offsets[k]
            half = 0.5 * (x[inside] - a)
            mid = 0.5 * (x[inside] + a)
            nodes = mid[:, None] + half[:, None] * GAUSS_NODES[None, :]
            out[inside] = self.regular_nodes[k] + half * (
                self._regular_integrand(nodes) @ GAUSS_WEIGHTS
            )
        if np.any(below):
            x0, g0, slope = self._edge
            gap = x0 - x[below]
            out[below] = -g0 * gap + 0.5 * slope * gap**2
        for i in np.flatnonzero(above):
            out[i] = (
                self.regular_nodes[-1]
                + integrate.quad(
                    self._regular_integrand,
                    offsets[-1],
                    x[i],
                    epsabs=0.0,
                    epsrel=settings.LAB["TORTOISE_RTOL"],
                    limit=200,
                )[0]
            )
        return out

    def _raw(self, x: np.ndarray) -> np.ndarray:
        if self.model.is_black_hole:
            return np.log(x) / self.kappa + self._regular(x)
        return self._regular(x)

    def _rstar_of_log_offset(self, y: np.ndarray) -> np.ndarray:
        return self.shift + y / self.kappa + self._regular(np.exp(y))

    def tortoise(self, r):
        values, scalar = _as_array(r)
        model = self.model
        x = values - model.r_min
        if model.is_black_hole and np.any(x <= 0.0):
            raise BelowHorizon(f"r must exceed r_+ = {model.r_plus}")
        if not model.is_black_hole and np.any(values < 0.0):
            raise TableDomainExceeded("r must be non-negative")
        result = self.shift + self._raw(x)
        result[values == model.reference_radius] = model.reference_radius
        return _restore(result, scalar)

    def horizon_offset(self, rstar):
        """r(r*) - r_min, accurate even where r itself rounds to r_+."""
        values, scalar = _as_array(rstar)
        if np.any(values > self.rstar_max):
            raise TableDomainExceeded(
                f"r* above the tabulated range ({self.rstar_max:g})"
            )
        if self.model.is_black_hole:
            x = self._invert_log(values)
        else:
            x = self._invert_linear(values)
        return _restore(x, scalar)

    def _invert_log(self, target: np.ndarray) -> np.ndarray:
        kappa = self.kappa
        first = self.rstar_nodes[0]
        y = np.where(
            target >= first,
            self._interpolant(np.maximum(target, first)),
            np.log(self.offsets[0]) + kappa * (target - first),
        )
        for _ in range(NEWTON_ITERATIONS):
            x = np.exp(y)
            # dr*/dy = x / D, written via kappa x / D -> 1 as x -> 0
            ratio = np.where(
                x > 0.0,
                self.model.D_offset(x) / np.where(x > 0.0, x, 1.0),
                kappa,
            )
            step = (self._rstar_of_log_offset(y) - target) * ratio
            y = y - step
            if np.all(np.abs(step) <= 4e-16 * np.maximum(1.0, np.abs(y))):
                break
        return np.exp(y)

    def _invert_linear(self, target: np.ndarray) -> np.ndarray:
        floor = self.rstar_nodes[0]
        if np.any(target < floor - 1e-12 * max(1.0, abs(floor))):
            raise TableDomainExceeded(
                f"r* = {target.min():g} lies below r = 0 (r* = {floor:g})"
            )
        target = np.maximum(target, floor)
        x = self._interpolant(target)
        for _ in range(NEWTON_ITERATIONS):
            step = (
                self.shift + self._regular(x) - target
            ) * self.model.D_offset(x)
            x = np.maximum(x - step, 0.0)
            if np.all(np.abs(step) <= 4e-16 * np.maximum(1.0, x)):
                break
        return x

    def inverse_tortoise(self, rstar):
        values, scalar = _as_array(rstar)
        model = self.model
        r = model.r_min + np.atleast_1d(self.horizon_offset(values))
        if model.is_black_hole:
            r = np.maximum(r, np.nextafter(model.r_plus, np.inf))
        r[values == model.reference_radius] = model.reference_radius
        return _restore(r, scalar)


def build_coordinate_map(model: SpacetimeModel, **kwargs) -> CoordinateMap:
    return CoordinateMap.build(model, **kwargs)


def tortoise(cmap: CoordinateMap, r):
    return cmap.tortoise(r)


def inverse_tortoise(cmap: CoordinateMap, rstar):
    return cmap.inverse_tortoise(rstar)


def model_table(cmap: CoordinateMap, radii) -> dict[str, np.ndarray]:
    """Columns (r, D, D', r*) for the ``model`` subcommand."""
    radii = np.asarray(radii, dtype=float)
    model = cmap.model
    return {
        "r": radii,
        "D": np.asarray(model.D(radii), dtype=float)
        * np.ones_like(radii),
        "dD": np.asarray(model.dD(radii), dtype=float)
        * np.ones_like(radii),
        "rstar": np.atleast_1d(cmap.tortoise(radii)),
    }
