from dataclasses import dataclass, field

import numpy as np
from django.db import models

from evolution.exceptions import GridMisaligned
from geometry.coordinates import CoordinateMap

ALIGNMENT_TOLERANCE = 1e-9


def _steps(length: float, h: float, name: str) -> int:
    count = length / h
    if abs(count - round(count)) > ALIGNMENT_TOLERANCE * max(1.0, count):
        raise GridMisaligned(f"{name} = {length:g} is not a multiple of h")
    return int(round(count))


@dataclass(frozen=True)
class NullGrid:
    """Characteristic rectangle 0 <= u <= u_max, v0 <= v <= v_max.

    Row n sits at u = n h and column j at v = v0 + j h.
    """

    h: float
    u_max: float
    v0: float
    v_max: float

    def __post_init__(self):
        if not self.h > 0:
            raise GridMisaligned(f"step must be positive, got {self.h}")
        if not self.v_max > self.v0:
            raise GridMisaligned("v_max must exceed v0")
        _steps(self.u_max, self.h, "u_max")
        _steps(self.v_max - self.v0, self.h, "v_max - v0")

    @property
    def n_u(self) -> int:
        return _steps(self.u_max, self.h, "u_max")

    @property
    def n_v(self) -> int:
        return _steps(self.v_max - self.v0, self.h, "v_max - v0")

    @property
    def cells(self) -> int:
        return (self.n_u + 1) * (self.n_v + 1)

    @property
    def u(self) -> np.ndarray:
        return self.h * np.arange(self.n_u + 1)

    @property
    def v(self) -> np.ndarray:
        return self.v0 + self.h * np.arange(self.n_v + 1)

    def row(self, u: float) -> int:
        return _steps(u, self.h, "u")

    def column(self, v: float) -> int:
        return _steps(v - self.v0, self.h, "v - v0")

    def refined(self, factor: int = 2) -> "NullGrid":
        return NullGrid(self.h / factor, self.u_max, self.v0, self.v_max)


class ObserverKind(models.TextChoices):
    CONSTANT_R = "constant_r", "Constant r"
    CONSTANT_RSTAR = "constant_rstar", "Constant r*"
    HORIZON_PROXY = "horizon_proxy", "Constant r* far inside (clock v)"
    SCRI_PROXY = "scri_proxy", "Radiation field at v = v_max"
    GAMMA_ALPHA = "gamma_alpha", "Curve v - u = v^alpha"


@dataclass(frozen=True)
class ObserverCurve:
    kind: str
    value: float | None = None

    def __post_init__(self):
        kind = ObserverKind(self.kind)
        if kind == ObserverKind.GAMMA_ALPHA and not (
            self.value is not None and 2.0 / 3.0 < self.value < 1.0
        ):
            raise ValueError(f"alpha must lie in (2/3, 1), got {self.value}")
        optional = (ObserverKind.SCRI_PROXY, ObserverKind.HORIZON_PROXY)
        if kind not in optional and self.value is None:
            raise ValueError(f"observer '{kind}' needs a value")

    @property
    def uses_advanced_time(self) -> bool:
        return self.kind == ObserverKind.HORIZON_PROXY

    @property
    def id(self) -> str:
        if self.kind == ObserverKind.SCRI_PROXY:
            return "scri"
        if self.kind == ObserverKind.HORIZON_PROXY and self.value is None:
            return "horizon"
        prefix = {
            ObserverKind.CONSTANT_R: "r",
            ObserverKind.CONSTANT_RSTAR: "rstar",
            ObserverKind.HORIZON_PROXY: "horizon",
            ObserverKind.GAMMA_ALPHA: "gamma",
        }[ObserverKind(self.kind)]
        return f"{prefix}={self.value:g}"

    @classmethod
    def from_id(cls, curve_id: str) -> "ObserverCurve":
        if curve_id == "scri":
            return cls(ObserverKind.SCRI_PROXY)
        if curve_id == "horizon":
            return cls(ObserverKind.HORIZON_PROXY)
        prefix, _, value = curve_id.partition("=")
        kinds = {
            "r": ObserverKind.CONSTANT_R,
            "rstar": ObserverKind.CONSTANT_RSTAR,
            "horizon": ObserverKind.HORIZON_PROXY,
            "gamma": ObserverKind.GAMMA_ALPHA,
        }
        if prefix not in kinds or not value:
            raise ValueError(f"unknown observer id '{curve_id}'")
        return cls(kinds[prefix], float(value))


SERIES_COLUMNS = (
    "tau",
    "u",
    "v",
    "r",
    "phi",
    "psi",
    "Tpsi",
    "T2psi",
    "v2dvphi",
)


@dataclass(frozen=True, eq=False)
class ObserverSeries:
    """Samples along one observer curve, one per grid row it crosses.

    ``tau`` is u, or v on the horizon proxy. The constant separating it
    from the time function of the initial surface is reported as
    ``tau_offset`` and not folded in.
    """

    curve: ObserverCurve
    tau: np.ndarray
    u: np.ndarray
    v: np.ndarray
    r: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    Tpsi: np.ndarray
    T2psi: np.ndarray
    v2dvphi: np.ndarray
    tau_offset: float = 0.0

    def __len__(self) -> int:
        return self.tau.size

    def field(self, name: str) -> np.ndarray:
        if name == "rpsi":
            return self.phi
        if name not in SERIES_COLUMNS:
            raise KeyError(f"unknown series field '{name}'")
        return getattr(self, name)

    def columns(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in SERIES_COLUMNS}


@dataclass
class Diagnostics:
    cells: int
    h: float
    audited_cells: int = 0
    residual_max: float = 0.0
    residual_rms: float = 0.0
    np_scalar: list[tuple[float, float]] = field(default_factory=list)
    np_drift: float | None = None
    derivative_scalar: list[tuple[float, float]] = field(
        default_factory=list
    )
    tau_offsets: dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "cells": self.cells,
            "h": self.h,
            "audited_cells": self.audited_cells,
            "residual_max": self.residual_max,
            "residual_rms": self.residual_rms,
            "np_scalar": [list(pair) for pair in self.np_scalar],
            "np_drift": self.np_drift,
            "derivative_scalar": [
                list(pair) for pair in self.derivative_scalar
            ],
            "tau_offsets": dict(sorted(self.tau_offsets.items())),
        }


@dataclass(frozen=True, eq=False)
class EvolutionResult:
    cmap: CoordinateMap = field(repr=False)
    ell: int
    grid: NullGrid
    series: dict[str, ObserverSeries]
    #: column index -> (n_u + 1, 4) array of phi at columns c-3 .. c
    columns: dict[int, np.ndarray] = field(repr=False)
    final_row: np.ndarray = field(repr=False)
    diagnostics: Diagnostics
    snapshot: np.ndarray | None = field(default=None, repr=False)
    snapshot_stride: int = 0
    #: diagonal index j - n of the regular centre; None with a horizon
    axis_diagonal: int | None = None

    @property
    def model(self):
        return self.cmap.model
