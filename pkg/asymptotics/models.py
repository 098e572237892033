from dataclasses import dataclass, field
from math import factorial

import numpy as np
from django.db import models


class TailScenario(models.TextChoices):
    INTERIOR_ZERO_NP = "interior_zeroNP", "Interior tail, vanishing I0"
    FARFIELD_ZERO_NP = "farfield_zeroNP", "Far-field profile, vanishing I0"
    SCRI_ZERO_NP = "scri_zeroNP", "Radiation field, vanishing I0"
    HORIZON_ZERO_NP = "horizon_zeroNP", "Horizon tail, vanishing I0"
    INTERIOR_NONZERO_NP = "interior_nonzeroNP", "Interior tail, nonzero I0"
    FARFIELD_NONZERO_NP = "farfield_nonzeroNP", "Far-field profile, nonzero I0"
    SCRI_TK = "scri_Tk", "Radiation field, nonzero I0"
    HIGHER_ORDER = "higher_order", "Interior tail, vanishing I0^(1..n-1)"
    NP_SCALAR = "np_scalar", "v^2 d_v phi near infinity"


INTERIOR_LIKE = (
    TailScenario.INTERIOR_ZERO_NP,
    TailScenario.HORIZON_ZERO_NP,
    TailScenario.INTERIOR_NONZERO_NP,
    TailScenario.HIGHER_ORDER,
)
SCRI_LIKE = (TailScenario.SCRI_ZERO_NP, TailScenario.SCRI_TK)
FARFIELD = (TailScenario.FARFIELD_ZERO_NP, TailScenario.FARFIELD_NONZERO_NP)

#: (exponent tolerance, relative amplitude tolerance); None skips the check
ACCEPTANCE = {
    TailScenario.INTERIOR_ZERO_NP: (0.05, 0.15),
    TailScenario.FARFIELD_ZERO_NP: (None, 0.20),
    TailScenario.SCRI_ZERO_NP: (0.05, 0.15),
    TailScenario.HORIZON_ZERO_NP: (0.07, 0.20),
    TailScenario.INTERIOR_NONZERO_NP: (0.05, 0.10),
    TailScenario.FARFIELD_NONZERO_NP: (None, 0.20),
    TailScenario.SCRI_TK: (0.10, 0.20),
    TailScenario.HIGHER_ORDER: (0.25, 0.35),
    TailScenario.NP_SCALAR: (None, 0.10),
}


def acceptance(scenario) -> tuple[float | None, float]:
    """Bands for a scenario; T-derivatives widen them."""
    p_tol, a_tol = ACCEPTANCE[TailScenario(scenario.kind)]
    if scenario.k:
        p_tol = None if p_tol is None else max(p_tol, 0.10)
        a_tol = max(a_tol, 0.20)
    return p_tol, a_tol


@dataclass(frozen=True)
class Scenario:
    """One tail comparison: a scenario applied to T^k of a curve's field.

    ``order`` is the n of I0^(n) for ``higher_order`` and is implied by
    the scenario otherwise.
    """

    kind: str
    curve: str
    k: int = 0
    order: int | None = None
    window: tuple[float, float] | None = None

    def __post_init__(self):
        kind = TailScenario(self.kind)
        if self.k < 0:
            raise ValueError(f"k must be non-negative, got {self.k}")
        if kind == TailScenario.NP_SCALAR and self.k:
            raise ValueError("np_scalar takes no T-derivatives")
        if kind == TailScenario.HIGHER_ORDER:
            if self.order is None or self.order < 1:
                raise ValueError("higher_order needs an order n >= 1")
        elif self.order is not None:
            raise ValueError(f"'{kind}' fixes its own order")
        window = self.window
        if window is not None and not 0 < window[0] < window[1]:
            raise ValueError(f"bad window {window}")

    @property
    def n(self) -> int:
        """Order of the NP constant that sets the amplitude."""
        kind = TailScenario(self.kind)
        if kind == TailScenario.HIGHER_ORDER:
            return self.order
        if kind in (
            TailScenario.INTERIOR_NONZERO_NP,
            TailScenario.FARFIELD_NONZERO_NP,
            TailScenario.SCRI_TK,
            TailScenario.NP_SCALAR,
        ):
            return 0
        return 1

    @property
    def base_field(self) -> str:
        kind = TailScenario(self.kind)
        if kind in SCRI_LIKE:
            return "rpsi"
        if kind == TailScenario.NP_SCALAR:
            return "v2dvphi"
        return "psi"

    @property
    def field(self) -> str:
        if self.k == 0:
            return self.base_field
        return f"T{self.k}{self.base_field}"

    @property
    def constant_id(self) -> str:
        return "I0" if self.n == 0 else f"I0^({self.n})"

    @property
    def coefficient(self) -> float:
        """Amplitude per unit NP constant, with its sign."""
        kind = TailScenario(self.kind)
        m = self.n + self.k
        if kind in INTERIOR_LIKE:
            return 4.0 * (-1) ** m * factorial(m + 1)
        if kind in SCRI_LIKE:
            return 2.0 * (-1) ** m * factorial(m)
        if kind in FARFIELD:
            return 4.0 * (-1) ** m * factorial(m)
        return 2.0

    @property
    def exponent(self) -> float | None:
        kind = TailScenario(self.kind)
        m = self.n + self.k
        if kind in INTERIOR_LIKE:
            return float(m + 2)
        if kind in SCRI_LIKE:
            return float(m + 1)
        if kind == TailScenario.NP_SCALAR:
            return 0.0
        return None

    def shape(self, tau, u, v) -> np.ndarray:
        """Decay profile the amplitude multiplies."""
        tau = np.asarray(tau, dtype=float)
        if TailScenario(self.kind) not in FARFIELD:
            return tau ** -self.exponent
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        m = self.n + self.k
        x = (u + 1.0) / v if self.n == 0 else u / v
        series = sum(x**j for j in range(m + 1))
        return series / ((u + 1.0) ** (m + 1) * v)

    @property
    def id(self) -> str:
        suffix = f"/k={self.k}" if self.k else ""
        if self.order is not None:
            suffix += f"/n={self.order}"
        return f"{self.kind}@{self.curve}{suffix}"


@dataclass(frozen=True, eq=False)
class LocalIndex:
    """p(tau) = -d ln|y| / d ln tau on log-spaced samples."""

    tau: np.ndarray
    p: np.ndarray
    power_law: bool


@dataclass(frozen=True, eq=False)
class TailFit:
    scenario: Scenario
    curve: str
    field: str
    window: tuple[float, float]
    index: LocalIndex | None
    p_inf: float | None
    p_inf_error: float | None
    amplitude: float
    amplitude_error: float
    constant: float
    target: float
    deviation: float
    notes: list[str] = field(default_factory=list)

    @property
    def p_theory(self) -> float | None:
        return self.scenario.exponent

    @property
    def exponent_deviation(self) -> float | None:
        if self.p_inf is None or self.p_theory is None:
            return None
        return abs(self.p_inf - self.p_theory)

    def passes(self) -> bool:
        p_tol, a_tol = acceptance(self.scenario)
        if p_tol is not None and self.exponent_deviation is not None:
            if self.exponent_deviation > p_tol:
                return False
        return bool(self.deviation <= a_tol)
