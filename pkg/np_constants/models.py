from dataclasses import dataclass, field

from django.db import models

from np_constants.exceptions import MissingConstant


class Method(models.TextChoices):
    CLOSED_FORM = "closed_form", "Closed-form quadrature"
    CONSTRUCTED_LIMIT = "constructed_limit", "Limit of the constructed field"
    BOTH = "both", "Both oracles"


@dataclass(frozen=True)
class Estimate:
    value: float
    error: float
    method: str = Method.CLOSED_FORM


@dataclass(frozen=True)
class LimitFit:
    """Polynomial fit y(r) ~ sum_k coefficients[k] r^-k at large r."""

    value: float
    error: float
    coefficients: tuple[float, ...]
    radii: tuple[float, ...]

    def estimate(self, method=Method.CLOSED_FORM) -> Estimate:
        return Estimate(self.value, self.error, method)


@dataclass(frozen=True)
class NpEntry:
    k: int
    value: float
    error: float
    method: str
    closed_form: Estimate | None = None
    constructed: Estimate | None = None
    agreement: float | None = None
    expansion: tuple[float, ...] = ()


@dataclass(frozen=True)
class NpReport:
    """NP constant, integrability constant and time-inverted constants.

    The field is the spherical mode itself, so no 1/(4 pi) spherical-mean
    prefactor appears in any value.
    """

    I0: Estimate
    C0: Estimate | None = None
    inverted: list[NpEntry] = field(default_factory=list)
    schema: int = 1

    def constant(self, k: int) -> float:
        """I0 for k = 0, I0^(k) otherwise."""
        if k == 0:
            return self.I0.value
        for entry in self.inverted:
            if entry.k == k:
                return entry.value
        raise MissingConstant(f"the report carries no I0^({k})")
