from dataclasses import dataclass, field

from initial_data.models import CharacteristicData
from np_constants.models import Estimate, LimitFit


@dataclass(frozen=True, eq=False)
class TimeIntegralData:
    """The k-th time integral psi^(k) with T psi^(k) = psi^(k-1).

    ``data`` carries phi^(k) on the cone and on the ingoing ray, so it can
    be fed back into the closed formulas or evolved.
    """

    order: int
    data: CharacteristicData
    C0: Estimate
    c3: LimitFit
    extracted: LimitFit
    closed_form: Estimate
    source: object = field(repr=False)
    c0_shift: float = 0.0
    #: J(R) + 2 R phi(R) - K(R) of the source, from the integrated fluxes
    ray_constant: float = 0.0

    @property
    def C0_used(self) -> float:
        return self.C0.value + self.c0_shift

    @property
    def agreement(self) -> float | None:
        """Extracted over closed-form I0 of psi^(k); None if that is 0."""
        if self.closed_form.value == 0.0:
            return None
        return self.extracted.value / self.closed_form.value

    def cone_table(self, h: float, v_max: float):
        """Columns (v, phi^(k)) sampled on the cone with step h."""
        v, phi = self.data.cone_samples(h, v_max)
        return {"v": v, "phi": phi}
