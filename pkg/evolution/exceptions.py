from geometry.exceptions import LabError


class EvolutionError(LabError):
    module = "evolution"


class NaNDetected(EvolutionError):
    def __init__(self, u: float, v: float):
        self.u = u
        self.v = v
        super().__init__(f"non-finite value at u = {u:.17g}, v = {v:.17g}")


class BudgetExceeded(EvolutionError):
    pass


class ColumnNotRetained(EvolutionError):
    pass


class ObserverOutsideGrid(EvolutionError):
    pass


class GridMisaligned(EvolutionError):
    pass
