from geometry.exceptions import LabError


class NpConstantsError(LabError):
    module = "np_constants"


class InsufficientRange(NpConstantsError):
    pass


class NonvanishingI0(NpConstantsError):
    pass


class DivergentCubicLimit(NpConstantsError):
    pass


class MissingConstant(NpConstantsError):
    pass


class InapplicableFormula(NpConstantsError):
    pass


class PreconditionChainBroken(NpConstantsError):
    def __init__(self, order: int, message: str = ""):
        self.order = order
        super().__init__(
            message or f"I0 of the order-{order} field does not vanish"
        )
