from geometry.exceptions import LabError


class InitialDataError(LabError):
    module = "initial_data"


class SupportOutsideGrid(InitialDataError):
    pass


class ModeMismatch(InitialDataError):
    pass


class GridMismatch(InitialDataError):
    pass


class JunctionMismatch(InitialDataError):
    pass


class BifurcationSphereSupport(InitialDataError):
    pass
