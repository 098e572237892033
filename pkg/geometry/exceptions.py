class LabError(Exception):
    """Base class for every error raised by the laboratory apps.

    ``module`` tags the app the error came from so that the verification
    report can attribute failures.
    """

    module = "lab"


class GeometryError(LabError):
    module = "geometry"


class NegativeMass(GeometryError):
    pass


class ExtremalOrSuperextremal(GeometryError):
    pass


class CustomSignViolation(GeometryError):
    pass


class BelowHorizon(GeometryError):
    pass


class TableDomainExceeded(GeometryError):
    pass
