from geometry.exceptions import LabError


class TimeIntegralError(LabError):
    module = "time_integral"


class IntegrationFailed(TimeIntegralError):
    pass
