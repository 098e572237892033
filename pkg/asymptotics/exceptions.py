from geometry.exceptions import LabError


class AsymptoticsError(LabError):
    module = "asymptotics"


class SignChangeInWindow(AsymptoticsError):
    pass


class WindowTooShort(AsymptoticsError):
    pass


class FieldUnavailable(AsymptoticsError):
    pass
