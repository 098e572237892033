from geometry.exceptions import LabError


class CliError(LabError):
    module = "cli"


class ConfigError(CliError):
    """A run configuration failed validation; ``messages`` name each path."""

    def __init__(self, messages):
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))
