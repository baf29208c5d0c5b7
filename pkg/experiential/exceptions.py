class ExperientialError(Exception):
    """Base class for errors raised by the experiential package"""


class ContractViolation(ExperientialError):
    """A caller broke an operation's precondition"""


class GraphFormatError(ExperientialError):
    """A model file could not be read back into a transition graph"""


class ExportError(ExperientialError):
    """Writing an export file failed"""


class ConfigError(ExperientialError):
    """Invalid experiment configuration"""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class LogFormatError(ExperientialError):
    """A JSON-lines log holds a line that cannot be parsed"""

    def __init__(self, path: str, line_number: int, message: str):
        self.path = path
        self.line_number = line_number
        super().__init__(f"{path}:{line_number}: {message}")
