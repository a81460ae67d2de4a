"""Exception hierarchy shared by every package."""


class CastDefectError(Exception):
    """Base class for all errors raised by castdefect."""

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class DomainError(CastDefectError):
    """Raised for mathematically invalid values (degenerate boxes, non-finite sizes)."""


class ContractError(CastDefectError):
    """Raised when a caller breaks an operation's input contract."""


class ConfigError(CastDefectError):
    """Raised for configuration combinations that validation alone cannot rule out."""


class CheckFailure(CastDefectError):
    """Raised inside a self-check suite when an oracle disagrees with the library."""


class RecordParseError(CastDefectError):
    """Raised when a row of an input file does not parse."""

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line
