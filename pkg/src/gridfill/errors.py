"""Exception types shared across the package."""


class GridfillError(Exception):
    """Base class for all package errors."""


class ContractViolation(GridfillError):
    """An operation was called with arguments violating its contract."""


class CodecError(GridfillError):
    """Encoding or decoding between a task format and RGB failed."""


class AssemblyError(GridfillError):
    """Grid assembly received inconsistent context/query pairs."""


class ScheduleError(GridfillError):
    """A noise schedule or step plan is invalid or used out of range."""


class DatasetError(GridfillError):
    """A dataset directory or manifest is missing or corrupt."""
