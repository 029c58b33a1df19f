"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: ConfigError -> 1 (usage),
DataError -> 2, NumericalError and ShapeError -> 3.
"""


class CagnnError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(CagnnError):
    """Invalid configuration or model build request."""


class DataError(CagnnError):
    """Malformed or inconsistent dataset, split, or model file."""


class DegenerateNodeError(DataError):
    """A node makes an operation ill-defined (e.g. degree zero under normalization)."""


class ShapeError(CagnnError):
    """Operands have incompatible shapes."""


class NumericalError(CagnnError):
    """Non-finite values or a failed numerical verification."""


def check_shapes(cond: bool, message: str) -> None:
    if not cond:
        raise ShapeError(message)
