"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
NumericError and ShapeError -> 3.
"""


class TyphooncastError(Exception):
    pass


class ShapeError(TyphooncastError):
    """Operands do not conform for an operation."""

    def __init__(self, op, *shapes, detail=""):
        self.op = op
        self.shapes = shapes
        msg = f"{op}: incompatible shapes {' vs '.join(str(tuple(s)) for s in shapes)}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class ConfigError(TyphooncastError):
    """Invalid configuration value or combination."""


class DataError(TyphooncastError):
    """Malformed or missing input data."""


class NumericError(TyphooncastError):
    """Non-finite values or failed numeric contracts at runtime."""
