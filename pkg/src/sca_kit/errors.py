"""Exception hierarchy shared by every module in the package."""


class ScaKitError(Exception):
    """Base class for all data and runtime errors raised by sca_kit."""


class ParseError(ScaKitError, ValueError):
    """A matrix file could not be parsed.

    ``row`` and ``col`` give the 1-based location in the file when known.
    """

    def __init__(self, message, row=None, col=None):
        loc = ""
        if row is not None:
            loc = f" (line {row}" + (f", column {col})" if col is not None else ")")
        super().__init__(message + loc)
        self.row = row
        self.col = col


class DimensionError(ScaKitError, ValueError):
    pass


class NaNError(ScaKitError, ValueError):
    """Non-finite entry found; ``cell`` is the 0-based (row, col) data index."""

    def __init__(self, cell):
        super().__init__(f"non-finite value detected at cell ({cell[0]},{cell[1]})")
        self.cell = cell


class NegativeInputError(ScaKitError, ValueError):
    pass


class UndefinedVarianceError(ScaKitError, ValueError):
    pass


class DegenerateMatrixError(ScaKitError, ValueError):
    pass


class StimulusMismatchError(ScaKitError, ValueError):
    pass


class ConstantColumnError(ScaKitError, ValueError):
    pass


class ZeroVectorError(ScaKitError, ValueError):
    pass


class InsufficientComponentsError(ScaKitError):
    def __init__(self, message, kept_fraction):
        super().__init__(f"{message} (kept_fraction={kept_fraction:.4f})")
        self.kept_fraction = kept_fraction
