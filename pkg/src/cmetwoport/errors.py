"""Exception types shared across the package.

Every error that maps to a CLI exit code derives from :class:`CmeError`.
"""


class CmeError(Exception):
    """Base class for all package errors."""


class SingularConversion(CmeError, ValueError):
    """I - S (or Z + z_ref I) cannot be inverted at some frequency."""

    def __init__(self, frequency, detail=""):
        self.frequency = frequency
        msg = f"singular parameter conversion at {frequency!r} Hz"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class TouchstoneError(CmeError, ValueError):
    """Base for Touchstone parse failures; ``line`` is 1-based."""

    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class TouchstoneSyntaxError(TouchstoneError):
    pass


class NonMonotonicFrequency(TouchstoneError):
    def __init__(self, line, reason="frequency is not strictly increasing"):
        super().__init__(line, reason)


class UnsupportedPortCount(TouchstoneError):
    pass


class DivisionByZeroError(CmeError, ZeroDivisionError):
    """Z11 vanishes, so the open-circuit ratio is undefined."""

    def __init__(self, frequency):
        self.frequency = frequency
        super().__init__(f"|Z11| vanishes at {frequency!r} Hz")


class SingularDeterminant(CmeError, ZeroDivisionError):
    def __init__(self, frequency):
        self.frequency = frequency
        super().__init__(f"Z-matrix determinant vanishes at {frequency!r} Hz")


class GridMismatch(CmeError, ValueError):
    pass


class OutOfGrid(CmeError, ValueError):
    def __init__(self, frequency, lo, hi):
        self.frequency = frequency
        super().__init__(f"{frequency!r} Hz lies outside the sampled range [{lo!r}, {hi!r}] Hz")


class IllConditionedFit(CmeError, ArithmeticError):
    def __init__(self, index, reason):
        self.index = index
        super().__init__(f"mode {index}: {reason}")


class PoleSingularity(CmeError, ZeroDivisionError):
    def __init__(self, frequency):
        self.frequency = frequency
        super().__init__(f"evaluation at the ideal LC pole {frequency!r} Hz")


class DegenerateSweep(CmeError, ValueError):
    pass


class SweepFormatError(CmeError, ValueError):
    """Malformed CSV/JSON sweep file; ``line`` is 1-based when known."""

    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + reason)
