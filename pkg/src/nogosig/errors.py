"""Exception types. Every error carries a stable string ``code``."""


class NoGoSigError(Exception):
    code = "ERROR"

    def __init__(self, message: str = ""):
        super().__init__(f"{self.code}: {message}" if message else self.code)


class LayoutLabelClash(NoGoSigError, ValueError):
    code = "LAYOUT_LABEL_CLASH"


class DimMismatch(NoGoSigError, ValueError):
    code = "DIM_MISMATCH"


class ZeroState(NoGoSigError, ValueError):
    code = "ZERO_STATE"


class UnknownFactor(NoGoSigError, KeyError):
    code = "UNKNOWN_FACTOR"

    def __str__(self) -> str:
        return Exception.__str__(self)


class BadPermutation(NoGoSigError, ValueError):
    code = "BAD_PERMUTATION"


class BadOverlap(NoGoSigError, ValueError):
    code = "BAD_OVERLAP"


class DegeneratePair(NoGoSigError, ValueError):
    code = "DEGENERATE_PAIR"


class DegenerateSpec(NoGoSigError, ValueError):
    code = "DEGENERATE_SPEC"


class OutsideSpan(NoGoSigError, ValueError):
    code = "OUTSIDE_SPAN"

    def __init__(self, message: str = "", component=None):
        super().__init__(message)
        self.component = component


class InvalidState(NoGoSigError, ValueError):
    """Raised when a ket or density violates its type invariants."""

    code = "INVALID_STATE"
