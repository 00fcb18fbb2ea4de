"""Exception hierarchy shared by all modules."""


class GeoRefineError(Exception):
    """Base class for every error raised by georefine."""


class ValidationError(GeoRefineError, ValueError):
    """Input data or parameters violate a documented invariant."""


class KindMismatchError(ValidationError):
    """Points from different manifolds were combined."""


class SymbolError(ValidationError):
    """A mask or factorization cannot be used by the refinement machinery."""


class NumericError(GeoRefineError, ArithmeticError):
    """A numerical routine failed (non-convergence, non-finite values)."""


class GeodesicDomainError(NumericError):
    """A geodesic average left the region where it is uniquely defined."""

    def __init__(self, message, t=None, index=None, round_index=None):
        super().__init__(message)
        self.t = t
        self.index = index
        self.round_index = round_index

    def __str__(self):
        msg = super().__str__()
        extra = []
        if self.round_index is not None:
            extra.append(f"round {self.round_index}")
        if self.index is not None:
            extra.append(f"index {self.index}")
        if self.t is not None:
            extra.append(f"t={self.t:.17g}")
        return f"{msg} ({', '.join(extra)})" if extra else msg


class RefinementError(NumericError):
    """Refinement cannot proceed, e.g. an open polyline shrank too far."""
