"""Shared exception types."""


class UnbiasedError(Exception):
    """Base class for all package-specific errors."""


class SingularMatrix(UnbiasedError):
    """Matrix is singular (or too close to it) for the requested operation.

    Carries the offending pivot magnitude and the floor it violated.
    """

    def __init__(self, pivot_magnitude, floor):
        self.pivot_magnitude = float(pivot_magnitude)
        self.floor = float(floor)
        super().__init__(
            f"singular matrix: pivot magnitude {self.pivot_magnitude:.3e} "
            f"at or below floor {self.floor:.3e}"
        )


class ZeroEntry(UnbiasedError):
    """An operation that divides by matrix entries met an exact zero."""

    def __init__(self, index):
        self.index = tuple(index)
        super().__init__(f"zero entry at position {self.index}")


class SizeGuard(UnbiasedError):
    """Requested dimension exceeds the factorial/enumeration guard."""

    def __init__(self, n, limit):
        self.n = int(n)
        self.limit = int(limit)
        super().__init__(f"n={self.n} exceeds guard n<={self.limit}")


class NoConvergence(UnbiasedError):
    """Newton iteration did not reach the residual tolerance."""

    def __init__(self, reason, final_residual, iterations):
        self.reason = str(reason)
        self.final_residual = float(final_residual)
        self.iterations = int(iterations)
        super().__init__(
            f"no convergence ({self.reason}) after {self.iterations} iterations, "
            f"final residual {self.final_residual:.3e}"
        )
