"""Exception types shared across the engines.

Two broad families matter to callers: ``DomainError`` for requests outside
the mathematical domain of an operation (bad parameters, curve regimes that
do not exist), and ``ConvergenceError`` for iterative procedures that ran
out of budget.  Everything else derives from ``ClmError``.
"""


class ClmError(Exception):
    """Base class for all library errors."""


class DomainError(ClmError, ValueError):
    """The request is outside the operation's mathematical domain."""


class ConvergenceError(ClmError, RuntimeError):
    """An iterative procedure exhausted its budget without converging."""


class NotBounded(DomainError):
    """An orbit required to stay bounded escaped."""

    def __init__(self, step: int, message: str | None = None):
        self.step = step
        super().__init__(message or f"orbit escaped at step {step}")


class EmptyWindow(DomainError):
    """No post-transient iterate landed inside the requested window."""


class AmbiguousComponent(ClmError):
    """An iterate sits within tolerance of two itinerary components."""

    def __init__(self, step: int):
        self.step = step
        super().__init__(f"iterate {step} lies on a component boundary")


class DegenerateInput(DomainError):
    """Fewer than two curve vertices survive clipping."""


class BranchTopologyError(ClmError):
    """A curve preimage did not split into the expected branch layout."""


class NoL1Intersection(DomainError):
    """A graph required to meet the lower critical-value ray misses it."""


class NotConverged(ConvergenceError):
    """Fixed-point iteration hit max_iters; carries the last iterate."""

    def __init__(self, iterations: int, last_change: float, last_state=None):
        self.iterations = iterations
        self.last_change = last_change
        self.last_state = last_state
        super().__init__(
            f"no convergence after {iterations} iterations "
            f"(last sup-change {last_change:.3e})"
        )


class OrderAmbiguity(ClmError):
    """The first ray crossing along a curve is tangential at this stage."""

    def __init__(self, stage: int):
        self.stage = stage
        super().__init__(f"tangential ray crossing at stage {stage}")


class NoConvergence(ConvergenceError):
    """Newton iteration failed to reach the residual tolerance."""

    def __init__(self, iterations: int, last_residual: float):
        self.iterations = iterations
        self.last_residual = last_residual
        super().__init__(
            f"Newton stalled after {iterations} iterations "
            f"(residual {last_residual:.3e})"
        )


class ConvergedToLowerPeriod(ClmError):
    """Newton found an orbit whose minimal period divides the requested one."""

    def __init__(self, found_period: int):
        self.found_period = found_period
        super().__init__(f"converged to an orbit of period {found_period}")


class NoComplexPair(DomainError):
    """Cycle eigenvalues stayed real over the whole continuation range."""


class OrbitLost(ClmError):
    """Continuation lost the orbit before a modulus crossing."""

    def __init__(self, mu: float):
        self.mu = mu
        super().__init__(f"continuation lost the orbit near mu={mu}")
