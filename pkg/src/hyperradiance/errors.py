"""Exception types raised by the solvers and observable routines."""


class SolverError(RuntimeError):
    """Base class for failures of the steady-state and time-evolution solvers."""


class NonUniqueSteadyState(SolverError):
    """The trace-constrained Liouvillian system is numerically singular."""


class NotConverged(SolverError):
    """The iterative steady-state solver did not reach its tolerance."""


class StepUnstable(SolverError):
    """Trace drift in one integration step exceeded the allowed bound."""


class CutoffCeiling(SolverError):
    """Fock cutoffs reached the configured maximum without converging."""


class ObservableUndefined(ArithmeticError):
    """Base class for ratios whose denominator is too small to be meaningful."""


class OccupationTooSmall(ObservableUndefined):
    pass


class DenominatorTooSmall(ObservableUndefined):
    pass


class HermitianExpectationComplex(ValueError):
    """Expectation value of a Hermitian operator has a non-negligible imaginary part."""
