"""Exception types raised across the package."""


class MemspinError(Exception):
    """Base class for all package errors."""


class InvalidDimension(MemspinError, ValueError):
    pass


class DegenerateSpin(MemspinError, ValueError):
    pass


class HermiticityViolation(MemspinError, ValueError):
    pass


class InvalidQuantumNumbers(MemspinError, ValueError):
    pass


class InvalidRank(MemspinError, ValueError):
    pass


class UnreachableMatrixElement(MemspinError, ValueError):
    """A requested matrix element exceeds the bare oscillator value sqrt(n)."""


class DecompositionFailure(MemspinError, ArithmeticError):
    pass


class DegenerateGenerator(MemspinError, ValueError):
    pass


class SynthesisFailure(MemspinError, RuntimeError):
    """Search did not reach the fidelity threshold.

    The best candidate found is attached as ``best``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class InvalidTarget(MemspinError, ValueError):
    pass


class ConfigurationError(MemspinError, ValueError):
    pass


class StiffnessError(MemspinError, RuntimeError):
    pass


class IntegratorFailure(MemspinError, RuntimeError):
    pass


class EmptyBranch(MemspinError, ValueError):
    """Post-selection kept (numerically) nothing."""


class InvalidRates(MemspinError, ValueError):
    pass


class ScheduleOverflow(MemspinError, ValueError):
    pass


class ManifoldLeakage(MemspinError, ValueError):
    """State has weight outside the 2J+1 spin manifold."""


class UnknownGate(MemspinError, KeyError):
    pass
