"""Exception hierarchy shared across the package.

The command-line driver maps these onto exit codes: configuration problems
(2), violated numerical invariants (3), and runtime aborts such as blow-up
guards or mass-drift trips (4).
"""


class AdiapackError(Exception):
    pass


class ConfigError(AdiapackError):
    """Invalid configuration. Carries the full list of violations."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class InvariantViolation(AdiapackError):
    """A numerical invariant (orthonormality, residual bound, ...) failed."""


class BranchTrackingError(InvariantViolation):
    """Eigenvalue-branch continuation could not be resolved at some point."""

    def __init__(self, x, message=""):
        self.x = x
        super().__init__(message or f"unresolvable branch crossing near x = {x}")


class SolverAbort(AdiapackError):
    """A propagation run tripped a guard (blow-up, mass drift, resonance)."""
