class CircgateError(Exception):
    """Base class for every error raised by circgate."""


class DomainError(CircgateError, ValueError):
    """An argument lies outside the domain of a physical formula."""


class ContractViolationError(CircgateError, ValueError):
    """A matrix argument breaks the structural contract of an operation."""


class NotPositiveSemidefiniteError(ContractViolationError):
    def __init__(self, min_eigenvalue, tolerance):
        self.min_eigenvalue = min_eigenvalue
        self.tolerance = tolerance
        super().__init__(
            f"Matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e} "
            f"below -{tolerance:.1e}"
        )


class ChainConstructionError(DomainError):
    """The requested STIRAP ladder cannot be built from valid hydrogenic levels."""


class SingularInputBasisError(CircgateError):
    """Process tomography inputs do not span the operator space."""


class NumericalFailureError(CircgateError):
    """A propagator or reconstruction produced non-finite values."""
