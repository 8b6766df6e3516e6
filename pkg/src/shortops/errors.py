"""Exception hierarchy shared by all modules.

Two families matter to callers: `ValidationError` means the input itself
was rejected (bad matrix, bad parameters), `NumericalError` means the
input was admissible but a computation could not meet its contract.
The CLI maps these onto exit statuses 1 and 2.
"""


class ShortOpsError(Exception):
    """Base class for all library errors."""


class ValidationError(ShortOpsError):
    """Input rejected before any numerical work."""


class NumericalError(ShortOpsError):
    """Computation failed to meet its accuracy or convergence contract."""


class AsymmetricInput(ValidationError):
    """Symmetry defect of the input matrix exceeds the symmetry tolerance."""


class NotPositive(ValidationError):
    """An eigenvalue falls below the negative tolerance band."""


class DimensionMismatch(ValidationError):
    """Operands declare incompatible dimensions."""


class ParameterOutOfRange(ValidationError):
    """A scalar parameter violates its documented admissible range."""


class EmptyIntersection(ValidationError):
    """Two coordinate subspaces share no coordinate."""


class NotPSD(ValidationError):
    """A truncation of an operator model failed positive-semidefinite validation."""


class SingularA22(NumericalError):
    """The trailing block is numerically singular; use the pseudoinverse route."""


class RangeConditionViolated(NumericalError):
    """The residual of the trailing-block solve exceeds its bound.

    In finite dimensions this signals ill-conditioning rather than a
    genuinely incompatible pair.
    """


class NoConvergence(NumericalError):
    """Successive iterates stopped improving before the schedule ended."""


class CompatibilitySolveFailed(NumericalError):
    """The minimum-norm solve behind the special projection left a large residual."""


class CertificateMismatch(NumericalError):
    """A projection was applied to an operator it was not built from."""
