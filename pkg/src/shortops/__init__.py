"""Numerical shorted-operator algebra with Gaussian conditioning.

Shorts of positive semidefinite operators to a subspace by three
mutually validating routes, the oblique projections that realize them,
truncation convergence studies for lazily modeled operators, and
Gaussian conditioning whose conditional covariance is the shorted
covariance.
"""

from .core import (
    BlockPartition,
    SpectralDecomposition,
    SubspaceSplit,
    SymPosOperator,
    loewner_leq,
    max_abs,
    operator_norm,
    partition,
    pseudoinverse,
    spectral,
    split_from_indices,
    trace_norm,
    validate_psd,
)
from .errors import (
    AsymmetricInput,
    CertificateMismatch,
    CompatibilitySolveFailed,
    DimensionMismatch,
    EmptyIntersection,
    NoConvergence,
    NotPositive,
    NotPSD,
    NumericalError,
    ParameterOutOfRange,
    RangeConditionViolated,
    ShortOpsError,
    SingularA22,
    ValidationError,
)
from .gaussian import (
    ConditionalLaw,
    GaussianMeasure,
    MCReport,
    SampleBatch,
    classical_conditional,
    condition,
    condition_truncated,
    conditional_law,
    mc_verify,
    sample,
)
from .oblique import (
    CompatibilityReport,
    ObliqueProjection,
    build_special_projection,
    compatibility_report,
    short_via_projection,
    verify_inverse_identity,
)
from .shorting import (
    ShortedResult,
    short,
    short_nested,
    short_pseudo,
    short_regularized,
    short_schur,
    variational_value,
)
from .truncation import (
    ConvergenceReport,
    OperatorModel,
    StudyRecord,
    TruncationSchedule,
    convergence_study,
    decreasing_approximation_study,
    make_coupled_family,
    make_diagonal_geometric,
    make_schedule,
    non_monotone_truncation_witness,
    truncate,
)

__version__ = "0.1.0"
