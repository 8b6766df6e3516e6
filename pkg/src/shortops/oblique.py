"""A-symmetric oblique projections onto the trailing subspace.

For a PSD operator A and a split, the projections Q with Q^2 = Q, range
equal to the trailing subspace, and AQ = Q^T A form a distinguished
family. Its special element is assembled from the minimum-norm solution
of the trailing-block equation and recovers the short through the
complement E = I - Q via S(A) = A E = E^T A E.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_RANK_TOL,
    SubspaceSplit,
    SymPosOperator,
    max_abs,
    operator_norm,
    partition,
    pseudoinverse,
    spectral,
)
from .errors import CertificateMismatch, CompatibilitySolveFailed, DimensionMismatch, NumericalError
from .shorting import ShortedResult, _finish

SOLVE_RESIDUAL_LIMIT = 1e-6
A_SYMMETRY_TOL = 1e-8
IDENTITY_DEFECT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ProjectionCertificates:
    """Defects computed at construction, against the operator the
    projection was built from."""

    idempotency_defect: float
    a_symmetry_defect: float
    solve_residual: float
    q_hat_norm: float
    source_norm: float


@dataclass(frozen=True, eq=False)
class ObliqueProjection:
    """The pair (q_hat, q_full) for a split, with certificates.

    `q_hat` maps the leading coordinates into the trailing coordinates
    of the split frame; `q_full` is the assembled projection in the
    split frame, lower block triangular with identity trailing block.
    """

    q_hat: np.ndarray
    q_full: np.ndarray
    split: SubspaceSplit
    certificates: ProjectionCertificates

    def complement(self) -> np.ndarray:
        """E = I - Q in the split frame; the short factors through it."""
        return np.eye(self.split.dim) - self.q_full


@dataclass(frozen=True, eq=False)
class CompatibilityReport:
    compatible: bool
    solve_residual: float
    a22_rank: int
    a22_condition_effective: float
    q_hat_norm: float


def _assemble(split: SubspaceSplit, q_hat: np.ndarray) -> np.ndarray:
    q = np.zeros((split.dim, split.dim))
    q[split.n1 :, : split.n1] = q_hat
    q[split.n1 :, split.n1 :] = np.eye(split.n2)
    return q


def build_special_projection(a: SymPosOperator, split: SubspaceSplit,
                             rank_tol: float = DEFAULT_RANK_TOL) -> ObliqueProjection:
    """Construct the minimum-norm A-symmetric projection onto the
    trailing subspace.

    The off-diagonal block solves A22 q_hat = A21 through the
    pseudoinverse, which pins down the kernel and range conditions that
    single this element out. Raises `CompatibilitySolveFailed` when the
    solve residual exceeds its bound (ill-conditioning in finite dims).
    """
    if split.dim != a.dim:
        raise DimensionMismatch(f"split dim {split.dim} != operator dim {a.dim}")
    blocks = partition(a, split)
    q_hat = pseudoinverse(blocks.a22, rank_tol=rank_tol) @ blocks.a21
    residual = max_abs(blocks.a22 @ q_hat - blocks.a21) / (1.0 + max_abs(blocks.a21))
    if residual > SOLVE_RESIDUAL_LIMIT:
        raise CompatibilitySolveFailed(
            f"solve residual {residual:.3e} exceeds {SOLVE_RESIDUAL_LIMIT:.1e}"
        )
    q_full = _assemble(split, q_hat)
    rotated_a = split.rotate(a.entries)
    idem = max_abs(q_full @ q_full - q_full)
    asym = max_abs(rotated_a @ q_full - q_full.T @ rotated_a)
    certs = ProjectionCertificates(
        idempotency_defect=idem,
        a_symmetry_defect=asym,
        solve_residual=residual,
        q_hat_norm=operator_norm(q_hat) if q_hat.size else 0.0,
        source_norm=a.norm,
    )
    return ObliqueProjection(q_hat=q_hat, q_full=q_full, split=split, certificates=certs)


def short_via_projection(a: SymPosOperator, q: ObliqueProjection) -> ShortedResult:
    """Short through the complement of an oblique projection.

    Computes E^T A E for E = I - Q and checks the identity A E = E^T A E
    before returning. Raises `CertificateMismatch` when the projection
    fails A-symmetry against this operator, i.e. was built elsewhere.
    """
    if q.split.dim != a.dim:
        raise DimensionMismatch(f"projection dim {q.split.dim} != operator dim {a.dim}")
    rotated_a = q.split.rotate(a.entries)
    asym = max_abs(rotated_a @ q.q_full - q.q_full.T @ rotated_a)
    if asym > A_SYMMETRY_TOL * (1.0 + a.norm):
        raise CertificateMismatch(
            f"A-symmetry defect {asym:.3e} against this operator; projection was built for another"
        )
    e = q.complement()
    ae = rotated_a @ e
    eae = e.T @ ae
    defect = max_abs(ae - eae)
    if defect > IDENTITY_DEFECT_TOL * (1.0 + a.norm):
        raise NumericalError(f"projection short identity defect {defect:.3e}")
    n1 = q.split.n1
    block = eae[:n1, :n1]
    blocks = partition(a, q.split)
    rank = spectral(blocks.a22).numerical_rank
    return _finish(a, q.split, block, "oblique", a22_rank=rank,
                   range_residual=q.certificates.solve_residual)


def verify_inverse_identity(q: ObliqueProjection) -> float:
    """Defect of the closed-form inverse of P1 + Q.

    Returns the sup-entry norm of (P1 + Q)(2 - P1 - Q) - I, which is
    zero in exact arithmetic because P1 + Q is block lower triangular
    with identity diagonal.
    """
    dim, n1 = q.split.dim, q.split.n1
    p1 = np.zeros((dim, dim))
    p1[:n1, :n1] = np.eye(n1)
    lhs = p1 + q.q_full
    rhs = 2.0 * np.eye(dim) - p1 - q.q_full
    return max_abs(lhs @ rhs - np.eye(dim))


def compatibility_report(a: SymPosOperator, split: SubspaceSplit,
                         rank_tol: float = DEFAULT_RANK_TOL) -> CompatibilityReport:
    """Run the minimum-norm solve and report its conditioning.

    Finite-dimensional PSD pairs are always compatible in exact
    arithmetic; the effective condition number of the trailing block and
    the norm of the solved block are the quantities whose growth across
    truncations signals an incompatible limit.
    """
    if split.dim != a.dim:
        raise DimensionMismatch(f"split dim {split.dim} != operator dim {a.dim}")
    blocks = partition(a, split)
    dec = spectral(blocks.a22, rank_tol=rank_tol)
    q_hat = pseudoinverse(blocks.a22, rank_tol=rank_tol) @ blocks.a21
    residual = max_abs(blocks.a22 @ q_hat - blocks.a21) / (1.0 + max_abs(blocks.a21))
    if dec.numerical_rank > 0:
        retained = dec.eigenvalues[: dec.numerical_rank]
        cond = float(retained[0] / retained[-1])
    else:
        cond = 1.0
    return CompatibilityReport(
        compatible=bool(residual <= SOLVE_RESIDUAL_LIMIT),
        solve_residual=residual,
        a22_rank=dec.numerical_rank,
        a22_condition_effective=cond,
        q_hat_norm=operator_norm(q_hat) if q_hat.size else 0.0,
    )
