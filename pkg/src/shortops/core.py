"""Dense symmetric positive semidefinite operator algebra.

Provides the validated operator type, orthogonal subspace splits with
block partitions, the spectral decomposition used for pseudoinverses,
the Loewner order test, and the trace and operator norms. Everything
here is immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AsymmetricInput, DimensionMismatch, NotPositive, ParameterOutOfRange

DEFAULT_TOL_SYM = 1e-10
DEFAULT_TOL_PSD = 1e-10
DEFAULT_RANK_TOL = 1e-10
BASIS_ORTHOGONALITY_TOL = 1e-10


def max_abs(m) -> float:
    """Largest absolute entry; the scale used by relative tolerances."""
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m)))


def _as_square(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ParameterOutOfRange("matrix contains non-finite entries")
    return m


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SymPosOperator:
    """A validated symmetric positive semidefinite matrix.

    `entries` holds the symmetrized matrix (M + M^T)/2 and is read-only.
    `tol_sym` and `tol_psd` record the tolerances the validation used.
    """

    dim: int
    entries: np.ndarray
    tol_sym: float
    tol_psd: float

    @property
    def norm(self) -> float:
        return max_abs(self.entries)


def validate_psd(m, tol_sym: float = DEFAULT_TOL_SYM, tol_psd: float = DEFAULT_TOL_PSD) -> SymPosOperator:
    """Validate a square matrix as symmetric PSD and wrap it.

    The stored entries are symmetrized as (M + M^T)/2. Raises
    `AsymmetricInput` when the symmetry defect exceeds `tol_sym`, and
    `NotPositive` when the smallest eigenvalue falls below
    -tol_psd * (1 + largest eigenvalue).
    """
    m = _as_square(m)
    if tol_sym < 0 or tol_psd < 0:
        raise ParameterOutOfRange("tolerances must be nonnegative")
    defect = max_abs(m - m.T)
    if defect > tol_sym:
        raise AsymmetricInput(f"symmetry defect {defect:.3e} exceeds tol_sym {tol_sym:.3e}")
    sym = (m + m.T) / 2.0
    eigvals = np.linalg.eigvalsh(sym)
    lo, hi = float(eigvals[0]), float(eigvals[-1])
    if lo < -tol_psd * (1.0 + max(hi, 0.0)):
        raise NotPositive(f"smallest eigenvalue {lo:.3e} below PSD tolerance band")
    return SymPosOperator(dim=m.shape[0], entries=_frozen(sym), tol_sym=tol_sym, tol_psd=tol_psd)


@dataclass(frozen=True, eq=False)
class SubspaceSplit:
    """Orthogonal decomposition of R^dim into a leading and a trailing part.

    The first `n1` coordinates of the rotated frame span the leading
    subspace; the remaining `dim - n1` span its orthogonal complement.
    `basis` (columns = rotated frame vectors) defaults to the identity.
    """

    dim: int
    n1: int
    basis: np.ndarray | None = None

    def __post_init__(self):
        if not (1 <= self.n1 < self.dim):
            raise ParameterOutOfRange(f"need 1 <= n1 < dim, got n1={self.n1}, dim={self.dim}")
        if self.basis is not None:
            b = _as_square(self.basis)
            if b.shape[0] != self.dim:
                raise DimensionMismatch("basis dimension does not match split dimension")
            if max_abs(b.T @ b - np.eye(self.dim)) > BASIS_ORTHOGONALITY_TOL:
                raise ParameterOutOfRange("basis is not orthogonal within 1e-10")
            object.__setattr__(self, "basis", _frozen(b))

    @property
    def n2(self) -> int:
        return self.dim - self.n1

    def rotate(self, m: np.ndarray) -> np.ndarray:
        """Express `m` in the split frame (basis^T m basis)."""
        if self.basis is None:
            return np.asarray(m, dtype=float)
        return self.basis.T @ np.asarray(m, dtype=float) @ self.basis

    def unrotate(self, m: np.ndarray) -> np.ndarray:
        """Take a matrix from the split frame back to the ambient frame."""
        if self.basis is None:
            return np.asarray(m, dtype=float)
        return self.basis @ np.asarray(m, dtype=float) @ self.basis.T

    def rotate_vector(self, v: np.ndarray) -> np.ndarray:
        if self.basis is None:
            return np.asarray(v, dtype=float)
        return self.basis.T @ np.asarray(v, dtype=float)

    def unrotate_vector(self, v: np.ndarray) -> np.ndarray:
        if self.basis is None:
            return np.asarray(v, dtype=float)
        return self.basis @ np.asarray(v, dtype=float)

    def p1(self) -> np.ndarray:
        """Orthogonal projection onto the leading subspace, ambient frame."""
        d = np.zeros((self.dim, self.dim))
        d[: self.n1, : self.n1] = np.eye(self.n1)
        return self.unrotate(d)

    def p2(self) -> np.ndarray:
        return np.eye(self.dim) - self.p1() if self.basis is not None else _p2_exact(self.dim, self.n1)

    def embed(self, h1_block: np.ndarray) -> np.ndarray:
        """Embed an n1 x n1 block as a full-dim matrix, zero elsewhere."""
        h1_block = np.asarray(h1_block, dtype=float)
        full = np.zeros((self.dim, self.dim))
        full[: self.n1, : self.n1] = h1_block
        return self.unrotate(full)

    def h1_indices(self) -> tuple[int, ...] | None:
        """Ambient coordinates spanning the leading subspace, when the
        basis is a coordinate permutation (or absent); None otherwise."""
        if self.basis is None:
            return tuple(range(self.n1))
        b = self.basis
        if not np.array_equal(np.abs(b), np.abs(b).astype(bool).astype(float)):
            return None
        idx = []
        for col in range(self.n1):
            rows = np.nonzero(b[:, col])[0]
            if len(rows) != 1:
                return None
            idx.append(int(rows[0]))
        return tuple(idx)


def _p2_exact(dim: int, n1: int) -> np.ndarray:
    d = np.zeros((dim, dim))
    d[n1:, n1:] = np.eye(dim - n1)
    return d


def split_from_indices(dim: int, indices) -> SubspaceSplit:
    """Build a split whose leading subspace is the given ambient coordinates.

    The basis is the permutation moving `indices` to the front, so block
    partitions reduce to row and column selection.
    """
    indices = sorted(set(int(i) for i in indices))
    if not indices:
        raise ParameterOutOfRange("need at least one coordinate")
    if indices[0] < 0 or indices[-1] >= dim:
        raise ParameterOutOfRange(f"coordinates out of range for dim {dim}")
    if len(indices) >= dim:
        raise ParameterOutOfRange("leading subspace must be a proper subspace")
    rest = [i for i in range(dim) if i not in indices]
    perm = np.zeros((dim, dim))
    for col, row in enumerate(indices + rest):
        perm[row, col] = 1.0
    if indices == list(range(len(indices))):
        return SubspaceSplit(dim=dim, n1=len(indices))
    return SubspaceSplit(dim=dim, n1=len(indices), basis=perm)


@dataclass(frozen=True, eq=False)
class BlockPartition:
    """2x2 block view of an operator with respect to a split."""

    a11: np.ndarray
    a12: np.ndarray
    a21: np.ndarray
    a22: np.ndarray

    def reassemble(self) -> np.ndarray:
        return np.block([[self.a11, self.a12], [self.a21, self.a22]])


def partition(op: SymPosOperator, split: SubspaceSplit) -> BlockPartition:
    """Rotate into the split frame and slice the four blocks."""
    if split.dim != op.dim:
        raise DimensionMismatch(f"split dim {split.dim} != operator dim {op.dim}")
    rotated = split.rotate(op.entries)
    k = split.n1
    return BlockPartition(
        a11=rotated[:k, :k],
        a12=rotated[:k, k:],
        a21=rotated[k:, :k],
        a22=rotated[k:, k:],
    )


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigendecomposition with eigenvalues sorted descending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    numerical_rank: int
    rank_tol: float


def spectral(m, rank_tol: float = DEFAULT_RANK_TOL) -> SpectralDecomposition:
    """Eigendecomposition of a symmetric matrix, descending order.

    The numerical rank counts eigenvalues exceeding rank_tol times the
    largest eigenvalue: negative noise eigenvalues of a nominally PSD
    input never count toward the rank.
    """
    m = _as_square(m)
    eigvals, eigvecs = np.linalg.eigh((m + m.T) / 2.0)
    eigvals = eigvals[::-1]
    eigvecs = eigvecs[:, ::-1]
    top = float(eigvals[0]) if eigvals.size else 0.0
    rank = int(np.sum(eigvals > rank_tol * top)) if top > 0 else 0
    return SpectralDecomposition(
        eigenvalues=_frozen(eigvals),
        eigenvectors=_frozen(eigvecs),
        numerical_rank=rank,
        rank_tol=rank_tol,
    )


def pseudoinverse(op: SymPosOperator | np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Moore-Penrose inverse through the eigendecomposition.

    Eigenvalues below rank_tol times the largest are treated as zero,
    which keeps exactly singular operators exactly singular.
    """
    m = op.entries if isinstance(op, SymPosOperator) else _as_square(op)
    dec = spectral(m, rank_tol=rank_tol)
    inv = np.zeros_like(dec.eigenvalues)
    keep = slice(0, dec.numerical_rank)
    inv[keep] = 1.0 / dec.eigenvalues[keep]
    v = dec.eigenvectors
    return (v * inv) @ v.T


def loewner_leq(a: SymPosOperator, b: SymPosOperator, tol: float = DEFAULT_TOL_PSD) -> bool:
    """Whether a <= b in the Loewner order, with tolerance relative to b."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dims {a.dim} and {b.dim} differ")
    gap = np.linalg.eigvalsh(b.entries - a.entries)[0]
    return bool(gap >= -tol * (1.0 + b.norm))


def _as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ParameterOutOfRange("matrix contains non-finite entries")
    return m


def operator_norm(m) -> float:
    """Largest singular value."""
    m = _as_matrix(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def trace_norm(m) -> float:
    """Sum of singular values; equals the trace on PSD input."""
    m = _as_matrix(m)
    if m.size == 0:
        return 0.0
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))
