"""Shorts of positive operators to a declared subspace.

The short of a PSD operator A to the leading subspace of a split is the
maximal PSD operator X with X <= A whose range lies inside that
subspace. Three routes compute it: a direct Schur complement when the
trailing block is invertible, a pseudoinverse form that also covers the
singular case, and a regularized limit useful for cross-validation.
`variational_value` evaluates the defining infimum directly and serves
as the independent oracle for all of them.
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
    split_from_indices,
    validate_psd,
)
from .errors import (
    DimensionMismatch,
    EmptyIntersection,
    NoConvergence,
    NumericalError,
    ParameterOutOfRange,
    RangeConditionViolated,
    SingularA22,
)

SCHUR_COND_LIMIT = 1e12
RANGE_RESIDUAL_LIMIT = 1e-6
DEFAULT_EPS_SCHEDULE = (1e-2, 1e-4, 1e-6, 1e-8, 1e-10)
NESTING_AGREEMENT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ShortDiagnostics:
    a22_rank: int
    range_residual: float
    loewner_gap_eig: float
    epsilon_schedule: tuple[float, ...] | None = None


@dataclass(frozen=True, eq=False)
class ShortedResult:
    """A computed short, embedded in the full space.

    `shorted` lives in the ambient frame with the blocks outside the
    leading subspace hard-zeroed (in the split frame), `h1_block` is the
    same operator restricted to the leading coordinates of the split
    frame.
    """

    shorted: SymPosOperator
    h1_block: np.ndarray
    split: SubspaceSplit
    method: str
    diagnostics: ShortDiagnostics


def _finish(a: SymPosOperator, split: SubspaceSplit, block: np.ndarray, method: str,
            a22_rank: int, range_residual: float, eps_schedule=None) -> ShortedResult:
    block = (block + block.T) / 2.0
    full = split.embed(block)
    op = validate_psd(full, tol_sym=max(a.tol_sym, 1e-8 * (1.0 + a.norm)), tol_psd=max(a.tol_psd, 1e-8))
    gap = float(np.linalg.eigvalsh(a.entries - op.entries)[0])
    diag = ShortDiagnostics(
        a22_rank=a22_rank,
        range_residual=range_residual,
        loewner_gap_eig=gap,
        epsilon_schedule=tuple(eps_schedule) if eps_schedule is not None else None,
    )
    return ShortedResult(shorted=op, h1_block=block, split=split, method=method, diagnostics=diag)


def short_schur(a: SymPosOperator, split: SubspaceSplit, cond_limit: float = SCHUR_COND_LIMIT) -> ShortedResult:
    """Short via the Schur complement of the trailing block.

    Requires the trailing block to be numerically invertible; raises
    `SingularA22` otherwise, in which case `short_pseudo` or
    `short_regularized` apply.
    """
    blocks = partition(a, split)
    eigvals = np.linalg.eigvalsh(blocks.a22)
    lo, hi = float(eigvals[0]), float(eigvals[-1])
    if lo <= 0.0 or hi / lo > cond_limit:
        raise SingularA22(
            f"trailing block condition number {hi / lo if lo > 0 else np.inf:.3e} exceeds {cond_limit:.1e}"
        )
    solved = np.linalg.solve(blocks.a22, blocks.a21)
    block = blocks.a11 - blocks.a12 @ solved
    residual = max_abs(blocks.a22 @ solved - blocks.a21) / (1.0 + max_abs(blocks.a21))
    return _finish(a, split, block, "schur", a22_rank=split.n2, range_residual=residual)


def short_pseudo(a: SymPosOperator, split: SubspaceSplit, rank_tol: float = DEFAULT_RANK_TOL) -> ShortedResult:
    """Short via the pseudoinverse of the trailing block.

    Exact for every finite-dimensional PSD operator because the block
    structure forces the coupling into the range of the trailing block.
    A large range residual therefore signals ill-conditioning and raises
    `RangeConditionViolated`.
    """
    blocks = partition(a, split)
    a22_pinv = pseudoinverse(blocks.a22, rank_tol=rank_tol)
    residual = max_abs(blocks.a22 @ (a22_pinv @ blocks.a21) - blocks.a21) / (1.0 + max_abs(blocks.a21))
    if residual > RANGE_RESIDUAL_LIMIT:
        raise RangeConditionViolated(
            f"range residual {residual:.3e} exceeds {RANGE_RESIDUAL_LIMIT:.1e}; trailing block is ill-conditioned"
        )
    block = blocks.a11 - blocks.a12 @ (a22_pinv @ blocks.a21)
    rank = spectral(blocks.a22, rank_tol=rank_tol).numerical_rank
    return _finish(a, split, block, "pseudo", a22_rank=rank, range_residual=residual)


def short_regularized(a: SymPosOperator, split: SubspaceSplit,
                      eps_schedule=DEFAULT_EPS_SCHEDULE) -> ShortedResult:
    """Short as the limit of Schur complements of the shifted trailing block.

    Evaluates A11 - A12 (A22 + eps I)^-1 A21 along the schedule and
    returns the value at the smallest eps. The iterates decrease in the
    Loewner order as eps decreases. Raises `NoConvergence` when the
    operator-norm gap between successive iterates stops shrinking across
    the final three schedule values, which signals a stalled schedule.
    """
    eps_schedule = [float(e) for e in eps_schedule]
    if len(eps_schedule) < 3:
        raise ParameterOutOfRange("need at least 3 epsilon values")
    if any(e <= 0 for e in eps_schedule) or any(
        b >= a_ for a_, b in zip(eps_schedule, eps_schedule[1:])
    ):
        raise ParameterOutOfRange("epsilon schedule must be strictly decreasing and positive")
    blocks = partition(a, split)
    eye2 = np.eye(split.n2)
    iterates = []
    for eps in eps_schedule:
        correction = blocks.a12 @ np.linalg.solve(blocks.a22 + eps * eye2, blocks.a21)
        iterates.append(blocks.a11 - correction)
    gaps = [operator_norm(s1 - s0) for s0, s1 in zip(iterates, iterates[1:])]
    slack = 1e-14 * (1.0 + a.norm)
    if gaps[-1] > gaps[-2] * (1.0 + 1e-9) + slack:
        raise NoConvergence(
            f"iterate gap grew from {gaps[-2]:.3e} to {gaps[-1]:.3e} over the final three epsilon values"
        )
    rank = spectral(blocks.a22).numerical_rank
    residual = max_abs(blocks.a22 @ (pseudoinverse(blocks.a22) @ blocks.a21) - blocks.a21) / (1.0 + max_abs(blocks.a21))
    return _finish(a, split, iterates[-1], "regularized", a22_rank=rank,
                   range_residual=residual, eps_schedule=eps_schedule)


def short(a: SymPosOperator, split: SubspaceSplit, method: str = "auto",
          rank_tol: float = DEFAULT_RANK_TOL) -> ShortedResult:
    """Dispatch: Schur complement when the trailing block is well
    conditioned, pseudoinverse otherwise."""
    if method == "auto":
        try:
            return short_schur(a, split)
        except SingularA22:
            return short_pseudo(a, split, rank_tol=rank_tol)
    if method == "schur":
        return short_schur(a, split)
    if method == "pseudo":
        return short_pseudo(a, split, rank_tol=rank_tol)
    if method == "regularized":
        return short_regularized(a, split)
    if method == "oblique":
        from .oblique import build_special_projection, short_via_projection

        return short_via_projection(a, build_special_projection(a, split, rank_tol=rank_tol))
    raise ParameterOutOfRange(f"unknown method {method!r}")


def variational_value(a: SymPosOperator, split: SubspaceSplit, s) -> float:
    """The infimum over the trailing subspace of the quadratic form.

    Minimizes <A (s; t), (s; t)> over t by solving the normal equations
    A22 t = -A21 s in the least-squares sense and evaluating the
    quadratic there. Serves as the oracle for every shorting route:
    the result equals <S(A) s, s>.
    """
    s = np.asarray(s, dtype=float)
    if s.shape != (split.n1,):
        raise DimensionMismatch(f"probe vector must have length {split.n1}")
    if not np.any(s):
        raise ParameterOutOfRange("probe vector must be nonzero")
    blocks = partition(a, split)
    t, *_ = np.linalg.lstsq(blocks.a22, -blocks.a21 @ s, rcond=None)
    return float(
        s @ blocks.a11 @ s + 2.0 * s @ blocks.a12 @ t + t @ blocks.a22 @ t
    )


def _coordinate_indices(split: SubspaceSplit) -> tuple[int, ...]:
    idx = split.h1_indices()
    if idx is None:
        raise ParameterOutOfRange("nested shorting needs coordinate splits in a shared basis")
    return idx


def short_nested(a: SymPosOperator, split_s: SubspaceSplit, split_t: SubspaceSplit) -> ShortedResult:
    """Short to the intersection of two coordinate subspaces.

    Computes the short to the intersection directly and, as a
    consistency check, by shorting first to one subspace and then the
    other; the two must agree. Returns the direct result.
    """
    if split_s.dim != a.dim or split_t.dim != a.dim:
        raise DimensionMismatch("splits must match the operator dimension")
    idx_s = set(_coordinate_indices(split_s))
    idx_t = set(_coordinate_indices(split_t))
    common = sorted(idx_s & idx_t)
    if not common:
        raise EmptyIntersection("the coordinate subspaces do not intersect")
    if len(common) == a.dim:
        raise ParameterOutOfRange("intersection must be a proper subspace")
    direct = short(a, split_from_indices(a.dim, common))
    inner = short(a, split_t)
    iterated = short(inner.shorted, split_from_indices(a.dim, common))
    deviation = max_abs(direct.shorted.entries - iterated.shorted.entries)
    if deviation > NESTING_AGREEMENT_TOL * (1.0 + a.norm):
        raise NumericalError(
            f"direct and iterated shorts disagree by {deviation:.3e}"
        )
    return direct
