"""Seeded random instances with controlled spectra.

All generators bound the nonzero singular values away from zero and
infinity so that rank deficiency is exact rather than accidental and
condition numbers stay small. That keeps tolerance checks meaningful:
a failed bound indicates a wrong formula, not an unlucky draw.
"""

from __future__ import annotations

import numpy as np

from .core import SubspaceSplit, SymPosOperator, validate_psd


def random_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def random_psd(dim: int, rank: int, rng: np.random.Generator,
               eig_low: float = 0.5, eig_high: float = 2.0) -> np.ndarray:
    """PSD matrix with `rank` eigenvalues drawn in [eig_low, eig_high]
    and the rest exactly zero."""
    if not (0 <= rank <= dim):
        raise ValueError("rank out of range")
    eigs = np.zeros(dim)
    eigs[:rank] = rng.uniform(eig_low, eig_high, size=rank)
    v = random_orthogonal(dim, rng)
    m = (v * eigs) @ v.T
    return (m + m.T) / 2.0


def random_split_operator(dim: int, n1: int, a22_rank: int, rng: np.random.Generator,
                          sv_low: float = 0.5, sv_high: float = 1.5) -> tuple[SymPosOperator, SubspaceSplit]:
    """Operator with a prescribed trailing-block rank.

    Built as M^T M where M has singular values in [sv_low, sv_high] and
    its trailing columns are composed with a rank-`a22_rank` orthogonal
    projection. The nonzero trailing-block eigenvalues then stay within
    [sv_low^2, sv_high^2], so conditioning is uniformly controlled.
    """
    n2 = dim - n1
    if not (0 <= a22_rank <= n2):
        raise ValueError("a22_rank out of range")
    u = random_orthogonal(dim, rng)
    v = random_orthogonal(dim, rng)
    m = (u * rng.uniform(sv_low, sv_high, size=dim)) @ v.T
    if a22_rank < n2:
        w = random_orthogonal(n2, rng)[:, :a22_rank]
        m[:, n1:] = m[:, n1:] @ (w @ w.T)
    a = m.T @ m
    return validate_psd((a + a.T) / 2.0), SubspaceSplit(dim=dim, n1=n1)


def instance_stream(count: int, seed: int, dims=(2, 12)):
    """Deterministic stream of (operator, split) pairs cycling dimensions
    and trailing-block ranks from full down to zero."""
    rng = np.random.default_rng(seed)
    lo, hi = dims
    out = []
    for i in range(count):
        dim = lo + (i % (hi - lo + 1))
        n1 = 1 + (i % (dim - 1))
        n2 = dim - n1
        a22_rank = n2 - (i % (n2 + 1))
        out.append(random_split_operator(dim, n1, a22_rank, rng))
    return out


def random_measure(dim: int, n1: int, a22_rank: int, rng: np.random.Generator):
    """Gaussian measure over a random split operator with a random mean."""
    from .gaussian import GaussianMeasure

    cov, split = random_split_operator(dim, n1, a22_rank, rng)
    mean = rng.standard_normal(dim)
    return GaussianMeasure(mean=mean, cov=cov, split=split)
