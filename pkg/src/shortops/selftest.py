"""Bundled fixed-seed verification suites behind the selftest command.

Each suite returns its worst observed defect together with the bound it
must stay under; the runner prints one line per suite and reports
overall success. Seeds are constants, so repeated runs are identical.
"""

from __future__ import annotations

import numpy as np

from .core import max_abs, partition
from .errors import SingularA22
from .instances import instance_stream
from .oblique import build_special_projection, short_via_projection, verify_inverse_identity
from .shorting import short_nested, short_pseudo, short_regularized, short_schur, variational_value

SELFTEST_SEED = 90210
SUITE_COUNT = 40


def suite_cross_validation():
    """All shorting routes agree pairwise within 1e-6 of the operator scale."""
    worst = 0.0
    for a, split in instance_stream(SUITE_COUNT, SELFTEST_SEED):
        results = [short_pseudo(a, split), short_regularized(a, split)]
        try:
            results.append(short_schur(a, split))
        except SingularA22:
            pass
        results.append(short_via_projection(a, build_special_projection(a, split)))
        scale = 1e-6 * a.norm
        for i in range(len(results)):
            for j in range(i + 1, len(results)):
                dev = max_abs(results[i].shorted.entries - results[j].shorted.entries)
                worst = max(worst, dev / scale)
    return worst, 1.0


def suite_variational_identity():
    """Quadratic forms of the short match the direct infimum to 1e-8."""
    rng = np.random.default_rng(SELFTEST_SEED + 1)
    worst = 0.0
    for a, split in instance_stream(SUITE_COUNT, SELFTEST_SEED + 1):
        result = short_pseudo(a, split)
        for _ in range(4):
            s = rng.standard_normal(split.n1)
            s /= np.linalg.norm(s)
            lhs = float(s @ result.h1_block @ s)
            rhs = variational_value(a, split, s)
            worst = max(worst, abs(lhs - rhs) / (1e-8 * (1.0 + abs(rhs))))
    return worst, 1.0


def suite_projection_identities():
    """Complement identity, inverse identity, and the congruence that
    rebuilds the operator from its short plus trailing compression."""
    worst = 0.0
    for a, split in instance_stream(SUITE_COUNT, SELFTEST_SEED + 2):
        q = build_special_projection(a, split)
        rotated = split.rotate(a.entries)
        e = q.complement()
        ae = rotated @ e
        worst = max(worst, max_abs(ae - e.T @ ae) / (1e-8 * (1.0 + a.norm)))
        worst = max(worst, verify_inverse_identity(q) / (1e-10 * (1.0 + q.certificates.q_hat_norm**2)))
        blocks = partition(a, split)
        n1 = split.n1
        c_hat = np.zeros_like(rotated)
        c_hat[:n1, :n1] = short_pseudo(a, split).h1_block
        c_hat[n1:, n1:] = blocks.a22
        p1q = np.zeros_like(rotated)
        p1q[:n1, :n1] = np.eye(n1)
        p1q += q.q_full
        rebuilt = p1q.T @ c_hat @ p1q
        worst = max(worst, max_abs(rebuilt - rotated) / (1e-8 * (1.0 + a.norm)))
    return worst, 1.0


def suite_reid_inequality():
    """||A22 y||^2 <= ||A22|| <A22 y, y> on random trailing blocks."""
    rng = np.random.default_rng(SELFTEST_SEED + 3)
    worst = 0.0
    for a, split in instance_stream(SUITE_COUNT, SELFTEST_SEED + 3):
        a22 = partition(a, split).a22
        norm = float(np.linalg.norm(a22, 2))
        for _ in range(4):
            y = rng.standard_normal(split.n2)
            lhs = float(np.sum((a22 @ y) ** 2))
            rhs = norm * float(y @ a22 @ y)
            worst = max(worst, (lhs - rhs) / (1e-10 * (1.0 + abs(rhs))))
    return worst, 1.0


def suite_nesting_identity():
    """Shorting to intersected coordinate sets agrees with iterated shorting."""
    from .core import split_from_indices
    from .shorting import short

    rng = np.random.default_rng(SELFTEST_SEED + 4)
    worst = 0.0
    for a, _ in instance_stream(SUITE_COUNT // 2, SELFTEST_SEED + 4):
        dim = a.dim
        all_idx = np.arange(dim)
        idx_s = sorted(rng.choice(all_idx, size=int(rng.integers(1, dim)), replace=False).tolist())
        idx_t = sorted(rng.choice(all_idx, size=int(rng.integers(1, dim)), replace=False).tolist())
        common = sorted(set(idx_s) & set(idx_t))
        if not common or len(common) == dim:
            continue
        split_s = split_from_indices(dim, idx_s)
        split_t = split_from_indices(dim, idx_t)
        direct = short_nested(a, split_s, split_t)
        iterated = short(short(a, split_t).shorted, split_from_indices(dim, common))
        dev = max_abs(direct.shorted.entries - iterated.shorted.entries)
        worst = max(worst, dev / (1e-8 * (1.0 + a.norm)))
    return worst, 1.0


SUITES = (
    ("cross-validation", suite_cross_validation),
    ("variational-identity", suite_variational_identity),
    ("projection-identities", suite_projection_identities),
    ("reid-inequality", suite_reid_inequality),
    ("nesting-identity", suite_nesting_identity),
)


def run_suites(suites=SUITES, out=None) -> bool:
    """Run the suites, print one pass/fail line each, return overall success."""
    import sys

    out = out or sys.stdout
    all_ok = True
    for name, fn in suites:
        try:
            ratio, bound = fn()
            ok = ratio <= bound
            detail = f"worst/bound = {ratio:.3e}"
        except Exception as exc:
            ok = False
            detail = f"{type(exc).__name__}: {exc}"
        all_ok &= ok
        print(f"{name:<24s} {'PASS' if ok else 'FAIL'}  {detail}", file=out)
    print(f"selftest: {'all suites passed' if all_ok else 'FAILURES detected'}", file=out)
    return all_ok
