"""Lazily indexed operator models, their truncations, and convergence studies.

An `OperatorModel` stands in for an operator on an infinite orthonormal
basis: a pure entry function over nonnegative indices, with the first
`n1` indices addressing the leading subspace. Truncating keeps the
leading subspace and the first n trailing basis vectors. The studies
track how the shorts of the truncations settle down (weak probes,
operator and trace norm distances to a high-n reference) and how the
norm of the special projection behaves; unbounded growth of that norm
is the finite-dimensional signature of an incompatible limit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import SubspaceSplit, SymPosOperator, operator_norm, trace_norm, validate_psd
from .errors import (
    NotPositive,
    NotPSD,
    NumericalError,
    ParameterOutOfRange,
    ValidationError,
)
from .oblique import build_special_projection, compatibility_report
from .shorting import ShortedResult, short

MAX_TRUNCATION = 4096
QHAT_GROWTH_FACTOR = 2.0
DEFAULT_PROBE_SEED = 1729

VERDICT_WEAK = "weak_converging"
VERDICT_TRACE = "trace_converging"
VERDICT_QHAT = "q_hat_diverging"
VERDICT_INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True, eq=False)
class OperatorModel:
    """Countably indexed symmetric operator given by a pure entry function.

    `entry(i, j)` must be symmetric and reentrant. `entry_grid`, when
    provided, evaluates whole index grids at once and must agree with
    `entry`. `trace_class` is the caller's claim, checked along study
    schedules. `decay_hint` only informs schedule suggestions.
    """

    n1: int
    entry: Callable[[int, int], float]
    trace_class: bool
    decay_hint: float | None = None
    entry_grid: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.n1 < 1:
            raise ParameterOutOfRange("model needs n1 >= 1")


def truncate(model: OperatorModel, n: int) -> tuple[SymPosOperator, SubspaceSplit]:
    """Materialize the leading (n1 + n) x (n1 + n) block of the model.

    The split keeps the model's leading subspace as the first n1
    coordinates. Raises `NotPSD` when the block fails validation, which
    rejects the model as a positive operator.
    """
    if n < 1:
        raise ParameterOutOfRange("truncation size must be at least 1")
    size = model.n1 + n
    if model.entry_grid is not None:
        ii, jj = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
        m = np.asarray(model.entry_grid(ii, jj), dtype=float)
    else:
        m = np.zeros((size, size))
        for i in range(size):
            for j in range(i, size):
                m[i, j] = model.entry(i, j)
        m = m + np.triu(m, 1).T
    for i, j in ((0, size - 1), (1, size // 2), (size // 3, size - 1)):
        if i < size and j < size and model.entry(i, j) != model.entry(j, i):
            raise ValidationError(f"entry function is not symmetric at ({i}, {j})")
    try:
        op = validate_psd(m)
    except NotPositive as exc:
        raise NotPSD(f"truncation at n={n} is not PSD: {exc}") from exc
    return op, SubspaceSplit(dim=size, n1=model.n1)


def make_coupled_family(alpha: float, beta: float, n_max: int = MAX_TRUNCATION) -> OperatorModel:
    """One leading coordinate coupled to a power-law diagonal tail.

    The coupling to trailing index k decays as k^(-alpha) and the
    trailing diagonal as k^(-beta); the leading diagonal entry is sized
    so every truncation up to `n_max` is PSD with margin at least one.
    When 2*alpha - beta > 1 the analytic tail bound is added and the
    projection norms across truncations stay tame; otherwise they grow
    without bound, the incompatibility surrogate.
    """
    if beta <= 1.0:
        raise ParameterOutOfRange("need beta > 1 for a trace-class trailing diagonal")
    if alpha <= 0.5:
        raise ParameterOutOfRange("need alpha > 1/2 for a bounded coupling")
    if n_max < 1 or n_max > MAX_TRUNCATION:
        raise ParameterOutOfRange(f"n_max must lie in [1, {MAX_TRUNCATION}]")
    expo = beta - 2.0 * alpha
    ks = np.arange(1, n_max + 1, dtype=float)
    c0 = 1.0 + float(np.sum(ks**expo))
    if 2.0 * alpha - beta > 1.0:
        c0 += n_max**(expo + 1.0) / (2.0 * alpha - beta - 1.0)

    def entry(i: int, j: int) -> float:
        if i == j == 0:
            return c0
        if i == 0:
            return float(j) ** (-alpha)
        if j == 0:
            return float(i) ** (-alpha)
        if i == j:
            return float(i) ** (-beta)
        return 0.0

    def entry_grid(ii, jj):
        ii = np.asarray(ii, dtype=float)
        jj = np.asarray(jj, dtype=float)
        out = np.zeros(ii.shape)
        diag = (ii == jj) & (ii > 0)
        out[diag] = ii[diag] ** (-beta)
        row0 = (ii == 0) & (jj > 0)
        out[row0] = jj[row0] ** (-alpha)
        col0 = (jj == 0) & (ii > 0)
        out[col0] = ii[col0] ** (-alpha)
        out[(ii == 0) & (jj == 0)] = c0
        return out

    return OperatorModel(n1=1, entry=entry, trace_class=True, decay_hint=beta, entry_grid=entry_grid)


def make_diagonal_geometric(ratio: float = 0.5, n1: int = 1) -> OperatorModel:
    """Purely diagonal model entry(i, i) = ratio^i; trivially compatible."""
    if not (0.0 < ratio < 1.0):
        raise ParameterOutOfRange("need 0 < ratio < 1")

    def entry(i: int, j: int) -> float:
        return ratio**i if i == j else 0.0

    def entry_grid(ii, jj):
        out = np.zeros(np.asarray(ii).shape)
        diag = np.asarray(ii) == np.asarray(jj)
        out[diag] = ratio ** np.asarray(ii, dtype=float)[diag]
        return out

    return OperatorModel(n1=n1, entry=entry, trace_class=True, decay_hint=None, entry_grid=entry_grid)


MODEL_REGISTRY: dict[str, Callable[..., OperatorModel]] = {
    "coupled-family": make_coupled_family,
    "diagonal-geometric": make_diagonal_geometric,
}


def non_monotone_truncation_witness() -> tuple[OperatorModel, int, int]:
    """Fixed regression instance whose shorts strictly drop between two
    recorded truncation sizes, witnessing that truncation shorts are not
    monotone increasing."""
    return make_coupled_family(2.0, 1.5), 4, 8


@dataclass(frozen=True, eq=False)
class TruncationSchedule:
    """Strictly increasing truncation sizes plus weak-probe vector pairs.

    Probe vectors are supported on the leading subspace and the first
    trailing coordinates; evaluation pads them with zeros to the current
    truncation dimension.
    """

    sizes: tuple[int, ...]
    probe_vectors: tuple[tuple[np.ndarray, np.ndarray], ...]

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.sizes)
        if len(sizes) < 3:
            raise ParameterOutOfRange("schedule needs at least 3 sizes")
        if any(b <= a for a, b in zip(sizes, sizes[1:])) or sizes[0] < 1:
            raise ParameterOutOfRange("sizes must be positive and strictly increasing")
        object.__setattr__(self, "sizes", sizes)
        for c, d in self.probe_vectors:
            if not np.any(c) or not np.any(d):
                raise ParameterOutOfRange("probe vectors must be nonzero")


def make_schedule(sizes, n1: int, probes=None, probe_seed: int = DEFAULT_PROBE_SEED) -> TruncationSchedule:
    """Schedule with default probes: the leading basis vectors paired
    with themselves, plus two fixed-seed random pairs supported on the
    leading subspace and the first scheduled trailing window."""
    sizes = tuple(int(n) for n in sizes)
    if probes is None:
        probes = [(np.eye(n1)[i], np.eye(n1)[i]) for i in range(n1)]
        rng = np.random.default_rng(probe_seed)
        width = n1 + min(sizes)
        for _ in range(2):
            probes.append((rng.standard_normal(width), rng.standard_normal(width)))
    return TruncationSchedule(sizes=sizes, probe_vectors=tuple((np.asarray(c, float), np.asarray(d, float)) for c, d in probes))


@dataclass(frozen=True, eq=False)
class StudyRecord:
    n: int
    weak_probe_values: tuple[float, ...]
    op_norm_dist_to_ref: float
    trace_norm_dist_to_ref: float
    q_hat_norm: float
    a22_effective_cond: float
    epsilon: float | None = None


@dataclass(frozen=True, eq=False)
class ConvergenceReport:
    records: tuple[StudyRecord, ...]
    reference_n: int
    verdict: str


def _probe_value(result: ShortedResult, c: np.ndarray, d: np.ndarray) -> float:
    # The short is supported on the leading block, so only the leading
    # components of the probes contribute; padding is therefore exact.
    n1 = result.split.n1
    c1 = np.zeros(n1)
    kc = min(n1, len(c))
    c1[:kc] = c[:kc]
    d1 = np.zeros(n1)
    kd = min(n1, len(d))
    d1[:kd] = d[:kd]
    return float(c1 @ result.h1_block @ d1)


def _gaps_shrink(values: list[float], slack: float) -> bool:
    if len(values) < 3:
        return False
    g_prev = abs(values[-2] - values[-3])
    g_last = abs(values[-1] - values[-2])
    return g_last <= g_prev + slack


def _verdict(probe_series: list[list[float]], trace_dists: list[float], q_hat_norms: list[float],
             trace_class: bool) -> str:
    tiny = 1e-12
    first_q, last_q = q_hat_norms[0], q_hat_norms[-1]
    if first_q <= tiny:
        growth = 1.0 if last_q <= tiny else np.inf
    else:
        growth = last_q / first_q
    if growth > QHAT_GROWTH_FACTOR:
        return VERDICT_QHAT
    scale = max(max(abs(v) for v in series) for series in probe_series) if probe_series else 1.0
    slack = 1e-12 * (1.0 + scale)
    weak = all(_gaps_shrink(series, slack) for series in probe_series)
    if not weak:
        return VERDICT_INCONCLUSIVE
    dist_slack = 1e-12 * (1.0 + max(trace_dists, default=0.0))
    shrinking = all(b <= a + dist_slack for a, b in zip(trace_dists, trace_dists[1:]))
    if trace_class and shrinking:
        return VERDICT_TRACE
    return VERDICT_WEAK


def _check_trace_class_claim(model: OperatorModel, sizes) -> None:
    partial = []
    for n in sizes:
        size = model.n1 + n
        partial.append(sum(model.entry(k, k) for k in range(size)))
    increments = [b - a for a, b in zip(partial, partial[1:])]
    slack = 1e-12 * (1.0 + abs(partial[-1]))
    for a, b in zip(increments, increments[1:]):
        if b > a + slack:
            raise ValidationError(
                "trace_class claim inconsistent: diagonal tail increments grow along the schedule"
            )


def convergence_study(model: OperatorModel, schedule: TruncationSchedule,
                      reference_n: int | None = None) -> ConvergenceReport:
    """Short every scheduled truncation and diagnose convergence.

    Distances are measured against the short at `reference_n` (the
    largest scheduled size unless a larger surrogate is given) on the
    shared leading block. The verdict applies fixed rules: projection
    norm growth beyond a factor of 2 dominates, then trace-norm
    shrinking on top of shrinking weak-probe gaps, then weak-probe gaps
    alone.
    """
    sizes = schedule.sizes
    if sizes[-1] > MAX_TRUNCATION:
        raise ParameterOutOfRange(f"schedule exceeds the desk-scale cap {MAX_TRUNCATION}")
    if reference_n is None:
        reference_n = sizes[-1]
    if reference_n < sizes[-1]:
        raise ParameterOutOfRange("reference_n must be at least the largest scheduled size")
    if model.trace_class:
        _check_trace_class_claim(model, sizes)

    ref_op, ref_split = truncate(model, reference_n)
    ref_short = short(ref_op, ref_split)

    records = []
    probe_series: list[list[float]] = [[] for _ in schedule.probe_vectors]
    trace_dists: list[float] = []
    q_hat_norms: list[float] = []
    for n in sizes:
        op, split = truncate(model, n)
        result = short(op, split)
        build_special_projection(op, split)
        compat = compatibility_report(op, split)
        values = tuple(_probe_value(result, c, d) for c, d in schedule.probe_vectors)
        for series, v in zip(probe_series, values):
            series.append(v)
        diff = result.h1_block - ref_short.h1_block
        op_dist = operator_norm(diff)
        tr_dist = trace_norm(diff)
        trace_dists.append(tr_dist)
        q_hat_norms.append(compat.q_hat_norm)
        records.append(StudyRecord(
            n=n,
            weak_probe_values=values,
            op_norm_dist_to_ref=op_dist,
            trace_norm_dist_to_ref=tr_dist,
            q_hat_norm=compat.q_hat_norm,
            a22_effective_cond=compat.a22_condition_effective,
        ))
    verdict = _verdict(probe_series, trace_dists, q_hat_norms, model.trace_class)
    return ConvergenceReport(records=tuple(records), reference_n=reference_n, verdict=verdict)


def decreasing_approximation_study(a: SymPosOperator, split: SubspaceSplit,
                                   eps_schedule) -> ConvergenceReport:
    """Short the shifted operators A + eps I along a descending schedule.

    The shifts approximate A from above, so their shorts decrease in the
    Loewner order toward the short of A; both facts are asserted within
    tolerance. Records carry the shift in `epsilon` and distances to the
    short of A itself.
    """
    eps_schedule = [float(e) for e in eps_schedule]
    if len(eps_schedule) < 2:
        raise ParameterOutOfRange("need at least 2 epsilon values")
    if any(e <= 0 for e in eps_schedule) or any(
        b >= a_ for a_, b in zip(eps_schedule, eps_schedule[1:])
    ):
        raise ParameterOutOfRange("epsilon schedule must be strictly decreasing and positive")
    exact = short(a, split)
    eye = np.eye(a.dim)
    probes = [(np.eye(split.n1)[i], np.eye(split.n1)[i]) for i in range(split.n1)]
    records = []
    probe_series: list[list[float]] = [[] for _ in probes]
    trace_dists: list[float] = []
    q_hat_norms: list[float] = []
    prev_block = None
    mono_tol = 1e-9 * (1.0 + a.norm)
    for step, eps in enumerate(eps_schedule, start=1):
        shifted = validate_psd(a.entries + eps * eye, tol_sym=a.tol_sym, tol_psd=a.tol_psd)
        result = short(shifted, split)
        compat = compatibility_report(shifted, split)
        if prev_block is not None:
            drop = float(np.linalg.eigvalsh(prev_block - result.h1_block)[0])
            if drop < -mono_tol:
                raise NumericalError(
                    f"shifted shorts are not Loewner nonincreasing at eps={eps:g} (gap {drop:.3e})"
                )
        prev_block = result.h1_block
        values = tuple(_probe_value(result, c, d) for c, d in probes)
        for series, v in zip(probe_series, values):
            series.append(v)
        diff = result.h1_block - exact.h1_block
        trace_dists.append(trace_norm(diff))
        q_hat_norms.append(compat.q_hat_norm)
        records.append(StudyRecord(
            n=step,
            weak_probe_values=values,
            op_norm_dist_to_ref=operator_norm(diff),
            trace_norm_dist_to_ref=trace_dists[-1],
            q_hat_norm=compat.q_hat_norm,
            a22_effective_cond=compat.a22_condition_effective,
            epsilon=eps,
        ))
    if records[-1].op_norm_dist_to_ref > records[0].op_norm_dist_to_ref + 1e-12 * (1.0 + a.norm):
        raise NumericalError("shifted shorts failed to approach the short of A")
    verdict = _verdict(probe_series, trace_dists, q_hat_norms, trace_class=True)
    return ConvergenceReport(records=tuple(records), reference_n=0, verdict=verdict)
