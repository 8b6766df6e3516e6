"""Batch command-line front end.

One job per process: read the inputs, run the requested computation,
write one report document (plus a plot-data table and figures for
studies). Exit status 0 on success, 1 when an input fails validation,
2 when a computation fails numerically, 3 on I/O trouble.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from . import io
from .errors import NumericalError, ShortOpsError, ValidationError
from .gaussian import condition, mc_verify
from .oblique import build_special_projection, compatibility_report, verify_inverse_identity
from .plotting import plot_convergence
from .selftest import run_suites
from .shorting import DEFAULT_EPS_SCHEDULE, short, short_regularized
from .truncation import convergence_study, make_schedule

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3

COMMANDS = ("short", "project", "condition", "converge", "mcverify", "selftest")


@dataclass
class JobConfig:
    command: str
    input_paths: list[str]
    output_path: str | None
    method: str = "auto"
    schedule: list[int] | None = None
    eps_schedule: list[float] | None = None
    seed: int = 0
    count: int = 1_000_000
    tol_sym: float | None = None
    tol_psd: float | None = None
    rank_tol: float | None = None
    figures: bool = True


def _parse_int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.replace(",", " ").split()]


def _parse_float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.replace(",", " ").split()]


def parse_args(argv) -> JobConfig:
    parser = argparse.ArgumentParser(
        prog="shortops",
        description="Shorted operators, oblique projections, and Gaussian conditioning.",
    )
    parser.add_argument("--command", required=True, choices=COMMANDS)
    parser.add_argument("--input", action="append", default=[], help="input document; repeatable")
    parser.add_argument("--output", help="report path")
    parser.add_argument("--method", default="auto",
                        choices=("auto", "schur", "pseudo", "regularized", "oblique"))
    parser.add_argument("--schedule", help="comma-separated truncation sizes")
    parser.add_argument("--eps", help="comma-separated descending epsilon schedule")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--count", type=int, default=1_000_000)
    parser.add_argument("--tol-sym", type=float, default=None)
    parser.add_argument("--tol-psd", type=float, default=None)
    parser.add_argument("--rank-tol", type=float, default=None)
    parser.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    ns = parser.parse_args(argv)
    return JobConfig(
        command=ns.command,
        input_paths=ns.input,
        output_path=ns.output,
        method=ns.method,
        schedule=_parse_int_list(ns.schedule) if ns.schedule else None,
        eps_schedule=_parse_float_list(ns.eps) if ns.eps else None,
        seed=ns.seed,
        count=ns.count,
        tol_sym=ns.tol_sym,
        tol_psd=ns.tol_psd,
        rank_tol=ns.rank_tol,
        figures=not ns.no_figures,
    )


def _need_inputs(config: JobConfig, count: int) -> None:
    if len(config.input_paths) != count:
        raise ValidationError(
            f"command {config.command} needs exactly {count} --input file(s), got {len(config.input_paths)}"
        )
    if config.output_path is None:
        raise ValidationError(f"command {config.command} needs --output")


def _run_short(config: JobConfig) -> None:
    _need_inputs(config, 1)
    op, split = io.read_operator(config.input_paths[0], tol_sym=config.tol_sym, tol_psd=config.tol_psd)
    if config.method == "regularized":
        result = short_regularized(op, split, config.eps_schedule or DEFAULT_EPS_SCHEDULE)
    else:
        kwargs = {"rank_tol": config.rank_tol} if config.rank_tol is not None else {}
        result = short(op, split, method=config.method, **kwargs)
    items = [
        ("kind", "report"),
        ("command", "short"),
        ("method", result.method),
        ("dim", op.dim),
        ("n1", split.n1),
        ("a22_rank", result.diagnostics.a22_rank),
        ("range_residual", result.diagnostics.range_residual),
        ("loewner_gap_eig", result.diagnostics.loewner_gap_eig),
    ]
    if result.diagnostics.epsilon_schedule is not None:
        items.append(("epsilon_schedule", list(result.diagnostics.epsilon_schedule)))
    items.append(("shorted", result.shorted.entries))
    io.write_document(config.output_path, items)


def _run_project(config: JobConfig) -> None:
    _need_inputs(config, 1)
    op, split = io.read_operator(config.input_paths[0], tol_sym=config.tol_sym, tol_psd=config.tol_psd)
    kwargs = {"rank_tol": config.rank_tol} if config.rank_tol is not None else {}
    projection = build_special_projection(op, split, **kwargs)
    compat = compatibility_report(op, split, **kwargs)
    certs = projection.certificates
    io.write_document(config.output_path, [
        ("kind", "report"),
        ("command", "project"),
        ("dim", op.dim),
        ("n1", split.n1),
        ("compatible", compat.compatible),
        ("solve_residual", certs.solve_residual),
        ("a22_rank", compat.a22_rank),
        ("a22_condition_effective", compat.a22_condition_effective),
        ("q_hat_norm", certs.q_hat_norm),
        ("idempotency_defect", certs.idempotency_defect),
        ("a_symmetry_defect", certs.a_symmetry_defect),
        ("inverse_identity_defect", verify_inverse_identity(projection)),
        ("q_hat", np.atleast_2d(projection.q_hat)),
        ("q_full", projection.q_full),
    ])


def _run_condition(config: JobConfig) -> None:
    _need_inputs(config, 2)
    mu = io.read_measure(config.input_paths[0], tol_sym=config.tol_sym, tol_psd=config.tol_psd)
    t = io.read_vector(config.input_paths[1])
    mean_t, law = condition(mu, t)
    io.write_document(config.output_path, [
        ("kind", "report"),
        ("command", "condition"),
        ("dim", mu.cov.dim),
        ("n1", mu.split.n1),
        ("t", t),
        ("mean_t", mean_t),
        ("q_hat_adj", np.atleast_2d(law.q_hat_adj)),
        ("cond_cov", law.cond_cov.shorted.entries),
    ])


def _run_converge(config: JobConfig) -> None:
    _need_inputs(config, 1)
    model = io.read_model_spec(config.input_paths[0])
    if not config.schedule:
        raise ValidationError("converge needs --schedule")
    schedule = make_schedule(config.schedule, model.n1)
    report = convergence_study(model, schedule)
    io.write_document(config.output_path, io.convergence_report_items(report, "converge"))
    io.write_table(io.table_path_for(config.output_path), io.report_table_rows(report))
    if config.figures:
        plot_convergence(report, config.output_path)


def _run_mcverify(config: JobConfig) -> None:
    _need_inputs(config, 1)
    mu = io.read_measure(config.input_paths[0], tol_sym=config.tol_sym, tol_psd=config.tol_psd)
    report = mc_verify(mu, config.count, config.seed)
    io.write_document(config.output_path, io.mc_report_items(report))


def run(config: JobConfig) -> int:
    """Dispatch a job; returns the process exit status."""
    try:
        if config.command == "selftest":
            return EXIT_OK if run_suites() else EXIT_NUMERICAL
        handler = {
            "short": _run_short,
            "project": _run_project,
            "condition": _run_condition,
            "converge": _run_converge,
            "mcverify": _run_mcverify,
        }[config.command]
        handler(config)
        return EXIT_OK
    except ValidationError as exc:
        print(f"validation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ShortOpsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def main(argv=None) -> int:
    config = parse_args(sys.argv[1:] if argv is None else argv)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
