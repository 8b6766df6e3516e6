"""Text document formats for operators, measures, models, vectors, and reports.

One line-oriented syntax covers every artifact: `key: value` for
scalars and inline numeric lists, `key:` followed by indented rows for
matrices, `#` for comments. Floats are written with 17 significant
digits so every document round-trips bit for bit; writers never emit
timestamps, so identical inputs produce identical bytes.
"""

from __future__ import annotations

import csv
import re
from pathlib import Path

import numpy as np

from .core import SubspaceSplit, SymPosOperator, validate_psd
from .errors import ValidationError
from .gaussian import GaussianMeasure, MCReport
from .truncation import MODEL_REGISTRY, ConvergenceReport, OperatorModel

_INT_RE = re.compile(r"^[+-]?\d+$")

TABLE_HEADER = ("n", "probe_id", "probe_value", "op_dist", "trace_dist", "q_hat_norm")


def _format_number(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _parse_token(tok: str):
    if _INT_RE.match(tok):
        return int(tok)
    try:
        return float(tok)
    except ValueError:
        return tok


def write_document(path, items) -> None:
    """Write ordered (key, value) pairs; values may be scalars, strings,
    1-D sequences (inline), or 2-D arrays (indented block)."""
    lines = []
    for key, value in items:
        arr = np.asarray(value) if not isinstance(value, (str, bool)) else None
        if isinstance(value, bool):
            lines.append(f"{key}: {str(value).lower()}")
        elif isinstance(value, str):
            lines.append(f"{key}: {value}")
        elif arr.ndim == 0:
            lines.append(f"{key}: {_format_number(value)}")
        elif arr.ndim == 1:
            lines.append(f"{key}: " + " ".join(_format_number(v) for v in arr))
        elif arr.ndim == 2:
            lines.append(f"{key}:")
            for row in arr:
                lines.append("  " + " ".join(_format_number(v) for v in row))
        else:
            raise ValidationError(f"cannot serialize value of shape {arr.shape} for {key}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_document(path) -> dict:
    """Parse a document into an ordered key -> value dict."""
    text = Path(path).read_text()
    doc: dict = {}
    pending_key = None
    pending_rows: list[list[float]] = []

    def flush():
        nonlocal pending_key, pending_rows
        if pending_key is not None:
            if not pending_rows:
                raise ValidationError(f"matrix field {pending_key!r} has no rows")
            doc[pending_key] = np.array(pending_rows, dtype=float)
            pending_key, pending_rows = None, []

    for raw in text.splitlines():
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if raw[0] in " \t" and pending_key is not None:
            pending_rows.append([float(t) for t in stripped.split()])
            continue
        flush()
        if ":" not in raw:
            raise ValidationError(f"malformed line: {raw!r}")
        key, _, rest = raw.partition(":")
        key = key.strip()
        rest = rest.strip()
        if not rest:
            pending_key = key
        else:
            if rest == "true":
                doc[key] = True
            elif rest == "false":
                doc[key] = False
            else:
                tokens = rest.split()
                values = [_parse_token(t) for t in tokens]
                doc[key] = values[0] if len(values) == 1 else values
    flush()
    return doc


def _require(doc: dict, key: str, path):
    if key not in doc:
        raise ValidationError(f"{path}: missing required field {key!r}")
    return doc[key]


def _split_from_doc(doc: dict, dim: int) -> SubspaceSplit:
    n1 = int(doc["n1"])
    basis = doc.get("basis")
    return SubspaceSplit(dim=dim, n1=n1, basis=np.asarray(basis, float) if basis is not None else None)


def write_operator(path, op: SymPosOperator, split: SubspaceSplit) -> None:
    items = [("kind", "operator"), ("dim", op.dim), ("n1", split.n1)]
    if split.basis is not None:
        items.append(("basis", split.basis))
    items.append(("entries", op.entries))
    write_document(path, items)


def read_operator(path, tol_sym=None, tol_psd=None) -> tuple[SymPosOperator, SubspaceSplit]:
    doc = read_document(path)
    if doc.get("kind") != "operator":
        raise ValidationError(f"{path}: expected kind operator, got {doc.get('kind')!r}")
    entries = np.asarray(_require(doc, "entries", path), dtype=float)
    kwargs = {}
    if tol_sym is not None:
        kwargs["tol_sym"] = tol_sym
    if tol_psd is not None:
        kwargs["tol_psd"] = tol_psd
    op = validate_psd(entries, **kwargs)
    if int(_require(doc, "dim", path)) != op.dim:
        raise ValidationError(f"{path}: declared dim does not match entries")
    return op, _split_from_doc(doc, op.dim)


def write_measure(path, mu: GaussianMeasure) -> None:
    items = [("kind", "measure"), ("dim", mu.cov.dim), ("n1", mu.split.n1)]
    if mu.split.basis is not None:
        items.append(("basis", mu.split.basis))
    items.append(("mean", mu.mean))
    items.append(("entries", mu.cov.entries))
    write_document(path, items)


def read_measure(path, tol_sym=None, tol_psd=None) -> GaussianMeasure:
    doc = read_document(path)
    if doc.get("kind") != "measure":
        raise ValidationError(f"{path}: expected kind measure, got {doc.get('kind')!r}")
    entries = np.asarray(_require(doc, "entries", path), dtype=float)
    kwargs = {}
    if tol_sym is not None:
        kwargs["tol_sym"] = tol_sym
    if tol_psd is not None:
        kwargs["tol_psd"] = tol_psd
    cov = validate_psd(entries, **kwargs)
    mean = np.atleast_1d(np.asarray(_require(doc, "mean", path), dtype=float))
    return GaussianMeasure(mean=mean, cov=cov, split=_split_from_doc(doc, cov.dim))


def write_vector(path, values) -> None:
    values = np.atleast_1d(np.asarray(values, dtype=float))
    write_document(path, [("kind", "vector"), ("dim", len(values)), ("entries", values)])


def read_vector(path) -> np.ndarray:
    doc = read_document(path)
    if doc.get("kind") != "vector":
        raise ValidationError(f"{path}: expected kind vector, got {doc.get('kind')!r}")
    values = np.atleast_1d(np.asarray(_require(doc, "entries", path), dtype=float))
    if int(_require(doc, "dim", path)) != len(values):
        raise ValidationError(f"{path}: declared dim does not match entries")
    return values


def write_model_spec(path, name: str, params: dict) -> None:
    items = [("kind", "model-spec"), ("model", name)]
    items.extend(sorted(params.items()))
    write_document(path, items)


def read_model_spec(path) -> OperatorModel:
    doc = read_document(path)
    if doc.get("kind") != "model-spec":
        raise ValidationError(f"{path}: expected kind model-spec, got {doc.get('kind')!r}")
    name = _require(doc, "model", path)
    factory = MODEL_REGISTRY.get(name)
    if factory is None:
        raise ValidationError(f"{path}: unknown model {name!r}; known: {sorted(MODEL_REGISTRY)}")
    params = {k: v for k, v in doc.items() if k not in ("kind", "model")}
    try:
        return factory(**params)
    except TypeError as exc:
        raise ValidationError(f"{path}: bad parameters for model {name!r}: {exc}") from exc


def convergence_report_items(report: ConvergenceReport, command: str, extra=()):
    """Flatten a study report into stable-order document items."""
    items = [("kind", "report"), ("command", command)]
    items.extend(extra)
    items.append(("verdict", report.verdict))
    items.append(("reference_n", report.reference_n))
    items.append(("schedule", [r.n for r in report.records]))
    for rec in report.records:
        prefix = f"rec.{rec.n:05d}"
        if rec.epsilon is not None:
            items.append((f"{prefix}.epsilon", rec.epsilon))
        items.append((f"{prefix}.probes", list(rec.weak_probe_values)))
        items.append((f"{prefix}.op_dist", rec.op_norm_dist_to_ref))
        items.append((f"{prefix}.trace_dist", rec.trace_norm_dist_to_ref))
        items.append((f"{prefix}.q_hat_norm", rec.q_hat_norm))
        items.append((f"{prefix}.a22_cond", rec.a22_effective_cond))
    return items


def mc_report_items(report: MCReport, command: str = "mcverify"):
    return [
        ("kind", "report"),
        ("command", command),
        ("n_samples", report.n_samples),
        ("seed", report.seed),
        ("residual_cross_cov_norm", report.residual_cross_cov_norm),
        ("residual_cov_error", report.residual_cov_error),
        ("mean_formula_error", report.mean_formula_error),
    ]


def report_table_rows(report: ConvergenceReport):
    """Flat plot-data rows: (n, probe_id, probe_value, op_dist, trace_dist, q_hat_norm)."""
    for rec in report.records:
        for pid, value in enumerate(rec.weak_probe_values):
            yield (
                rec.n,
                pid,
                value,
                rec.op_norm_dist_to_ref,
                rec.trace_norm_dist_to_ref,
                rec.q_hat_norm,
            )


def write_table(path, rows, header=TABLE_HEADER) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_number(v) if not isinstance(v, str) else v for v in row])


def table_path_for(output_path) -> Path:
    p = Path(output_path)
    return p.with_name(p.stem + ".table.csv")
