"""Figure rendering for study reports.

Figures are written next to the delimited table output; the Agg backend
keeps rendering headless. One figure shows the distance curves, one the
projection-norm growth, one the weak-probe traces.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .truncation import ConvergenceReport

FIG_SIZE = (5.0, 3.4)


def _new_axes(title: str, xlabel: str, ylabel: str):
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, which="both", alpha=0.3)
    return fig, ax


def plot_convergence(report: ConvergenceReport, basepath) -> list[Path]:
    """Render the three study figures; returns the written paths."""
    base = Path(basepath)
    ns = [rec.n for rec in report.records]
    written = []

    fig, ax = _new_axes("distance to reference short", "n", "distance")
    op = [rec.op_norm_dist_to_ref for rec in report.records]
    tr = [rec.trace_norm_dist_to_ref for rec in report.records]
    ax.plot(ns, op, "o-", label="operator norm")
    ax.plot(ns, tr, "s--", label="trace norm")
    ax.set_xscale("log")
    if any(v > 0 for v in op + tr):
        ax.set_yscale("log")
    ax.legend()
    path = base.with_name(base.stem + ".fig-distances.png")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    fig, ax = _new_axes("projection block norm", "n", "norm")
    ax.plot(ns, [rec.q_hat_norm for rec in report.records], "o-")
    ax.set_xscale("log")
    path = base.with_name(base.stem + ".fig-qhat.png")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    fig, ax = _new_axes("weak probe values", "n", "probe value")
    count = len(report.records[0].weak_probe_values) if report.records else 0
    for pid in range(count):
        ax.plot(ns, [rec.weak_probe_values[pid] for rec in report.records], "o-", label=f"probe {pid}")
    ax.set_xscale("log")
    if count:
        ax.legend(fontsize=8)
    path = base.with_name(base.stem + ".fig-probes.png")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    written.append(path)
    return written
