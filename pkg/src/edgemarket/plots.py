"""Figure rendering for metrics files.

Reads rows produced by the harness and draws one figure per scenario
found in the file.  The delimited file stays the canonical output; the
figures are a convenience layer on top of it, written alongside as PNG.
"""
from __future__ import annotations

import math
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .harness import read_metrics_csv  # noqa: E402

__all__ = ["render_report"]

_STYLE = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
    "legend.frameon": False,
}


def _mean_se(values):
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    se = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return mean, se


def _series(rows, x_of, y_of):
    """Collapse rows into (x, mean(y), se(y)) sorted by x."""
    groups = defaultdict(list)
    for row in rows:
        groups[x_of(row)].append(y_of(row))
    xs = sorted(groups)
    means, ses = [], []
    for x in xs:
        mean, se = _mean_se(groups[x])
        means.append(mean)
        ses.append(se)
    return xs, means, ses


def _by(rows, key_of):
    groups = defaultdict(list)
    for row in rows:
        groups[key_of(row)].append(row)
    return groups


def _plot_method_comparison(ax, rows, y_of, ylabel):
    for method, sub in sorted(_by(rows, lambda r: r.method).items()):
        xs, means, ses = _series(sub, lambda r: r.param_value, y_of)
        ax.errorbar(xs, means, yerr=ses, marker="o", capsize=3, label=method)
    ax.set_ylabel(ylabel)
    ax.legend()


def _draw_welfare_vs_tasks(ax, rows):
    _plot_method_comparison(ax, rows, lambda r: r.social_welfare,
                            "social welfare")
    ax.set_xlabel("number of tasks")


def _draw_welfare_vs_ues(ax, rows):
    _plot_method_comparison(ax, rows, lambda r: r.social_welfare,
                            "social welfare")
    ax.set_xlabel("number of devices")


def _draw_truthfulness(ax, rows):
    for seed, sub in sorted(_by(rows, lambda r: r.seed).items()):
        sub = sorted(sub, key=lambda r: r.param_value)
        ax.plot([r.param_value for r in sub], [r.aux for r in sub],
                marker=".", label=f"seed {seed}")
    ax.set_xlabel("declared valuation")
    ax.set_ylabel("buyer payoff")
    if len(_by(rows, lambda r: r.seed)) <= 6:
        ax.legend()


def _draw_rationality(ax, rows):
    methods = sorted(_by(rows, lambda r: r.method))
    means = []
    ses = []
    for method in methods:
        mean, se = _mean_se([r.aux for r in rows if r.method == method])
        means.append(mean)
        ses.append(se)
    ax.bar(range(len(methods)), means, yerr=ses, capsize=4,
           tick_label=methods)
    ax.set_ylabel("buyer payoff")


def _draw_success(ax, rows):
    xs, means, ses = _series(rows, lambda r: r.param_value,
                             lambda r: r.success_rate)
    ax.errorbar(xs, means, yerr=ses, marker="o", capsize=3)
    ax.set_xlabel("number of task requests")
    ax.set_ylabel("success rate")
    ax.set_ylim(bottom=0)


def _draw_efficiency(ax, rows):
    xs, means, ses = _series(rows, lambda r: float(r.num_ues),
                             lambda r: r.runtime_ms)
    ax.errorbar(xs, means, yerr=ses, marker="o", capsize=3, label="measured")
    k = np.asarray(xs, dtype=float)
    basis = k * k * np.log2(np.maximum(k, 2.0))
    coeff = float(np.dot(basis, means) / np.dot(basis, basis))
    dense = np.linspace(k.min(), k.max(), 100)
    ax.plot(dense, coeff * dense * dense * np.log2(np.maximum(dense, 2.0)),
            "--", label="quadratic-log fit")
    ax.set_xlabel("number of bidders")
    ax.set_ylabel("auction runtime (ms)")
    ax.legend()


def _draw_convergence_cost(ax, rows):
    for seed, sub in sorted(_by(rows, lambda r: r.seed).items()):
        sub = sorted(sub, key=lambda r: r.param_value)
        ax.plot([r.param_value for r in sub], [r.aux for r in sub],
                marker=".", label=f"seed {seed}")
    ax.set_xlabel("iteration")
    ax.set_ylabel("total buyer cost")
    if len(_by(rows, lambda r: r.seed)) <= 6:
        ax.legend()


def _draw_convergence_welfare(ax, rows):
    for n, sub in sorted(_by(rows, lambda r: r.num_tasks).items()):
        xs, means, _ = _series(sub, lambda r: r.param_value, lambda r: r.aux)
        ax.plot(xs, means, marker=".", label=f"{n} requests")
    ax.set_xlabel("iteration")
    ax.set_ylabel("social welfare")
    ax.legend()


def _draw_generic(ax, rows):
    have_aux = any(not math.isnan(r.aux) for r in rows)
    y_of = (lambda r: r.aux) if have_aux else (lambda r: r.social_welfare)
    xs, means, ses = _series(rows, lambda r: r.param_value, y_of)
    ax.errorbar(xs, means, yerr=ses, marker="o", capsize=3)
    ax.set_xlabel(rows[0].param_name or "parameter")
    ax.set_ylabel("aux" if have_aux else "social welfare")


_DRAWERS = {
    "welfare_vs_tasks": _draw_welfare_vs_tasks,
    "welfare_vs_ues": _draw_welfare_vs_ues,
    "truthfulness": _draw_truthfulness,
    "rationality": _draw_rationality,
    "success_vs_requests": _draw_success,
    "efficiency": _draw_efficiency,
    "convergence_cost": _draw_convergence_cost,
    "convergence_welfare": _draw_convergence_welfare,
}


def render_report(csv_path, out_dir) -> list:
    """Draw one figure per scenario present in a metrics file.

    Returns the written figure paths.  Unknown scenarios get a generic
    parameter-versus-metric plot rather than an error, so the file never
    limits what the harness can record.
    """
    rows = read_metrics_csv(csv_path)
    if not rows:
        raise ValueError(f"no rows in {csv_path}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for scenario, sub in sorted(_by(rows, lambda r: r.scenario).items()):
        with plt.rc_context(_STYLE):
            fig, ax = plt.subplots()
            _DRAWERS.get(scenario, _draw_generic)(ax, sub)
            ax.set_title(scenario.replace("_", " "))
            fig.tight_layout()
            path = out / f"{scenario}.png"
            fig.savefig(path)
            plt.close(fig)
        written.append(path)
    return written
