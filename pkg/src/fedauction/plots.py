"""Render sweep figures to image files.

The CSV rows stay the data contract; these helpers only draw what a sweep
produced. Figures are written as PNG next to the summarized CSV.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

SCHEME_STYLE = {
    "greedy": dict(color="tab:blue", marker="o"),
    "exact": dict(color="tab:green", marker="s"),
    "lpr": dict(color="tab:purple", marker="^"),
    "lower_bound": dict(color="tab:gray", marker="v", linestyle="--"),
    "fixed_linear": dict(color="tab:red", marker="d"),
    "fixed_sublinear": dict(color="tab:orange", marker="d", linestyle=":"),
    "fixed_superlinear": dict(color="tab:brown", marker="d", linestyle="-."),
}


def _mean_by(rows: list[dict[str, Any]], x_col: str, scheme: str) -> tuple[list, list]:
    buckets: dict[float, list[float]] = {}
    for row in rows:
        if row["scheme"] != scheme or row["welfare"] in ("", None):
            continue
        x = float(row[x_col])
        buckets.setdefault(x, []).append(float(row["welfare"]))
    xs = sorted(buckets)
    return xs, [sum(buckets[x]) / len(buckets[x]) for x in xs]


def _plot_lines(rows, x_col, schemes, xlabel, title, path) -> bool:
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    drew = False
    for scheme in schemes:
        xs, ys = _mean_by(rows, x_col, scheme)
        if len(xs) < 2:
            continue
        ax.plot(xs, ys, label=scheme, **SCHEME_STYLE.get(scheme, {}))
        drew = True
    if drew:
        ax.set_xlabel(xlabel)
        ax.set_ylabel("mean social welfare")
        ax.set_title(title)
        ax.legend()
        ax.grid(alpha=0.3)
        fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return drew


def render_figures(rows: list[dict[str, Any]], outdir: str | Path) -> list[Path]:
    """Draw whatever trends the rows support; return the files written."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    all_schemes = list(SCHEME_STYLE)
    fixed_schemes = [s for s in all_schemes if s.startswith("fixed_")]

    path = outdir / "welfare_vs_users.png"
    if _plot_lines(rows, "N", all_schemes, "number of users", "Welfare vs. population", path):
        written.append(path)

    path = outdir / "welfare_vs_deadline.png"
    if _plot_lines(rows, "T_max", all_schemes, "task deadline (s)", "Welfare vs. deadline", path):
        written.append(path)

    path = outdir / "welfare_vs_price.png"
    price_rows = [r for r in rows if r["f_o"] not in ("", None)]
    if price_rows:
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        drew = False
        for scheme in fixed_schemes:
            xs, ys = _mean_by(price_rows, "f_o", scheme)
            if len(xs) < 2:
                continue
            ax.plot(xs, ys, label=scheme, **SCHEME_STYLE.get(scheme, {}))
            drew = True
        greedy = [float(r["welfare"]) for r in rows if r["scheme"] == "greedy" and r["welfare"] != ""]
        if drew and greedy:
            ax.axhline(sum(greedy) / len(greedy), color="tab:blue", label="greedy (mean)")
        if drew:
            ax.set_xlabel("basic price")
            ax.set_ylabel("mean social welfare")
            ax.set_title("Fixed-price welfare vs. basic price")
            ax.legend()
            ax.grid(alpha=0.3)
            fig.savefig(path, dpi=150, bbox_inches="tight")
            written.append(path)
        plt.close(fig)

    path = outdir / "utilization.png"
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    labels, util_b, util_a, frac = [], [], [], []
    for scheme in all_schemes:
        values_b = [float(r["util_B"]) for r in rows if r["scheme"] == scheme and r["util_B"] != ""]
        values_a = [float(r["util_A"]) for r in rows if r["scheme"] == scheme and r["util_A"] != ""]
        values_w = [
            float(r["winner_frac"]) for r in rows if r["scheme"] == scheme and r["winner_frac"] != ""
        ]
        if not values_b:
            continue
        labels.append(scheme)
        util_b.append(sum(values_b) / len(values_b))
        util_a.append(sum(values_a) / len(values_a))
        frac.append(sum(values_w) / len(values_w) if values_w else 0.0)
    if labels:
        positions = range(len(labels))
        width = 0.27
        ax.bar([p - width for p in positions], util_b, width, label="subchannel util.")
        ax.bar(list(positions), util_a, width, label="antenna util.")
        ax.bar([p + width for p in positions], frac, width, label="winner fraction")
        ax.set_xticks(list(positions))
        ax.set_xticklabels(labels, rotation=30, ha="right")
        ax.set_ylabel("mean fraction")
        ax.set_title("Resource utilization and winner share")
        ax.legend()
        fig.savefig(path, dpi=150, bbox_inches="tight")
        written.append(path)
    plt.close(fig)

    return written
