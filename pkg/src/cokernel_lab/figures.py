"""Report figures. Rendered headless to PNG next to the delimited output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

# Matplotlib stamps its version into the PNG by default; drop it so reruns
# under different patch versions stay comparable.
_PNG_META = {"Software": None}


def census_figure(report, path: Path, top: int = 12) -> Path:
    """Bar chart of empirical class frequencies with reference-mass marks."""
    rows = [r for r in report.rows if r.count > 0 or r.reference_mass > 1e-4][:top]
    labels = [r.label for r in rows] + ["other"]
    freqs = [r.frequency for r in rows] + [report.other_frequency]
    errs = [r.std_error for r in rows] + [0.0]
    refs = [r.reference_mass for r in rows] + [report.other_reference_mass]
    fig, ax = plt.subplots(figsize=(max(6.0, 0.7 * len(labels) + 2), 4.0))
    xs = range(len(labels))
    ax.bar(xs, freqs, yerr=errs, capsize=3, color="#4878cf", label="empirical")
    ax.plot(xs, refs, "r_", markersize=16, markeredgewidth=2, label="reference mass")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("frequency")
    ax.set_title(
        f"{report.kind}: n={report.n}, {report.replicas} replicas, "
        f"TV={report.tv_distance:.4f}"
    )
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)
    return path


def moment_scan_figure(report, path: Path) -> Path:
    """Exact moment against n with the unit line and MC error bars."""
    ns = [row.n for row in report.rows]
    exact = [row.exact_moment for row in report.rows]
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    ax.plot(ns, exact, "o-", color="#4878cf", label="exact moment")
    mc_ns = [row.n for row in report.rows if row.mc_estimate is not None]
    if mc_ns:
        mc = [row.mc_estimate for row in report.rows if row.mc_estimate is not None]
        se = [row.mc_se for row in report.rows if row.mc_estimate is not None]
        ax.errorbar(mc_ns, mc, yerr=se, fmt="s", color="#d65f5f", label="monte carlo")
    ax.axhline(1.0, color="gray", linestyle=":", label="limit 1")
    ax.set_xlabel("n")
    ax.set_ylabel("expected surjection count")
    group = report.rows[0].group if report.rows else ""
    ax.set_title(f"moment scan onto {group}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)
    return path
