"""Figure rendering for the report paths (spectrum, scaling, suite)."""

from __future__ import annotations

import math


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_spectrum(rows: list[dict], theta_min: float, path: str, title: str = "") -> str:
    """Eigenphase/overlap scatter with the phase floor marked."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    thetas = [abs(r["theta"]) for r in rows]
    overlaps = [max(r["overlap2"], 1e-300) for r in rows]
    ax.scatter(thetas, overlaps, s=22, alpha=0.8)
    ax.axvline(theta_min, color="tab:red", linestyle="--", label=f"phase floor {theta_min:.4g}")
    ax.set_yscale("log")
    ax.set_ylim(1e-20, 2.0)
    ax.set_xlabel("|eigenphase|")
    ax.set_ylabel("squared overlap with start state")
    if title:
        ax.set_title(title)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_scaling(rows: list[dict], slope: float, path: str) -> str:
    """Log-log query scaling with the fitted slope line."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    ns = [r["N"] for r in rows]
    qs = [r["mean_queries"] for r in rows]
    ax.loglog(ns, qs, "o-", label="mean queries")
    anchor = qs[0] / ns[0] ** slope
    ax.loglog(ns, [anchor * n**slope for n in ns], "--", label=f"fit slope {slope:.3f}")
    ax.loglog(ns, [qs[0] * math.sqrt(n / ns[0]) for n in ns], ":", label="slope 0.5 reference")
    ax.set_xlabel("leaves N")
    ax.set_ylabel("oracle queries per decision")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_suite(report, path: str) -> str:
    """Per-check pass/fail/flag counts as a horizontal bar chart."""
    plt = _pyplot()
    by_check: dict[str, list[int]] = {}
    for r in report.results:
        row = by_check.setdefault(r.check, [0, 0, 0])
        if not r.passed:
            row[1] += 1
        elif r.flagged:
            row[2] += 1
        else:
            row[0] += 1
    names = sorted(by_check)
    passed = [by_check[n][0] for n in names]
    failed = [by_check[n][1] for n in names]
    flagged = [by_check[n][2] for n in names]
    fig, ax = plt.subplots(figsize=(7.5, 0.45 * len(names) + 1.5))
    ax.barh(names, passed, color="tab:green", label="pass")
    ax.barh(names, flagged, left=passed, color="tab:orange", label="flagged")
    ax.barh(names, failed, left=[p + f for p, f in zip(passed, flagged)], color="tab:red", label="fail")
    ax.set_xlabel("checks")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
