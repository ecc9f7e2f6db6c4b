"""Figures written next to the CSV/JSON reports.

Everything renders off-screen with the Agg backend; the functions only write
files and never open windows.
"""

from __future__ import annotations

from collections import Counter
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .graph import TGraph, all_pairs_distances  # noqa: E402

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def _figure(ncols: int = 1, width: float = 6.0):
    fig, axes = plt.subplots(1, ncols, figsize=(width * ncols, width * GOLDEN))
    return fig, np.atleast_1d(axes)


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    # fixed metadata keeps the file stable across runs
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_graph_profile(g: TGraph, path: str | Path) -> Path:
    """Degree histogram and pairwise hop-distance histogram."""
    fig, (ax_deg, ax_dist) = _figure(2)
    degs = Counter(g.degrees())
    ax_deg.bar(list(degs), list(degs.values()), color="0.4")
    ax_deg.set_xlabel("degree (keys per node)")
    ax_deg.set_ylabel("nodes")

    d = all_pairs_distances(g)
    upper = d[np.triu_indices(g.n, k=1)]
    finite = upper[upper > 0]
    if finite.size:
        counts = np.bincount(finite)
        hops = np.arange(len(counts))
        ax_dist.bar(hops[1:], counts[1:], color="0.4")
    ax_dist.set_xlabel("hop distance")
    ax_dist.set_ylabel("node pairs")
    fig.suptitle(f"n={g.n}, |E|={g.edge_count}")
    return _save(fig, Path(path))


def plot_deploy(rows: list[dict], traces: list[dict], path: str | Path) -> Path:
    """Per-trial deployed mean distance against its bound, plus chain lengths."""
    fig, (ax_bound, ax_chain) = _figure(2)
    trials = [r["trial"] for r in rows]
    measured = [r["d_DT_neighbors"] for r in rows]
    bound = [r["thm4_bound"] if r["thm4_bound"] is not None else np.nan for r in rows]
    ax_bound.plot(trials, measured, "o", ms=3, color="k", label="measured")
    ax_bound.plot(trials, bound, "_", ms=8, color="tab:red", label="bound")
    ax_bound.set_xlabel("trial")
    ax_bound.set_ylabel("mean distance over physical neighbours")
    ax_bound.legend(frameon=False)

    hist: Counter = Counter()
    for tr in traces:
        hist.update({int(k): v for k, v in tr["chain_histogram"].items()})
    if hist:
        ax_chain.bar(list(hist), list(hist.values()), color="0.4")
    ax_chain.set_xlabel("acquaintance chain length")
    ax_chain.set_ylabel("conversions")
    return _save(fig, Path(path))


def plot_compromise(rows: list[dict], path: str | Path) -> Path:
    """Measured compromise fraction against the bound for each reuse level."""
    fig, (ax,) = _figure(1)
    gs = sorted({r["g"] for r in rows})
    for k, g in enumerate(gs):
        sub = [r for r in rows if r["g"] == g]
        x = np.full(len(sub), k, dtype=float) + np.linspace(-0.2, 0.2, len(sub))
        ax.plot(x, [r["fraction"] for r in sub], ".", color="k", ms=3)
        if sub[0]["bound"] is not None:
            ax.hlines(sub[0]["bound"], k - 0.3, k + 0.3, color="tab:red")
    ax.set_xticks(range(len(gs)), [f"g={g}" for g in gs])
    ax.set_ylabel("fraction of links affected")
    return _save(fig, Path(path))
