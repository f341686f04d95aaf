"""Figure rendering for run and comparison reports.

SVGs are written with a fixed hash salt and no date stamp so reruns produce
byte-identical files.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "svg.hashsalt": "isacopt",
    "svg.fonttype": "none",
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "figure.figsize": (5.0, 3.6),
}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": "isacopt"})
    plt.close(fig)


def plot_fronts(fronts: dict, path, title: str | None = None):
    """Scatter of (utility, log sum CRB) per label; ``fronts`` maps label -> (n, 2) raw F1, F2."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label, pts in fronts.items():
            if len(pts):
                ax.scatter(pts[:, 0], pts[:, 1], s=12, label=label)
        ax.set_xlabel("network utility $F_1$")
        ax.set_ylabel("log sum CRB $F_2$")
        if title:
            ax.set_title(title)
        if len(fronts) > 1:
            ax.legend()
        _save(fig, path)


def plot_hv_curves(curves: dict, path, title: str | None = None):
    """HV against evaluation count; ``curves`` maps label -> (evaluations, hv)."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label, (evals, hv) in curves.items():
            ax.plot(evals, hv, label=label, lw=1.2)
        ax.set_xlabel("number of evaluations")
        ax.set_ylabel("hypervolume")
        if title:
            ax.set_title(title)
        if len(curves) > 1:
            ax.legend()
        _save(fig, path)
