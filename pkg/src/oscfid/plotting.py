"""SVG rendering of curve files; matplotlib is imported on first use."""
from __future__ import annotations

from pathlib import Path

from .curvefile import CurveFile


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def render_curve(curve: CurveFile, path: str | Path, title: str | None = None) -> Path:
    """Draw every value column of ``curve`` against ``t`` and save as SVG."""
    plt = _pyplot()
    path = Path(path)
    t = curve.column("t")
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    try:
        for name in curve.columns:
            if name in ("t", "error"):
                continue
            ax.plot(t, curve.column(name), lw=1.2, label=name)
            if name == "value" and "error" in curve.columns:
                err = curve.column("error")
                if err.any():
                    ax.fill_between(t, curve.column(name) - err, curve.column(name) + err,
                                    alpha=0.25, lw=0)
        ax.set_xlabel("t")
        ax.set_ylabel("fidelity")
        ax.set_ylim(bottom=0.0)
        if len(curve.columns) > 3:
            ax.legend(frameon=False)
        h = curve.header
        ax.set_title(title or f"{h.get('case', '')}  g={h.get('g', '')}", fontsize=10)
        fig.tight_layout()
        fig.savefig(path, format="svg")
    finally:
        plt.close(fig)
    return path
