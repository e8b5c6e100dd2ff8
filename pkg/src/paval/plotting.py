"""Rendering of convergence probes to image files (headless)."""

from __future__ import annotations

from .oracle import ConvergenceProbe


def render_probe(probe: ConvergenceProbe, path, threshold: float | None = None) -> None:
    """Plot acceptance against the pump index and save the figure to `path`."""
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    xs = [s.n for s in probe.samples]
    ys = [float(s.value) for s in probe.samples]
    fig, ax = plt.subplots(figsize=(6.0, 3.7))
    ax.plot(xs, ys, marker="o", linewidth=1.2, color="#1f5fa8")
    if threshold is None:
        threshold = 1.0 - probe.tolerance
    ax.axhline(threshold, linestyle="--", linewidth=0.9, color="#a83232")
    ax.set_xlabel("n")
    ax.set_ylabel("acceptance probability")
    ax.set_ylim(-0.03, 1.03)
    title = probe.description
    if len(title) > 70:
        title = title[:67] + "..."
    ax.set_title(title, fontsize=10)
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
