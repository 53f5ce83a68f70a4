"""
Figures for reports: heatmaps, the five-panel explanation figure, the
alpha-sweep curve and the JND score/MOS scatter.

Figures are built on bare ``Figure`` objects with the Agg canvas, so no
pyplot state is shared between threads. PNG metadata is stripped so that
reruns give byte-identical files.
"""

import numpy as np
from matplotlib import colormaps
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .io import save_rgb

HEATMAP_CMAP = "inferno"
_PNG_METADATA = {"Software": None}


def colorize(values, cmap=HEATMAP_CMAP):
    """Map a [0, 1] raster through a fixed perceptual color ramp to uint8 RGB."""
    v = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    rgba = colormaps[cmap](v, bytes=True)
    return rgba[..., :3]


def save_heatmap(path, values, cmap=HEATMAP_CMAP):
    save_rgb(path, colorize(values, cmap))


def _new_figure(width, height):
    fig = Figure(figsize=(width, height), dpi=100)
    FigureCanvasAgg(fig)
    return fig


def _save(fig, path):
    fig.savefig(path, format="png", metadata=_PNG_METADATA)


def explanation_figure(path, x, y, report):
    """Reference, distorted, texture map, color map and overlay side by side."""
    if report.overlay is None:
        raise ValueError("report carries no maps; compute it with maps=True")
    fig = _new_figure(15, 3.4)
    panels = [
        (x, "X", None),
        (y, "Y", None),
        (report.texture_diff, "texture |F| diff", HEATMAP_CMAP),
        (report.color_diff, "Oklab dE", HEATMAP_CMAP),
        (report.overlay, "overlay", HEATMAP_CMAP),
    ]
    for n, (img, title, cmap) in enumerate(panels):
        ax = fig.add_subplot(1, 5, n + 1)
        if cmap is None:
            ax.imshow(img, interpolation="nearest")
        else:
            ax.imshow(img, cmap=cmap, vmin=0.0, vmax=max(float(np.max(img)), 1e-12), interpolation="nearest")
        ax.set_title(title, fontsize=10)
        ax.set_xticks([])
        ax.set_yticks([])
    fig.suptitle(
        f"EDOKS {report.edoks_value:.4g}   EMD {report.emd_value:.4g}   OK {report.ok_value:.4g}   "
        f"alpha {report.config.alpha:g}",
        fontsize=10)
    fig.tight_layout()
    _save(fig, path)


def alpha_sweep_figure(path, rows):
    alphas = [a for a, _ in rows]
    values = [s for _, s in rows]
    fig = _new_figure(5, 3.5)
    ax = fig.add_subplot(1, 1, 1)
    ax.plot(alphas, values, color="black", lw=1.2)
    finite = [(s, a) for a, s in rows if np.isfinite(s)]
    if finite:
        best, at = max(finite)
        ax.axvline(at, color="tab:red", lw=0.8, ls="--")
        ax.annotate(f"alpha = {at:g}", (at, best), textcoords="offset points", xytext=(5, -12), fontsize=8)
    ax.set_xlabel("alpha")
    ax.set_ylabel("SROCC")
    ax.set_xlim(0, 1)
    fig.tight_layout()
    _save(fig, path)


def jnd_figure(path, scores, mos, fit=None, group_means=None):
    """Scatter of scores against MOS with the fitted logistic curve."""
    scores = np.asarray(scores, dtype=np.float64)
    fig = _new_figure(9 if group_means else 5, 3.5)
    ax = fig.add_subplot(1, 2 if group_means else 1, 1)
    ax.scatter(scores, mos, s=6, alpha=0.5, color="tab:blue")
    if fit is not None and scores.size:
        grid = np.linspace(scores.min(), scores.max(), 200)
        ax.plot(grid, fit(grid), color="tab:red", lw=1.2)
    ax.set_xlabel("EDOKS")
    ax.set_ylabel("MOS")
    if group_means:
        ax2 = fig.add_subplot(1, 2, 2)
        ax2.bar(["same", "not same"], group_means, color=["tab:green", "tab:red"])
        ax2.set_ylabel("mean EDOKS")
    fig.tight_layout()
    _save(fig, path)
