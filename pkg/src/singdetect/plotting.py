"""Figures for traced curves and radius diagnostics, written as files."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .data import RectDomain  # noqa: E402
from .diagnostics import RadiusSamples, TracedCurve  # noqa: E402

# fixed hash salt and no date stamp so repeated runs write identical SVG bytes
_SAVE_RC = {"svg.hashsalt": "singdetect", "svg.fonttype": "none"}


def _save(fig, path) -> None:
    path = Path(path)
    fmt = path.suffix.lstrip(".").lower() or "svg"
    meta = {"Date": None} if fmt in ("svg", "pdf") else {}
    with plt.rc_context(_SAVE_RC):
        fig.savefig(path, format=fmt, metadata=meta, bbox_inches="tight")
    plt.close(fig)


def plot_detection(path, curve: TracedCurve | None, domain: RectDomain,
                   points=None, filtered=None, title: str | None = None) -> None:
    fig, ax = plt.subplots(figsize=(4.0, 4.0))
    ax.plot([domain.xmin, domain.xmax, domain.xmax, domain.xmin, domain.xmin],
            [domain.ymin, domain.ymin, domain.ymax, domain.ymax, domain.ymin],
            color="0.2", lw=0.8)
    if points is not None and len(points):
        p = np.asarray(points)
        ax.plot(p[:, 0], p[:, 1], ".", ms=2.5, color="tab:red", alpha=0.6, label="data")
    if filtered is not None and len(filtered):
        p = np.asarray(filtered)
        ax.plot(p[:, 0], p[:, 1], ".", ms=3.0, color="tab:green", label="filtered")
    if curve is not None:
        for i, seg in enumerate(curve.segments):
            ax.plot(seg[:, 0], seg[:, 1], "-", color="tab:blue", lw=1.4,
                    label="detected" if i == 0 else None)
    ax.set_aspect("equal")
    pad = 0.03 * max(domain.xmax - domain.xmin, domain.ymax - domain.ymin)
    ax.set_xlim(domain.xmin - pad, domain.xmax + pad)
    ax.set_ylim(domain.ymin - pad, domain.ymax + pad)
    if title:
        ax.set_title(title, fontsize=9)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(loc="upper right", fontsize=7, frameon=False)
    _save(fig, path)


def plot_radius(path, samples: RadiusSamples, reference: float | None = 0.5) -> None:
    fig, ax = plt.subplots(figsize=(4.5, 3.0))
    ax.plot(np.arange(samples.count), samples.values, ".-", ms=3, lw=0.8)
    if reference is not None:
        ax.axhline(reference, color="0.5", ls="--", lw=0.8)
    ax.set_xlabel("sample index")
    ax.set_ylabel("r(x, y)")
    ax.set_title(f"mean r = {samples.values.mean():.5f}", fontsize=9)
    _save(fig, path)
