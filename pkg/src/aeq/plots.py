"""Figure rendering for the report path.

Every CSV curve the pipelines emit gets a companion PNG.  Output must stay
byte-deterministic for golden-file testing: fixed figure geometry, no
timestamps, and the PNG Software tag suppressed.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FLOOR = 1e-18   # keeps zero-valued curves drawable on a log axis


def render_figure(path, spec):
    fig, ax = plt.subplots(figsize=(6.4, 4.0), dpi=110)
    for label, x, y in spec.series:
        y = np.asarray(y, dtype=float)
        if spec.logy:
            y = np.maximum(np.abs(y), FLOOR)
            ax.semilogy(x, y, label=label, linewidth=1.2)
        else:
            ax.plot(x, y, label=label, linewidth=1.2)
    ax.set_xlabel(spec.xlabel)
    ax.set_ylabel(spec.ylabel)
    ax.set_title(spec.title)
    ax.grid(True, which="both", alpha=0.3)
    if spec.series:
        ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
