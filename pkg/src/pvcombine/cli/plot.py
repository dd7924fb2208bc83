"""SVG charts from the report CSVs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from ..combine import BASE_METHODS  # noqa: E402

# fixed hash salt and no date stamp keep the SVG bytes reproducible
_SVG_RC = {"svg.hashsalt": "pvcombine", "svg.fonttype": "none"}


def _save(fig, path: Path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_summary(summary_csv, path) -> Path:
    df = pd.read_csv(summary_csv)
    pairs = list(dict.fromkeys(df["pair"]))
    methods = list(dict.fromkeys(df["method"]))
    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(10, 4.5))
        width = 0.8 / max(len(methods), 1)
        x = np.arange(len(pairs))
        for i, m in enumerate(methods):
            sub = df[df["method"] == m].set_index("pair").reindex(pairs)
            ax.bar(x + i * width, sub["median_mase"], width, label=m)
        ax.set_xticks(x + 0.4 - width / 2, pairs)
        ax.set_ylabel("median MASE")
        ax.legend(ncol=5, fontsize=7)
        fig.tight_layout()
        _save(fig, Path(path))
    return Path(path)


def plot_weights(weights_csv, path, strategy: str = "box01") -> Path:
    df = pd.read_csv(weights_csv)
    df = df[df["strategy"] == strategy]
    cols = [f"w_{i + 1}" for i in range(len(BASE_METHODS))]
    with plt.rc_context(_SVG_RC):
        fig, axes = plt.subplots(1, len(cols), figsize=(12, 2.8), sharey=True)
        for ax, col, name in zip(axes, cols, BASE_METHODS):
            ax.hist(df[col], bins=10, range=(0, 1) if strategy != "unconstrained" else None)
            ax.set_title(name, fontsize=9)
        axes[0].set_ylabel("count")
        fig.tight_layout()
        _save(fig, Path(path))
    return Path(path)
