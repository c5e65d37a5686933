"""PNG renderings of the experiment outputs (headless matplotlib)."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .bench import Fig2Result, Fig3Row  # noqa: E402


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    # fixed metadata keeps repeated renders byte-identical
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_fig1(path, t: np.ndarray, paths: np.ndarray, strike: float | None = None) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for row in paths:
        ax.plot(t, row, lw=1)
    if strike is not None:
        ax.axhline(strike, color="k", ls="--", lw=0.8, label="strike")
        ax.legend()
    ax.set_xlabel("t (years)")
    ax.set_ylabel("price")
    ax.set_title("Sample price paths")
    fig.tight_layout()
    return _save(fig, path)


def plot_fig2(path, result: Fig2Result) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ck = np.array([k for k, _ in result.classical.points])
    ce = np.array([e for _, e in result.classical.points])
    qk = np.array([c.k_q for c in result.quantum_cells])
    qe = np.array([c.mean_error for c in result.quantum_cells])
    qb = np.array([c.mean_bound for c in result.quantum_cells])
    ax.loglog(ck, ce, "o", label="classical MC")
    ax.loglog(ck, result.classical.predict(ck), "-", lw=1, label=f"fit slope {result.classical.exponent:.3f}")
    ax.loglog(qk, qe, "s", label="quantum")
    ax.loglog(qk, result.quantum.predict(qk), "-", lw=1, label=f"fit slope {result.quantum.exponent:.3f}")
    ax.loglog(qk, qb, ":", label="quantum bound")
    ax.set_xlabel("k")
    ax.set_ylabel("mean |price error|")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def plot_fig3(path, rows: Sequence[Fig3Row]) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot([r.strike for r in rows], [r.ratio for r in rows], "o-")
    ax.axhline(2.0, color="k", ls="--", lw=0.8)
    ax.set_xlabel("strike")
    ax.set_ylabel("quantum / classical exponent")
    fig.tight_layout()
    return _save(fig, path)
