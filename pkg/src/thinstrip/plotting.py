"""Report figures rendered to files with the Agg backend."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def clock_figure(rows: list[dict], kind: str, limit: float | None = None):
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 3.5))
    t = [r["t"] for r in rows]
    ax0.plot(t, [r["clock"] for r in rows], color="C0")
    if limit is not None:
        ax0.axhline(limit, color="C3", ls="--", lw=1, label="half band")
        ax0.legend(loc="lower right")
    ax0.set_xlabel("t")
    ax0.set_ylabel(f"{kind} clock")
    ax1.plot(t, [r["band_width"] for r in rows], color="C1")
    ax1.set_xlabel("t")
    ax1.set_ylabel("band width")
    fig.tight_layout()
    return fig


def terms_figure(rows: list[dict], names: list[str], title: str = ""):
    fig, ax = plt.subplots(figsize=(6, 4))
    t = [r["t"] for r in rows]
    for n in names:
        ax.semilogy(t, np.maximum([r[n] for r in rows], 1e-300), label=n)
    ax.set_xlabel("t")
    ax.set_ylabel("running total")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    return fig


def sweep_figure(eps: list[float], norms: list[float], slope: float | None, intercept: float | None):
    fig, ax = plt.subplots(figsize=(5, 4))
    e = np.asarray(eps)
    ax.loglog(e, norms, "o", label="terminal functional")
    if slope is not None:
        ax.loglog(e, np.exp(intercept) * e**slope, "-", label=f"fit slope {slope:.3f}")
    ref = norms[0] * e / e[0]
    ax.loglog(e, ref, ":", color="gray", label="slope 1 reference")
    ax.set_xlabel("eps")
    ax.set_ylabel("remainder functional")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def close(fig):
    plt.close(fig)
