"""Figure rendering for experiment results.

Each experiment's report path writes a PNG next to its CSV.  The CSV is
the machine-readable contract; these figures are for eyeballing runs.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def _finish(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def funnel_bias_figure(rows, path, value_key="mean_v", se_key="se_v") -> Path:
    """Estimates of E[v] with +-2 SE bars versus sticking probability."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    samplers = sorted({row["sampler"] for row in rows})
    offsets = {s: (i - (len(samplers) - 1) / 2) * 0.01 for i, s in enumerate(samplers)}
    markers = {"ds": "o", "naive": "s"}
    for sampler in samplers:
        cells = [r for r in rows if r["sampler"] == sampler]
        ps = [r["p"] + offsets[sampler] for r in cells]
        means = [r[value_key] for r in cells]
        errs = [2.0 * r[se_key] for r in cells]
        label = "DS slice" if sampler == "ds" else "naive slice"
        ax.errorbar(ps, means, yerr=errs, fmt=markers.get(sampler, "o"),
                    capsize=3, label=label)
    ax.axhline(0.0, color="0.6", lw=0.8, zorder=0)
    ax.set_xlabel("sticking probability p")
    ax.set_ylabel("estimate of E[v]  (true value 0)")
    ax.legend()
    return _finish(fig, path)


def trace_figure(steps, values, path, title="") -> Path:
    """Thinned v samples against update count, one dot per record."""
    fig, ax = plt.subplots(figsize=(9.0, 3.0))
    ax.plot(steps, values, ".", ms=2.5)
    ax.set_xlabel("updates per variable")
    ax.set_ylabel("v")
    if title:
        ax.set_title(title)
    return _finish(fig, path)


def ar_variance_figure(rows, path) -> Path:
    """Even-step variance per (pattern, mode) with the two reference levels."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    labels = [f"{r['pattern']}\n{r['mode']}" for r in rows]
    values = [r["variance"] for r in rows]
    ax.bar(range(len(rows)), values, width=0.6)
    ax.set_xticks(range(len(rows)), labels)
    if rows:
        alpha = rows[0]["alpha"]
        biased = (1 + alpha) ** 2 / (1 + alpha**2)
        ax.axhline(1.0, color="0.4", lw=0.8, ls="--", label="target variance 1")
        ax.axhline(biased, color="C3", lw=0.8, ls=":",
                   label=f"biased level {biased:.3g}")
        ax.legend()
    ax.set_ylabel("even-step sample variance")
    return _finish(fig, path)


def ring_figure(rows, path) -> Path:
    """Mean and median half-traversal times per stream configuration."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    labels = []
    for row in rows:
        p = row["p"]
        labels.append(row["stream"] if isinstance(p, float) and math.isnan(p)
                      else f"{row['stream']} p={p:g}")
    idx = range(len(rows))
    ax.bar([i - 0.2 for i in idx], [r["mean_steps"] for r in rows], 0.4, label="mean")
    ax.bar([i + 0.2 for i in idx], [r["median_steps"] for r in rows], 0.4, label="median")
    ax.set_xticks(list(idx), labels)
    ax.set_yscale("log")
    ax.set_ylabel("steps to first reach x = 50")
    ax.legend()
    return _finish(fig, path)


def interleave_figure(rows, path) -> Path:
    """E[v] estimates with +-2 SE bars for the interleaved runs."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    xs = list(range(len(rows)))
    means = [r["mean_v"] for r in rows]
    errs = [2.0 * r["se_v"] for r in rows]
    labels = [f"r={r['r']:g}\np={r['p']:g}" for r in rows]
    ax.errorbar(xs, means, yerr=errs, fmt="o", capsize=3)
    ax.axhline(0.0, color="0.6", lw=0.8, zorder=0)
    ax.set_xticks(xs, labels)
    ax.set_ylabel("estimate of E[v]  (true value 0)")
    return _finish(fig, path)
