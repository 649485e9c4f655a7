"""Report figures rendered next to the CSV output of each CLI run.

All functions take precomputed data, write one PNG, and return its path.
Rendering uses the Agg backend so runs work headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

_DPI = 150


def _finish(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def distance_histogram(distances: np.ndarray, min_dist: int, path: str | Path) -> Path:
    """Pairwise-distance histogram with the design distance marked."""
    fig, ax = plt.subplots(figsize=(6, 4))
    distances = np.asarray(distances)
    lo, hi = int(distances.min()), int(distances.max())
    ax.hist(distances, bins=np.arange(lo - 0.5, hi + 1.5), color="#4878a8", edgecolor="black")
    ax.axvline(min_dist, color="#c04040", linestyle="--", label=f"design distance {min_dist}")
    ax.set_xlabel("pairwise Hamming distance")
    ax.set_ylabel("pairs")
    ax.legend()
    return _finish(fig, path)


def bounds_curves(rows: list[dict], path: str | Path) -> Path:
    """Lower bound vs dimension, one line per (k, C) present in the rows."""
    fig, ax = plt.subplots(figsize=(6, 4))
    groups: dict[tuple, list[tuple[int, float]]] = {}
    for row in rows:
        groups.setdefault((row["k"], row["C"]), []).append((row["n"], row["bound"]))
    for (k, C), pts in sorted(groups.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"k={k}, C={C}")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("dimension n")
    ax.set_ylabel("required rows (lower bound)")
    ax.legend()
    return _finish(fig, path)


def recovery_scatter(noise_l2: np.ndarray, success: np.ndarray,
                     success_rate: float, path: str | Path) -> Path:
    """Per-trial noise size vs outcome, plus the overall rate."""
    fig, ax = plt.subplots(figsize=(6, 4))
    noise_l2 = np.asarray(noise_l2, dtype=float)
    success = np.asarray(success, dtype=bool)
    jitter = (np.arange(noise_l2.size) % 17) / 17.0 * 0.5 - 0.25
    ax.scatter(noise_l2[success], jitter[success] + 1.0, s=8, color="#3a8a3a", label="decoded")
    ax.scatter(noise_l2[~success], jitter[~success], s=8, color="#c04040", label="missed")
    ax.set_yticks([0.0, 1.0], ["miss", "hit"])
    ax.set_ylim(-0.6, 1.6)
    ax.set_xlabel("noise l2 norm")
    ax.set_title(f"success rate {success_rate:.3f}")
    ax.legend(loc="center right")
    return _finish(fig, path)


def protocol_margins(chunk_pos: np.ndarray, margins: np.ndarray,
                     bounds: np.ndarray, path: str | Path) -> Path:
    """Decode margins per chunk position against the k*D^j/2 ceiling."""
    fig, ax = plt.subplots(figsize=(6, 4))
    chunk_pos = np.asarray(chunk_pos)
    ax.scatter(chunk_pos + (np.arange(chunk_pos.size) % 13) / 13.0 * 0.4 - 0.2,
               margins, s=10, color="#4878a8", label="margin")
    uniq = np.unique(chunk_pos)
    ceil_by_chunk = [np.asarray(bounds)[chunk_pos == u][0] for u in uniq]
    ax.plot(uniq, ceil_by_chunk, color="#c04040", marker="_", markersize=18,
            linestyle="none", label="bound k*D^j/2")
    ax.set_yscale("log")
    ax.set_xlabel("chunk position j")
    ax.set_ylabel("l1 margin")
    ax.legend()
    return _finish(fig, path)


def tail_panels(l2_norms: np.ndarray, threshold: float,
                image_norms: np.ndarray, factor_lo: float, factor_hi: float,
                path: str | Path) -> Path:
    """Noise l2 histogram with tail cutoff; sketch-image norms with both cutoffs."""
    fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
    left.hist(l2_norms, bins=60, color="#4878a8")
    left.axvline(threshold, color="#c04040", linestyle="--", label="tail threshold")
    left.set_xlabel("noise l2 norm")
    left.legend()
    right.hist(image_norms, bins=60, color="#4878a8")
    right.axvline(1.0 / factor_lo, color="#c04040", linestyle="--", label="shrink cutoff")
    right.axvline(factor_hi, color="#a06000", linestyle=":", label="blowup cutoff")
    right.set_xlabel("image norm of a unit vector")
    right.legend()
    return _finish(fig, path)


def shadow_sizes(shadow_l1: np.ndarray, bound: float, path: str | Path) -> Path:
    """Shadow l1 mass per instance against the dimension bound."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.asarray(shadow_l1), marker=".", linestyle="none", color="#4878a8",
            label="shadow l1")
    ax.axhline(bound, color="#c04040", linestyle="--", label="n^2 2^-b ||v||_1 cap")
    ax.set_yscale("log")
    ax.set_xlabel("instance")
    ax.set_ylabel("l1 mass")
    ax.legend()
    return _finish(fig, path)
