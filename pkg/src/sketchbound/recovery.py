"""Sparse recovery from sketches: oracles, guarantees, and noise experiments."""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .codes import SparseCodebook
from .geometry import L1Ball, sample_l1_ball
from .measurement import MeasurementMatrix, sample_gaussian_matrix, sketch
from .seeds import derive_rng


def top_k(x: np.ndarray, k: int) -> np.ndarray:
    """Keep the ``k`` entries of largest magnitude, zero the rest.

    Ties in magnitude are broken toward the lower index (stable sort), so the
    result is fully deterministic.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a vector, got shape {x.shape}")
    if not 0 <= k <= x.size:
        raise ValueError(f"sparsity must lie in [0, {x.size}], got {k}")
    order = np.argsort(-np.abs(x), kind="stable")
    out = np.zeros_like(x)
    keep = order[:k]
    out[keep] = x[keep]
    return out


class GuaranteeCheck(NamedTuple):
    """Outcome of an l1/l1 approximation test.

    ``ratio`` is recovery error over best-possible error: 0 for exact
    recovery, ``inf`` when the target was exactly sparse but missed.
    """

    ok: bool
    ratio: float
    error_actual: float
    error_best: float


def check_l1l1(x: np.ndarray, x_hat: np.ndarray, k: int, C: float) -> GuaranteeCheck:
    """Does ``||x - x_hat||_1 <= C * ||x - top_k(x)||_1`` hold?"""
    if C < 1.0:
        raise ValueError(f"approximation factor must be >= 1, got {C}")
    x = np.asarray(x, dtype=np.float64)
    x_hat = np.asarray(x_hat, dtype=np.float64)
    if x.shape != x_hat.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {x_hat.shape}")
    error_actual = float(np.abs(x - x_hat).sum())
    error_best = float(np.abs(x - top_k(x, k)).sum())
    if error_actual == 0.0:
        ratio = 0.0
    elif error_best == 0.0:
        ratio = math.inf
    else:
        ratio = error_actual / error_best
    return GuaranteeCheck(
        ok=error_actual <= C * error_best,
        ratio=ratio,
        error_actual=error_actual,
        error_best=error_best,
    )


class NNDecode(NamedTuple):
    index: int
    word: np.ndarray


def nn_recover(
    matrix: MeasurementMatrix, sketch_vec: np.ndarray, codebook: SparseCodebook
) -> NNDecode:
    """Codeword whose sketch is nearest (l2) to the given sketch.

    Ties go to the lowest index.  Images are accumulated from the k one-hot
    positions of each word, so cost scales with ``size * k * m`` rather than
    ``size * n * m``.
    """
    sketch_vec = np.asarray(sketch_vec, dtype=np.float64)
    if sketch_vec.shape != (matrix.m,):
        raise ValueError(f"sketch shape {sketch_vec.shape} does not match m={matrix.m}")
    if codebook.n != matrix.n:
        raise ValueError(f"codebook dimension {codebook.n} does not match n={matrix.n}")
    supports = codebook.supports()
    best_idx = -1
    best_score = math.inf
    block = 65536
    for lo in range(0, len(codebook), block):
        sup = supports[lo:lo + block]
        images = np.zeros((matrix.m, sup.shape[0]))
        for p in range(sup.shape[1]):
            images += matrix.entries[:, sup[:, p]]
        # ||img - sk||^2 = ||img||^2 - 2 img.sk + const; drop the const
        scores = np.einsum("ij,ij->j", images, images) - 2.0 * (sketch_vec @ images)
        local = int(np.argmin(scores))
        if scores[local] < best_score:
            best_score = float(scores[local])
            best_idx = lo + local
    return NNDecode(index=best_idx, word=codebook.words[best_idx].astype(np.float64))


class RecoveryOracle(ABC):
    """A sketch decoder with declared sparsity, l1/l1 factor, and failure rate.

    ``failure_probability`` is the advertised chance that the output misses
    the guarantee ``||x - recover(A, Ax)||_1 <= C * ||x - top_k(x)||_1``; it
    is a contract parameter, not a measurement.
    """

    k: int
    C: float
    failure_probability: float

    @abstractmethod
    def recover(self, matrix: MeasurementMatrix, sketch_vec: np.ndarray) -> np.ndarray:
        """Return an n-dimensional estimate (k-sparse for the oracles here)."""


class ExactTopKOracle(RecoveryOracle):
    """Inverts a square orthonormal sketch exactly, then keeps the top k."""

    def __init__(self, k: int, C: float = 1.0):
        if k < 0:
            raise ValueError(f"sparsity must be >= 0, got {k}")
        if C < 1.0:
            raise ValueError(f"approximation factor must be >= 1, got {C}")
        self.k = k
        self.C = C
        self.failure_probability = 0.0

    def recover(self, matrix: MeasurementMatrix, sketch_vec: np.ndarray) -> np.ndarray:
        if matrix.m != matrix.n:
            raise ValueError("exact inversion needs a square matrix (m == n)")
        if not matrix.is_orthonormal():
            raise ValueError("exact inversion needs orthonormal rows")
        x = matrix.entries.T @ np.asarray(sketch_vec, dtype=np.float64)
        return top_k(x, self.k)


class NearestCodewordOracle(RecoveryOracle):
    """Decodes to the nearest codeword image; output is one codebook word."""

    def __init__(self, codebook: SparseCodebook, C: float = 1.0,
                 failure_probability: float = 1.0 / 3.0):
        self.codebook = codebook
        self.k = codebook.k
        self.C = C
        self.failure_probability = failure_probability

    def recover(self, matrix: MeasurementMatrix, sketch_vec: np.ndarray) -> np.ndarray:
        return nn_recover(matrix, sketch_vec, self.codebook).word


class ZeroOracle(RecoveryOracle):
    """Control decoder: always returns the zero vector."""

    def __init__(self, k: int = 0, C: float = 1.0):
        self.k = k
        self.C = C
        self.failure_probability = 1.0

    def recover(self, matrix: MeasurementMatrix, sketch_vec: np.ndarray) -> np.ndarray:
        return np.zeros(matrix.n)


def corollary_noise_radius(
    n: int,
    k: int,
    m: int,
    codebook_size: int,
    *,
    safety: float = 1.0 / 6.0,
    r: float | None = None,
) -> float:
    """Largest l1 noise radius at which nearest-image decoding is still safe.

    ``safety * r * sqrt(m) * n**(1/2 - 1/m) / (size**(1/m) * ln(n)**1.5)``,
    with ``r`` the minimum l2 distance between codewords.  For weight-``k``
    binary codebooks at minimum Hamming distance ``k`` that is ``sqrt(k)``,
    which is the default.
    """
    if n < 2 or k < 1 or m < 1 or codebook_size < 2:
        raise ValueError("need n >= 2, k >= 1, m >= 1, codebook_size >= 2")
    if not 0.0 < safety <= 1.0:
        raise ValueError(f"safety factor must lie in (0, 1], got {safety}")
    if r is None:
        r = math.sqrt(k)
    if r <= 0:
        raise ValueError(f"codeword separation must be > 0, got {r}")
    return (
        safety * r * math.sqrt(m) * float(n) ** (0.5 - 1.0 / m)
        / (codebook_size ** (1.0 / m) * math.log(n) ** 1.5)
    )


@dataclass(frozen=True)
class RecoveryExperimentParams:
    """Everything one noisy-recovery run depends on (besides the root seed)."""

    n: int
    k: int
    m: int
    s: float          # l1 noise radius; 0 disables noise
    trials: int
    seed: int
    codebook: SparseCodebook

    def __post_init__(self) -> None:
        if self.codebook.n != self.n:
            raise ValueError(f"codebook dimension {self.codebook.n} != n={self.n}")
        if self.codebook.k != self.k:
            raise ValueError(f"codebook sparsity {self.codebook.k} != k={self.k}")
        if self.m < 1:
            raise ValueError(f"need m >= 1, got {self.m}")
        if self.s < 0:
            raise ValueError(f"noise radius must be >= 0, got {self.s}")
        if self.trials < 1:
            raise ValueError(f"need trials >= 1, got {self.trials}")


class TrialOutcome(NamedTuple):
    trial: int
    true_index: int
    decoded_index: int
    success: bool
    noise_l1: float
    noise_l2: float


@dataclass
class ExperimentResult:
    params: RecoveryExperimentParams
    success_rate: float
    rows: list[TrialOutcome] = field(repr=False)


def uniform_noise_experiment(params: RecoveryExperimentParams) -> ExperimentResult:
    """Sketch codeword + uniform l1 noise, decode by nearest image, tally.

    Each trial draws a fresh scaled-Gaussian matrix, a uniform codeword, and
    (when ``s > 0``) a uniform noise vector from the radius-``s`` ball, each
    from its own derived stream.
    """
    ball = L1Ball(n=params.n, s=params.s) if params.s > 0 else None
    rows: list[TrialOutcome] = []
    hits = 0
    for t in range(params.trials):
        inst_rng = derive_rng(params.seed, t, "instance")
        true_index = int(inst_rng.integers(0, len(params.codebook)))
        matrix = sample_gaussian_matrix(
            params.m, params.n, derive_rng(params.seed, t, "matrix")
        )
        signal = params.codebook.words[true_index].astype(np.float64)
        if ball is not None:
            noise = sample_l1_ball(ball, derive_rng(params.seed, t, "noise"))
        else:
            noise = np.zeros(params.n)
        decoded = nn_recover(matrix, sketch(matrix, signal + noise), params.codebook)
        success = decoded.index == true_index
        hits += success
        rows.append(TrialOutcome(
            trial=t,
            true_index=true_index,
            decoded_index=decoded.index,
            success=success,
            noise_l1=float(np.abs(noise).sum()),
            noise_l2=float(np.linalg.norm(noise)),
        ))
    return ExperimentResult(
        params=params, success_rate=hits / params.trials, rows=rows
    )
