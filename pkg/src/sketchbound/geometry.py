"""Uniform sampling from solid l1 balls and the tail laws that govern it.

Dividing ``n+1`` iid standard exponentials by their sum puts the first ``n``
coordinates uniformly on the solid simplex ``{x >= 0, sum x <= 1}``; random
signs then spread that mass uniformly over the solid l1 ball.  Under this law
a single coordinate exceeds ``t`` in magnitude with probability exactly
``(1 - t/s)**n``, and the l2 norm concentrates near ``s * sqrt(2/n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .seeds import ensure_rng


@dataclass(frozen=True)
class L1Ball:
    """Solid l1 ball: ``n`` dimensions, radius ``s``."""

    n: int
    s: float

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"dimension must be an int >= 1, got {self.n!r}")
        if not (math.isfinite(self.s) and self.s > 0):
            raise ValueError(f"radius must be finite and > 0, got {self.s!r}")


def sample_l1_ball(ball: L1Ball, rng: np.random.Generator | int | None = None) -> np.ndarray:
    """One point uniform over the solid ball; ``||z||_1 < s`` almost surely."""
    rng = ensure_rng(rng)
    expo = rng.standard_exponential(ball.n + 1)
    signs = rng.integers(0, 2, size=ball.n) * 2 - 1
    return ball.s * signs * expo[: ball.n] / expo.sum()


def sample_l1_ball_batch(
    ball: L1Ball, count: int, rng: np.random.Generator | int | None = None
) -> np.ndarray:
    """``(count, n)`` array of independent uniform draws.

    A batch of one reproduces ``sample_l1_ball`` bit for bit; larger batches
    draw all exponentials before all signs, so they are deterministic but not
    interleaved like repeated single calls.
    """
    if count < 1:
        raise ValueError(f"need count >= 1, got {count}")
    rng = ensure_rng(rng)
    expo = rng.standard_exponential((count, ball.n + 1))
    signs = rng.integers(0, 2, size=(count, ball.n)) * 2 - 1
    return ball.s * signs * expo[:, : ball.n] / expo.sum(axis=1, keepdims=True)


def coord_tail_probability(ball: L1Ball, threshold: float) -> float:
    """Exact ``P[|z_i| > threshold]`` for a uniform draw: ``(1 - t/s)**n``.

    ``threshold`` must lie in ``[0, s]``; values outside the ball make the
    formula meaningless and are rejected.
    """
    t = float(threshold)
    if not 0.0 <= t <= ball.s:
        raise ValueError(f"threshold must lie in [0, {ball.s}], got {t}")
    return (1.0 - t / ball.s) ** ball.n


def l2_tail_threshold(n: int, s: float, alpha: float) -> float:
    """The l2 deviation level ``alpha * s * ln(n) / sqrt(n)`` (natural log)."""
    if n < 2:
        raise ValueError(f"need n >= 2 for a meaningful threshold, got {n}")
    return alpha * s * math.log(n) / math.sqrt(n)


class FrequencyCheck(NamedTuple):
    """Empirical frequency vs expected probability, with a binomial 3-sigma band."""

    expected: float
    empirical: float
    sigma: float
    samples: int

    @property
    def within(self) -> bool:
        return abs(self.empirical - self.expected) <= 3.0 * self.sigma


class TailCheck(NamedTuple):
    """Empirical exceedance rate vs a probability upper bound."""

    threshold: float
    bound: float
    empirical: float
    sigma: float
    samples: int

    @property
    def holds(self) -> bool:
        return self.empirical <= self.bound + 3.0 * self.sigma


def _binomial_sigma(p: float, samples: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / samples)


def coord_tail_check(
    ball: L1Ball,
    threshold: float,
    samples: int,
    rng: np.random.Generator | int | None = None,
) -> FrequencyCheck:
    """Empirical single-coordinate tail frequency against the exact formula."""
    if samples < 1:
        raise ValueError(f"need samples >= 1, got {samples}")
    expected = coord_tail_probability(ball, threshold)
    draws = sample_l1_ball_batch(ball, samples, rng)
    empirical = float(np.mean(np.abs(draws[:, 0]) > threshold))
    return FrequencyCheck(
        expected=expected,
        empirical=empirical,
        sigma=_binomial_sigma(expected, samples),
        samples=samples,
    )


def l2_tail_bound_check(
    n: int,
    s: float,
    alpha: float,
    samples: int,
    rng: np.random.Generator | int | None = None,
) -> TailCheck:
    """Check ``P[||z||_2 > alpha*s*ln(n)/sqrt(n)] < n**(1-alpha)`` empirically.

    Requires ``alpha > 1`` (the bound is vacuous otherwise).  The pass band is
    the bound plus three binomial sigmas at the bound itself.
    """
    if alpha <= 1.0:
        raise ValueError(f"need alpha > 1 for a nontrivial bound, got {alpha}")
    if samples < 1:
        raise ValueError(f"need samples >= 1, got {samples}")
    ball = L1Ball(n=n, s=s)
    threshold = l2_tail_threshold(n, s, alpha)
    bound = float(n) ** (1.0 - alpha)
    draws = sample_l1_ball_batch(ball, samples, rng)
    l2 = np.sqrt(np.einsum("ij,ij->i", draws, draws))
    empirical = float(np.mean(l2 > threshold))
    return TailCheck(
        threshold=threshold,
        bound=bound,
        empirical=empirical,
        sigma=_binomial_sigma(bound, samples),
        samples=samples,
    )


class Norms(NamedTuple):
    l0: int
    l1: float
    l2: float
    linf: float


def norms(v) -> Norms:
    """The four norms used throughout: support size, l1, l2, max magnitude."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a vector, got shape {v.shape}")
    absv = np.abs(v)
    return Norms(
        l0=int(np.count_nonzero(v)),
        l1=float(absv.sum()),
        l2=float(np.sqrt((v * v).sum())),
        linf=float(absv.max()) if v.size else 0.0,
    )
