"""Deterministic sketch-size lower bounds from packing and pigeonhole arguments."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .codes import q_ary_entropy


@dataclass(frozen=True)
class DetBoundParams:
    """Problem shape for the deterministic lower bound.

    ``n`` ambient dimension, ``k`` sparsity, ``C`` the l1/l1 approximation
    factor.  Requires ``floor(n/k) >= 3`` so the entropy term is defined at
    argument 1/2.
    """

    n: int
    k: int
    C: float

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"sparsity must be >= 1, got {self.k}")
        if self.n < 1:
            raise ValueError(f"dimension must be >= 1, got {self.n}")
        if self.C < 1.0:
            raise ValueError(f"approximation factor must be >= 1, got {self.C}")
        if self.q < 3:
            raise ValueError(
                f"need floor(n/k) >= 3 for the entropy term, got {self.q}"
            )

    @property
    def q(self) -> int:
        """Alphabet size of the underlying block structure: ``floor(n/k)``."""
        return self.n // self.k

    @property
    def gamma(self) -> Fraction:
        """Exact separation radius ``1 / (3 + 2C)`` used by the cell argument."""
        return Fraction(1) / (3 + 2 * Fraction(self.C))


def det_lower_bound(params: DetBoundParams) -> float:
    """Minimum number of rows any C-approximate scheme needs.

    ``(1 - H_q(1/2)) / log2(4 + 2C) * k * log2(q)`` with ``q = floor(n/k)``.
    Real-valued on purpose; callers decide how to round.
    """
    q = params.q
    return (
        (1.0 - q_ary_entropy(q, 0.5)) / math.log2(4.0 + 2.0 * params.C)
        * params.k * math.log2(q)
    )


def pigeonhole_forces_collision(size: int, eps: Fraction | float, m: int) -> bool:
    """True when ``size > (1 + 1/eps)**m``, evaluated in exact rationals.

    If more codewords exist than radius-``eps`` rounding cells, two of them
    must share a cell, so ``m`` rows cannot tell them apart.
    """
    if size < 1:
        raise ValueError(f"need size >= 1, got {size}")
    if m < 0:
        raise ValueError(f"need m >= 0, got {m}")
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError(f"cell radius must be > 0, got {eps}")
    return size > (1 + 1 / eps) ** m


def collision_threshold(size: int, eps: Fraction | float) -> int:
    """Smallest ``m`` at which the pigeonhole argument stops applying.

    Every ``m`` below the returned value forces a collision among ``size``
    points; at the returned value ``(1 + 1/eps)**m >= size``.  Exact rational
    arithmetic throughout.
    """
    if size < 1:
        raise ValueError(f"need size >= 1, got {size}")
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError(f"cell radius must be > 0, got {eps}")
    base = 1 + 1 / eps
    m = 0
    power = Fraction(1)
    while power < size:
        power *= base
        m += 1
    return m
