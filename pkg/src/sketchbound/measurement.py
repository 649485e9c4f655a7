"""Gaussian measurement matrices, row orthonormalization, and fixed-point discretization.

A discretized matrix is stored two ways: ``scaled_ints`` holds the exact
integers ``round(a * 2**b)`` (round half away from zero), and ``entries``
holds their float quotient by ``2**b``.  For ``b <= 50`` the float view and
the roundoff matrix are exact; beyond that only ``scaled_ints`` is
authoritative, which is also the serialized form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .seeds import ensure_rng

KIND_GAUSSIAN = "gaussian-scaled"
KIND_ORTHONORMAL = "orthonormal-rows"
KIND_DISCRETIZED = "discretized"
_KINDS = (KIND_GAUSSIAN, KIND_ORTHONORMAL, KIND_DISCRETIZED)

ORTHONORMAL_TOL = 1e-10
MAX_BITS = 62  # scaled entries of a (near) unit-bounded matrix must fit int64
FLOAT_EXACT_BITS = 50  # below this, entries and roundoff are exactly representable


@dataclass
class MeasurementMatrix:
    """An ``m x n`` sketching matrix tagged with how it was produced.

    kind is one of ``"gaussian-scaled"`` (iid N(0, 1/m) entries),
    ``"orthonormal-rows"`` (rows form an orthonormal set), or
    ``"discretized"`` (entries are ``scaled_ints * 2**-bits``).
    """

    m: int
    n: int
    entries: np.ndarray
    kind: str
    bits: int | None = None
    scaled_ints: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.entries = np.asarray(self.entries, dtype=np.float64)
        if self.entries.shape != (self.m, self.n):
            raise ValueError(
                f"entries shape {self.entries.shape} does not match ({self.m}, {self.n})"
            )
        if self.kind not in _KINDS:
            raise ValueError(f"unknown matrix kind {self.kind!r}")
        if self.kind == KIND_DISCRETIZED:
            if self.bits is None or self.scaled_ints is None:
                raise ValueError("discretized matrices need bits and scaled_ints")
            self.scaled_ints = np.asarray(self.scaled_ints, dtype=np.int64)
            if self.scaled_ints.shape != (self.m, self.n):
                raise ValueError("scaled_ints shape must match (m, n)")
        elif self.bits is not None or self.scaled_ints is not None:
            raise ValueError(f"kind {self.kind!r} does not carry fixed-point data")

    def gram_deviation(self) -> float:
        """Max absolute deviation of ``A A^T`` from the identity."""
        gram = self.entries @ self.entries.T
        return float(np.abs(gram - np.eye(self.m)).max())

    def is_orthonormal(self, tol: float = ORTHONORMAL_TOL) -> bool:
        return self.gram_deviation() <= tol


def sample_gaussian_matrix(
    m: int, n: int, rng: np.random.Generator | int | None = None
) -> MeasurementMatrix:
    """iid ``N(0,1)`` entries scaled by ``1/sqrt(m)``."""
    if m < 1 or n < 1:
        raise ValueError(f"matrix dimensions must be >= 1, got ({m}, {n})")
    rng = ensure_rng(rng)
    entries = rng.standard_normal((m, n)) / math.sqrt(m)
    return MeasurementMatrix(m=m, n=n, entries=entries, kind=KIND_GAUSSIAN)


def orthonormalize_rows(matrix: MeasurementMatrix) -> MeasurementMatrix:
    """Replace the rows by an orthonormal basis of their span (QR of the transpose).

    Requires ``m <= n`` and full row rank; the result satisfies
    ``A A^T = I`` to within ``1e-10`` or construction fails outright.
    """
    if matrix.m > matrix.n:
        raise ValueError(f"cannot orthonormalize {matrix.m} rows in dimension {matrix.n}")
    q, r = np.linalg.qr(matrix.entries.T)
    diag = np.abs(np.diag(r))
    if diag.min() <= max(matrix.m, matrix.n) * np.finfo(np.float64).eps * diag.max():
        raise ValueError("rows are linearly dependent; cannot orthonormalize")
    # fix the sign ambiguity of QR so the output is canonical
    signs = np.sign(np.diag(r))
    out = MeasurementMatrix(
        m=matrix.m, n=matrix.n, entries=(q * signs).T, kind=KIND_ORTHONORMAL
    )
    if not out.is_orthonormal():
        raise RuntimeError(
            f"orthonormalization failed its own tolerance: {out.gram_deviation():.3e}"
        )
    return out


def sketch(matrix: MeasurementMatrix, x: np.ndarray) -> np.ndarray:
    """Apply the matrix: an ``m``-dimensional sketch of ``x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (matrix.n,):
        raise ValueError(f"vector shape {x.shape} does not match dimension {matrix.n}")
    return matrix.entries @ x


def _round_half_away_scaled(value: float, bits: int) -> int:
    """Exact nearest integer to ``value * 2**bits``, ties away from zero.

    ``value * 2**bits`` is an exact float (power-of-two scaling) and every
    branch below stays within the range where float arithmetic on it is
    exact, so the returned int is the true rounding.
    """
    scaled = value * (2.0**bits)
    if math.isinf(scaled):
        raise OverflowError(f"|value| * 2**{bits} overflows float range")
    mag = abs(scaled)
    if mag >= 2.0**52:
        # spacing is >= 1 here, so the float is already an integer; adding
        # 0.5 would round and could push floor() off by one
        result = int(mag)
    else:
        # spacing is <= 0.5, so mag + 0.5 is exact and floor() is the true
        # half-away-from-zero rounding
        result = math.floor(mag + 0.5)
    return -result if scaled < 0 else result


@dataclass
class DiscretizationResult:
    """Fixed-point approximation ``A' ~ A`` plus the exact error matrix.

    ``rounded`` carries the exact integers; ``roundoff = A - A'`` is exact
    float data for ``bits <= 50`` and a best-effort float beyond that (the
    integer view stays exact at any supported width).
    """

    rounded: MeasurementMatrix
    roundoff: np.ndarray
    bits: int

    def max_error_bound(self) -> float:
        return 2.0 ** (-self.bits)

    def exact_error_ok(self, original: MeasurementMatrix) -> bool:
        """Verify ``|A_ij - A'_ij| <= 2**-(bits+1)`` in exact rational arithmetic."""
        half_ulp = Fraction(1, 2 ** (self.bits + 1))
        scale = Fraction(1, 2**self.bits)
        ints = self.rounded.scaled_ints
        for i in range(original.m):
            for j in range(original.n):
                err = abs(Fraction(float(original.entries[i, j])) - int(ints[i, j]) * scale)
                if err > half_ulp:
                    return False
        return True


def discretize(matrix: MeasurementMatrix, bits: int) -> DiscretizationResult:
    """Round every entry to ``bits`` fractional bits, half away from zero.

    Input must have orthonormal rows (checked numerically, not by tag).  Each
    entry then has magnitude at most 1, so the scaled integers fit in int64
    for any ``bits <= 62`` and the per-entry error is at most ``2**-(bits+1)``.
    """
    if not isinstance(bits, int) or not 1 <= bits <= MAX_BITS:
        raise ValueError(f"bits must be an int in [1, {MAX_BITS}], got {bits!r}")
    if not matrix.is_orthonormal():
        raise ValueError(
            f"discretize expects orthonormal rows; gram deviation is {matrix.gram_deviation():.3e}"
        )
    flat = matrix.entries.ravel()
    ints = np.fromiter(
        (_round_half_away_scaled(float(v), bits) for v in flat),
        dtype=np.int64,
        count=flat.size,
    ).reshape(matrix.m, matrix.n)
    entries = ints.astype(np.float64) * (2.0**-bits)
    rounded = MeasurementMatrix(
        m=matrix.m, n=matrix.n, entries=entries, kind=KIND_DISCRETIZED,
        bits=bits, scaled_ints=ints,
    )
    return DiscretizationResult(
        rounded=rounded, roundoff=matrix.entries - entries, bits=bits
    )


def shadow_vector(
    orthonormal: MeasurementMatrix, roundoff: np.ndarray, v: np.ndarray
) -> np.ndarray:
    """The vector ``s = A^T (E v)`` with ``E`` the roundoff matrix.

    Because the rows of ``A`` are orthonormal, ``A s = E v`` exactly: sketching
    ``v`` with the rounded matrix equals sketching ``v - s`` (plus nothing)
    with the exact one.  Its l1 norm is at most ``m * sqrt(n) * 2**-b * ||v||_1``.
    """
    if not orthonormal.is_orthonormal():
        raise ValueError("shadow vector needs a matrix with orthonormal rows")
    roundoff = np.asarray(roundoff, dtype=np.float64)
    if roundoff.shape != (orthonormal.m, orthonormal.n):
        raise ValueError(f"roundoff shape {roundoff.shape} does not match the matrix")
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (orthonormal.n,):
        raise ValueError(f"vector shape {v.shape} does not match dimension {orthonormal.n}")
    return orthonormal.entries.T @ (roundoff @ v)


class ShadowCheck(NamedTuple):
    """One discretization round trip: image agreement and l1 size of the shadow."""

    image_gap: float      # || A s - E v ||_2, should be ~0
    shadow_l1: float
    bound_row_l1: float   # m * sqrt(n) * 2**-b * ||v||_1
    bound_dim_l1: float   # n**2 * 2**-b * ||v||_1 (valid once m <= n <= n^1.5 slack)

    @property
    def ok(self) -> bool:
        return self.image_gap < 1e-9 and self.shadow_l1 <= self.bound_dim_l1


def discretization_shadow_check(
    m: int, n: int, bits: int, rng: np.random.Generator | int | None = None
) -> ShadowCheck:
    """Build one random orthonormal matrix, discretize, and audit the shadow."""
    rng = ensure_rng(rng)
    ortho = orthonormalize_rows(sample_gaussian_matrix(m, n, rng))
    disc = discretize(ortho, bits)
    v = rng.standard_normal(n)
    s = shadow_vector(ortho, disc.roundoff, v)
    gap = float(np.linalg.norm(ortho.entries @ s - disc.roundoff @ v))
    v_l1 = float(np.abs(v).sum())
    return ShadowCheck(
        image_gap=gap,
        shadow_l1=float(np.abs(s).sum()),
        bound_row_l1=m * math.sqrt(n) * 2.0**-bits * v_l1,
        bound_dim_l1=float(n) ** 2 * 2.0**-bits * v_l1,
    )


class ConcentrationCheck(NamedTuple):
    """Empirical shrink/blowup rates of ``||A v||_2`` against their bounds."""

    m: int
    factor: float         # the deviation factor D
    shrink_empirical: float
    shrink_bound: float   # (3/D)**m  >= P[||Av|| <= ||v||/D]
    blowup_empirical: float
    blowup_bound: float   # exp(-m (D-1)^2 / 8)  >= P[||Av|| >= D ||v||]
    trials: int

    def sigma(self, bound: float) -> float:
        return math.sqrt(max(bound * (1.0 - bound), 0.0) / self.trials)

    @property
    def shrink_ok(self) -> bool:
        return self.shrink_empirical <= self.shrink_bound + 3.0 * self.sigma(self.shrink_bound)

    @property
    def blowup_ok(self) -> bool:
        return self.blowup_empirical <= self.blowup_bound + 3.0 * self.sigma(self.blowup_bound)


def concentration_check(
    m: int,
    factor: float,
    trials: int,
    rng: np.random.Generator | int | None = None,
    ambient_dim: int = 32,
) -> ConcentrationCheck:
    """Sample fresh scaled Gaussian matrices against a fixed unit vector.

    The distribution of ``||A v||_2`` for unit ``v`` does not depend on the
    ambient dimension (it is a chi-square in ``m`` degrees over ``m``), so a
    small fixed ``ambient_dim`` suffices.
    """
    if factor <= 1.0:
        raise ValueError(f"deviation factor must exceed 1, got {factor}")
    if trials < 1:
        raise ValueError(f"need trials >= 1, got {trials}")
    rng = ensure_rng(rng)
    v = np.zeros(ambient_dim)
    v[0] = 1.0
    shrink = 0
    blowup = 0
    block = 4096
    for lo in range(0, trials, block):
        count = min(block, trials - lo)
        mats = rng.standard_normal((count, m, ambient_dim)) / math.sqrt(m)
        image_norms = np.linalg.norm(mats @ v, axis=1)
        shrink += int(np.count_nonzero(image_norms <= 1.0 / factor))
        blowup += int(np.count_nonzero(image_norms >= factor))
    return ConcentrationCheck(
        m=m,
        factor=factor,
        shrink_empirical=shrink / trials,
        shrink_bound=(3.0 / factor) ** m,
        blowup_empirical=blowup / trials,
        blowup_bound=math.exp(-m * (factor - 1.0) ** 2 / 8.0),
        trials=trials,
    )


# ---------------------------------------------------------------------------
# serialization: "m n bits" header, one row of scaled integers per line


def save_discretized(matrix: MeasurementMatrix, path: str | Path) -> None:
    if matrix.kind != KIND_DISCRETIZED:
        raise ValueError(f"can only serialize discretized matrices, got {matrix.kind!r}")
    path = Path(path)
    lines = [f"{matrix.m} {matrix.n} {matrix.bits}"]
    lines.extend(" ".join(str(int(v)) for v in row) for row in matrix.scaled_ints)
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def load_discretized(path: str | Path) -> MeasurementMatrix:
    path = Path(path)
    lines = path.read_text(encoding="ascii").splitlines()
    if not lines:
        raise ValueError(f"{path}: empty matrix file")
    header = lines[0].split()
    if len(header) != 3:
        raise ValueError(f"{path}: header must be 'm n bits'")
    m, n, bits = (int(h) for h in header)
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != m:
        raise ValueError(f"{path}: header promises {m} rows, found {len(body)}")
    ints = np.empty((m, n), dtype=np.int64)
    for i, ln in enumerate(body):
        row = ln.split()
        if len(row) != n:
            raise ValueError(f"{path}: row {i} has {len(row)} entries, expected {n}")
        ints[i] = [int(tok) for tok in row]
    limit = 1 << bits
    if np.abs(ints).max(initial=0) > limit:
        raise ValueError(f"{path}: scaled entries exceed magnitude 2**{bits}")
    entries = ints.astype(np.float64) * (2.0**-bits)
    return MeasurementMatrix(
        m=m, n=n, entries=entries, kind=KIND_DISCRETIZED, bits=bits, scaled_ints=ints
    )
