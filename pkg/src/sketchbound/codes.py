"""Greedy maximal codes over small alphabets and their sparse binary expansions.

A greedy maximal code with design distance ``d`` over alphabet size ``q`` and
block length ``k`` has at least ``q**k / V`` words, where ``V`` is the number
of words in a radius-``d-1`` Hamming ball.  Expanding each character to a
one-hot group of ``q`` bits turns the code into a family of ``k``-sparse
binary vectors of dimension ``n = q*k`` whose pairwise Hamming distance is
exactly twice the original one.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import NamedTuple

import mpmath
import numpy as np

from .seeds import derive_rng

# Above this space size the full greedy sweep is replaced by seeded random search.
LEX_SPACE_LIMIT = 2**24
# Kill-ball templates larger than this fall back to the blocked greedy sweep.
_TEMPLATE_CAP = 2**22
_SCAN_CHUNK = 1 << 16


def _as_fraction(value: Fraction | float | int | str) -> Fraction:
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot interpret {value!r} as an exact fraction") from exc


def q_ary_entropy(q: int, x: float) -> float:
    """Entropy of ``x`` with respect to a ``q``-letter alphabet, base ``q`` logs.

    Parameters
    ----------
    q : int
        Alphabet size, >= 2.
    x : float
        Argument, strictly inside ``(0, 1 - 1/q)``; the function is only used
        on that branch and endpoints are rejected.

    Returns
    -------
    float
        ``x*log_q(q-1) - x*log_q(x) - (1-x)*log_q(1-x)``.
    """
    if not isinstance(q, int) or q < 2:
        raise ValueError(f"alphabet size must be an int >= 2, got {q!r}")
    x = float(x)
    if not 0.0 < x < 1.0 - 1.0 / q:
        raise ValueError(f"entropy argument {x} outside open interval (0, 1 - 1/{q})")
    lq = math.log(q)
    return (x * math.log(q - 1) - x * math.log(x) - (1.0 - x) * math.log(1.0 - x)) / lq


def hamming_distance(a, b) -> int:
    """Number of positions where sequences ``a`` and ``b`` differ."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return int(np.count_nonzero(a != b))


def gv_size_floor(q: int, k: int, d: int) -> int:
    """Minimum size of any maximal distance-``d`` code: ``ceil(q**k / V)``.

    ``V = sum_{i=0}^{d-1} C(k,i) (q-1)**i`` is the exact integer volume of a
    Hamming ball of radius ``d-1``; every word lies within distance ``d-1``
    of some accepted word once the greedy sweep finishes.
    """
    _validate_qkd(q, k, d)
    vol = sum(math.comb(k, i) * (q - 1) ** i for i in range(d))
    return -(-(q**k) // vol)


def gv_log2_size_bound(q: int, k: int, d: int) -> float:
    """Strict lower bound on ``log2`` of a maximal code's size.

    Equals ``(1 - H_q(d/k)) * k * log2(q)`` and requires ``0 < d/k < 1 - 1/q``.
    """
    _validate_qkd(q, k, d)
    eps = d / k
    return (1.0 - q_ary_entropy(q, eps)) * k * math.log2(q)


class EntropyClaimCheck(NamedTuple):
    """Both sides of the ball-volume vs entropy inequality."""

    lhs: int          # exact: sum_{i=0}^{d} C(k,i)(q-1)^i with d = eps*k
    rhs: float        # q ** (H_q(eps) * k), evaluated at 60 dps
    holds: bool       # lhs < rhs, compared in high precision


def entropy_claim_check(q: int, k: int, eps: Fraction | float | str) -> EntropyClaimCheck:
    """Check that the radius-``eps*k`` ball volume stays below ``q**(H_q(eps)*k)``.

    The left side is exact integer arithmetic; the right side is evaluated
    with mpmath at 60 decimal digits so the comparison is trustworthy far
    beyond float precision.  ``eps*k`` must be an integer and ``eps`` must lie
    in the entropy domain ``(0, 1 - 1/q)``.
    """
    if not isinstance(q, int) or q < 2:
        raise ValueError(f"alphabet size must be an int >= 2, got {q!r}")
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"block length must be an int >= 1, got {k!r}")
    eps = _as_fraction(eps)
    if not (0 < eps < 1 - Fraction(1, q)):
        raise ValueError(f"eps={eps} outside open interval (0, 1 - 1/{q})")
    radius = eps * k
    if radius.denominator != 1:
        raise ValueError(f"eps*k must be an integer, got {radius}")
    radius = int(radius)

    lhs = sum(math.comb(k, i) * (q - 1) ** i for i in range(radius + 1))
    with mpmath.workdps(60):
        x = mpmath.mpf(eps.numerator) / eps.denominator
        ent = (x * mpmath.log(q - 1) - x * mpmath.log(x)
               - (1 - x) * mpmath.log(1 - x)) / mpmath.log(q)
        rhs = mpmath.power(q, ent * k)
        holds = mpmath.mpf(lhs) < rhs
        rhs_float = float(rhs)
    return EntropyClaimCheck(lhs=lhs, rhs=rhs_float, holds=bool(holds))


def _validate_qkd(q: int, k: int, d: int) -> None:
    if not isinstance(q, int) or q < 2:
        raise ValueError(f"alphabet size must be an int >= 2, got {q!r}")
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"block length must be an int >= 1, got {k!r}")
    if not isinstance(d, int) or not 1 <= d <= k:
        raise ValueError(f"design distance must be an int in [1, {k}], got {d!r}")


@dataclass
class QaryCode:
    """A code over ``{0..q-1}**k`` with verified-by-construction min distance.

    Attributes
    ----------
    q, k : int
        Alphabet size and block length.
    min_dist : int
        Design distance ``d``; every pair of stored words differs in at least
        ``d`` positions.
    words : numpy.ndarray
        ``(size, k)`` uint8 array, rows sorted in the order of acceptance
        (lexicographic for the deterministic construction).
    method : str
        ``"lexicographic"`` (greedy sweep, provably maximal) or ``"random"``
        (seeded random search, maximality not guaranteed).
    """

    q: int
    k: int
    min_dist: int
    words: np.ndarray
    method: str = "lexicographic"

    def __post_init__(self) -> None:
        _validate_qkd(self.q, self.k, self.min_dist)
        self.words = np.asarray(self.words, dtype=np.uint8)
        if self.words.ndim != 2 or self.words.shape[1] != self.k:
            raise ValueError(f"words must have shape (size, {self.k})")
        if self.words.size and int(self.words.max()) >= self.q:
            raise ValueError("word characters must lie in [0, q)")
        if self.method not in ("lexicographic", "random"):
            raise ValueError(f"unknown construction method {self.method!r}")

    def __len__(self) -> int:
        return int(self.words.shape[0])

    @property
    def log2_size(self) -> float:
        return math.log2(len(self))

    def size_floor(self) -> int:
        return gv_size_floor(self.q, self.k, self.min_dist)

    def check_min_distance(self) -> int:
        """Recompute the exact minimum pairwise distance (O(size^2 * k))."""
        return min_pairwise_distance(self.words)

    def meets_log2_bound(self) -> bool:
        """True when log2(size) strictly exceeds the entropy-rate bound.

        Only guaranteed for the maximal (lexicographic) construction.
        """
        return self.log2_size > gv_log2_size_bound(self.q, self.k, self.min_dist)


@dataclass
class SparseCodebook:
    """``k``-sparse binary vectors obtained by one-hot expanding a QaryCode.

    Each of the ``k`` blocks of ``q`` coordinates holds exactly one 1, so
    ``n = q*k``, every word has Hamming weight ``k``, and pairwise distances
    are even.  ``min_dist`` is the guaranteed binary minimum distance.
    """

    n: int
    k: int
    q: int
    min_dist: int
    words: np.ndarray

    def __post_init__(self) -> None:
        if self.n != self.q * self.k:
            raise ValueError(f"dimension must equal q*k = {self.q * self.k}, got {self.n}")
        self.words = np.asarray(self.words, dtype=np.uint8)
        if self.words.ndim != 2 or self.words.shape[1] != self.n:
            raise ValueError(f"words must have shape (size, {self.n})")
        if self.words.size:
            blocks = self.words.reshape(len(self), self.k, self.q)
            if not np.all(blocks.sum(axis=2) == 1):
                raise ValueError("every q-wide block must contain exactly one 1")

    def __len__(self) -> int:
        return int(self.words.shape[0])

    @property
    def log2_size(self) -> float:
        return math.log2(len(self))

    def supports(self) -> np.ndarray:
        """``(size, k)`` int64 array of the 1-positions of each word, ascending.

        Computed once and cached; the words array is treated as immutable.
        """
        cached = getattr(self, "_supports_cache", None)
        if cached is None:
            rows, cols = np.nonzero(self.words)
            if rows.size != len(self) * self.k:
                raise ValueError("codebook rows do not all have weight k")
            cached = cols.reshape(len(self), self.k).astype(np.int64)
            self._supports_cache = cached
        return cached

    def as_float(self) -> np.ndarray:
        return self.words.astype(np.float64)

    def check_min_distance(self) -> int:
        return min_pairwise_distance(self.words)


def min_pairwise_distance(words: np.ndarray, block: int = 1024) -> int:
    """Exact minimum Hamming distance over all pairs of rows, block-wise."""
    words = np.asarray(words)
    size, width = words.shape
    if size < 2:
        raise ValueError("need at least two words to define a pairwise distance")
    best = width + 1
    for lo in range(0, size, block):
        left = words[lo:lo + block]
        for mo in range(lo, size, block):
            right = words[mo:mo + block]
            diffs = (left[:, None, :] != right[None, :, :]).sum(axis=2)
            if mo == lo:
                rows = np.arange(left.shape[0])
                diffs[rows, rows] = width + 1  # mask self-pairs
            best = min(best, int(diffs.min()))
    return best


# ---------------------------------------------------------------------------
# greedy constructions


def _char_places(q: int, k: int) -> np.ndarray:
    # integer order on encoded words == lexicographic order on char tuples
    return np.array([q ** (k - 1 - p) for p in range(k)], dtype=np.int64)


def _decode_ints(ints: np.ndarray, q: int, k: int, places: np.ndarray) -> np.ndarray:
    out = np.empty((len(ints), k), dtype=np.uint8)
    for p in range(k):
        out[:, p] = (ints // places[p]) % q
    return out


def _ball_template(q: int, k: int, radius: int, places: np.ndarray):
    """Precomputed integer offsets reaching every word within ``radius``.

    For each position subset S with |S| <= radius and each assignment of
    arbitrary characters to S, the reachable word is
    ``w - (w's chars on S) . places + assignment . places``.  Assignments that
    happen to match ``w`` revisit closer words, which is harmless for a kill
    sweep.  Returns (subset_place_matrix, offsets, subset_ids).
    """
    subsets = []
    for t in range(radius + 1):
        subsets.extend(itertools.combinations(range(k), t))
    place_matrix = np.zeros((len(subsets), k), dtype=np.int64)
    offset_parts = []
    id_parts = []
    for si, subset in enumerate(subsets):
        for p in subset:
            place_matrix[si, p] = places[p]
        if subset:
            assign = np.array(
                list(itertools.product(range(q), repeat=len(subset))), dtype=np.int64
            )
            offs = assign @ places[list(subset)]
        else:
            offs = np.zeros(1, dtype=np.int64)
        offset_parts.append(offs)
        id_parts.append(np.full(len(offs), si, dtype=np.int64))
    return place_matrix, np.concatenate(offset_parts), np.concatenate(id_parts)


def _template_size(q: int, k: int, radius: int) -> int:
    return sum(math.comb(k, t) * q**t for t in range(radius + 1))


def _greedy_lex_sieve(q: int, k: int, d: int) -> np.ndarray:
    """Lexicographic greedy via an alive-array sieve.

    Accepting word w kills exactly the words at distance < d from w, so the
    next alive index is the next word the sequential greedy would accept.
    """
    n_all = q**k
    places = _char_places(q, k)
    place_matrix, offsets, subset_ids = _ball_template(q, k, d - 1, places)
    alive = np.ones(n_all, dtype=bool)
    accepted: list[int] = []
    pos = 0
    while pos < n_all:
        chunk = alive[pos:pos + _SCAN_CHUNK]
        local = int(chunk.argmax())
        if not chunk[local]:
            pos += _SCAN_CHUNK
            continue
        w = pos + local
        accepted.append(w)
        chars = ((w // places) % q).astype(np.int64)
        contrib = place_matrix @ chars
        alive[w - contrib[subset_ids] + offsets] = False
        pos = w + 1
    ints = np.array(accepted, dtype=np.int64)
    return _decode_ints(ints, q, k, places)


def _min_dist_to_rows(rows: np.ndarray, accepted: np.ndarray, block: int = 2048) -> np.ndarray:
    """Per-row minimum Hamming distance from ``rows`` to any accepted word."""
    out = np.full(rows.shape[0], rows.shape[1] + 1, dtype=np.int64)
    for lo in range(0, accepted.shape[0], block):
        seg = accepted[lo:lo + block]
        dmin = (rows[:, None, :] != seg[None, :, :]).sum(axis=2).min(axis=1)
        np.minimum(out, dmin, out=out)
    return out


def _greedy_lex_dense(q: int, k: int, d: int) -> np.ndarray:
    """Lexicographic greedy by blocked candidate filtering.

    Used when the kill-ball template would be larger than the space itself
    (small q, large radius).  Produces the identical code to the sieve.
    """
    n_all = q**k
    places = _char_places(q, k)
    accepted = np.empty((0, k), dtype=np.uint8)
    block = 1 << 14
    for lo in range(0, n_all, block):
        ints = np.arange(lo, min(lo + block, n_all), dtype=np.int64)
        cand = _decode_ints(ints, q, k, places)
        if accepted.shape[0]:
            keep = _min_dist_to_rows(cand, accepted) >= d
            cand = cand[keep]
        # survivors cleared the old words; check them against each other in order
        fresh: list[np.ndarray] = []
        for row in cand:
            if all(int(np.count_nonzero(row != other)) >= d for other in fresh):
                fresh.append(row)
        if fresh:
            accepted = np.vstack([accepted, np.array(fresh, dtype=np.uint8)])
    return accepted


def _greedy_random(
    q: int, k: int, d: int, seed: int, rejection_budget: int, target_size: int | None
) -> np.ndarray:
    """Seeded random greedy for spaces too large to sweep.

    Draws uniform candidates and keeps those at distance >= d from everything
    kept so far; stops after ``rejection_budget`` total rejections or at
    ``target_size``.  The result is a valid distance-d code but carries no
    maximality guarantee.
    """
    rng = derive_rng(seed, 0, "codebook")
    kept: list[np.ndarray] = []
    arr = np.empty((0, k), dtype=np.uint8)
    rejections = 0
    while rejections < rejection_budget:
        if target_size is not None and len(kept) >= target_size:
            break
        cand = rng.integers(0, q, size=k).astype(np.uint8)
        if arr.shape[0] and int(_min_dist_to_rows(cand[None, :], arr)[0]) < d:
            rejections += 1
            continue
        kept.append(cand)
        arr = np.vstack([arr, cand[None, :]])
    return arr


def gv_construct(
    q: int,
    k: int,
    eps: Fraction | float | str,
    *,
    seed: int = 0,
    rejection_budget: int = 10**6,
    target_size: int | None = None,
) -> QaryCode:
    """Build a distance-``eps*k`` code over ``{0..q-1}**k`` greedily.

    For spaces of at most ``2**24`` words the deterministic lexicographic
    greedy is used and the result is maximal, hence its size meets the
    ``ceil(q**k / V)`` floor and the entropy-rate bound.  Larger spaces use a
    seeded random greedy bounded by ``rejection_budget``.

    ``eps`` must make ``eps*k`` a positive integer; pass a string or Fraction
    (e.g. ``"1/3"``) for non-dyadic values.
    """
    eps = _as_fraction(eps)
    if not 0 < eps <= 1:
        raise ValueError(f"relative distance must lie in (0, 1], got {eps}")
    radius = eps * k
    if radius.denominator != 1:
        raise ValueError(
            f"eps*k must be an integer design distance, got {eps} * {k} = {radius}"
        )
    d = int(radius)
    _validate_qkd(q, k, d)

    if q**k <= LEX_SPACE_LIMIT:
        if d == 1:
            places = _char_places(q, k)
            words = _decode_ints(np.arange(q**k, dtype=np.int64), q, k, places)
        elif _template_size(q, k, d - 1) <= _TEMPLATE_CAP:
            words = _greedy_lex_sieve(q, k, d)
        else:
            words = _greedy_lex_dense(q, k, d)
        method = "lexicographic"
    else:
        words = _greedy_random(q, k, d, seed, rejection_budget, target_size)
        method = "random"
    if words.shape[0] == 0:
        raise RuntimeError("construction produced an empty code")
    return QaryCode(q=q, k=k, min_dist=d, words=words, method=method)


def expand_to_binary(code: QaryCode) -> SparseCodebook:
    """One-hot expand each character: ``n = q*k`` bits, weight exactly ``k``.

    Binary Hamming distance is exactly twice the original distance, so the
    expanded codebook's guaranteed minimum distance is ``2 * code.min_dist``.
    """
    size = len(code)
    n = code.q * code.k
    words = np.zeros((size, n), dtype=np.uint8)
    rows = np.repeat(np.arange(size), code.k)
    cols = (np.arange(code.k, dtype=np.int64) * code.q)[None, :] + code.words.astype(np.int64)
    words[rows, cols.ravel()] = 1
    return SparseCodebook(
        n=n, k=code.k, q=code.q, min_dist=2 * code.min_dist, words=words
    )


# ---------------------------------------------------------------------------
# text serialization: "n k min_dist count" header, one 0/1 row per word


def save_codebook(codebook: SparseCodebook, path: str | Path) -> None:
    path = Path(path)
    lines = [f"{codebook.n} {codebook.k} {codebook.min_dist} {len(codebook)}"]
    lines.extend("".join("1" if b else "0" for b in row) for row in codebook.words)
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def load_codebook(path: str | Path) -> SparseCodebook:
    path = Path(path)
    lines = path.read_text(encoding="ascii").splitlines()
    if not lines:
        raise ValueError(f"{path}: empty codebook file")
    header = lines[0].split()
    if len(header) != 4:
        raise ValueError(f"{path}: header must be 'n k min_dist count'")
    n, k, min_dist, count = (int(h) for h in header)
    if n <= 0 or k <= 0 or n % k != 0:
        raise ValueError(f"{path}: dimension {n} must be a positive multiple of k={k}")
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != count:
        raise ValueError(f"{path}: header promises {count} words, found {len(body)}")
    words = np.empty((count, n), dtype=np.uint8)
    for i, ln in enumerate(body):
        if len(ln) != n or set(ln) - {"0", "1"}:
            raise ValueError(f"{path}: row {i} is not an n-character 0/1 string")
        words[i] = np.frombuffer(ln.encode("ascii"), dtype=np.uint8) - ord("0")
    return SparseCodebook(n=n, k=k, q=n // k, min_dist=min_dist, words=words)
