"""One-way augmented-indexing game driven by a sparse-recovery oracle.

Alice holds a bit string; Bob holds a position plus every later bit and must
recover the bit at his position from a single message.  The message is the
fixed-point sketch of a superposition of codewords, one per bit chunk, with
geometrically growing weights.  Bob subtracts the chunks he already knows
(exactly, in scaled-integer arithmetic), smooths the fixed-point shadow with
uniform l1 noise, runs the recovery oracle, and decodes his chunk as the
nearest codeword in l1.  One protocol success per chunk bit means the oracle's
sketch width carries at least one bit per message coordinate per chunk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .codes import SparseCodebook, expand_to_binary, gv_construct
from .geometry import L1Ball, sample_l1_ball
from .measurement import (
    MAX_BITS,
    MeasurementMatrix,
    discretize,
    orthonormalize_rows,
    sample_gaussian_matrix,
)
from .recovery import RecoveryOracle, check_l1l1
from .seeds import derive_rng


def _is_power_of_two(v: int) -> bool:
    return v >= 1 and (v & (v - 1)) == 0


@dataclass
class ProtocolConfig:
    """Shape of one reduction instance.

    ``n`` and ``k`` must be powers of two with ``k | n``; the codebook must be
    the ``k``-sparse expansion over exactly that block structure with binary
    minimum distance at least ``k``.  Derived quantities:

    * ``D = 3 + 2C`` (integer): weight ratio between consecutive chunks.
    * ``bits``: fixed-point width, ``(4 + 2*ceil(log2 D)) * log2 n`` unless
      overridden; must stay within the exact int64 range.
    * ``chunk_bits = floor(log2 size)``: payload bits per chunk.
    * ``num_chunks = log2 n``; the instance string has
      ``chunk_bits * num_chunks`` bits.
    """

    n: int
    k: int
    C: float
    codebook: SparseCodebook
    m: int | None = None
    bits_override: int | None = None

    D: int = field(init=False)
    bits: int = field(init=False)
    chunk_bits: int = field(init=False)
    num_chunks: int = field(init=False)
    signal_bits: int = field(init=False)

    def __post_init__(self) -> None:
        if not _is_power_of_two(self.n) or self.n < 2:
            raise ValueError(f"dimension must be a power of two >= 2, got {self.n}")
        if not _is_power_of_two(self.k):
            raise ValueError(f"sparsity must be a power of two, got {self.k}")
        if self.n % self.k != 0:
            raise ValueError(f"sparsity {self.k} must divide dimension {self.n}")
        if self.codebook.n != self.n or self.codebook.k != self.k:
            raise ValueError(
                f"codebook shape ({self.codebook.n}, {self.codebook.k}) does not "
                f"match (n, k) = ({self.n}, {self.k})"
            )
        if len(self.codebook) < 2:
            raise ValueError("codebook must contain at least two words")
        if self.codebook.min_dist < self.k:
            raise ValueError(
                f"codebook minimum distance {self.codebook.min_dist} is below the "
                f"sparsity {self.k}; chunk decoding would be ambiguous"
            )
        two_c = 2 * Fraction(self.C)
        if two_c.denominator != 1 or self.C < 1.0:
            raise ValueError(
                f"need C >= 1 with 2C integral so the chunk base is exact, got {self.C}"
            )
        self.D = 3 + int(two_c)
        self.num_chunks = self.n.bit_length() - 1
        self.chunk_bits = len(self.codebook).bit_length() - 1
        self.signal_bits = self.chunk_bits * self.num_chunks
        if self.m is None:
            self.m = self.n
        if not 1 <= self.m <= self.n:
            raise ValueError(f"rows must lie in [1, {self.n}], got {self.m}")
        if self.bits_override is not None:
            self.bits = int(self.bits_override)
        else:
            self.bits = (4 + 2 * (self.D - 1).bit_length()) * self.num_chunks
        if not 1 <= self.bits <= MAX_BITS:
            raise ValueError(
                f"fixed-point width {self.bits} outside [1, {MAX_BITS}]; pass "
                f"bits_override to stay within exact int64 range"
            )
        # largest possible signal coordinate; must stay exact in int64
        peak = self.k * (self.D ** (self.num_chunks + 1) - self.D) // (self.D - 1)
        if peak >= 2**62:
            raise ValueError("chunk weights overflow exact integer range")
        self._supports = self.codebook.supports()

    def certificate(self) -> "SmoothingCertificate":
        return statistical_distance_certificate(self.n, self.k, self.bits, self.D)


def make_standard_config(
    n: int,
    k: int,
    C: float,
    *,
    m: int | None = None,
    bits_override: int | None = None,
    seed: int = 0,
) -> ProtocolConfig:
    """Config over the greedy half-distance codebook for block size ``n/k``."""
    if n % k != 0:
        raise ValueError(f"sparsity {k} must divide dimension {n}")
    if k % 2 != 0:
        raise ValueError(f"half-distance construction needs even sparsity, got {k}")
    code = gv_construct(n // k, k, Fraction(1, 2), seed=seed)
    return ProtocolConfig(
        n=n, k=k, C=C, codebook=expand_to_binary(code), m=m, bits_override=bits_override
    )


@dataclass(frozen=True)
class AugmentedIndexingInstance:
    """Alice's bit string and Bob's position (1-based); Bob knows all later bits."""

    bits: np.ndarray
    index: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "bits", np.asarray(self.bits, dtype=np.uint8))
        if self.bits.ndim != 1 or not np.all(self.bits <= 1):
            raise ValueError("instance bits must be a flat 0/1 array")
        if not 1 <= self.index <= self.bits.size:
            raise ValueError(
                f"index must lie in [1, {self.bits.size}], got {self.index}"
            )

    @property
    def suffix(self) -> np.ndarray:
        """The bits strictly after ``index``, the side information Bob holds."""
        return self.bits[self.index:]


def random_instance(config: ProtocolConfig, rng: np.random.Generator) -> AugmentedIndexingInstance:
    bits = rng.integers(0, 2, size=config.signal_bits, dtype=np.uint8)
    index = int(rng.integers(1, config.signal_bits + 1))
    return AugmentedIndexingInstance(bits=bits, index=index)


def chunk_indices(config: ProtocolConfig, bits: np.ndarray) -> list[int]:
    """Codeword index per chunk: big-endian bit packing, chunk 1 first."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape != (config.signal_bits,):
        raise ValueError(f"expected {config.signal_bits} bits, got shape {bits.shape}")
    cb = config.chunk_bits
    out = []
    for j in range(config.num_chunks):
        word = 0
        for b in bits[j * cb:(j + 1) * cb]:
            word = (word << 1) | int(b)
        out.append(word)
    return out


def signal_vector(config: ProtocolConfig, bits: np.ndarray) -> np.ndarray:
    """The integer superposition ``sum_j D**j * word_j`` (int64)."""
    x = np.zeros(config.n, dtype=np.int64)
    for j, idx in enumerate(chunk_indices(config, bits), start=1):
        x += (config.D ** j) * config.codebook.words[idx].astype(np.int64)
    return x


class Message(NamedTuple):
    """Alice's one-way message: exact scaled-integer sketch of her signal."""

    values: np.ndarray    # object dtype, exact ints: (A' x) * 2**bits
    bit_width: int        # two's-complement width needed per value
    total_bits: int


def _exact_sketch(scaled_obj: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Exact ``scaled_obj @ x`` restricted to the support of ``x``."""
    supp = np.nonzero(x)[0]
    if supp.size == 0:
        return np.array([0] * scaled_obj.shape[0], dtype=object)
    return scaled_obj[:, supp].dot(x[supp].astype(object))


def alice_encode(
    config: ProtocolConfig, bits: np.ndarray, scaled_obj: np.ndarray
) -> Message:
    """Sketch the chunk superposition with the shared fixed-point matrix."""
    values = _exact_sketch(scaled_obj, signal_vector(config, bits))
    width = 1 + max(int(v).bit_length() for v in values)
    return Message(values=values, bit_width=width, total_bits=width * len(values))


@dataclass
class BobView:
    """Everything Bob derives in one run (no access to Alice's prefix)."""

    chunk_pos: int               # j: the chunk containing his bit
    decoded_word: int            # codebook index he decodes for chunk j
    guess: int                   # his answer for bit `index`
    w_hat: np.ndarray            # oracle output
    oracle_input: np.ndarray     # the sketch handed to the oracle
    noise: np.ndarray            # smoothing noise u
    margin_decoded: float        # l1 gap to the codeword he chose


def bob_decode(
    config: ProtocolConfig,
    message: Message,
    index: int,
    suffix: np.ndarray,
    oracle: RecoveryOracle,
    matrix: MeasurementMatrix,
    scaled_obj: np.ndarray,
    rng: np.random.Generator,
) -> BobView:
    """Bob's side: strip known chunks, smooth, recover, decode, answer.

    ``matrix`` is the exact orthonormal matrix and ``scaled_obj`` its shared
    fixed-point form (object ints).  The subtraction of known chunks happens
    on exact integers, so the only inexactness entering the oracle input is
    the deliberate fixed-point shadow plus the smoothing noise.
    """
    cb = config.chunk_bits
    j = (index - 1) // cb + 1
    suffix = np.asarray(suffix, dtype=np.uint8)
    expected = config.signal_bits - index
    if suffix.shape != (expected,):
        raise ValueError(f"suffix must hold the {expected} bits after {index}")

    # chunks strictly above j are fully visible in the suffix
    z = np.zeros(config.n, dtype=np.int64)
    for t in range(j + 1, config.num_chunks + 1):
        word = 0
        for p in range((t - 1) * cb, t * cb):      # 0-based bit positions
            word = (word << 1) | int(suffix[p - index])
        z += (config.D ** t) * config.codebook.words[word].astype(np.int64)

    residual = message.values - _exact_sketch(scaled_obj, z)
    scale = 2.0 ** -config.bits
    w_sketch = np.fromiter(
        (float(v) for v in residual), dtype=np.float64, count=len(residual)
    ) * scale

    noise = sample_l1_ball(L1Ball(n=config.n, s=float(config.k)), rng)
    oracle_input = w_sketch - matrix.entries @ noise
    w_hat = oracle.recover(matrix, oracle_input)

    # nearest codeword to w_hat at weight D**j, exploiting k-sparse words:
    # ||D^j x' - w_hat||_1 = ||w_hat||_1 + sum_{c in supp x'} (|D^j - w_hat_c| - |w_hat_c|)
    weight = float(config.D ** j)
    gains = np.abs(weight - w_hat) - np.abs(w_hat)
    scores = gains[config._supports].sum(axis=1)
    decoded = int(np.argmin(scores))
    margin = float(np.abs(w_hat).sum() + scores[decoded])

    offset = (index - 1) - (j - 1) * cb          # bit position inside chunk j
    guess = (decoded >> (cb - 1 - offset)) & 1
    return BobView(
        chunk_pos=j,
        decoded_word=decoded,
        guess=guess,
        w_hat=w_hat,
        oracle_input=oracle_input,
        noise=noise,
        margin_decoded=margin,
    )


class TrialRecord(NamedTuple):
    trial: int
    bit_index: int
    chunk_pos: int
    true_word: int
    decoded_word: int
    true_bit: int
    guess: int
    success: bool
    margin: float            # l1 gap between the true chunk word and w_hat
    margin_bound: float      # k * D**j / 2
    margin_ok: bool
    guarantee_ok: bool
    guarantee_ratio: float
    noise_l1: float
    noise_l2: float
    message_bits: int


@dataclass
class ProtocolResult:
    config: ProtocolConfig
    oracle_name: str
    trials: int
    success_rate: float
    margin_violations: int   # trials where the guarantee held but the margin failed
    mean_message_bits: float
    min_bits_per_chunk: float
    rows: list[TrialRecord] = field(repr=False)


def run_protocol_trials(
    config: ProtocolConfig, oracle: RecoveryOracle, trials: int, seed: int
) -> ProtocolResult:
    """Simulate independent reduction instances and audit every decode.

    Per trial, fresh derived streams draw the instance, the measurement
    matrix (orthonormalized then discretized to ``config.bits``), and Bob's
    smoothing noise.  The margin audit uses the true chunk word, which only
    the runner knows; a margin below ``k * D**j / 2`` forces a correct decode
    whenever the recovery guarantee holds.
    """
    if trials < 1:
        raise ValueError(f"need trials >= 1, got {trials}")
    rows: list[TrialRecord] = []
    successes = 0
    violations = 0
    total_bits = 0
    min_rate = math.inf
    for t in range(trials):
        instance = random_instance(config, derive_rng(seed, t, "instance"))
        gauss = sample_gaussian_matrix(
            config.m, config.n, derive_rng(seed, t, "matrix")
        )
        matrix = orthonormalize_rows(gauss)
        disc = discretize(matrix, config.bits)
        scaled_obj = disc.rounded.scaled_ints.astype(object)

        message = alice_encode(config, instance.bits, scaled_obj)
        view = bob_decode(
            config, message, instance.index, instance.suffix,
            oracle, matrix, scaled_obj, derive_rng(seed, t, "noise"),
        )

        true_bit = int(instance.bits[instance.index - 1])
        success = view.guess == true_bit
        successes += success

        j = view.chunk_pos
        true_word = chunk_indices(config, instance.bits)[j - 1]
        weight = float(config.D ** j)
        margin = float(
            np.abs(weight * config.codebook.words[true_word] - view.w_hat).sum()
        )
        margin_bound = config.k * weight / 2.0
        margin_ok = margin < margin_bound

        if config.m == config.n:
            # the exact vector the oracle's sketch represents
            v_num = matrix.entries.T @ view.oracle_input
        else:
            # wide sketches cannot be inverted; the shadow term (certified
            # below k/n^2 in l1) is omitted from the reference vector
            prefix = np.zeros(config.n, dtype=np.float64)
            for jj, idx in enumerate(chunk_indices(config, instance.bits), start=1):
                if jj <= j:
                    prefix += float(config.D ** jj) * config.codebook.words[idx].astype(np.float64)
            v_num = prefix - view.noise
        guarantee = check_l1l1(v_num, view.w_hat, oracle.k, oracle.C)
        if guarantee.ok and not margin_ok:
            violations += 1

        total_bits += message.total_bits
        min_rate = min(min_rate, message.total_bits / config.num_chunks)
        rows.append(TrialRecord(
            trial=t,
            bit_index=instance.index,
            chunk_pos=j,
            true_word=true_word,
            decoded_word=view.decoded_word,
            true_bit=true_bit,
            guess=view.guess,
            success=success,
            margin=margin,
            margin_bound=margin_bound,
            margin_ok=margin_ok,
            guarantee_ok=guarantee.ok,
            guarantee_ratio=guarantee.ratio,
            noise_l1=float(np.abs(view.noise).sum()),
            noise_l2=float(np.linalg.norm(view.noise)),
            message_bits=message.total_bits,
        ))
    return ProtocolResult(
        config=config,
        oracle_name=type(oracle).__name__,
        trials=trials,
        success_rate=successes / trials,
        margin_violations=violations,
        mean_message_bits=total_bits / trials,
        min_bits_per_chunk=min_rate,
        rows=rows,
    )


# ---------------------------------------------------------------------------
# the fixed-point shadow is statistically invisible after smoothing


def smoothing_overlap_margin(n: int) -> tuple[float, float]:
    """``((1 - 1/n**2)**n, 1 - 1/n)``; the first must exceed the second.

    Evaluated via ``exp(n * log1p(-1/n**2))``, whose error is a few ulps,
    while the true separation shrinks like ``1/(2 n**2)`` -- many orders above
    float noise for every ``n`` up to 2**20.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    return math.exp(n * math.log1p(-1.0 / n**2)), 1.0 - 1.0 / n


def smoothing_overlap_exact_ok(n: int) -> bool:
    """Exact integer form of ``(1 - 1/n**2)**n > 1 - 1/n``.

    Equivalent to ``(n-1)**(n-1) * (n+1)**n > n**(2n-1)``.  Exact but heavy;
    intended for moderate ``n`` (big-int powers grow to ``~2n log2 n`` bits).
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    return (n - 1) ** (n - 1) * (n + 1) ** n > n ** (2 * n - 1)


@dataclass(frozen=True)
class SmoothingCertificate:
    """Proof obligations that fixed-point rounding cannot bias Bob's noise.

    ``shadow_l1_bound`` is the worst-case l1 mass of the rounding shadow:
    ``n**2 * 2**-bits * k * D**(2 * num_chunks)`` (exact rational).  It must
    stay below ``k / n**2``; combined with the smoothing overlap this caps
    the statistical distance between Bob's view and the rounding-free
    protocol at ``1/n``.
    """

    n: int
    k: int
    bits: int
    D: int
    num_chunks: int
    signal_l1_max: int           # exact sum k * (D^(T+1) - D) / (D - 1)
    signal_l1_loose: int         # the looser k * D^(2T) actually certified
    shadow_l1_bound: Fraction
    threshold: Fraction          # k / n^2
    shadow_ok: bool
    overlap_value: float
    overlap_target: float
    overlap_ok: bool

    @property
    def ok(self) -> bool:
        return self.shadow_ok and self.overlap_ok

    @property
    def tv_upper_bound(self) -> float:
        """Statistical distance bound ``1 - (1 - 1/n**2)**n``, below ``1/n``."""
        return 1.0 - self.overlap_value


def statistical_distance_certificate(n: int, k: int, bits: int, D: int) -> SmoothingCertificate:
    """Exact-arithmetic audit of the rounding-shadow chain for given shape."""
    if not _is_power_of_two(n) or n < 2:
        raise ValueError(f"dimension must be a power of two >= 2, got {n}")
    if k < 1 or bits < 1 or D < 2:
        raise ValueError("need k >= 1, bits >= 1, D >= 2")
    T = n.bit_length() - 1
    signal_l1_max = k * (D ** (T + 1) - D) // (D - 1)
    signal_l1_loose = k * D ** (2 * T)
    shadow = Fraction(n**2 * signal_l1_loose, 2**bits)
    threshold = Fraction(k, n**2)
    overlap_value, overlap_target = smoothing_overlap_margin(n)
    return SmoothingCertificate(
        n=n,
        k=k,
        bits=bits,
        D=D,
        num_chunks=T,
        signal_l1_max=signal_l1_max,
        signal_l1_loose=signal_l1_loose,
        shadow_l1_bound=shadow,
        threshold=threshold,
        shadow_ok=shadow < threshold,
        overlap_value=overlap_value,
        overlap_target=overlap_target,
        overlap_ok=overlap_value > overlap_target,
    )
