import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sketchbound import codes, recovery
from sketchbound.measurement import orthonormalize_rows, sample_gaussian_matrix, sketch
from sketchbound.seeds import derive_rng


def small_codebook(q: int = 4, k: int = 2) -> codes.SparseCodebook:
    return codes.expand_to_binary(codes.gv_construct(q, k, Fraction(1, 2)))


def brute_force_best_error(x: np.ndarray, k: int) -> float:
    """Minimum l1 distance from x to any k-sparse vector, by support search."""
    best = math.inf
    for supp in itertools.combinations(range(x.size), k):
        trimmed = np.zeros_like(x)
        for i in supp:
            trimmed[i] = x[i]
        best = min(best, float(np.abs(x - trimmed).sum()))
    return best


# ---------------------------------------------------------------------------
# top-k projection


def test_top_k_keeps_everything_at_full_width():
    x = np.array([1.0, -2.0, 3.0])
    assert np.array_equal(recovery.top_k(x, 3), x)


def test_top_k_largest_magnitude():
    assert np.array_equal(
        recovery.top_k(np.array([5.0, -3.0, 1.0]), 1), np.array([5.0, 0.0, 0.0])
    )


def test_top_k_tie_breaks_toward_lower_index():
    assert np.array_equal(
        recovery.top_k(np.array([1.0, 1.0, 1.0]), 2), np.array([1.0, 1.0, 0.0])
    )


def test_top_k_domain():
    x = np.zeros(3)
    assert np.array_equal(recovery.top_k(x, 0), x)
    with pytest.raises(ValueError):
        recovery.top_k(x, 4)
    with pytest.raises(ValueError):
        recovery.top_k(np.zeros((2, 2)), 1)


@given(
    values=st.lists(st.floats(-50, 50, allow_nan=False), min_size=1, max_size=8),
    k=st.integers(0, 8),
)
@settings(max_examples=120, deadline=None)
def test_top_k_achieves_the_best_sparse_error(values, k):
    x = np.array(values)
    if k > x.size:
        return
    projected = recovery.top_k(x, k)
    err = float(np.abs(x - projected).sum())
    assert math.isclose(err, brute_force_best_error(x, k), rel_tol=1e-12, abs_tol=1e-12)


# ---------------------------------------------------------------------------
# guarantee checker


def test_guarantee_exact_recovery():
    x = np.array([1.0, 2.0, 0.0])
    got = recovery.check_l1l1(x, x.copy(), 1, 1.0)
    assert got.ok and got.ratio == 0.0


def test_guarantee_sparse_target_missed():
    x = np.array([7.0, 0.0, 0.0])
    got = recovery.check_l1l1(x, np.array([7.0, 0.1, 0.0]), 1, 2.0)
    assert not got.ok
    assert got.ratio == math.inf
    assert got.error_best == 0.0


def test_guarantee_hand_case():
    x = np.array([10.0, 1.0, 1.0])
    got = recovery.check_l1l1(x, np.array([10.0, 0.0, 0.0]), 1, 1.0)
    assert got.ok
    assert got.error_actual == 2.0
    assert got.error_best == 2.0
    assert got.ratio == 1.0


def test_guarantee_validation():
    with pytest.raises(ValueError):
        recovery.check_l1l1(np.zeros(2), np.zeros(2), 1, 0.5)
    with pytest.raises(ValueError):
        recovery.check_l1l1(np.zeros(2), np.zeros(3), 1, 1.0)


@given(
    values=st.lists(st.floats(-20, 20, allow_nan=False), min_size=1, max_size=10),
    k=st.integers(0, 10),
)
@settings(max_examples=100, deadline=None)
def test_top_k_always_meets_the_unit_factor_guarantee(values, k):
    x = np.array(values)
    if k > x.size:
        return
    assert recovery.check_l1l1(x, recovery.top_k(x, k), k, 1.0).ok


# ---------------------------------------------------------------------------
# nearest-image decoding


def test_nn_recover_exact_image():
    book = small_codebook()
    mat = sample_gaussian_matrix(6, book.n, derive_rng(0, 0, "matrix"))
    for idx in (0, 3, len(book) - 1):
        word = book.words[idx].astype(np.float64)
        got = recovery.nn_recover(mat, sketch(mat, word), book)
        assert got.index == idx
        assert np.array_equal(got.word, word)


def test_nn_recover_single_word_book():
    book = small_codebook()
    solo = codes.SparseCodebook(
        n=book.n, k=book.k, q=book.q, min_dist=book.min_dist, words=book.words[:1]
    )
    mat = sample_gaussian_matrix(4, book.n, derive_rng(0, 1, "matrix"))
    got = recovery.nn_recover(mat, np.ones(4) * 9.9, solo)
    assert got.index == 0


def test_nn_recover_duplicates_keep_first_index():
    book = small_codebook()
    doubled = codes.SparseCodebook(
        n=book.n, k=book.k, q=book.q, min_dist=0,
        words=np.concatenate([book.words, book.words]),
    )
    mat = sample_gaussian_matrix(5, book.n, derive_rng(0, 2, "matrix"))
    target = sketch(mat, book.words[2].astype(np.float64)) + 0.01
    got = recovery.nn_recover(mat, target, doubled)
    assert got.index < len(book)


def test_nn_recover_matches_brute_force():
    book = small_codebook()
    floats = book.as_float()
    for t in range(10):
        mat = sample_gaussian_matrix(5, book.n, derive_rng(1, t, "matrix"))
        target = derive_rng(1, t, "noise").standard_normal(5)
        scores = np.linalg.norm(mat.entries @ floats.T - target[:, None], axis=0)
        got = recovery.nn_recover(mat, target, book)
        assert got.index == int(np.argmin(scores))


def test_nn_recover_validation():
    book = small_codebook()
    mat = sample_gaussian_matrix(4, book.n, derive_rng(1, 0, "matrix"))
    with pytest.raises(ValueError):
        recovery.nn_recover(mat, np.zeros(3), book)
    narrow = sample_gaussian_matrix(4, 3, derive_rng(1, 1, "matrix"))
    with pytest.raises(ValueError):
        recovery.nn_recover(narrow, np.zeros(4), book)


# ---------------------------------------------------------------------------
# oracles


def test_exact_topk_oracle_inverts_square_sketches():
    ortho = orthonormalize_rows(sample_gaussian_matrix(12, 12, derive_rng(2, 0, "matrix")))
    oracle = recovery.ExactTopKOracle(k=3)
    for t in range(20):
        x = derive_rng(2, t, "instance").standard_normal(12)
        x_hat = oracle.recover(ortho, sketch(ortho, x))
        np.testing.assert_allclose(x_hat, recovery.top_k(x, 3), atol=1e-9)
        assert recovery.check_l1l1(x, x_hat, 3, 1.0 + 1e-9).ok


def test_exact_topk_oracle_requires_square_orthonormal():
    oracle = recovery.ExactTopKOracle(k=2)
    wide = sample_gaussian_matrix(3, 5, derive_rng(2, 0, "matrix"))
    with pytest.raises(ValueError):
        oracle.recover(wide, np.zeros(3))
    square = sample_gaussian_matrix(5, 5, derive_rng(2, 1, "matrix"))
    with pytest.raises(ValueError):
        oracle.recover(square, np.zeros(5))
    with pytest.raises(ValueError):
        recovery.ExactTopKOracle(k=-1)
    with pytest.raises(ValueError):
        recovery.ExactTopKOracle(k=1, C=0.9)


def test_nearest_codeword_oracle_outputs_codewords():
    book = small_codebook()
    oracle = recovery.NearestCodewordOracle(book)
    assert oracle.k == book.k
    mat = sample_gaussian_matrix(5, book.n, derive_rng(2, 2, "matrix"))
    out = oracle.recover(mat, sketch(mat, book.words[4].astype(np.float64)))
    assert np.array_equal(out, book.words[4].astype(np.float64))


def test_zero_oracle_returns_zero():
    mat = sample_gaussian_matrix(3, 7, derive_rng(2, 3, "matrix"))
    assert np.array_equal(recovery.ZeroOracle().recover(mat, np.ones(3)), np.zeros(7))


# ---------------------------------------------------------------------------
# admissible noise radius


def test_radius_scales_linearly_in_safety():
    base = recovery.corollary_noise_radius(256, 4, 10, 1000, safety=0.1)
    assert math.isclose(
        recovery.corollary_noise_radius(256, 4, 10, 1000, safety=0.2), 2 * base,
        rel_tol=1e-12,
    )


def test_radius_closed_form():
    got = recovery.corollary_noise_radius(256, 4, 10, 262144)
    expect = (
        (1 / 6) * 2.0 * math.sqrt(10) * 256 ** (0.5 - 0.1)
        / (262144**0.1 * math.log(256) ** 1.5)
    )
    assert math.isclose(got, expect, rel_tol=1e-12)


def test_radius_explicit_separation_overrides_default():
    with_default = recovery.corollary_noise_radius(64, 4, 8, 500)
    with_r = recovery.corollary_noise_radius(64, 4, 8, 500, r=2 * math.sqrt(4))
    assert math.isclose(with_r, 2 * with_default, rel_tol=1e-12)


def test_radius_validation():
    with pytest.raises(ValueError):
        recovery.corollary_noise_radius(1, 1, 1, 2)
    with pytest.raises(ValueError):
        recovery.corollary_noise_radius(64, 4, 8, 500, safety=0.0)
    with pytest.raises(ValueError):
        recovery.corollary_noise_radius(64, 4, 8, 500, r=0.0)


# ---------------------------------------------------------------------------
# end-to-end noisy recovery


def test_experiment_params_validation():
    book = small_codebook()
    with pytest.raises(ValueError):
        recovery.RecoveryExperimentParams(
            n=book.n + 1, k=book.k, m=4, s=0.1, trials=5, seed=0, codebook=book
        )
    with pytest.raises(ValueError):
        recovery.RecoveryExperimentParams(
            n=book.n, k=book.k, m=4, s=-0.1, trials=5, seed=0, codebook=book
        )
    with pytest.raises(ValueError):
        recovery.RecoveryExperimentParams(
            n=book.n, k=book.k, m=4, s=0.1, trials=0, seed=0, codebook=book
        )


def test_noiseless_experiment_is_perfect():
    book = small_codebook()
    params = recovery.RecoveryExperimentParams(
        n=book.n, k=book.k, m=6, s=0.0, trials=40, seed=3, codebook=book
    )
    result = recovery.uniform_noise_experiment(params)
    assert result.success_rate == 1.0
    assert all(r.noise_l1 == 0.0 for r in result.rows)


def test_experiment_reproducible():
    book = small_codebook()
    params = recovery.RecoveryExperimentParams(
        n=book.n, k=book.k, m=6, s=0.05, trials=25, seed=9, codebook=book
    )
    first = recovery.uniform_noise_experiment(params)
    second = recovery.uniform_noise_experiment(params)
    assert first.success_rate == second.success_rate
    assert first.rows == second.rows


def test_experiment_succeeds_inside_the_admissible_radius():
    code = codes.gv_construct(16, 4, Fraction(1, 2))
    book = codes.expand_to_binary(code)
    s = recovery.corollary_noise_radius(book.n, book.k, 10, len(book))
    params = recovery.RecoveryExperimentParams(
        n=book.n, k=book.k, m=10, s=s, trials=100, seed=5, codebook=book
    )
    result = recovery.uniform_noise_experiment(params)
    assert result.success_rate >= 0.9


def test_experiment_degrades_far_beyond_the_radius():
    code = codes.gv_construct(16, 4, Fraction(1, 2))
    book = codes.expand_to_binary(code)
    s = recovery.corollary_noise_radius(book.n, book.k, 10, len(book))
    params = recovery.RecoveryExperimentParams(
        n=book.n, k=book.k, m=10, s=100 * s, trials=100, seed=5, codebook=book
    )
    result = recovery.uniform_noise_experiment(params)
    assert result.success_rate < 0.9
