import math
from fractions import Fraction

import numpy as np
import pytest

from sketchbound import measurement
from sketchbound.measurement import (
    MeasurementMatrix,
    _round_half_away_scaled,
    concentration_check,
    discretization_shadow_check,
    discretize,
    load_discretized,
    orthonormalize_rows,
    sample_gaussian_matrix,
    save_discretized,
    shadow_vector,
    sketch,
)
from sketchbound.seeds import derive_rng


def exact_round_half_away(value: float, bits: int) -> int:
    """Reference rounder in pure rational arithmetic."""
    scaled = Fraction(value) * 2**bits
    whole = scaled.numerator // scaled.denominator
    rem = scaled - whole
    if scaled >= 0:
        return whole + (1 if rem >= Fraction(1, 2) else 0)
    return whole + (1 if rem > Fraction(1, 2) else 0)


# ---------------------------------------------------------------------------
# gaussian sampling


def test_gaussian_shape_kind_and_determinism():
    a = sample_gaussian_matrix(3, 5, derive_rng(0, 0, "matrix"))
    b = sample_gaussian_matrix(3, 5, derive_rng(0, 0, "matrix"))
    assert a.kind == "gaussian-scaled"
    assert a.entries.shape == (3, 5)
    assert np.array_equal(a.entries, b.entries)
    with pytest.raises(ValueError):
        sample_gaussian_matrix(0, 5)


def test_gaussian_moments():
    mat = sample_gaussian_matrix(10, 1000, derive_rng(1, 0, "matrix"))
    flat = mat.entries.ravel()
    sigma_mean = (1.0 / math.sqrt(10)) / math.sqrt(flat.size)
    assert abs(flat.mean()) <= 3.0 * sigma_mean
    # sample variance of N(0, 1/10): relative sd ~ sqrt(2/N)
    assert abs(flat.var() - 0.1) <= 3.0 * 0.1 * math.sqrt(2.0 / flat.size)


def test_matrix_validation():
    with pytest.raises(ValueError):
        MeasurementMatrix(m=2, n=2, entries=np.zeros((2, 3)), kind="gaussian-scaled")
    with pytest.raises(ValueError):
        MeasurementMatrix(m=2, n=2, entries=np.zeros((2, 2)), kind="mystery")
    with pytest.raises(ValueError):
        MeasurementMatrix(m=1, n=1, entries=np.ones((1, 1)), kind="discretized")
    with pytest.raises(ValueError):
        MeasurementMatrix(m=1, n=1, entries=np.ones((1, 1)), kind="gaussian-scaled", bits=4)


# ---------------------------------------------------------------------------
# orthonormalization


def test_orthonormalize_fixed_point_of_orthonormal_input():
    rows = np.zeros((2, 4))
    rows[0, 0] = 1.0
    rows[1, 2] = 1.0
    out = orthonormalize_rows(MeasurementMatrix(m=2, n=4, entries=rows, kind="gaussian-scaled"))
    assert out.kind == "orthonormal-rows"
    np.testing.assert_allclose(out.entries, rows, atol=1e-14)
    assert out.gram_deviation() <= 1e-14


def test_orthonormalize_normalizes_single_row():
    mat = MeasurementMatrix(m=1, n=2, entries=np.array([[3.0, 4.0]]), kind="gaussian-scaled")
    out = orthonormalize_rows(mat)
    np.testing.assert_allclose(out.entries, [[0.6, 0.8]], atol=1e-15)


def test_orthonormalize_random_meets_tolerance():
    mat = sample_gaussian_matrix(10, 100, derive_rng(2, 0, "matrix"))
    out = orthonormalize_rows(mat)
    assert out.gram_deviation() < 1e-10
    assert out.is_orthonormal()


def test_orthonormalize_rejects_dependent_rows():
    rows = np.array([[1.0, 2.0, 0.0], [2.0, 4.0, 0.0]])
    mat = MeasurementMatrix(m=2, n=3, entries=rows, kind="gaussian-scaled")
    with pytest.raises(ValueError):
        orthonormalize_rows(mat)


def test_orthonormalize_rejects_wide_stack():
    mat = sample_gaussian_matrix(5, 3, derive_rng(2, 1, "matrix"))
    with pytest.raises(ValueError):
        orthonormalize_rows(mat)


# ---------------------------------------------------------------------------
# sketching


def test_sketch_zero_and_linearity():
    mat = sample_gaussian_matrix(4, 9, derive_rng(3, 0, "matrix"))
    assert np.array_equal(sketch(mat, np.zeros(9)), np.zeros(4))
    rng = derive_rng(3, 1, "noise")
    x, y = rng.standard_normal(9), rng.standard_normal(9)
    np.testing.assert_allclose(
        sketch(mat, x + y), sketch(mat, x) + sketch(mat, y), atol=1e-12
    )
    with pytest.raises(ValueError):
        sketch(mat, np.zeros(8))


def test_sketch_isometric_on_row_span():
    ortho = orthonormalize_rows(sample_gaussian_matrix(6, 40, derive_rng(3, 2, "matrix")))
    u = derive_rng(3, 3, "noise").standard_normal(6)
    x = ortho.entries.T @ u
    assert math.isclose(np.linalg.norm(sketch(ortho, x)), np.linalg.norm(x), rel_tol=1e-12)


def test_projection_contracts():
    ortho = orthonormalize_rows(sample_gaussian_matrix(8, 30, derive_rng(3, 4, "matrix")))
    for t in range(20):
        v = derive_rng(4, t, "noise").standard_normal(30)
        assert np.linalg.norm(sketch(ortho, v)) <= np.linalg.norm(v) * (1 + 1e-12)


# ---------------------------------------------------------------------------
# fixed-point rounding


def test_rounder_matches_rational_reference():
    rng = derive_rng(5, 0, "noise")
    values = np.concatenate([
        rng.uniform(-1, 1, 400),
        rng.uniform(-2**-40, 2**-40, 100),
        [0.0, 1.0, -1.0, 0.5, -0.5],
    ])
    for bits in (1, 8, 16, 31, 50, 52, 53, 55, 60, 62):
        for v in values:
            v = float(v)
            assert _round_half_away_scaled(v, bits) == exact_round_half_away(v, bits), (
                v, bits,
            )


def test_rounder_ties_go_away_from_zero():
    # value * 2**bits = +-(2j+1)/2 exactly
    for bits in (2, 10, 40):
        for j in (0, 1, 5, 100):
            v = (2 * j + 1) / 2.0 ** (bits + 1)
            assert _round_half_away_scaled(v, bits) == j + 1
            assert _round_half_away_scaled(-v, bits) == -(j + 1)


def test_rounder_huge_scaled_values_already_integral():
    # from 2**52 on the scaled float is an exact odd-or-even integer; adding
    # 0.5 would round to even and push floor() off by one on odd values
    v = (2**52 + 1) * 2.0**-60
    assert v * 2**60 == 2**52 + 1
    assert _round_half_away_scaled(v, 60) == 2**52 + 1
    assert _round_half_away_scaled(-v, 60) == -(2**52 + 1)
    assert _round_half_away_scaled(0.75, 62) == 3 * 2**60


def test_discretize_exact_entries_have_zero_roundoff():
    eye = MeasurementMatrix(m=2, n=3, entries=np.eye(2, 3), kind="gaussian-scaled")
    disc = discretize(eye, 8)
    assert np.all(disc.roundoff == 0.0)
    assert disc.rounded.kind == "discretized"
    assert disc.rounded.bits == 8
    assert disc.rounded.scaled_ints[0, 0] == 256
    assert disc.exact_error_ok(eye)


def test_discretize_known_value():
    # unit row (0.3, sqrt(0.91)); at two fractional bits 0.3 rounds to 0.25
    row = np.array([[0.3, math.sqrt(0.91)]])
    mat = MeasurementMatrix(m=1, n=2, entries=row, kind="gaussian-scaled")
    disc = discretize(mat, 2)
    assert disc.rounded.scaled_ints[0, 0] == 1
    assert disc.rounded.entries[0, 0] == 0.25
    assert math.isclose(disc.roundoff[0, 0], 0.05, rel_tol=1e-12)
    assert abs(disc.roundoff[0, 0]) <= 2.0**-3  # half ulp at b=2
    assert disc.exact_error_ok(mat)


def test_discretize_validation():
    ortho = orthonormalize_rows(sample_gaussian_matrix(2, 6, derive_rng(5, 1, "matrix")))
    with pytest.raises(ValueError):
        discretize(ortho, 0)
    with pytest.raises(ValueError):
        discretize(ortho, 63)
    with pytest.raises(ValueError):
        discretize(ortho, 16.0)  # type: ignore[arg-type]
    skewed = sample_gaussian_matrix(2, 6, derive_rng(5, 2, "matrix"))
    with pytest.raises(ValueError):
        discretize(skewed, 16)


@pytest.mark.parametrize("bits", [16, 50, 55, 60, 62])
def test_discretize_exact_across_widths(bits):
    ortho = orthonormalize_rows(sample_gaussian_matrix(4, 16, derive_rng(5, 3, "matrix")))
    disc = discretize(ortho, bits)
    assert disc.exact_error_ok(ortho)
    assert int(np.abs(disc.rounded.scaled_ints).max()) <= 2**bits


# ---------------------------------------------------------------------------
# rounding shadow


def test_shadow_identity_and_bounds():
    rng = derive_rng(6, 0, "matrix")
    ortho = orthonormalize_rows(sample_gaussian_matrix(20, 100, rng))
    disc = discretize(ortho, 16)
    v = derive_rng(6, 0, "noise").standard_normal(100)
    s = shadow_vector(ortho, disc.roundoff, v)
    # sketching v with the rounded matrix equals sketching v - s exactly
    np.testing.assert_allclose(
        disc.rounded.entries @ v, ortho.entries @ (v - s), atol=1e-12
    )
    v_l1 = np.abs(v).sum()
    assert np.abs(s).sum() <= 20 * math.sqrt(100) * 2.0**-16 * v_l1
    assert np.abs(s).sum() <= 100**2 * 2.0**-16 * v_l1


def test_shadow_zero_cases():
    ortho = orthonormalize_rows(sample_gaussian_matrix(3, 8, derive_rng(6, 1, "matrix")))
    zero_round = np.zeros((3, 8))
    assert np.array_equal(shadow_vector(ortho, zero_round, np.ones(8)), np.zeros(8))
    disc = discretize(ortho, 12)
    assert np.array_equal(shadow_vector(ortho, disc.roundoff, np.zeros(8)), np.zeros(8))


def test_shadow_validation():
    ortho = orthonormalize_rows(sample_gaussian_matrix(3, 8, derive_rng(6, 2, "matrix")))
    gauss = sample_gaussian_matrix(3, 8, derive_rng(6, 3, "matrix"))
    with pytest.raises(ValueError):
        shadow_vector(gauss, np.zeros((3, 8)), np.zeros(8))
    with pytest.raises(ValueError):
        shadow_vector(ortho, np.zeros((2, 8)), np.zeros(8))
    with pytest.raises(ValueError):
        shadow_vector(ortho, np.zeros((3, 8)), np.zeros(7))


def test_shadow_check_random_instances():
    for i in range(5):
        chk = discretization_shadow_check(20, 100, 16, derive_rng(7, i, "discretize"))
        assert chk.image_gap < 1e-9
        assert chk.shadow_l1 <= chk.bound_row_l1
        assert chk.bound_row_l1 <= chk.bound_dim_l1
        assert chk.ok


# ---------------------------------------------------------------------------
# norm concentration of fresh gaussian sketches


def test_concentration_shrink_at_factor_six():
    chk = concentration_check(10, 6.0, 10000, derive_rng(8, 0, "matrix"))
    assert math.isclose(chk.shrink_bound, 0.5**10, rel_tol=1e-12)
    assert chk.shrink_ok


def test_concentration_blowup_at_factor_three():
    chk = concentration_check(10, 3.0, 10000, derive_rng(8, 1, "matrix"))
    assert math.isclose(chk.blowup_bound, math.exp(-5.0), rel_tol=1e-12)
    assert chk.blowup_ok


def test_concentration_extreme_factor_never_fires():
    chk = concentration_check(10, 50.0, 2000, derive_rng(8, 2, "matrix"))
    assert chk.shrink_empirical == 0.0
    assert chk.blowup_empirical == 0.0


def test_concentration_at_target_failure_probability():
    # thresholds where each bound equals delta = 0.01 exactly
    delta = 0.01
    m = 10
    shrink_factor = 3.0 / delta ** (1.0 / m)
    chk = concentration_check(m, shrink_factor, 10000, derive_rng(8, 3, "matrix"))
    assert math.isclose(chk.shrink_bound, delta, rel_tol=1e-12)
    assert chk.shrink_ok
    blowup_factor = 1.0 + math.sqrt(8.0 * math.log(1.0 / delta) / m)
    chk = concentration_check(m, blowup_factor, 10000, derive_rng(8, 4, "matrix"))
    assert math.isclose(chk.blowup_bound, delta, rel_tol=1e-12)
    assert chk.blowup_ok


def test_concentration_validation():
    with pytest.raises(ValueError):
        concentration_check(10, 1.0, 100)
    with pytest.raises(ValueError):
        concentration_check(10, 6.0, 0)


# ---------------------------------------------------------------------------
# serialization


def test_save_load_roundtrip_is_exact(tmp_path):
    ortho = orthonormalize_rows(sample_gaussian_matrix(4, 12, derive_rng(9, 0, "matrix")))
    disc = discretize(ortho, 60)
    path = tmp_path / "mat.txt"
    save_discretized(disc.rounded, path)
    back = load_discretized(path)
    assert back.m == 4 and back.n == 12 and back.bits == 60
    assert np.array_equal(back.scaled_ints, disc.rounded.scaled_ints)
    assert np.array_equal(back.entries, disc.rounded.entries)


def test_save_rejects_unscaled_matrices(tmp_path):
    mat = sample_gaussian_matrix(2, 3, derive_rng(9, 1, "matrix"))
    with pytest.raises(ValueError):
        save_discretized(mat, tmp_path / "bad.txt")


def test_load_rejects_corruption(tmp_path):
    path = tmp_path / "m.txt"
    path.write_text("2 2\n1 2\n3 4\n")
    with pytest.raises(ValueError):
        load_discretized(path)
    path.write_text("2 2 4\n1 2\n")
    with pytest.raises(ValueError):
        load_discretized(path)
    path.write_text("2 2 4\n1 2 3\n4 5 6\n")
    with pytest.raises(ValueError):
        load_discretized(path)
    path.write_text("1 2 4\n1 99\n")  # |99| > 2**4
    with pytest.raises(ValueError):
        load_discretized(path)
