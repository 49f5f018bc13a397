"""
Tests for torus module
"""

import math

import numpy as np
import pytest

from src.errors import DomainError, NyquistError
from src.torus import (
    FourierSeries,
    GridSamples,
    IntervalSet,
    apply_multiplier,
    band_project,
    default_m,
    evaluate,
    from_grid,
    indicator_multiplier,
    lp_norm,
    lp_norm_converged,
    next_pow2,
    nyquist_m,
    samples_lp_norm,
    sequence_norm,
    square_function,
    weak_l1_norm,
)


def series(mapping):
    return FourierSeries.from_dict(mapping)


class TestFourierSeries:
    """Normalization and basic arithmetic."""

    def test_zeros_are_trimmed(self):
        f = FourierSeries(-2, [0, 0, 1, 2, 0])
        assert f.k_min == 0
        assert f.k_max == 1
        assert f.coeffs.tolist() == [1, 2]

    def test_all_zero_series(self):
        f = FourierSeries(5, [0, 0, 0])
        assert f.is_zero
        assert f.coeffs.size == 1

    def test_empty_coefficients_rejected(self):
        with pytest.raises(DomainError):
            FourierSeries(0, [])

    def test_negative_tail_rejected(self):
        with pytest.raises(DomainError):
            FourierSeries(0, [1.0], tail_bound=-1.0)

    def test_coefficients_are_read_only(self):
        f = FourierSeries(0, [1.0, 2.0])
        with pytest.raises(ValueError):
            f.coeffs[0] = 5.0

    def test_from_dict_and_coefficient(self):
        f = series({-1: 1.0, 3: 2.0})
        assert f.k_min == -1 and f.k_max == 3
        assert f.coefficient(3) == 2.0
        assert f.coefficient(1) == 0.0
        assert f.coefficient(10) == 0.0
        assert f.bandwidth == 3

    def test_addition_aligns_frequencies(self):
        f = series({0: 1.0}) + series({2: 1.0}, ) + FourierSeries(0, [0.0], tail_bound=0.5)
        assert f.coefficient(0) == 1.0 and f.coefficient(2) == 1.0
        assert f.tail_bound == 0.5

    def test_trimmed_moves_mass_to_tail(self):
        f = FourierSeries(0, [1e-20, 1.0, 1.0, 1e-20])
        g = f.trimmed(1e-15)
        assert g.k_min == 1 and g.k_max == 2
        assert g.tail_bound == pytest.approx(2e-20)

    def test_evaluate_at_matches_definition(self):
        f = series({-1: 1.0, 2: 3.0})
        z = np.exp(1j * np.array([0.3, 1.7]))
        np.testing.assert_allclose(f.evaluate_at(z), z ** -1 + 3 * z ** 2, atol=1e-14)


class TestIntervalSet:
    """Interval family flags."""

    def test_disjoint_and_consecutive_flags(self):
        assert IntervalSet(((0, 2), (3, 5))).consecutive
        family = IntervalSet(((0, 2), (4, 5)))
        assert family.disjoint and not family.consecutive
        overlapping = IntervalSet(((0, 3), (3, 5)))
        assert not overlapping.disjoint and not overlapping.consecutive

    def test_repeated_intervals_are_not_disjoint(self):
        assert not IntervalSet(((1, 4), (1, 4))).disjoint

    def test_reversed_interval_rejected(self):
        with pytest.raises(DomainError):
            IntervalSet(((3, 1),))

    def test_quadratic_blocks_partition(self):
        blocks = IntervalSet.quadratic_blocks(4)
        assert blocks.intervals == ((1, 1), (2, 4), (5, 9), (10, 16))
        assert blocks.consecutive
        assert blocks.union() == ((1, 16),)

    def test_union_merges_adjacent(self):
        assert IntervalSet(((5, 6), (0, 2), (3, 4))).union() == ((0, 6),)


class TestLpNorm:
    """Quadrature norms."""

    def test_constant_function(self):
        assert lp_norm(series({0: 1.0}), 3) == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("k", [-7, 0, 1, 12])
    def test_character_has_unit_norm(self, k):
        assert lp_norm(series({k: 1.0}), 2) == pytest.approx(1.0, abs=1e-14)

    def test_one_plus_gamma_at_four(self):
        assert lp_norm(series({0: 1.0, 1: 1.0}), 4) == pytest.approx(6 ** 0.25, abs=1e-12)

    def test_sup_norm(self):
        assert lp_norm(series({0: 1.0, 1: 1.0}), math.inf) == pytest.approx(2.0)

    def test_below_nyquist_rejected(self):
        f = series({0: 1.0, 10: 1.0})
        with pytest.raises(NyquistError) as excinfo:
            lp_norm(f, 2, m=16)
        assert excinfo.value.required_m == nyquist_m(f) == 21

    def test_p_below_one_rejected(self):
        with pytest.raises(DomainError):
            lp_norm(series({0: 1.0}), 0.5)

    def test_monotone_in_p(self, rng):
        f = series({k: complex(rng.standard_normal(), rng.standard_normal()) for k in range(-5, 6)})
        values = [lp_norm(f, p) for p in (1.0, 1.5, 2.0, 3.0, 4.0, 8.0)]
        assert all(a <= b + 1e-10 for a, b in zip(values, values[1:]))

    def test_doubling_grid_is_exact_for_even_p(self, rng):
        f = series({k: rng.standard_normal() for k in range(-4, 9)})
        m = default_m(f)
        for p in (2, 4):
            assert abs(lp_norm(f, p, m) - lp_norm(f, p, 2 * m)) < 1e-12

    def test_converged_norm(self):
        f = series({0: 1.0, 1: 1.0})
        value, m = lp_norm_converged(f, 3, tol=1e-10)
        # (1/2pi) int |2 cos(t/2)|^3 dt = 32 / (3 pi)
        assert value == pytest.approx((32 / (3 * math.pi)) ** (1 / 3), abs=1e-9)
        assert m >= default_m(f)

    def test_sequence_norm_scaling_avoids_overflow(self):
        values = np.array([1e300, 1e300])
        assert sequence_norm(values, 3) == pytest.approx(1e300 * 2 ** (1 / 3))


class TestGrid:
    """evaluate / from_grid."""

    def test_from_grid_inverts_evaluate(self, rng):
        f = series({k: complex(rng.standard_normal(), rng.standard_normal()) for k in range(-6, 7)})
        g = from_grid(evaluate(f, 32))
        for k in range(-6, 7):
            assert g.coefficient(k) == pytest.approx(f.coefficient(k), abs=1e-13)

    def test_grid_size_must_match(self):
        with pytest.raises(DomainError):
            GridSamples(4, np.ones(3))

    def test_next_pow2(self):
        assert [next_pow2(n) for n in (0, 1, 5, 64, 65)] == [1, 1, 8, 64, 128]


class TestWeakL1:
    """Weak-L1 quasinorm of samples."""

    def test_unimodular(self):
        assert weak_l1_norm(evaluate(series({3: 1.0}), 64)) == pytest.approx(1.0)

    def test_homogeneity(self, rng):
        g = GridSamples(128, rng.standard_normal(128))
        assert weak_l1_norm(g.scaled(2.0)) == pytest.approx(2.0 * weak_l1_norm(g), rel=1e-14)

    def test_two_cosine(self):
        g = evaluate(series({-1: 1.0, 1: 1.0}), 2**16)
        assert weak_l1_norm(g) == pytest.approx(0.714, abs=2e-3)

    def test_bounded_by_l1(self, rng):
        g = GridSamples(256, rng.standard_normal(256) + 1j * rng.standard_normal(256))
        assert weak_l1_norm(g) <= g.l1_mean() + 1e-14


class TestBandProjection:
    """M_I and general multipliers."""

    def test_example(self):
        f = series({-1: 1.0, 3: 2.0})
        projected = band_project(f, (0, 5))
        assert projected.k_min == 3 and projected.coeffs.tolist() == [2.0]

    def test_covering_interval_is_identity(self):
        f = series({-1: 1.0, 3: 2.0})
        projected = band_project(f, (-10, 10))
        assert projected.k_min == f.k_min
        np.testing.assert_array_equal(projected.coeffs, f.coeffs)

    def test_idempotent(self, rng):
        f = series({k: rng.standard_normal() for k in range(-8, 9)})
        once = band_project(f, (-2, 4))
        twice = band_project(once, (-2, 4))
        np.testing.assert_array_equal(once.coeffs, twice.coeffs)

    def test_disjoint_interval_gives_zero(self):
        assert band_project(series({0: 1.0}), (5, 9)).is_zero

    def test_contraction_in_l2(self, rng):
        f = series({k: rng.standard_normal() for k in range(-8, 9)})
        assert lp_norm(band_project(f, (-3, 2)), 2) <= lp_norm(f, 2) + 1e-12

    def test_identity_multiplier(self):
        f = series({0: 1.0, 1: 1.0})
        out = apply_multiplier(f, lambda k: np.ones(k.shape))
        np.testing.assert_array_equal(out.coeffs, f.coeffs)

    def test_indicator_multiplier_is_band_projection(self, rng):
        f = series({k: rng.standard_normal() for k in range(-5, 6)})
        out = apply_multiplier(f, indicator_multiplier([(-1, 3)]))
        expected = band_project(f, (-1, 3))
        for k in range(-5, 6):
            assert out.coefficient(k) == expected.coefficient(k)

    def test_array_multiplier(self):
        out = apply_multiplier(series({0: 1.0, 1: 1.0}), [1.0, 0.5])
        assert out.coeffs.tolist() == [1.0, 0.5]

    def test_misaligned_multiplier_rejected(self):
        with pytest.raises(DomainError):
            apply_multiplier(series({0: 1.0, 1: 1.0}), [1.0])


class TestSquareFunction:
    """Littlewood-Paley square functions."""

    def test_single_covering_interval_is_modulus(self, rng):
        f = series({k: complex(rng.standard_normal(), rng.standard_normal()) for k in range(-4, 5)})
        S = square_function(f, IntervalSet(((-10, 10),)), 32)
        np.testing.assert_allclose(S.values, np.abs(evaluate(f, 32).values), atol=1e-13)

    def test_two_characters(self):
        S = square_function(series({0: 1.0, 5: 1.0}), IntervalSet(((0, 0), (5, 5))), 32)
        np.testing.assert_allclose(S.values, math.sqrt(2.0), atol=1e-14)

    def test_parseval_for_disjoint_family(self, rng):
        f = series({k: complex(rng.standard_normal(), rng.standard_normal()) for k in range(-20, 21)})
        family = IntervalSet(((-15, -3), (0, 4), (9, 30)))
        m = 128
        left = samples_lp_norm(square_function(f, family, m), 2)
        cover = f
        for lo, hi in ((-20, -16), (-2, -1), (5, 8)):
            cover = cover + band_project(f, (lo, hi)).scaled(-1.0)
        assert left == pytest.approx(lp_norm(cover, 2, m), abs=1e-10)
        assert left <= lp_norm(f, 2, m) + 1e-10

    def test_empty_family_rejected(self):
        with pytest.raises(DomainError):
            square_function(series({0: 1.0}), IntervalSet(()))
