"""
Tests for symbols module
"""

import math

import numpy as np
import pytest
from scipy import special, stats

from src.errors import ConvergenceError, DomainError, SingularityError
from src.norms import conv_norm_bracket
from src.symbols import (
    ConvOperator,
    from_coefficients,
    mobius_symbol,
    resolvent_powers,
    resolvent_symbol,
    scalar_operator,
    shift_operator,
    symbol_exp_scaled,
    symbol_pow,
)
from src.torus import FourierSeries, unit_grid


def direct_power(coeffs: np.ndarray, N: int) -> np.ndarray:
    out = np.array([1.0 + 0j])
    for _ in range(N):
        out = np.convolve(out, coeffs)
    return out


def l1_distance(a: FourierSeries, b: FourierSeries) -> float:
    return (a + b.scaled(-1.0)).l1_norm()


class TestOperators:
    """Constructors and basic properties."""

    def test_mobius_coefficients(self, mobius_half):
        assert mobius_half.symbol.coefficient(0) == pytest.approx(-0.5)
        assert mobius_half.symbol.coefficient(1) == pytest.approx(0.75)
        assert mobius_half.symbol.coefficient(2) == pytest.approx(0.375)
        assert mobius_half.symbol.tail_bound <= 1e-15
        assert mobius_half.one_sided

    def test_mobius_l1_mass(self, mobius_half):
        # |c_0| + (1 - a^2) / (1 - a) = a + 1 + a
        total = mobius_half.symbol.l1_norm() + mobius_half.symbol.tail_bound
        assert total == pytest.approx(2.0, abs=1e-14)

    def test_mobius_is_unimodular_on_circle(self, mobius_half):
        np.testing.assert_allclose(np.abs(mobius_half.sample(64)), 1.0, atol=1e-14)

    def test_mobius_zero_is_shift(self):
        assert mobius_symbol(0.0).descriptor == "S"

    @pytest.mark.parametrize("a", [-0.1, 1.0, 1.5])
    def test_mobius_parameter_out_of_range(self, a):
        with pytest.raises(DomainError):
            mobius_symbol(a)

    def test_truncated_series_matches_exact_sampler(self, mobius_half):
        z = unit_grid(32)
        np.testing.assert_allclose(mobius_half.symbol.evaluate_at(z), mobius_half.sample(32), atol=1e-14)

    def test_apply_is_discrete_convolution(self):
        T = from_coefficients([1.0, 2.0], k_min=-1)
        out = T.apply(FourierSeries(0, [1.0, 1.0]))
        assert out.k_min == -1
        assert out.coeffs.tolist() == [1.0, 3.0, 2.0]

    def test_scalar_operator(self):
        T = scalar_operator(2.0)
        np.testing.assert_array_equal(T.sample(8), np.full(8, 2.0))
        assert T.symbol.coefficient(0) == 2.0


class TestSymbolPow:
    """Powers of a symbol."""

    @pytest.mark.parametrize("N", [2, 3, 5, 8])
    def test_mobius_power_matches_convolution(self, mobius_half, N):
        coeffs = np.array(mobius_half.symbol.coeffs)
        expected = direct_power(coeffs, N)[:coeffs.size]
        power = symbol_pow(mobius_half, N)
        for k, c in enumerate(expected):
            assert abs(power.symbol.coefficient(k) - c) < 1e-12

    @pytest.mark.parametrize("N", [2, 4, 7])
    def test_two_sided_polynomial(self, N):
        coeffs = np.array([0.3, -0.2, 0.4])
        T = from_coefficients(coeffs, k_min=-1)
        expected = direct_power(coeffs, N)
        power = symbol_pow(T, N)
        for j, c in enumerate(expected):
            assert abs(power.symbol.coefficient(j - N) - c) < 1e-12

    def test_shift_power(self, shift):
        power = symbol_pow(shift, 5)
        assert power.symbol.coefficient(5) == pytest.approx(1.0, abs=1e-12)
        assert power.symbol.l1_norm() + power.symbol.tail_bound == pytest.approx(1.0, abs=1e-10)

    def test_first_power_is_identity_map(self, mobius_half):
        assert symbol_pow(mobius_half, 1) is mobius_half

    def test_zero_power_rejected(self, shift):
        with pytest.raises(DomainError):
            symbol_pow(shift, 0)

    def test_derived_sampler(self, mobius_half):
        power = symbol_pow(mobius_half, 3)
        np.testing.assert_allclose(power.sample(16), mobius_half.sample(16) ** 3, atol=1e-14)

    def test_grid_ceiling(self, mobius_half):
        with pytest.raises(ConvergenceError):
            symbol_pow(mobius_half, 500, m_max=64)

    def test_power_of_power(self, mobius_half):
        nested = symbol_pow(symbol_pow(mobius_half, 3), 4)
        assert l1_distance(nested.symbol, symbol_pow(mobius_half, 12).symbol) < 1e-10

    def test_product_of_powers(self, mobius_half):
        product = symbol_pow(mobius_half, 3).apply(symbol_pow(mobius_half, 5).symbol)
        assert l1_distance(product, symbol_pow(mobius_half, 8).symbol) < 1e-10

    def test_product_of_two_sided_powers(self):
        T = from_coefficients(np.array([0.3, -0.2, 0.4]), k_min=-1)
        product = symbol_pow(T, 2).apply(symbol_pow(T, 3).symbol)
        assert l1_distance(product, symbol_pow(T, 5).symbol) < 1e-12

    @pytest.mark.parametrize("N", [2, 50, 500])
    def test_mobius_powers_are_l2_isometries(self, mobius_half, N):
        # |q_a| = 1 on the circle, so every power has unit l2 coefficient norm
        assert symbol_pow(mobius_half, N).symbol.lp_coefficient_norm(2.0) == pytest.approx(1.0, abs=1e-10)


class TestExponential:
    """Damped exponentials e^{-|z|} e^{zT}."""

    def test_shift_gives_poisson_weights(self, shift):
        E = symbol_exp_scaled(shift, 3.0)
        for j in range(30):
            assert abs(E.symbol.coefficient(j) - stats.poisson.pmf(j, 3.0)) < 1e-12

    def test_imaginary_argument(self, shift):
        E = symbol_exp_scaled(shift, 2j)
        for j in range(20):
            expected = math.exp(-2.0) * (2j) ** j / math.factorial(j)
            assert abs(E.symbol.coefficient(j) - expected) < 1e-12

    def test_large_radius_does_not_overflow(self, mobius_half):
        E = symbol_exp_scaled(mobius_half, 60.0)
        assert np.all(np.isfinite(E.symbol.coeffs))
        np.testing.assert_allclose(np.abs(E.sample(16)), np.abs(np.exp(60.0 * mobius_half.sample(16) - 60.0)), atol=1e-14)


class TestResolvent:
    """Resolvent powers (lam - q)^{-k}."""

    @pytest.mark.parametrize("lam", [2.0, 1.5 * np.exp(0.7j), -1.1])
    def test_shift_matches_geometric_series(self, shift, lam):
        powers = resolvent_powers(shift, lam, 3)
        for k, R in enumerate(powers, start=1):
            for j in range(40):
                expected = special.comb(j + k - 1, k - 1) * lam ** (-(j + k))
                assert abs(R.symbol.coefficient(j) - expected) < 1e-10

    def test_single_power(self, shift):
        R = resolvent_symbol(shift, 3.0, k=2)
        assert R.symbol.coefficient(0) == pytest.approx(1.0 / 9.0, abs=1e-12)
        assert R.symbol.coefficient(1) == pytest.approx(2.0 / 27.0, abs=1e-12)

    @pytest.mark.parametrize("lam", [0.5, 1.0, 1j])
    def test_inside_unit_disk_rejected(self, shift, lam):
        with pytest.raises(DomainError):
            resolvent_symbol(shift, lam)

    def test_singular_point(self, twice_identity):
        with pytest.raises(SingularityError) as excinfo:
            resolvent_symbol(twice_identity, 2.0)
        assert excinfo.value.min_distance < 1e-12

    def test_scalar_resolvent(self, twice_identity):
        R = resolvent_symbol(twice_identity, 4.0)
        assert R.symbol.coefficient(0) == pytest.approx(0.5, abs=1e-14)
        assert R.symbol.l1_norm() == pytest.approx(0.5, abs=1e-12)

    def test_resolvent_identity(self, mobius_half):
        lam, mu = 1.5, -1.3 + 0.4j
        R_lam = resolvent_symbol(mobius_half, lam)
        R_mu = resolvent_symbol(mobius_half, mu)
        difference = R_lam.symbol + R_mu.symbol.scaled(-1.0)
        product = R_lam.apply(R_mu.symbol).scaled(mu - lam)
        assert l1_distance(difference, product) < 1e-8

    def test_shift_resolvent_norm(self, shift):
        # sum_j 1.1^{-(j + 1)} = 10
        bracket = conv_norm_bracket(resolvent_symbol(shift, 1.1), 1.0)
        assert bracket.lower == pytest.approx(10.0, abs=1e-8)
        assert bracket.upper == pytest.approx(10.0, abs=1e-8)

    def test_shift_tail_covers_dropped_mass(self, shift):
        R = resolvent_symbol(shift, 1.1)
        # mass of the geometric series past the last kept index
        dropped = 11.0 * 1.1 ** (-(R.symbol.k_max + 2))
        assert dropped <= R.symbol.tail_bound + 1e-13

    def test_truncated_source_tail_propagates(self, mobius_half):
        # q_{1/2} cut after 21 coefficients, sampled from the series only
        cut = mobius_symbol(0.5, tol=2e-6)
        assert cut.symbol.k_max == 20
        truncated = ConvOperator(cut.symbol, "truncated q_1/2")
        assert truncated.evaluator is None

        exact = resolvent_powers(mobius_half, 1.5, 2)
        for R_cut, R_exact in zip(resolvent_powers(truncated, 1.5, 2), exact):
            error = l1_distance(R_cut.symbol, R_exact.symbol)
            assert error > 1e-9
            assert error <= R_cut.symbol.tail_bound + R_exact.symbol.tail_bound
            assert R_cut.symbol.tail_bound < 1e-4

    def test_exact_sampler_has_no_source_tail(self, mobius_half):
        R = resolvent_symbol(mobius_half, 1.5)
        assert R.symbol.tail_bound < 1e-9

    def test_singular_point_near_circle_is_reported_exactly(self):
        lam = 1.0 + 2.0 ** -20
        with pytest.raises(SingularityError) as excinfo:
            resolvent_symbol(scalar_operator(lam), lam)
        message = str(excinfo.value)
        assert "1.0000009536743164" in message
        assert "|lambda|-1=9.537e-07" in message
