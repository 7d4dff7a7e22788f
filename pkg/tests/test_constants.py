"""Tests for exponent algebra and the closed-form constant table."""

import math

import numpy as np
import pytest

from sobolevlab.constants import (closed_form_constants, gamma_fn,
                                  make_exponents, oracle_instanton_energy,
                                  oracle_instanton_qnorm)
from sobolevlab.numerics import QuadratureSpec

SPEC = QuadratureSpec(abs_tol=1e-12, rel_tol=1e-10)


class TestExponents:
    def test_sharp_endpoint_N5(self):
        exp = make_exponents(5, 2.5)
        assert exp.s == 0.0
        assert exp.t == 0.8   # 2 / 2#

    def test_flat_endpoint_N5(self):
        exp = make_exponents(5, 8.0 / 3.0)
        assert exp.s == 1.0 and exp.t == 1.0

    def test_endpoints_exact_all_dimensions(self):
        for N in range(5, 11):
            lo = make_exponents(N, "two_sharp")
            hi = make_exponents(N, "two_flat")
            assert lo.s == 0.0 and lo.t == (N - 1.0) / N
            assert hi.s == 1.0 and hi.t == 1.0

    def test_interior_value_satisfies_both_formulas(self):
        exp = make_exponents(5, 2.6)
        two_star = 10.0 / 3.0
        s_direct = 2.0 - 5.0 + 2.6 / (two_star - 2.6)
        t_direct = (2.0 / 3.0) / (two_star - 2.6)
        assert exp.s == pytest.approx(s_direct, abs=1e-15)
        assert exp.t == pytest.approx(t_direct, abs=1e-15)
        assert exp.q * exp.t == pytest.approx(2.0 * exp.s / 3.0 + 2.0,
                                              abs=1e-13)

    def test_identities_on_random_sample(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            N = int(rng.integers(5, 11))
            q = float(rng.uniform(2.0 * N / (N - 1), 2.0 * (N - 1) / (N - 2)))
            exp = make_exponents(N, q)
            assert abs(exp.q * exp.t - 2.0 * exp.s / (N - 2) - 2.0) <= 1e-13
            assert abs(exp.s - (N - 1) * (q - exp.two_sharp)
                       / (exp.two_star - q)) <= 1e-13
            assert abs(exp.t - exp.s / N - (N - 1.0) / N) <= 1e-13
            assert 0.0 <= exp.s <= 1.0
            assert 2.0 / exp.two_sharp <= exp.t <= 1.0

    def test_keyword_resolution(self):
        assert make_exponents(6, "two_sharp").q == 12.0 / 5.0
        assert make_exponents(6, "two_flat").q == 2.5
        mid = make_exponents(6, "midpoint")
        assert mid.q == pytest.approx(0.5 * (12.0 / 5.0 + 2.5), abs=1e-15)
        with pytest.raises(ValueError, match="keyword"):
            make_exponents(5, "median")

    def test_out_of_range_names_interval(self):
        with pytest.raises(ValueError) as err:
            make_exponents(5, 9.9)
        msg = str(err.value)
        assert "2.5" in msg and "2.666" in msg

    def test_low_dimension_gate(self):
        with pytest.raises(ValueError, match="N >= 5"):
            make_exponents(4, 2.9)
        exp = make_exponents(4, 2.9, allow_low_dimension=True)
        assert exp.theory_out_of_range
        assert not make_exponents(7, "midpoint").theory_out_of_range
        with pytest.raises(ValueError):
            make_exponents(2, 3.0, allow_low_dimension=True)

    def test_integer_dimension_required(self):
        with pytest.raises(ValueError, match="integer"):
            make_exponents(5.5, 2.6)


class TestClosedForms:
    def test_omega_5_closed_form(self):
        table = closed_form_constants(make_exponents(5, "two_flat"))
        # omega_5 = 2 pi^{5/2} / Gamma(5/2) simplifies to 8 pi^2 / 3.
        assert table.omega_N == pytest.approx(8.0 * math.pi ** 2 / 3.0,
                                              rel=1e-14)

    def test_A5_closed_form(self):
        table = closed_form_constants(make_exponents(5, "two_flat"))
        # (4/5) Gamma(1) / (sqrt(pi) Gamma(1.5)) = 8 / (5 pi).
        assert table.A == pytest.approx(8.0 / (5.0 * math.pi), rel=1e-14)

    def test_B_flat_N5(self):
        table = closed_form_constants(make_exponents(5, "two_flat"))
        expected = math.pi ** 2.5 * 15.0 ** 2.5 * gamma_fn(1.5) / gamma_fn(4.0)
        assert table.B == pytest.approx(expected, rel=1e-14)

    def test_threshold_relation(self):
        for N in (5, 6, 7):
            table = closed_form_constants(make_exponents(N, "midpoint"))
            assert table.threshold == pytest.approx(
                table.S * 2.0 ** (-2.0 / N), rel=1e-15)
            assert table.S == pytest.approx(table.S_pow_N2 ** (2.0 / N),
                                            rel=1e-14)
            assert min(table.S, table.S_pow_N2, table.omega_N, table.B,
                       table.A, table.threshold) > 0.0

    def test_B_pole_rejected(self):
        exp = make_exponents(3, "two_sharp", allow_low_dimension=True)
        with pytest.raises(ValueError):
            closed_form_constants(exp)


class TestOracles:
    @pytest.mark.parametrize("N", [5, 6, 8])
    def test_energy_matches_closed_form(self, N):
        table = closed_form_constants(make_exponents(N, "two_flat"))
        energy = oracle_instanton_energy(N, SPEC)
        assert energy == pytest.approx(table.S_pow_N2, rel=1e-8)

    @pytest.mark.parametrize("key", ["two_sharp", "two_flat"])
    def test_qnorm_matches_closed_form(self, key):
        exp = make_exponents(5, key)
        table = closed_form_constants(exp)
        mass = oracle_instanton_qnorm(5, exp.q, SPEC)
        assert mass == pytest.approx(table.B, rel=1e-8)

    def test_qnorm_at_critical_equals_energy(self):
        # The 2*-mass of the bubble equals its Dirichlet energy.
        exp = make_exponents(5, "two_flat")
        table = closed_form_constants(exp)
        mass = oracle_instanton_qnorm(5, exp.two_star, SPEC)
        assert mass == pytest.approx(table.S_pow_N2, rel=1e-8)

    def test_low_dimension_energy_rejected(self):
        with pytest.raises(ValueError):
            oracle_instanton_energy(4, SPEC)

    def test_divergent_qnorm_rejected(self):
        with pytest.raises(ValueError, match="diverges"):
            oracle_instanton_qnorm(5, 5.0 / 3.0, SPEC)
