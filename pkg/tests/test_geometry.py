"""Tests for ball geometry, cap densities and bubble norms."""

import math

import numpy as np
import pytest

from sobolevlab.constants import (closed_form_constants, make_exponents,
                                  oracle_instanton_energy)
from sobolevlab.geometry import (BallDomain, Instanton, ball_radial_integral,
                                 cap_density, instanton_norms,
                                 instanton_profile, sin_power_integral)
from sobolevlab.numerics import QuadratureSpec, integrate

SPEC = QuadratureSpec(abs_tol=1e-13, rel_tol=1e-11)


class TestBallDomain:
    def test_volume(self):
        dom = BallDomain(5, 1.0)
        assert dom.volume == pytest.approx(
            math.pi ** 2.5 / math.gamma(3.5), rel=1e-14)
        assert BallDomain(5, 2.0).volume == pytest.approx(
            32.0 * dom.volume, rel=1e-14)

    def test_mean_curvature(self):
        assert BallDomain(6, 4.0).mean_curvature == 0.25

    def test_validation(self):
        with pytest.raises(ValueError):
            BallDomain(5, -1.0)
        with pytest.raises(ValueError):
            BallDomain(2, 1.0)


class TestInstantonProfile:
    def test_unit_peak(self):
        value, _ = instanton_profile(Instanton(5, 1.0, 0.0), 0.0)
        assert value == pytest.approx(1.0, rel=1e-15)

    def test_tail_power(self):
        # U(r) ~ (N(N-2))^{(N-2)/2} r^{-(N-2)} for large r.
        N = 5
        r = 1e6
        value, _ = instanton_profile(Instanton(N, 1.0, 0.0), r)
        assert value * r ** (N - 2) == pytest.approx(
            (N * (N - 2.0)) ** ((N - 2) / 2.0), rel=1e-9)

    def test_rescaling_identity(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            eps = float(rng.uniform(1e-3, 2.0))
            r = float(rng.uniform(0.0, 5.0))
            v_eps, _ = instanton_profile(Instanton(6, eps, 0.0), r)
            v_one, _ = instanton_profile(Instanton(6, 1.0, 0.0), r / eps)
            assert v_eps == pytest.approx(
                eps ** (-2.0) * v_one, rel=1e-13)

    def test_derivative_matches_finite_difference(self):
        inst = Instanton(7, 0.3, 0.0)
        r = np.linspace(0.1, 3.0, 40)
        _, deriv = instanton_profile(inst, r)
        h = 1e-6
        fd = (instanton_profile(inst, r + h)[0]
              - instanton_profile(inst, r - h)[0]) / (2.0 * h)
        assert np.max(np.abs(deriv - fd)) <= 1e-7

    def test_monotone_decreasing_positive(self):
        value, deriv = instanton_profile(Instanton(5, 0.2, 0.0),
                                         np.linspace(0.0, 4.0, 50))
        assert np.all(value > 0.0)
        assert np.all(deriv[1:] < 0.0)


class TestSinPowerIntegral:
    @pytest.mark.parametrize("n", [0, 1, 2, 3, 5, 8])
    def test_against_adaptive_quadrature(self, n):
        # Dual route: the closed recurrence vs the quadrature engine.
        for phi in (0.3, 1.0, math.pi / 2.0, 2.5, math.pi):
            direct = integrate(lambda p: np.sin(p) ** n, 0.0, phi,
                               QuadratureSpec(abs_tol=1e-13, rel_tol=1e-13))
            assert sin_power_integral(n, phi) == pytest.approx(
                direct, abs=1e-12)


class TestCapDensity:
    def test_concentric_full_sphere(self):
        dom = BallDomain(5, 1.0)
        r = np.array([0.25, 0.5, 0.99])
        expected = dom.sphere_area * r ** 4
        assert np.allclose(cap_density(dom, 0.0, r), expected, rtol=0.0)

    def test_interior_spheres_exact(self):
        dom = BallDomain(6, 2.0)
        rho = 0.5
        r = np.array([0.3, 1.0, 1.5])   # all below R - rho
        assert np.array_equal(cap_density(dom, rho, r),
                              dom.sphere_area * r ** 5)

    def test_boundary_center_cap_angle(self):
        # For P on the boundary the cap angle is arccos(r / 2R).
        dom = BallDomain(5, 1.0)
        sigma = 2.0 * math.pi ** 2 / math.gamma(2.0)
        for r in (0.4, 1.0, 1.7):
            phi_max = math.acos(r / 2.0)
            expected = sigma * r ** 4 * sin_power_integral(3, phi_max)
            assert cap_density(dom, 1.0, np.array([r]))[0] == \
                pytest.approx(expected, rel=1e-14)

    def test_vanishes_at_and_beyond_2R(self):
        dom = BallDomain(5, 1.0)
        vals = cap_density(dom, 1.0, np.array([2.0, 2.5, 10.0]))
        assert np.all(vals == 0.0)

    def test_nonnegative_everywhere(self):
        dom = BallDomain(7, 1.5)
        r = np.linspace(0.0, 4.0, 300)
        for rho in (0.0, 0.4, 1.0, 1.5):
            assert np.min(cap_density(dom, rho, r)) >= 0.0

    @pytest.mark.parametrize("N", [5, 6, 7, 8])
    def test_volume_closure(self, N):
        dom = BallDomain(N, 1.3)
        for rho in (0.0, dom.R / 2.0, dom.R):
            vol = ball_radial_integral(dom, rho, lambda r: np.ones_like(r),
                                       SPEC)
            assert vol == pytest.approx(dom.volume, rel=1e-9)

    def test_rho_out_of_range(self):
        with pytest.raises(ValueError):
            cap_density(BallDomain(5, 1.0), 1.5, np.array([0.1]))


class TestBallRadialIntegral:
    def test_constant_gives_volume(self):
        dom = BallDomain(6, 0.7)
        vol = ball_radial_integral(dom, 0.3, lambda r: np.ones_like(r), SPEC)
        assert vol == pytest.approx(dom.volume, rel=1e-10)

    def test_quadratic_moment_concentric(self):
        # int_{B_1} |x|^2 dx = omega_5 / 7 in dimension five.
        dom = BallDomain(5, 1.0)
        value = ball_radial_integral(dom, 0.0, lambda r: r ** 2, SPEC)
        assert value == pytest.approx(dom.sphere_area / 7.0, rel=1e-11)

    def test_half_space_limit_of_boundary_bubble(self):
        # Critical mass of a boundary bubble in a huge ball approaches half
        # the whole-space value S^{N/2}; cross-checked against the energy
        # oracle.
        N = 5
        dom = BallDomain(N, 1000.0)
        inst = Instanton(N, 1.0, dom.R)
        two_star = 10.0 / 3.0

        def g(r):
            return instanton_profile(inst, r)[0] ** two_star

        value = ball_radial_integral(dom, dom.R, g, SPEC,
                                     breakpoints=(1.0, 8.0, 64.0))
        energy = oracle_instanton_energy(N, SPEC)
        assert value == pytest.approx(energy / 2.0, rel=1e-2)


class TestInstantonNorms:
    def test_translation_consistency_interior(self):
        # Interior bubble in a huge ball carries the whole-space norms.
        N = 5
        exp = make_exponents(N, "two_flat")
        table = closed_form_constants(exp)
        dom = BallDomain(N, 1000.0)
        nm = instanton_norms(dom, Instanton(N, 1.0, 0.0), exp.q, SPEC)
        assert nm.grad_sq == pytest.approx(table.S_pow_N2, rel=1e-4)
        assert nm.crit_norm ** exp.two_star == pytest.approx(
            table.S_pow_N2, rel=1e-4)

    def test_boundary_quotient_approaches_threshold(self):
        N = 5
        exp = make_exponents(N, "two_flat")
        table = closed_form_constants(exp)
        dom = BallDomain(N, 1.0)
        nm = instanton_norms(dom, Instanton(N, 1e-3, dom.R), exp.q, SPEC)
        quotient = nm.grad_sq / nm.crit_norm ** 2
        assert quotient == pytest.approx(table.threshold, rel=5e-3)

    def test_boundary_q_mass_scaling(self):
        # |U_eps|_q^q ~ (B/2) eps^{1/t} for a boundary bubble.
        N = 6
        exp = make_exponents(N, "two_sharp")
        table = closed_form_constants(exp)
        dom = BallDomain(N, 1.0)
        nm = instanton_norms(dom, Instanton(N, 1e-3, dom.R), exp.q, SPEC)
        assert nm.q_norm_q / 1e-3 ** (1.0 / exp.t) == pytest.approx(
            table.B / 2.0, rel=0.02)

    def test_positive_entries(self):
        nm = instanton_norms(BallDomain(5, 1.0), Instanton(5, 0.2, 0.5),
                             2.6, SPEC)
        assert min(nm.q_norm_q, nm.crit_norm, nm.l2_sq, nm.grad_sq) > 0.0

    def test_center_outside_ball_rejected(self):
        with pytest.raises(ValueError):
            instanton_norms(BallDomain(5, 1.0), Instanton(5, 0.2, 1.5),
                            2.6, SPEC)
