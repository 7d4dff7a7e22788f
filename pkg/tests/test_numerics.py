"""Tests for the numerical kernels: Gamma, quadrature, roots, minimizer."""

import math

import numpy as np
import pytest

from sobolevlab.numerics import (ConvergenceError, OptimizerSpec,
                                 QuadratureSpec, find_root, gamma_fn,
                                 integrate, minimize, power_tail_cutoff)

SPEC = QuadratureSpec(abs_tol=1e-12, rel_tol=1e-12)


class TestGamma:
    def test_gamma_one(self):
        assert gamma_fn(1.0) == pytest.approx(1.0, rel=1e-14)

    def test_gamma_half(self):
        assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)

    def test_gamma_3_5_by_recurrence(self):
        # Gamma(3.5) = 2.5 * 1.5 * 0.5 * Gamma(0.5)
        expected = 2.5 * 1.5 * 0.5 * math.sqrt(math.pi)
        assert gamma_fn(3.5) == pytest.approx(expected, rel=1e-13)

    def test_recurrence_property(self):
        xs = np.linspace(0.5, 20.0, 331)
        for x in xs:
            lhs = gamma_fn(x + 1.0)
            assert abs(lhs - x * gamma_fn(x)) <= 1e-12 * abs(lhs)

    def test_against_platform_gamma(self):
        for x in np.geomspace(0.05, 60.0, 200):
            assert gamma_fn(float(x)) == pytest.approx(math.gamma(x),
                                                       rel=1e-13)

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            gamma_fn(0.0)
        with pytest.raises(ValueError):
            gamma_fn(-2.5)


class TestIntegrate:
    def test_monomial(self):
        assert integrate(lambda x: x ** 2, 0.0, 1.0, SPEC) == pytest.approx(
            1.0 / 3.0, abs=1e-12)

    def test_exponential_tail(self):
        spec = QuadratureSpec(abs_tol=1e-12, rel_tol=1e-12, tail_cutoff=60.0)
        assert integrate(lambda x: np.exp(-x), 0.0, math.inf, spec) == \
            pytest.approx(1.0, rel=1e-11)

    def test_instanton_like_integrand_vs_beta_function(self):
        # int_0^inf r^4 / (15 + r^2)^5 dr; substituting r^2 = 15 u turns it
        # into a Beta integral evaluated through gamma_fn.
        closed = (1.0 / 15.0 ** 2.5) \
            * (gamma_fn(2.5) ** 2 / gamma_fn(5.0)) / 2.0
        spec = QuadratureSpec(abs_tol=1e-15, rel_tol=1e-12, tail_cutoff=3e4)
        value = integrate(lambda r: r ** 4 / (15.0 + r ** 2) ** 5,
                          0.0, math.inf, spec)
        assert value == pytest.approx(closed, rel=1e-10)

    def test_linearity_on_random_polynomials(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            pa = rng.uniform(-2.0, 2.0, 4)
            pb = rng.uniform(-2.0, 2.0, 4)
            ca, cb = rng.uniform(-3.0, 3.0, 2)

            def f(x, c=pa):
                return np.polyval(c, x)

            def g(x, c=pb):
                return np.polyval(c, x)

            lhs = integrate(lambda x: ca * f(x) + cb * g(x), -1.0, 2.0, SPEC)
            rhs = ca * integrate(f, -1.0, 2.0, SPEC) \
                + cb * integrate(g, -1.0, 2.0, SPEC)
            assert abs(lhs - rhs) <= 10.0 * SPEC.abs_tol * max(
                1.0, abs(ca) + abs(cb))

    def test_breakpoints_help_peaked_integrand(self):
        eps = 1e-4

        def peak(x):
            return eps / (eps ** 2 + x ** 2)

        value = integrate(peak, 0.0, 1.0, QuadratureSpec(rel_tol=1e-11),
                          breakpoints=(eps, 8 * eps, 64 * eps))
        assert value == pytest.approx(math.atan(1.0 / eps), rel=1e-10)

    def test_budget_exhaustion_carries_estimate(self):
        spec = QuadratureSpec(abs_tol=1e-15, rel_tol=1e-15,
                              max_subdivisions=4)
        with pytest.raises(ConvergenceError) as err:
            integrate(lambda x: np.sqrt(np.abs(x)), 0.0, 1.0, spec)
        assert err.value.estimate == pytest.approx(2.0 / 3.0, rel=1e-3)
        assert err.value.error_bound > 0.0

    def test_bad_interval(self):
        with pytest.raises(ValueError):
            integrate(lambda x: x, 1.0, 1.0, SPEC)

    def test_tail_cutoff_formula(self):
        coeff, power, tol = 3.0, 4.0, 1e-8
        cutoff = power_tail_cutoff(coeff, power, tol)
        assert coeff * cutoff ** (1.0 - power) / (power - 1.0) == \
            pytest.approx(tol / 10.0, rel=1e-12)


class TestFindRoot:
    def test_linear(self):
        assert find_root(lambda x: x - 2.0, 0.0, 5.0, 1e-12) == \
            pytest.approx(2.0, abs=1e-11)

    def test_sqrt2(self):
        assert find_root(lambda x: x * x - 2.0, 0.0, 2.0, 1e-13) == \
            pytest.approx(math.sqrt(2.0), abs=1e-12)

    def test_cosine(self):
        assert find_root(math.cos, 1.0, 2.0, 1e-13) == \
            pytest.approx(math.pi / 2.0, abs=1e-12)

    def test_no_sign_change(self):
        with pytest.raises(ValueError):
            find_root(lambda x: 1.0 + x * x, -1.0, 1.0, 1e-10)


class TestMinimize:
    def test_1d_quadratic(self):
        res = minimize(lambda x: (x[0] - 3.0) ** 2, [0.0], [(-10.0, 10.0)])
        assert res.converged
        assert res.x[0] == pytest.approx(3.0, abs=1e-6)

    def test_2d_bowl(self):
        res = minimize(lambda x: x[0] ** 2 + x[1] ** 2, [1.0, 1.0],
                       [(-2.0, 2.0), (-2.0, 2.0)])
        assert np.max(np.abs(res.x)) <= 1e-6

    def test_rosenbrock_against_grid_search(self):
        def rosen(x):
            return (1.0 - x[0]) ** 2 + 100.0 * (x[1] - x[0] ** 2) ** 2

        # Independent oracle: brute-force grid search over the box.
        grid = np.linspace(-2.0, 2.0, 161)
        gx, gy = np.meshgrid(grid, grid)
        vals = (1.0 - gx) ** 2 + 100.0 * (gy - gx ** 2) ** 2
        i, j = np.unravel_index(np.argmin(vals), vals.shape)
        oracle = np.array([gx[i, j], gy[i, j]])
        assert np.allclose(oracle, [1.0, 1.0], atol=0.05)

        spec = OptimizerSpec(param_tol=1e-9, value_tol=1e-14,
                             max_iters=2000, restarts=3)
        res = minimize(rosen, [-1.2, 1.0], [(-2.0, 2.0), (-2.0, 2.0)], spec)
        assert res.converged
        assert np.max(np.abs(res.x - oracle)) <= 0.05
        assert np.max(np.abs(res.x - np.array([1.0, 1.0]))) <= 1e-5

    def test_never_worse_than_start(self):
        rng = np.random.default_rng(11)
        spec = OptimizerSpec(max_iters=40, restarts=0)
        for _ in range(20):
            shift = rng.uniform(-1.0, 1.0, 3)

            def f(x):
                return float(np.sum(np.cos(3.0 * x) + (x - shift) ** 2))

            start = rng.uniform(-1.5, 1.5, 3)
            res = minimize(f, start, [(-2.0, 2.0)] * 3, spec)
            assert res.fun <= f(start) + 1e-15

    def test_budget_exhaustion_flagged(self):
        spec = OptimizerSpec(param_tol=1e-15, value_tol=1e-18,
                             max_iters=3, restarts=0)
        res = minimize(lambda x: (x[0] - 0.3) ** 4, [0.0], [(-1.0, 1.0)],
                       spec)
        assert not res.converged
        assert res.fun <= (0.3) ** 4

    def test_start_outside_bounds_rejected(self):
        with pytest.raises(ValueError):
            minimize(lambda x: x[0] ** 2, [3.0], [(-1.0, 1.0)])

    def test_deterministic(self):
        def f(x):
            return math.sin(5 * x[0]) + x[0] ** 2 + (x[1] - 0.4) ** 2

        a = minimize(f, [0.7, -0.3], [(-2.0, 2.0), (-2.0, 2.0)])
        b = minimize(f, [0.7, -0.3], [(-2.0, 2.0), (-2.0, 2.0)])
        assert np.array_equal(a.x, b.x) and a.fun == b.fun


class TestSpecs:
    def test_quadrature_spec_validation(self):
        with pytest.raises(ValueError):
            QuadratureSpec(abs_tol=0.0)
        with pytest.raises(ValueError):
            QuadratureSpec(max_subdivisions=0)
        with pytest.raises(ValueError):
            QuadratureSpec(tail_cutoff=-1.0)

    def test_optimizer_spec_validation(self):
        with pytest.raises(ValueError):
            OptimizerSpec(param_tol=-1.0)
        with pytest.raises(ValueError):
            OptimizerSpec(max_iters=0)
