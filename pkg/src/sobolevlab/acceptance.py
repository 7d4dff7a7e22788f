"""The acceptance gate: ten criteria, each a pure function returning a
pass/fail verdict plus the measured numbers.

These are the exit checks of the whole laboratory; ``run_all`` powers the
``all`` CLI command and the pytest acceptance module runs each criterion
as its own test.  Tolerances are pinned here, not in the callers.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import experiments as ex
from . import fields as fl
from .constants import (closed_form_constants, make_exponents,
                        oracle_instanton_energy, oracle_instanton_qnorm)
from .geometry import BallDomain, Instanton
from .numerics import OptimizerSpec, QuadratureSpec, find_root

__all__ = ["CriterionResult", "CRITERIA", "run_all"]

_ORACLE_SPEC = QuadratureSpec(abs_tol=1e-12, rel_tol=1e-10)
_FIELD_SPEC = QuadratureSpec(abs_tol=1e-13, rel_tol=1e-11)
_OPT_SPEC = OptimizerSpec(param_tol=1e-6, value_tol=1e-10,
                          max_iters=300, restarts=1)


@dataclass
class CriterionResult:
    cid: int
    name: str
    passed: bool
    runtime_s: float
    details: dict

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.cid}: {self.name} ({self.runtime_s:.1f}s)"


def _result(cid, name, t0, passed, details) -> CriterionResult:
    return CriterionResult(cid=cid, name=name, passed=bool(passed),
                           runtime_s=time.time() - t0, details=details)


def criterion_1() -> CriterionResult:
    """Closed forms vs quadrature oracles for S^{N/2} and B(q, N)."""
    t0 = time.time()
    rows, worst = [], 0.0
    for N in (5, 6, 7, 8):
        exp_any = make_exponents(N, "two_flat")
        table = closed_form_constants(exp_any)
        energy = oracle_instanton_energy(N, _ORACLE_SPEC)
        rel_e = abs(energy - table.S_pow_N2) / table.S_pow_N2
        worst = max(worst, rel_e)
        rows.append({"N": N, "quantity": "S^{N/2}", "rel_error": rel_e})
        for key in ("two_sharp", "two_flat"):
            exp = make_exponents(N, key)
            ref = closed_form_constants(exp).B
            mass = oracle_instanton_qnorm(N, exp.q, _ORACLE_SPEC)
            rel_b = abs(mass - ref) / ref
            worst = max(worst, rel_b)
            rows.append({"N": N, "quantity": f"B({key})", "rel_error": rel_b})
    runtime = time.time() - t0
    passed = worst <= 1e-8 and runtime < 10.0
    return _result(1, "closed-form constants vs quadrature oracles", t0,
                   passed, {"worst_rel_error": worst, "tolerance": 1e-8,
                            "runtime_budget_s": 10.0, "rows": rows})


def criterion_2() -> CriterionResult:
    """Exponent identities on random (N, q) plus exact endpoints."""
    t0 = time.time()
    rng = np.random.default_rng(20240)
    worst = 0.0
    for _ in range(200):
        N = int(rng.integers(5, 11))
        exp = make_exponents(N, float(
            rng.uniform(2.0 * N / (N - 1.0), 2.0 * (N - 1.0) / (N - 2.0))))
        worst = max(
            worst,
            abs(exp.q * exp.t - 2.0 * exp.s / (N - 2.0) - 2.0),
            abs(exp.s - (N - 1.0) * (exp.q - exp.two_sharp)
                / (exp.two_star - exp.q)),
            abs(exp.t - exp.s / N - (N - 1.0) / N))
    endpoints_exact = True
    for N in range(5, 11):
        lo = make_exponents(N, "two_sharp")
        hi = make_exponents(N, "two_flat")
        endpoints_exact &= (lo.s == 0.0 and lo.t == (N - 1.0) / N
                            and hi.s == 1.0 and hi.t == 1.0)
    passed = worst <= 1e-13 and endpoints_exact
    return _result(2, "exponent identities and exact endpoints", t0, passed,
                   {"worst_identity_error": worst, "tolerance": 1e-13,
                    "endpoints_exact": endpoints_exact})


def criterion_3() -> CriterionResult:
    """Boundary q-mass asymptotics on the unit ball."""
    t0 = time.time()
    rows, ok = [], True
    for N in (5, 6):
        dom = BallDomain(N, 1.0)
        for key in ("two_sharp", "two_flat"):
            exp = make_exponents(N, key)
            sweep = ex.appendix_sweep(dom, exp, ex.geometric_grid(0.064, 7),
                                      _FIELD_SPEC)
            rel = abs(sweep.scaled[-1] / sweep.reference_value - 1.0)
            ok &= (not sweep.truncated and sweep.eps_values[-1] == 1e-3
                   and rel <= 0.02 and bool(sweep.remainder_bounded))
            rows.append({"N": N, "q": key, "rel_at_1e-3": rel,
                         "remainder_bounded": sweep.remainder_bounded})
    runtime = time.time() - t0
    passed = ok and runtime < 60.0
    return _result(3, "boundary bubble q-mass asymptotics", t0, passed,
                   {"tolerance": 0.02, "runtime_budget_s": 60.0, "rows": rows})


def criterion_4() -> CriterionResult:
    """Curvature expansion slope and its 1/R scaling (N = 5)."""
    t0 = time.time()
    rows, ok = [], True
    fitted_by_R = {}
    for R in (1.0, 2.0, 4.0):
        dom = BallDomain(5, R)
        sweep = ex.curvature_slope(dom, ex.geometric_grid(0.032 * R, 6),
                                   _FIELD_SPEC)
        rel = abs(sweep.fitted_coefficient / sweep.reference_value - 1.0)
        fitted_by_R[R] = sweep.fitted_coefficient
        ok &= rel <= 0.05
        rows.append({"R": R, "fitted": sweep.fitted_coefficient,
                     "reference": sweep.reference_value, "rel_error": rel})
    for R in (2.0, 4.0):
        ratio = fitted_by_R[1.0] / (fitted_by_R[R] * R)
        ok &= abs(ratio - 1.0) <= 0.05
        rows.append({"scaling_check_R": R, "H_scaling_ratio": ratio})
    return _result(4, "mean-curvature slope of the boundary quotient", t0,
                   ok, {"tolerance": 0.05, "rows": rows})


def criterion_5() -> CriterionResult:
    """Pointwise inequality sampling, one million points per (N, q)."""
    t0 = time.time()
    rows, ok = [], True
    seed = 515
    for N in (5, 6, 7, 8):
        for key in ("two_sharp", "midpoint", "two_flat"):
            exp = make_exponents(N, key)
            check = ex.calculus_lemma_check(exp.q, exp.t, 1_000_000, seed)
            seed += 1
            ok &= check.passed and check.min_margin >= -1e-12
            rows.append({"N": N, "q": key, "min_margin": check.min_margin,
                         "violations": check.violations})
    return _result(5, "pointwise power inequality sampling", t0, ok,
                   {"margin_floor": -1e-12, "rows": rows})


def criterion_6() -> CriterionResult:
    """Eigenfunction residuals of the bubble at second order."""
    t0 = time.time()
    res = ex.eigen_residuals(512, 50.0, 5)
    passed = (res.res_U < 1e-3 and res.res_dU < 1e-3
              and 1.8 <= res.order_U <= 2.2 and 1.8 <= res.order_dU <= 2.2)
    return _result(6, "radial eigenfunction residuals", t0, passed,
                   {"res_U": res.res_U, "res_dU": res.res_dU,
                    "order_U": res.order_U, "order_dU": res.order_dU,
                    "residual_tolerance": 1e-3, "order_window": [1.8, 2.2]})


def _random_profile(rng) -> fl.ProfileField:
    N = int(rng.choice([5, 6]))
    R = float(rng.uniform(0.5, 2.0))
    dom = BallDomain(N, R)
    exp = make_exponents(N, float(rng.uniform(
        2.0 * N / (N - 1.0), 2.0 * (N - 1.0) / (N - 2.0))))
    inst = Instanton(N, float(rng.uniform(0.02, 0.5) * R),
                     float(rng.uniform(0.0, 1.0)) * R)
    return fl.ProfileField(dom=dom, exponents=exp, inst=inst,
                           c=float(rng.uniform(0.2, 3.0)),
                           d=float(rng.uniform(0.0, 1.5)),
                           a=float(rng.uniform(0.3, 3.0)))


def criterion_7() -> CriterionResult:
    """Nehari identity and degree-zero homogeneity on random fields."""
    t0 = time.time()
    rng = np.random.default_rng(77)
    worst = {"nehari": 0.0, "beta": 0.0, "delta": 0.0, "psi": 0.0,
             "tau": 0.0, "crit_alpha": 0.0}
    for _ in range(100):
        u = _random_profile(rng)
        factor = float(rng.uniform(0.2, 5.0))
        cu = u.scaled(factor)
        for alpha in (0.0, 1.0, 10.0):
            rep = fl.functionals(u, alpha, _FIELD_SPEC)
            rep_c = fl.functionals(cu, alpha, _FIELD_SPEC)
            nehari = fl.functionals(u.scaled(rep.tau), alpha, _FIELD_SPEC)
            lhs = (1.0 / u.dom.N) * rep.psi ** (u.dom.N / 2.0)
            worst["nehari"] = max(worst["nehari"],
                                  abs(lhs - nehari.phi) / abs(lhs))
            worst["beta"] = max(worst["beta"],
                                abs(rep_c.beta / rep.beta - 1.0))
            worst["delta"] = max(worst["delta"],
                                 abs(rep_c.delta / rep.delta - 1.0))
            worst["psi"] = max(worst["psi"], abs(rep_c.psi / rep.psi - 1.0))
            worst["tau"] = max(worst["tau"],
                               abs(rep_c.tau * factor / rep.tau - 1.0))
            if rep.crit_alpha is not None and rep_c.crit_alpha is not None \
                    and math.isfinite(rep.crit_alpha) and rep.crit_alpha > 0:
                worst["crit_alpha"] = max(
                    worst["crit_alpha"],
                    abs(rep_c.crit_alpha / rep.crit_alpha - 1.0))
    passed = all(v <= 1e-9 for v in worst.values())
    return _result(7, "Nehari identity and degree-zero homogeneity", t0,
                   passed, {"worst_rel_errors": worst, "tolerance": 1e-9})


def criterion_8() -> CriterionResult:
    """Unique positive constant Euler solution."""
    t0 = time.time()
    rows, ok = [], True
    for N, key in ((5, "midpoint"), (6, "two_flat")):
        exp = make_exponents(N, key)
        dom = BallDomain(N, 1.0)
        for a in (0.5, 1.0, 2.0):
            c_star = a ** ((N - 2.0) / 4.0)
            worst = max(abs(fl.euler_residual_constant(c_star, alpha, exp,
                                                       a, dom))
                        for alpha in (0.0, 1.0, 10.0))
            ok &= worst <= 1e-10
            # Scan for sign changes of the residual up to 10 c*.
            grid = np.linspace(1e-3 * c_star, 10.0 * c_star, 4001)
            vals = np.array([fl.euler_residual_constant(c, 5.0, exp, a, dom)
                             for c in grid])
            flips = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
            ok &= flips.size == 1
            if flips.size == 1:
                root = find_root(
                    lambda c: fl.euler_residual_constant(c, 5.0, exp, a, dom),
                    grid[flips[0]], grid[flips[0] + 1], tol=1e-12)
                ok &= abs(root - c_star) <= 1e-8 * c_star
            rows.append({"N": N, "q": key, "a": a, "worst_residual": worst,
                         "sign_changes": int(flips.size)})
    return _result(8, "unique positive constant Euler solution", t0, ok,
                   {"residual_tolerance": 1e-10, "rows": rows})


def criterion_9() -> CriterionResult:
    """Strict gap of the alpha = 0 level below the threshold."""
    t0 = time.time()
    exp = make_exponents(5, "two_flat")
    rep = ex.s0_gap(BallDomain(5, 1.0), exp, 1.0, _OPT_SPEC, _ORACLE_SPEC)
    curve = rep.s_alpha_curve
    monotone = all(curve[i + 1][1] >= curve[i][1] - 1e-9 * rep.threshold
                   for i in range(len(curve) - 1))
    passed = (rep.s0_estimate > 0.0 and rep.relative_gap > 1e-3 and monotone)
    return _result(9, "strict gap below the half-bubble threshold", t0,
                   passed, {"s0_estimate": rep.s0_estimate,
                            "threshold": rep.threshold,
                            "relative_gap": rep.relative_gap,
                            "gap_floor": 1e-3, "monotone": monotone,
                            "curve": curve})


def criterion_10() -> CriterionResult:
    """Sharp-coupling lower bounds: consistency, bisection, rescaling."""
    t0 = time.time()
    exp = make_exponents(5, "two_flat")
    base = ex.estimate_alpha0(BallDomain(5, 1.0), exp, 1.0, _OPT_SPEC,
                              _ORACLE_SPEC)
    analytic = max(b for b in (base.lb_curvature, base.lb_constant_test)
                   if b is not None)
    consistency = base.lb_variational >= (1.0 - 1e-2) * analytic
    agree = (base.lb_bisection is not None
             and abs(base.lb_bisection - base.lb_variational)
             <= 1e-3 * base.lb_variational)
    kappa = 2.0
    scaled = ex.estimate_alpha0(BallDomain(5, 1.0 / kappa), exp,
                                kappa ** 2, _OPT_SPEC, _ORACLE_SPEC)
    kappa_rel = abs(scaled.lb_variational
                    / (kappa * base.lb_variational) - 1.0)
    passed = (consistency and agree and kappa_rel <= 0.01
              and not base.invariant_failures)
    return _result(10, "sharp-coupling bound consistency and rescaling", t0,
                   passed,
                   {"lb_variational": base.lb_variational,
                    "lb_bisection": base.lb_bisection,
                    "lb_constant_test": base.lb_constant_test,
                    "lb_curvature": base.lb_curvature,
                    "bisection_rel_gap":
                        None if base.lb_bisection is None else
                        abs(base.lb_bisection - base.lb_variational)
                        / base.lb_variational,
                    "kappa_scaling_rel_error": kappa_rel,
                    "tolerances": {"consistency": 1e-2, "bisection": 1e-3,
                                   "kappa": 1e-2}})


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10)


def run_all(echo=None) -> dict:
    """Run the whole gate; returns criteria results and overall status."""
    results = []
    for crit in CRITERIA:
        res = crit()
        results.append(res)
        if echo is not None:
            echo(res.line())
    failures = [f"criterion {r.cid}: {r.name}" for r in results if not r.passed]
    return {"criteria": results, "passed": not failures,
            "invariant_failures": failures}
