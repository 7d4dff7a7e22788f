"""HTTP service exposing the laboratory.

Every experiment is a POST endpoint with a pydantic request model; the
response wraps the request echo, the typed results, any invariant
failures, and the package version.  The CLI is a thin client of this app
(in-process by default, remote with ``--server``).
"""

from __future__ import annotations

import math
from typing import Generic, List, Optional, TypeVar, Union

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from . import experiments as ex
from . import fields as fl
from .acceptance import run_all
from .constants import closed_form_constants, make_exponents, \
    oracle_instanton_energy, oracle_instanton_qnorm
from .geometry import BallDomain, Instanton
from .numerics import ConvergenceError, OptimizerSpec, QuadratureSpec
from .reports import to_jsonable

DEFAULT_QUAD = QuadratureSpec(abs_tol=1e-12, rel_tol=1e-10)
FIELD_QUAD = QuadratureSpec(abs_tol=1e-13, rel_tol=1e-11)
DEFAULT_OPT = OptimizerSpec(param_tol=1e-6, value_tol=1e-10,
                            max_iters=300, restarts=1)

QValue = Union[float, str]

TConfig = TypeVar("TConfig")
TResults = TypeVar("TResults")


class Report(BaseModel, Generic[TConfig, TResults]):
    config: TConfig
    results: Optional[TResults]
    invariant_failures: List[str] = []
    version: str = __version__


# ----------------------------------------------------------------------
# Request models (defaults: N=5, q=two_flat, a=1, R=1, seed=42).


class ConstantsRequest(BaseModel):
    N: int = 5
    q: QValue = "two_flat"
    allow_low_dimension: bool = False


class EvalRequest(BaseModel):
    """Flat field description: profile c*U_{eps,P} + d or a radial grid."""

    type: str = Field(default="profile", pattern="^(profile|grid)$")
    N: int = 5
    R: float = 1.0
    a: float = 1.0
    q: QValue = "two_flat"
    c: float = 1.0
    eps: float = 0.1
    rho_P: float = 1.0
    d: float = 0.0
    alpha: float = 0.0
    nodes: Optional[List[float]] = None
    values: Optional[List[float]] = None


class AppendixRequest(BaseModel):
    N: int = 5
    q: QValue = "two_flat"
    R: float = 1.0
    eps_start: Optional[float] = None   # default R * 0.064
    eps_count: int = 7
    eps_ratio: float = 2.0


class CurvatureRequest(BaseModel):
    N: int = 5
    R: float = 1.0
    eps_start: Optional[float] = None   # default R * 0.032
    eps_count: int = 6
    eps_ratio: float = 2.0


class CalculusRequest(BaseModel):
    N: int = 5
    q: QValue = "two_flat"
    samples: int = 1_000_000
    rng_seed: int = 42
    x_max: float = 1e3


class EigenRequest(BaseModel):
    N: int = 5
    grid_size: int = 512
    r_trunc: float = 50.0


class Alpha0Request(BaseModel):
    N: int = 5
    q: QValue = "two_flat"
    a: float = 1.0
    R: float = 1.0
    alpha_grid: Optional[List[float]] = None
    eps_min_factor: float = 3e-4
    rng_seed: int = 42


class S0Request(BaseModel):
    N: int = 5
    q: QValue = "two_flat"
    a: float = 1.0
    R: float = 1.0
    alpha_grid: List[float] = [0.0, 0.5, 1.0, 2.0, 4.0]
    eps_min_factor: float = 3e-4
    rng_seed: int = 42


class AllRequest(BaseModel):
    pass


# ----------------------------------------------------------------------
# Result models.


class ConstantsResult(BaseModel):
    N: int
    q: float
    two_star: float
    two_sharp: float
    two_flat: float
    s: float
    t: float
    theory_out_of_range: bool
    S: float
    S_pow_N2: float
    omega_N: float
    B: float
    A: float
    threshold: float
    oracle_residuals: dict


class FunctionalReportResult(BaseModel):
    norm_H1_sq: float
    lp: dict
    crit: float
    alpha: Optional[float] = None
    beta: Optional[float] = None
    delta: Optional[float] = None
    psi: Optional[float] = None
    phi: Optional[float] = None
    tau: Optional[float] = None
    crit_alpha: Optional[float] = None
    crit_alpha_unbounded: bool = False


class SweepResultModel(BaseModel):
    eps_values: List[float]
    raw: List[float]
    scaled: List[float]
    fitted_coefficient: float
    fit_residual: float
    reference_value: Optional[float] = None
    remainder_ratios: Optional[List[float]] = None
    remainder_bounded: Optional[bool] = None
    truncated: bool = False
    slope_vs_eps: Optional[float] = None
    width_factor: Optional[float] = None


class CalculusResult(BaseModel):
    samples: int
    min_margin: float
    argmin_x: float
    violations: int
    passed: bool


class EigenResult(BaseModel):
    res_U: float
    res_dU: float
    order_U: float
    order_dU: float


class Alpha0Result(BaseModel):
    N: int
    q: float
    a: float
    R: float
    lb_constant_test: Optional[float]
    lb_curvature: float
    lb_variational: float
    lb_bisection: Optional[float]
    best_field_params: Optional[List[float]]
    s_alpha_curve: List[List[float]]
    optimizer_failures: List[str]


class S0Result(BaseModel):
    s0_estimate: float
    threshold: float
    relative_gap: float
    s_alpha_curve: List[List[float]]
    optimizer_failures: List[str]


class CriterionModel(BaseModel):
    cid: int
    name: str
    passed: bool
    runtime_s: float
    details: dict


class AcceptanceResult(BaseModel):
    criteria: List[CriterionModel]
    passed: bool


app = FastAPI(
    title="sobolevlab",
    version=__version__,
    description="Numerical laboratory for a family of sharp Sobolev "
                "inequalities on balls",
)


@app.exception_handler(ValueError)
async def _value_error_handler(request: Request, exc: ValueError):
    return JSONResponse(status_code=422, content={"detail": str(exc)})


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.post("/constants", response_model=Report[ConstantsRequest, ConstantsResult])
def constants_endpoint(req: ConstantsRequest):
    exp = make_exponents(req.N, req.q,
                         allow_low_dimension=req.allow_low_dimension)
    table = closed_form_constants(exp)
    energy = oracle_instanton_energy(exp.N, DEFAULT_QUAD)
    mass = oracle_instanton_qnorm(exp.N, exp.q, DEFAULT_QUAD)
    residuals = {
        "S_pow_N2_rel": abs(energy - table.S_pow_N2) / table.S_pow_N2,
        "B_rel": abs(mass - table.B) / table.B,
    }
    failures = [f"oracle residual {k} = {v:.3e} exceeds 1e-8"
                for k, v in residuals.items() if v > 1e-8]
    results = ConstantsResult(
        N=exp.N, q=exp.q, two_star=exp.two_star, two_sharp=exp.two_sharp,
        two_flat=exp.two_flat, s=exp.s, t=exp.t,
        theory_out_of_range=exp.theory_out_of_range,
        S=table.S, S_pow_N2=table.S_pow_N2, omega_N=table.omega_N,
        B=table.B, A=table.A, threshold=table.threshold,
        oracle_residuals=residuals)
    return Report(config=req, results=results, invariant_failures=failures)


def _build_field(req: EvalRequest):
    exp = make_exponents(req.N, req.q)
    dom = BallDomain(req.N, req.R)
    if req.type == "grid":
        if req.nodes is None or req.values is None:
            raise ValueError("grid fields need explicit nodes and values")
        return fl.RadialGridField(dom=dom, nodes=req.nodes,
                                  values=req.values, a=req.a), exp
    inst = Instanton(req.N, req.eps, req.rho_P)
    return fl.ProfileField(dom=dom, exponents=exp, inst=inst,
                           c=req.c, d=req.d, a=req.a), exp


@app.post("/eval", response_model=Report[EvalRequest, FunctionalReportResult])
def eval_endpoint(req: EvalRequest):
    field, exp = _build_field(req)
    rep = fl.functionals(field, req.alpha, FIELD_QUAD, exponents=exp)
    unbounded = rep.crit_alpha is not None and math.isinf(rep.crit_alpha)
    results = FunctionalReportResult(
        norm_H1_sq=rep.norm_H1_sq,
        lp={str(k): v for k, v in rep.lp.items()},
        crit=rep.crit, alpha=rep.alpha, beta=rep.beta, delta=rep.delta,
        psi=rep.psi, phi=rep.phi, tau=rep.tau,
        crit_alpha=None if unbounded else rep.crit_alpha,
        crit_alpha_unbounded=unbounded)
    return Report(config=req, results=results)


def _sweep_model(sweep: ex.SweepResult) -> SweepResultModel:
    return SweepResultModel(**to_jsonable(sweep))


@app.post("/experiments/appendix",
          response_model=Report[AppendixRequest, SweepResultModel])
def appendix_endpoint(req: AppendixRequest):
    exp = make_exponents(req.N, req.q)
    dom = BallDomain(req.N, req.R)
    start = req.eps_start if req.eps_start is not None else 0.064 * req.R
    grid = ex.geometric_grid(start, req.eps_count, req.eps_ratio)
    failures: List[str] = []
    try:
        sweep = ex.appendix_sweep(dom, exp, grid, FIELD_QUAD)
    except ConvergenceError as err:
        return Report(config=req, results=None,
                      invariant_failures=[f"quadrature failure: {err}"])
    if sweep.truncated:
        failures.append("sweep truncated by a quadrature failure")
    if sweep.remainder_bounded is False:
        failures.append("remainder ratio grew along the sweep")
    return Report(config=req, results=_sweep_model(sweep),
                  invariant_failures=failures)


@app.post("/experiments/curvature",
          response_model=Report[CurvatureRequest, SweepResultModel])
def curvature_endpoint(req: CurvatureRequest):
    dom = BallDomain(req.N, req.R)
    start = req.eps_start if req.eps_start is not None else 0.032 * req.R
    grid = ex.geometric_grid(start, req.eps_count, req.eps_ratio)
    failures: List[str] = []
    try:
        sweep = ex.curvature_slope(dom, grid, FIELD_QUAD)
    except ConvergenceError as err:
        return Report(config=req, results=None,
                      invariant_failures=[f"quadrature failure: {err}"])
    if sweep.truncated:
        failures.append("sweep truncated by a quadrature failure")
    return Report(config=req, results=_sweep_model(sweep),
                  invariant_failures=failures)


@app.post("/experiments/calculus",
          response_model=Report[CalculusRequest, CalculusResult])
def calculus_endpoint(req: CalculusRequest):
    exp = make_exponents(req.N, req.q)
    check = ex.calculus_lemma_check(exp.q, exp.t, req.samples, req.rng_seed,
                                    x_max=req.x_max)
    failures = [] if check.passed else \
        [f"{check.violations} inequality violations, worst margin "
         f"{check.min_margin:.3e} at x={check.argmin_x!r}"]
    return Report(config=req, results=CalculusResult(**to_jsonable(check)),
                  invariant_failures=failures)


@app.post("/experiments/eigen", response_model=Report[EigenRequest, EigenResult])
def eigen_endpoint(req: EigenRequest):
    res = ex.eigen_residuals(req.grid_size, req.r_trunc, req.N)
    return Report(config=req, results=EigenResult(**to_jsonable(res)))


@app.post("/experiments/alpha0",
          response_model=Report[Alpha0Request, Alpha0Result])
def alpha0_endpoint(req: Alpha0Request):
    exp = make_exponents(req.N, req.q)
    rep = ex.estimate_alpha0(BallDomain(req.N, req.R), exp, req.a,
                             DEFAULT_OPT, DEFAULT_QUAD,
                             alpha_grid=req.alpha_grid,
                             eps_min_factor=req.eps_min_factor)
    payload = to_jsonable(rep)
    failures = payload.pop("invariant_failures")
    return Report(config=req, results=Alpha0Result(**payload),
                  invariant_failures=failures)


@app.post("/experiments/s0", response_model=Report[S0Request, S0Result])
def s0_endpoint(req: S0Request):
    exp = make_exponents(req.N, req.q)
    rep = ex.s0_gap(BallDomain(req.N, req.R), exp, req.a, DEFAULT_OPT,
                    DEFAULT_QUAD, alpha_grid=tuple(req.alpha_grid),
                    eps_min_factor=req.eps_min_factor)
    failures = []
    if rep.relative_gap <= 0.0:
        failures.append("no strict gap below the threshold")
    return Report(config=req, results=S0Result(**to_jsonable(rep)),
                  invariant_failures=failures)


@app.post("/experiments/all", response_model=Report[AllRequest, AcceptanceResult])
def all_endpoint(req: AllRequest):
    outcome = run_all()
    results = AcceptanceResult(
        criteria=[CriterionModel(**to_jsonable(r)) for r in outcome["criteria"]],
        passed=outcome["passed"])
    return Report(config=req, results=results,
                  invariant_failures=outcome["invariant_failures"])
