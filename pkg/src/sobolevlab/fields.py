"""Trial fields and the functionals built on them.

Two carriers are supported: a closed-form profile family c*U_{eps,P} + d
restricted to a ball (the bubble-plus-constant trial class) and sampled
radial grid functions for finite-difference residual checks.

For a field u with norm ||u||^2 = |grad u|_2^2 + a |u|_2^2 the degree-zero
functionals are

    beta(u)  = ||u||^2 / |u|_{2*}^2,
    delta(u) = ||u||^{s-2} |u|_q^{qt} / |u|_{2*}^{2* s / 2},
    Psi_alpha = beta (1 + alpha delta),
    Phi_alpha = (||u||^2 / 2 - |u|_{2*}^{2*} / 2*) (1 + alpha delta)^{N/2},

together with the Nehari projection tau(u) = (||u||^2 / |u|_{2*}^{2*})^{(N-2)/4}.
The product beta * delta = ||u||^s |u|_q^{qt} / |u|_{2*}^{2 + 2* s/2} is the
quantity whose small-eps expansion drives the curvature lower bound; the
grouping of delta itself is pinned by four independent checks in the test
suite (the constant-field value of Psi_alpha, the unique constant Euler
solution, the Nehari identity, and the kappa-rescaling law).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .constants import Exponents, closed_form_constants
from .geometry import (BallDomain, Instanton, ball_radial_integral,
                       instanton_profile)
from .numerics import QuadratureSpec

__all__ = [
    "NormData",
    "beta_value",
    "compute_norm_data",
    "constant_norm_data",
    "delta_value",
    "DegenerateFieldError",
    "UnboundedAlphaError",
    "ProfileField",
    "RadialGridField",
    "FunctionalReport",
    "norms",
    "functionals",
    "critical_alpha",
    "euler_residual_constant",
    "euler_residual_radial",
    "fd_weights",
    "radial_laplacian",
    "radial_mode1_operator",
]


class DegenerateFieldError(ValueError):
    """A functional was asked of an identically-zero field."""


class UnboundedAlphaError(RuntimeError):
    """beta < threshold with delta = 0: no finite coupling reaches the
    threshold along this field."""


@dataclass(frozen=True)
class ProfileField:
    """Nonnegative trial field c * U_{eps,P} + d on a ball.

    ``inst.center_dist`` is the distance of the bubble center P from the
    ball center; ``center_dist = R`` puts P on the boundary.  ``a`` is the
    weight of the L2 term inside the H1 norm.
    """

    dom: BallDomain
    exponents: Exponents
    inst: Instanton
    c: float = 1.0
    d: float = 0.0
    a: float = 1.0

    def __post_init__(self):
        if self.c < 0.0 or self.d < 0.0:
            raise ValueError("profile amplitudes c and d must be nonnegative")
        if self.c == 0.0 and self.d == 0.0:
            raise DegenerateFieldError("profile field is identically zero")
        if self.a <= 0.0:
            raise ValueError("norm weight a must be positive")
        if self.inst.N != self.dom.N or self.exponents.N != self.dom.N:
            raise ValueError("dimension mismatch between domain, bubble and exponents")
        if self.inst.center_dist > self.dom.R:
            raise ValueError("bubble center must lie in the closed ball")

    def scaled(self, factor: float) -> "ProfileField":
        """The field multiplied by ``factor > 0``."""
        if factor <= 0.0:
            raise ValueError("scaling factor must be positive")
        return replace(self, c=self.c * factor, d=self.d * factor)


@dataclass(frozen=True)
class RadialGridField:
    """Radial function sampled on 0 = r_0 < ... < r_M = R.

    Values may be signed (the functionals apply |.| powers literally);
    ``a = 0`` is admitted so whole-space residual identities can be checked
    on truncated grids.
    """

    dom: BallDomain
    nodes: np.ndarray
    values: np.ndarray
    a: float = 1.0

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        if nodes.ndim != 1 or nodes.shape != values.shape:
            raise ValueError("nodes and values must be 1-D arrays of equal length")
        if nodes.size < 17:
            raise ValueError("grid must have at least 16 intervals")
        if nodes[0] != 0.0 or not np.all(np.diff(nodes) > 0.0):
            raise ValueError("nodes must increase strictly from 0")
        if abs(nodes[-1] - self.dom.R) > 1e-12 * max(1.0, self.dom.R):
            raise ValueError("last node must sit on the ball radius")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid values must be finite")
        if self.a < 0.0:
            raise ValueError("norm weight a must be nonnegative")


@dataclass
class FunctionalReport:
    """Norms and functional values of one field at one coupling alpha.

    Produced partially by :func:`norms` (functional entries ``None``) and
    completely by :func:`functionals`.  ``crit_alpha`` is the coupling at
    which Psi_alpha reaches the half-bubble threshold, ``None`` when beta
    already sits above it, and ``inf`` when it can never be reached.
    """

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


@dataclass(frozen=True)
class NormData:
    """Raw norm powers of one field, enough to evaluate every functional."""

    h1_sq: float
    grad_sq: float
    l2_sq: float
    q_norm_q: float      # |u|_q^q
    crit_pow: float      # |u|_{2*}^{2*}


def _profile_breakpoints(field: ProfileField):
    pts = []
    e = field.inst.eps
    upper = field.dom.R + field.inst.center_dist
    while e < upper:
        pts.append(e)
        e *= 8.0
    return tuple(pts)


def _profile_power_integral(field: ProfileField, p: float,
                            spec: QuadratureSpec) -> float:
    """int_Omega (c U + d)^p."""
    c, d = field.c, field.d
    inst = field.inst

    def g(r):
        if c == 0.0:
            return np.full_like(np.asarray(r, dtype=float), d ** p)
        val = instanton_profile(inst, r)[0]
        return (c * val + d) ** p

    pts = _profile_breakpoints(field) if c > 0.0 else ()
    return ball_radial_integral(field.dom, inst.center_dist, g, spec, pts)


def _profile_grad_sq(field: ProfileField, spec: QuadratureSpec) -> float:
    if field.c == 0.0:
        return 0.0
    inst = field.inst

    def g(r):
        return instanton_profile(inst, r)[1] ** 2

    return field.c ** 2 * ball_radial_integral(
        field.dom, inst.center_dist, g, spec, _profile_breakpoints(field))


def _grid_gradient(nodes, values):
    return np.gradient(values, nodes, edge_order=2)


def _grid_weighted_integral(field: RadialGridField, samples) -> float:
    """Trapezoid rule against the surface weight omega_N r^{N-1}."""
    w = field.dom.sphere_area * field.nodes ** (field.dom.N - 1)
    return float(np.trapz(samples * w, field.nodes))


def _grid_power_integral(field: RadialGridField, p: float) -> float:
    return _grid_weighted_integral(field, np.abs(field.values) ** p)


def compute_norm_data(field, exp: Exponents, spec: QuadratureSpec) -> NormData:
    two_star = exp.two_star
    if isinstance(field, ProfileField):
        grad_sq = _profile_grad_sq(field, spec)
        l2_sq = _profile_power_integral(field, 2.0, spec)
        q_norm_q = _profile_power_integral(field, exp.q, spec)
        crit_pow = _profile_power_integral(field, two_star, spec)
    elif isinstance(field, RadialGridField):
        if not np.any(field.values != 0.0):
            raise DegenerateFieldError("grid field is identically zero")
        du = _grid_gradient(field.nodes, field.values)
        grad_sq = _grid_weighted_integral(field, du * du)
        l2_sq = _grid_power_integral(field, 2.0)
        q_norm_q = _grid_power_integral(field, exp.q)
        crit_pow = _grid_power_integral(field, two_star)
    else:
        raise TypeError(f"unsupported field type {type(field)!r}")
    h1_sq = grad_sq + field.a * l2_sq
    if h1_sq <= 0.0 or crit_pow <= 0.0:
        raise DegenerateFieldError("field has vanishing norm")
    return NormData(h1_sq=h1_sq, grad_sq=grad_sq, l2_sq=l2_sq,
                    q_norm_q=q_norm_q, crit_pow=crit_pow)


def _field_exponents(field, exponents: Optional[Exponents]) -> Exponents:
    if exponents is not None:
        return exponents
    if isinstance(field, ProfileField):
        return field.exponents
    raise ValueError("grid fields need an explicit Exponents table")


def norms(field, q_list=(), spec: QuadratureSpec = QuadratureSpec(),
          exponents: Optional[Exponents] = None) -> FunctionalReport:
    """Norm part of a report: ||u||^2, |u|_q for each q, and |u|_{2*}."""
    exp = _field_exponents(field, exponents)
    data = compute_norm_data(field, exp, spec)
    lp = {}
    for p in q_list:
        p = float(p)
        if isinstance(field, ProfileField):
            lp[p] = _profile_power_integral(field, p, spec) ** (1.0 / p)
        else:
            lp[p] = _grid_power_integral(field, p) ** (1.0 / p)
    return FunctionalReport(norm_H1_sq=data.h1_sq, lp=lp,
                            crit=data.crit_pow ** (1.0 / exp.two_star))


def delta_value(data: NormData, exp: Exponents) -> float:
    s, t = exp.s, exp.t
    return (data.h1_sq ** ((s - 2.0) / 2.0) * data.q_norm_q ** t
            / data.crit_pow ** (s / 2.0))


def beta_value(data: NormData, exp: Exponents) -> float:
    return data.h1_sq / data.crit_pow ** (2.0 / exp.two_star)


def _crit_alpha_value(beta: float, delta: float, threshold: float):
    if beta > threshold:
        return None
    if delta == 0.0:
        raise UnboundedAlphaError(
            "beta sits below the threshold but delta vanishes")
    return (threshold - beta) / (beta * delta)


def functionals(field, alpha: float, spec: QuadratureSpec = QuadratureSpec(),
                exponents: Optional[Exponents] = None) -> FunctionalReport:
    """Full functional report of one field at coupling ``alpha >= 0``."""
    if alpha < 0.0:
        raise ValueError("alpha must be nonnegative")
    exp = _field_exponents(field, exponents)
    data = compute_norm_data(field, exp, spec)
    N = exp.N
    beta = beta_value(data, exp)
    delta = delta_value(data, exp)
    psi = beta * (1.0 + alpha * delta)
    phi = ((0.5 * data.h1_sq - data.crit_pow / exp.two_star)
           * (1.0 + alpha * delta) ** (N / 2.0))
    tau = (data.h1_sq / data.crit_pow) ** ((N - 2.0) / 4.0)
    threshold = closed_form_constants(exp).threshold
    try:
        crit_alpha = _crit_alpha_value(beta, delta, threshold)
    except UnboundedAlphaError:
        crit_alpha = math.inf
    return FunctionalReport(
        norm_H1_sq=data.h1_sq,
        lp={float(exp.q): data.q_norm_q ** (1.0 / exp.q),
            2.0: math.sqrt(data.l2_sq)},
        crit=data.crit_pow ** (1.0 / exp.two_star),
        alpha=alpha, beta=beta, delta=delta, psi=psi, phi=phi, tau=tau,
        crit_alpha=crit_alpha)


def critical_alpha(field, spec: QuadratureSpec = QuadratureSpec(),
                   exponents: Optional[Exponents] = None):
    """Coupling at which Psi_alpha(u) meets the half-bubble threshold.

    Returns ``(threshold - beta) / (beta delta)`` when beta <= threshold,
    ``None`` when beta already exceeds the threshold, and raises
    :class:`UnboundedAlphaError` in the degenerate delta = 0 case.  The
    value is invariant under u -> c u.
    """
    exp = _field_exponents(field, exponents)
    data = compute_norm_data(field, exp, spec)
    beta = beta_value(data, exp)
    threshold = closed_form_constants(exp).threshold
    return _crit_alpha_value(beta, delta_value(data, exp), threshold)


# ----------------------------------------------------------------------
# Euler system residuals.


def constant_norm_data(c: float, a: float, volume: float,
                       exp: Exponents) -> NormData:
    h1_sq = a * c * c * volume
    return NormData(h1_sq=h1_sq, grad_sq=0.0, l2_sq=c * c * volume,
                     q_norm_q=c ** exp.q * volume,
                     crit_pow=c ** exp.two_star * volume)


def euler_residual_constant(c: float, alpha: float, exp: Exponents,
                            a: float, dom: BallDomain) -> float:
    """Residual of the Euler system at the constant field u = c.

    Vanishes for every alpha exactly at c = a^{(N-2)/4}, the unique
    positive constant solution.
    """
    if c <= 0.0:
        raise ValueError("constant level c must be positive")
    if a <= 0.0:
        raise ValueError("norm weight a must be positive")
    s, t, q, two_star = exp.s, exp.t, exp.q, exp.two_star
    data = constant_norm_data(c, a, dom.volume, exp)
    delta = delta_value(data, exp)
    return ((1.0 + 0.5 * s * alpha * delta) * a * c
            + 0.5 * q * t * alpha * data.q_norm_q ** (t - 1.0) * c ** (q - 1.0)
            - (1.0 + (1.0 + s * two_star / 4.0) * alpha * delta)
            * c ** (two_star - 1.0))


# -- finite differences on radial grids --------------------------------


def fd_weights(x, x0: float, m: int):
    """Fornberg weights for derivatives 0..m at x0 from nodes x."""
    x = np.asarray(x, dtype=float)
    n = x.size
    w = np.zeros((m + 1, n))
    c1 = 1.0
    c4 = x[0] - x0
    w[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    w[k, i] = c1 * (k * w[k - 1, i - 1] - c5 * w[k, i - 1]) / c2
                w[0, i] = -c1 * c5 * w[0, i - 1] / c2
            for k in range(mn, 0, -1):
                w[k, j] = (c4 * w[k, j] - k * w[k - 1, j]) / c3
            w[0, j] = c4 * w[0, j] / c3
        c1 = c2
    return w


def _apply_stencil(weights, samples, center_value):
    # Derivative stencils annihilate constants analytically; subtracting the
    # center value enforces that in floating point as well.
    return float(np.dot(weights, samples - center_value))


def radial_laplacian(r, u, N: int):
    """Second-order FD Laplacian u'' + (N-1) u'/r of an even radial profile.

    Differencing is done in the squared-radius variable, which keeps the
    truncation error O(h^2) with bounded constants all the way to r = 0
    (where the operator equals 2N u_rho).
    """
    r = np.asarray(r, dtype=float)
    u = np.asarray(u, dtype=float)
    rho = r * r
    M = r.size - 1
    out = np.empty_like(u)
    for j in range(M + 1):
        if j == 0:
            idx = slice(0, 3)
        elif j == M:
            idx = slice(M - 3, M + 1)
        else:
            idx = slice(j - 1, j + 2)
        w = fd_weights(rho[idx], rho[j], 2)
        d1 = _apply_stencil(w[1], u[idx], u[j])
        d2 = _apply_stencil(w[2], u[idx], u[j])
        out[j] = 2.0 * N * d1 + 4.0 * rho[j] * d2
    return out


def radial_mode1_operator(r, g, N: int):
    """Second-order FD evaluation of g'' + (N-1) g'/r - (N-1) g/r^2.

    This is the radial part of the Laplacian acting on a degree-one
    spherical harmonic component; for odd profiles g the substitution
    g = r * n(r^2) turns it into r (4 rho n'' + 2(N+2) n') with n smooth,
    which is what gets differenced.  The value at r = 0 is exactly 0.
    """
    r = np.asarray(r, dtype=float)
    g = np.asarray(g, dtype=float)
    rho = r * r
    M = r.size - 1
    out = np.zeros_like(g)
    n_vals = np.empty_like(g)
    n_vals[1:] = g[1:] / r[1:]
    n_vals[0] = 0.0  # placeholder, never used by the stencils below
    for j in range(1, M + 1):
        if j == 1:
            idx = slice(1, 4)
        elif j == M:
            idx = slice(M - 3, M + 1)
        else:
            idx = slice(j - 1, j + 2)
        w = fd_weights(rho[idx], rho[j], 2)
        d1 = _apply_stencil(w[1], n_vals[idx], n_vals[j])
        d2 = _apply_stencil(w[2], n_vals[idx], n_vals[j])
        out[j] = r[j] * (4.0 * rho[j] * d2 + 2.0 * (N + 2.0) * d1)
    return out


def euler_residual_radial(field: RadialGridField, alpha: float,
                          exp: Exponents):
    """Pointwise Euler-system residual of a positive radial grid field.

    Residual of (1 + (s/2) alpha delta)(-Lap u + a u)
    + (qt/2) alpha |u|_q^{q(t-1)} u^{q-1}
    - (1 + (1 + s 2*/4) alpha delta) u^{2*-1}, second-order stencils.
    """
    u = field.values
    if np.any(u <= 0.0):
        raise ValueError("euler_residual_radial requires a positive field")
    if field.dom.N != exp.N:
        raise ValueError("dimension mismatch between field and exponents")
    s, t, q, two_star = exp.s, exp.t, exp.q, exp.two_star
    data = compute_norm_data(field, exp, QuadratureSpec())
    delta = delta_value(data, exp)
    lap = radial_laplacian(field.nodes, u, exp.N)
    return ((1.0 + 0.5 * s * alpha * delta) * (-lap + field.a * u)
            + 0.5 * q * t * alpha * data.q_norm_q ** (t - 1.0) * u ** (q - 1.0)
            - (1.0 + (1.0 + s * two_star / 4.0) * alpha * delta)
            * u ** (two_star - 1.0))
