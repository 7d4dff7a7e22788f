"""Ball geometry and the reduction of N-dimensional integrals to 1-D.

Every integral this laboratory needs has the form int_Omega f(|x - P|) dx
with Omega a ball and P a point at distance rho_P from its center.  Such an
integral equals int_0^{R+rho_P} f(r) mu(r) dr where mu(r) is the surface
area of the sphere of radius r about P clipped to the ball (a spherical
cap).  That density is exact, so no mesh is ever built, even in dimension
eight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import QuadratureSpec, gamma_fn, integrate

__all__ = [
    "BallDomain",
    "Instanton",
    "InstantonNorms",
    "instanton_profile",
    "sin_power_integral",
    "cap_density",
    "ball_radial_integral",
    "instanton_norms",
]


@dataclass(frozen=True)
class BallDomain:
    """Ball of radius R centered at the origin of R^N."""

    N: int
    R: float

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 3:
            raise ValueError(f"BallDomain needs an integer dimension >= 3, got {self.N!r}")
        if not self.R > 0.0:
            raise ValueError(f"BallDomain needs a positive radius, got {self.R!r}")

    @property
    def volume(self) -> float:
        N = self.N
        return math.pi ** (N / 2.0) * self.R ** N / gamma_fn(N / 2.0 + 1.0)

    @property
    def mean_curvature(self) -> float:
        """Mean curvature of the boundary w.r.t. the outward normal."""
        return 1.0 / self.R

    @property
    def sphere_area(self) -> float:
        """Area of the unit sphere S^{N-1} (omega_N)."""
        return 2.0 * math.pi ** (self.N / 2.0) / gamma_fn(self.N / 2.0)


@dataclass(frozen=True)
class Instanton:
    """Rescaled extremal bubble centered at distance ``center_dist`` from
    the ball center.

    The profile is U_eps(r) = eps^{-(N-2)/2} (lam / (lam + (r/eps)^2))^{(N-2)/2}
    with lam = N(N-2); ``center_dist = R`` puts the center on the boundary.
    """

    N: int
    eps: float
    center_dist: float = 0.0

    def __post_init__(self):
        if not self.eps > 0.0:
            raise ValueError(f"Instanton needs eps > 0, got {self.eps!r}")
        if self.center_dist < 0.0:
            raise ValueError("center_dist must be nonnegative")


def instanton_profile(inst: Instanton, r):
    """Value and radial derivative of the rescaled bubble at radius r.

    Vectorized over ``r``.  The value is positive and strictly decreasing;
    the derivative is exact (not a finite difference).
    """
    r = np.asarray(r, dtype=float)
    N, eps = inst.N, inst.eps
    lam = float(N * (N - 2))
    denom = lam * eps * eps + r * r
    value = eps ** (-(N - 2) / 2.0) * (lam * eps * eps / denom) ** ((N - 2) / 2.0)
    deriv = -(N - 2.0) * r / denom * value
    return value, deriv


def sin_power_integral(n: int, phi):
    """int_0^phi sin^n(psi) dpsi via the exact reduction recurrence.

    Vectorized over ``phi``.  Cross-checked against the adaptive quadrature
    engine in the test suite.
    """
    if n < 0:
        raise ValueError("power must be nonnegative")
    phi = np.asarray(phi, dtype=float)
    c = np.cos(phi)
    s = np.sin(phi)
    prev = phi.copy()          # I_0
    if n == 0:
        return prev
    cur = 1.0 - c              # I_1
    for k in range(2, n + 1):
        prev, cur = cur, ((k - 1.0) * prev - c * s ** (k - 1)) / k
    return cur


def cap_density(dom: BallDomain, rho_P: float, r):
    """Area of the sphere {|x - P| = r} clipped to the ball.

    For spheres fully inside the ball this is the full area
    omega_N r^{N-1}; for spheres straddling the boundary it is the cap
    r^{N-1} sigma_{N-2} int_0^{phi_max} sin^{N-2}, with the cap angle from
    the law of cosines; spheres fully outside contribute zero.
    """
    if not 0.0 <= rho_P <= dom.R:
        raise ValueError(f"rho_P must lie in [0, R], got {rho_P!r}")
    r = np.asarray(r, dtype=float)
    N, R = dom.N, dom.R
    out = np.zeros_like(r)

    inside = (r <= R - rho_P) & (r > 0.0)
    out[inside] = dom.sphere_area * r[inside] ** (N - 1)

    straddle = (r > R - rho_P) & (r < R + rho_P) & (r > 0.0)
    if straddle.any():
        rs = r[straddle]
        cos_cap = np.clip((rho_P * rho_P + rs * rs - R * R)
                          / (2.0 * rho_P * rs), -1.0, 1.0)
        sigma = 2.0 * math.pi ** ((N - 1) / 2.0) / gamma_fn((N - 1) / 2.0)
        out[straddle] = sigma * rs ** (N - 1) \
            * sin_power_integral(N - 2, np.arccos(cos_cap))
    return out


def ball_radial_integral(dom: BallDomain, rho_P: float, g,
                         spec: QuadratureSpec = QuadratureSpec(),
                         breakpoints=()) -> float:
    """int_Omega g(|x - P|) dx, reduced exactly to one dimension.

    ``g`` must be vectorized.  Callers integrating sharply peaked profiles
    should pass the peak scale through ``breakpoints`` so the first panels
    already isolate it.
    """
    upper = dom.R + rho_P
    pts = [p for p in breakpoints if 0.0 < p < upper]
    transition = dom.R - rho_P
    if 0.0 < transition < upper:
        pts.append(transition)

    def integrand(r):
        return g(r) * cap_density(dom, rho_P, r)

    return integrate(integrand, 0.0, upper, spec, breakpoints=pts)


@dataclass(frozen=True)
class InstantonNorms:
    """Norm data of one rescaled bubble restricted to the ball."""

    q_norm_q: float    # |U|_q^q
    crit_norm: float   # |U|_{2*}
    l2_sq: float       # |U|_2^2
    grad_sq: float     # |grad U|_2^2


def _peak_breakpoints(dom: BallDomain, inst: Instanton):
    """Initial split points isolating the bubble peak at r ~ eps."""
    upper = dom.R + inst.center_dist
    pts = []
    e = inst.eps
    while e < upper:
        pts.append(e)
        e *= 8.0
    return tuple(pts)


def instanton_norms(dom: BallDomain, inst: Instanton, q: float,
                    spec: QuadratureSpec = QuadratureSpec()) -> InstantonNorms:
    """q-mass, critical norm, L2 norm and Dirichlet energy over the ball."""
    if inst.center_dist > dom.R:
        raise ValueError("instanton center must lie in the closed ball")
    if inst.N != dom.N:
        raise ValueError("instanton and domain dimensions differ")
    two_star = 2.0 * dom.N / (dom.N - 2.0)
    rho = inst.center_dist
    pts = _peak_breakpoints(dom, inst)

    def u_pow(p):
        def g(r):
            return instanton_profile(inst, r)[0] ** p
        return g

    def du_sq(r):
        return instanton_profile(inst, r)[1] ** 2

    q_norm_q = ball_radial_integral(dom, rho, u_pow(q), spec, pts)
    crit_pow = ball_radial_integral(dom, rho, u_pow(two_star), spec, pts)
    l2_sq = ball_radial_integral(dom, rho, u_pow(2.0), spec, pts)
    grad_sq = ball_radial_integral(dom, rho, du_sq, spec, pts)
    return InstantonNorms(q_norm_q=q_norm_q,
                          crit_norm=crit_pow ** (1.0 / two_star),
                          l2_sq=l2_sq, grad_sq=grad_sq)
