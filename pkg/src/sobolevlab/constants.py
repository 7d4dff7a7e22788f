"""Critical exponents and the closed-form constants attached to them.

For dimension N and an exponent q between 2N/(N-1) and 2(N-1)/(N-2) the
family is parametrized by

    s = 2 - N + q / (2* - q),        t = (2 / (N-2)) / (2* - q),

with 2* = 2N/(N-2) the critical Sobolev exponent.  The constants below
(the best Sobolev constant S, the sphere area omega_N, the whole-space
q-mass B of the extremal bubble, and the curvature coefficient A) all have
Gamma-function closed forms; :func:`oracle_instanton_energy` and
:func:`oracle_instanton_qnorm` recompute the two nontrivial ones by direct
radial quadrature so the formulas never go unchecked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import QuadratureSpec, gamma_fn, integrate, power_tail_cutoff

__all__ = [
    "Exponents",
    "ConstantsTable",
    "make_exponents",
    "closed_form_constants",
    "oracle_instanton_energy",
    "oracle_instanton_qnorm",
    "bubble_scale",
    "Q_KEYWORDS",
]

Q_KEYWORDS = ("two_sharp", "two_flat", "midpoint")


def bubble_scale(N: int) -> float:
    """The concentration scale N(N-2) appearing inside the extremal bubble."""
    return float(N * (N - 2))


@dataclass(frozen=True)
class Exponents:
    """Dimension, exponent q, and everything derived from the pair."""

    N: int
    q: float
    two_star: float
    two_sharp: float
    two_flat: float
    s: float
    t: float
    theory_out_of_range: bool = False


def _resolve_q(q, two_sharp: float, two_flat: float) -> float:
    if isinstance(q, str):
        if q == "two_sharp":
            return two_sharp
        if q == "two_flat":
            return two_flat
        if q == "midpoint":
            return 0.5 * (two_sharp + two_flat)
        try:
            return float(q)
        except ValueError:
            raise ValueError(
                f"unknown q keyword {q!r}; expected one of {Q_KEYWORDS} "
                "or a number") from None
    return float(q)


def make_exponents(N: int, q, *, allow_low_dimension: bool = False) -> Exponents:
    """Build the exponent table for ``(N, q)``.

    ``q`` may be a number or one of the keywords ``two_sharp``,
    ``two_flat``, ``midpoint`` (resolved exactly, so the endpoint values of
    s and t come out exact).  Dimensions 3 and 4 sit outside the theory's
    hypotheses and are only admitted behind ``allow_low_dimension``; the
    returned table then carries ``theory_out_of_range=True``.
    """
    if not isinstance(N, (int, np.integer)):
        raise ValueError(f"dimension N must be an integer, got {N!r}")
    N = int(N)
    if N < 3:
        raise ValueError(f"dimension N must be at least 3, got {N}")
    out_of_range = N < 5
    if out_of_range and not allow_low_dimension:
        raise ValueError(
            f"N={N} is outside the supported range N >= 5; "
            "pass allow_low_dimension=True to explore it anyway")

    two_star = 2.0 * N / (N - 2.0)
    two_sharp = 2.0 * N / (N - 1.0)
    two_flat = 2.0 * (N - 1.0) / (N - 2.0)
    q = _resolve_q(q, two_sharp, two_flat)
    if not (two_sharp <= q <= two_flat):
        raise ValueError(
            f"q={q} out of range for N={N}: valid interval is "
            f"[{two_sharp}, {two_flat}]")

    if q == two_sharp:
        s, t = 0.0, (N - 1.0) / N
    elif q == two_flat:
        s, t = 1.0, 1.0
    else:
        s = 2.0 - N + q / (two_star - q)
        t = (2.0 / (N - 2.0)) / (two_star - q)
    return Exponents(N=N, q=q, two_star=two_star, two_sharp=two_sharp,
                     two_flat=two_flat, s=s, t=t,
                     theory_out_of_range=out_of_range)


@dataclass(frozen=True)
class ConstantsTable:
    """Closed-form constants for an exponent table.

    ``S`` is the best Sobolev constant of R^N, ``S_pow_N2`` its N/2 power
    (the energy of one whole bubble), ``omega_N`` the area of the unit
    sphere S^{N-1}, ``B`` the whole-space q-mass of the bubble, ``A`` the
    coefficient of the mean-curvature term in the boundary energy
    expansion, and ``threshold`` the half-bubble level S / 2^{2/N}.
    """

    S: float
    S_pow_N2: float
    omega_N: float
    B: float
    A: float
    threshold: float


def closed_form_constants(exp: Exponents) -> ConstantsTable:
    N = exp.N
    lam = bubble_scale(N)
    s_pow = (math.pi ** ((N + 1) / 2.0) / 2.0 ** (N - 1)
             * lam ** (N / 2.0) / gamma_fn((N + 1) / 2.0))
    S = s_pow ** (2.0 / N)
    omega_N = 2.0 * math.pi ** (N / 2.0) / gamma_fn(N / 2.0)

    kappa = (N - 2.0) * exp.q / 2.0
    if kappa - N / 2.0 <= 0.0:
        raise ValueError(
            f"B(q, N) undefined: (N-2)q/2 - N/2 = {kappa - N / 2.0} <= 0 "
            f"for N={N}, q={exp.q}")
    B = (math.pi ** (N / 2.0) * lam ** (N / 2.0)
         * gamma_fn(kappa - N / 2.0) / gamma_fn(kappa))

    if N <= 3:
        raise ValueError(f"A(N) has a Gamma pole at N={N}")
    A = ((N - 1.0) / N / math.sqrt(math.pi)
         * gamma_fn((N - 3.0) / 2.0) / gamma_fn((N - 2.0) / 2.0))

    return ConstantsTable(S=S, S_pow_N2=s_pow, omega_N=omega_N, B=B, A=A,
                          threshold=S * 2.0 ** (-2.0 / N))


def _coarse_scale(f, lam: float) -> float:
    """Rough magnitude of an integral of f, used only to set tolerances."""
    probe = integrate(f, 0.0, 20.0 * math.sqrt(lam),
                      QuadratureSpec(abs_tol=1e-6, rel_tol=1e-6),
                      breakpoints=(math.sqrt(lam),))
    return max(abs(probe), 1e-12)


def oracle_instanton_energy(N: int, spec: QuadratureSpec = QuadratureSpec()) -> float:
    """Whole-space Dirichlet energy of the bubble by radial quadrature.

    Computes omega_N * int_0^inf U'(r)^2 r^{N-1} dr with
    U(r) = (lam / (lam + r^2))^{(N-2)/2}, lam = N(N-2).  Matches
    ``ConstantsTable.S_pow_N2`` to within the quadrature tolerance.
    """
    if N < 5:
        raise ValueError("oracle_instanton_energy requires N >= 5")
    lam = bubble_scale(N)
    c2 = (N - 2.0) ** 2 * lam ** (N - 2.0)

    def integrand(r):
        return c2 * r ** (N + 1) / (lam + r * r) ** N

    omega_N = 2.0 * math.pi ** (N / 2.0) / gamma_fn(N / 2.0)
    scale = _coarse_scale(integrand, lam)
    abs_tol = min(spec.abs_tol, spec.rel_tol * scale)
    # Integrand ~ c2 * r^{1-N} for large r.
    cutoff = power_tail_cutoff(c2, N - 1.0, abs_tol)
    run = QuadratureSpec(abs_tol=abs_tol, rel_tol=spec.rel_tol,
                         max_subdivisions=spec.max_subdivisions,
                         tail_cutoff=max(cutoff, 10.0 * math.sqrt(lam)))
    return omega_N * integrate(integrand, 0.0, math.inf, run,
                               breakpoints=(math.sqrt(lam),))


def oracle_instanton_qnorm(N: int, q: float,
                           spec: QuadratureSpec = QuadratureSpec()) -> float:
    """Whole-space q-mass of the bubble by radial quadrature.

    Computes omega_N * int_0^inf U(r)^q r^{N-1} dr, finite exactly when
    q > N/(N-2).  Matches ``ConstantsTable.B`` to within the quadrature
    tolerance (and the bubble energy when q = 2*).
    """
    q = float(q)
    if q * (N - 2.0) <= N:
        raise ValueError(
            f"q-mass diverges: need q > N/(N-2) = {N / (N - 2.0)}, got q={q}")
    lam = bubble_scale(N)
    cq = lam ** (q * (N - 2.0) / 2.0)

    def integrand(r):
        return cq * r ** (N - 1) / (lam + r * r) ** (q * (N - 2.0) / 2.0)

    omega_N = 2.0 * math.pi ** (N / 2.0) / gamma_fn(N / 2.0)
    scale = _coarse_scale(integrand, lam)
    abs_tol = min(spec.abs_tol, spec.rel_tol * scale)
    # Integrand ~ cq * r^{N-1-(N-2)q} for large r.
    power = (N - 2.0) * q - (N - 1.0)
    cutoff = power_tail_cutoff(cq, power, abs_tol)
    run = QuadratureSpec(abs_tol=abs_tol, rel_tol=spec.rel_tol,
                         max_subdivisions=spec.max_subdivisions,
                         tail_cutoff=max(cutoff, 10.0 * math.sqrt(lam)))
    return omega_N * integrate(integrand, 0.0, math.inf, run,
                               breakpoints=(math.sqrt(lam),))
