"""sobolevlab: desk-scale numerics for a family of sharp Sobolev
inequalities on balls."""

__version__ = "0.1.0"

from .constants import (ConstantsTable, Exponents, closed_form_constants,
                        make_exponents, oracle_instanton_energy,
                        oracle_instanton_qnorm)
from .fields import (FunctionalReport, ProfileField, RadialGridField,
                     critical_alpha, euler_residual_constant,
                     euler_residual_radial, functionals, norms)
from .geometry import (BallDomain, Instanton, ball_radial_integral,
                       cap_density, instanton_norms, instanton_profile)
from .numerics import (ConvergenceError, OptimizerSpec, QuadratureSpec,
                       find_root, gamma_fn, integrate, minimize)

__all__ = [
    "__version__",
    "BallDomain", "ConstantsTable", "ConvergenceError", "Exponents",
    "FunctionalReport", "Instanton", "OptimizerSpec", "ProfileField",
    "QuadratureSpec", "RadialGridField",
    "ball_radial_integral", "cap_density", "closed_form_constants",
    "critical_alpha", "euler_residual_constant", "euler_residual_radial",
    "find_root", "functionals", "gamma_fn", "instanton_norms",
    "instanton_profile", "integrate", "make_exponents", "minimize",
    "norms", "oracle_instanton_energy", "oracle_instanton_qnorm",
]
