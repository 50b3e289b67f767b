"""Pricing engine for options on the accumulated marks of a
self-exciting marked point process.

Modules
-------
marks      Gamma-mixture mark laws, exponential tilting, stability.
quadrature Generalized Gauss-Laguerre rules and the jump-gain operator.
interp     Shape-preserving cubic and linear interpolation.
pide       Upwind-implicit / explicit-jump modal solver.
bromwich   Damped-transform inversion and the full pricing pipeline.
mc         Exact path simulation and Monte Carlo benchmarks.
calib      Mark-law EM fitting and pricing-tilt calibration.
config     Flat-file run configuration.
cli        Batch drivers emitting CSV tables.
"""

from .backend import KERNEL_NAME
from .bromwich import (BromwichSpec, CappedCallPayoff, PriceResult,
                       capped_call_transform, invert_price,
                       numeric_transform, price, price_profile)
from .calib import (EMConfig, EMResult, ThetaCalibConfig, ThetaCalibResult,
                    calibrate_theta, em_fit, newton_gamma_shape)
from .config import ConfigError, RunConfig, load_config
from .errors import AccumarkError
from .marks import (EsscherParams, GammaMixture, ModelParams,
                    StabilityReport, check_stability, complex_mgf,
                    esscher_tilt, mean, mgf, weighted_tv_bound)
from .mc import (MCConfig, MCResult, PathResult, price_capped_call_mc,
                 price_swap_mc, simulate_path)
from .pide import (ModalSurface, SolverGrid, TriDiag, build_implicit_matrix,
                   dominance_margins, lipschitz_constant, solve_modal,
                   thomas_solve)
from .quadrature import (GLRule, boundary_hit_ratio, gauss_laguerre,
                         jump_gain, rules_for_mixture)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_NAME",
    "AccumarkError",
    "GammaMixture",
    "EsscherParams",
    "ModelParams",
    "StabilityReport",
    "esscher_tilt",
    "mgf",
    "complex_mgf",
    "mean",
    "check_stability",
    "weighted_tv_bound",
    "GLRule",
    "gauss_laguerre",
    "rules_for_mixture",
    "jump_gain",
    "boundary_hit_ratio",
    "SolverGrid",
    "TriDiag",
    "ModalSurface",
    "build_implicit_matrix",
    "dominance_margins",
    "thomas_solve",
    "solve_modal",
    "lipschitz_constant",
    "BromwichSpec",
    "CappedCallPayoff",
    "PriceResult",
    "capped_call_transform",
    "numeric_transform",
    "invert_price",
    "price",
    "price_profile",
    "MCConfig",
    "MCResult",
    "PathResult",
    "simulate_path",
    "price_capped_call_mc",
    "price_swap_mc",
    "EMConfig",
    "EMResult",
    "ThetaCalibConfig",
    "ThetaCalibResult",
    "newton_gamma_shape",
    "em_fit",
    "calibrate_theta",
    "ConfigError",
    "RunConfig",
    "load_config",
    "__version__",
]
