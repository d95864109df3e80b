"""Occupation-time functionals of rational-jump Levy diffusions.

Closed-form Wiener-Hopf factors, occupation-weighted joint laws at an
exponential horizon, a spectrally negative scale-function route, real-axis
Laplace inversion for fixed horizons, and a Monte Carlo oracle.
"""

from .errors import (
    DegenerateConfiguration,
    InversionDomainError,
    NearMultipleRoots,
    NumericalError,
    SojournError,
    ValidationError,
)
from .expmix import ExpMixFunction, TwoSidedMixture
from .inversion import TransformHandle, fixed_time_expectation, invert, stehfest_weights
from .model import (
    JumpComponent,
    LaplaceExponent,
    RationalJumpModel,
    build_exponent,
    dual_model,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
)
from .occupation import (
    FKernel,
    OccupationKernels,
    OccupationSolution,
    f_kernel,
    hq_coefficients,
    joint_density,
    killed_tail,
    kq_density,
    marginal_density,
    occupation_kernels,
    occupation_lt,
    residue_expansion,
    solve_occupation,
    v_q,
)
from .scale_engine import (
    ScaleFunction,
    SnOccupationDensity,
    phi,
    scale_w,
    sn_density,
    sn_joint_density,
    sn_kernels,
)
from .wiener_hopf import (
    RootSystem,
    WienerHopfFactors,
    factors,
    first_passage_down,
    first_passage_up,
    solve_factors,
    solve_roots,
    wh_product_residual,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateConfiguration",
    "ExpMixFunction",
    "FKernel",
    "InversionDomainError",
    "JumpComponent",
    "LaplaceExponent",
    "NearMultipleRoots",
    "NumericalError",
    "OccupationKernels",
    "OccupationSolution",
    "RationalJumpModel",
    "RootSystem",
    "ScaleFunction",
    "SnOccupationDensity",
    "SojournError",
    "TransformHandle",
    "TwoSidedMixture",
    "ValidationError",
    "WienerHopfFactors",
    "build_exponent",
    "dual_model",
    "f_kernel",
    "factors",
    "first_passage_down",
    "first_passage_up",
    "fixed_time_expectation",
    "hq_coefficients",
    "invert",
    "joint_density",
    "killed_tail",
    "kq_density",
    "load_model",
    "marginal_density",
    "model_from_dict",
    "model_to_dict",
    "occupation_kernels",
    "occupation_lt",
    "phi",
    "residue_expansion",
    "save_model",
    "scale_w",
    "sn_density",
    "sn_joint_density",
    "sn_kernels",
    "solve_factors",
    "solve_occupation",
    "solve_roots",
    "stehfest_weights",
    "v_q",
    "wh_product_residual",
]
