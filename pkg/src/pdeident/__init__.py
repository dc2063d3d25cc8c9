"""Structural and practical identifiability of 1D parabolic PDE models."""
from .classify import (
    PairClassification,
    Verdict,
    classify_pair,
    construct_nonidentifiable,
    indistinguishable_set,
)
from .elliptic import Regime, classify_nonlinear_pair, shoot_count
from .errors import IdentError, NumericalError, ValidationError
from .infer import NoiseModel, gaussian_ic_coefficients, generate_dataset, profile_likelihood
from .operators import BoundaryCondition, OperatorParams, eigenpairs
from .solve import EigenExpansionIC, solve_linear_fd, solve_linear_spectral, solve_nonlinear_fd

__version__ = "0.1.0"

__all__ = [
    "BoundaryCondition",
    "EigenExpansionIC",
    "IdentError",
    "NoiseModel",
    "NumericalError",
    "OperatorParams",
    "PairClassification",
    "Regime",
    "ValidationError",
    "Verdict",
    "classify_nonlinear_pair",
    "classify_pair",
    "construct_nonidentifiable",
    "eigenpairs",
    "gaussian_ic_coefficients",
    "generate_dataset",
    "indistinguishable_set",
    "profile_likelihood",
    "shoot_count",
    "solve_linear_fd",
    "solve_linear_spectral",
    "solve_nonlinear_fd",
]
