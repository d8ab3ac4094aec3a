"""Numerical enumeration of planar central configurations for homogeneous potentials."""

__version__ = "0.1.0"

from .bounds import BoundsReport, bounds_report, lower_bound, poincare_polynomial
from .classify import CentralConfigClass, classify_degeneracy, fingerprint, same_class
from .fewnomial import build_system, evaluate_system, khovanskii_bound, u_of_n
from .geometry import PotentialParams, cc_residual, normalize_lambda
from .solver import SolverSettings, enumerate_classes, refine, solve_collinear

__all__ = [
    "BoundsReport",
    "CentralConfigClass",
    "PotentialParams",
    "SolverSettings",
    "bounds_report",
    "build_system",
    "cc_residual",
    "classify_degeneracy",
    "enumerate_classes",
    "evaluate_system",
    "fingerprint",
    "khovanskii_bound",
    "lower_bound",
    "normalize_lambda",
    "poincare_polynomial",
    "refine",
    "same_class",
    "solve_collinear",
    "u_of_n",
]
