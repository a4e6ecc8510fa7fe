"""Rotationally symmetric Killing graphs of constant (weighted) mean curvature."""
from .constructor import (
    GraphProfile,
    GraphSolution,
    build_profile_ode,
    build_profile_quadrature,
    corollary_profile,
    flux_integral,
    solve_radius,
)
from .expr import ExprAst, evaluate, parse
from .geometry import ModelManifold, area_density, ball_volume, isoperimetric_ratio, make_model
from .quadrature import QuadratureConfig
from .verifier import BoundParams, CheckResult, VerificationReport

__version__ = "0.1.0"

__all__ = [
    "BoundParams",
    "CheckResult",
    "ExprAst",
    "GraphProfile",
    "GraphSolution",
    "ModelManifold",
    "QuadratureConfig",
    "VerificationReport",
    "area_density",
    "ball_volume",
    "build_profile_ode",
    "build_profile_quadrature",
    "corollary_profile",
    "evaluate",
    "flux_integral",
    "isoperimetric_ratio",
    "make_model",
    "parse",
    "solve_radius",
]
