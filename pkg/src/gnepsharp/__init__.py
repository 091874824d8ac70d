"""Regularized Nikaido-Isoda gap functions, weak sharpness diagnostics and a
proximal point solver for jointly convex GNEPs with quadratic losses."""

__version__ = "0.1.0"

from .diagnostics import SharpnessReport, check_equivalence, diagnose, gamma_from_cones
from .geometry import Box, PolyhedralCone, Polytope, Singleton, normal_cone, tangent_cone
from .instances import Instance, InstanceError, generate_instance, load_instance, parse_instance
from .model import QuadraticGame, SmoothGame, build_quadratic_game
from .nikaido import RegularizedEvaluator, best_response, gap_Va, grad_Va, ni_psi, reg_psi_a
from .ppa import PPAConfig, fejer_check, iteration_bound, ppa_run
from .vi import solve_vi_extragradient, vi_residual

__all__ = [
    "Box", "Instance", "InstanceError", "PPAConfig", "PolyhedralCone", "Polytope", "QuadraticGame",
    "RegularizedEvaluator", "SharpnessReport", "Singleton", "SmoothGame", "best_response",
    "build_quadratic_game", "check_equivalence", "diagnose", "fejer_check", "gamma_from_cones",
    "gap_Va", "generate_instance", "grad_Va", "iteration_bound", "load_instance", "ni_psi",
    "normal_cone", "parse_instance", "ppa_run", "reg_psi_a", "solve_vi_extragradient",
    "tangent_cone", "vi_residual",
]
