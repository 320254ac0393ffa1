"""Outer/inner polyhedral approximation of convex vector optimization problems.

The refinement loop picks the outer vertex farthest from the inner
approximation, so the Hausdorff distance between the two is available at
every iteration.
"""
from .cone import Cone, make_cone, natural_cone
from .config import DEFAULT_TOL, Tolerances
from .driver import RunConfig, RunResult, certify, initialize, iterate_vs, run, run_baseline
from .polyhedron import Halfspace, InnerPolyhedron, Polyhedron
from .problem import VCP, check_assumptions, compile_p1, compile_p2, load_problem
from .solvers import derive_dual_weight, project_onto_inner, solve

__all__ = [
    "Cone", "make_cone", "natural_cone", "DEFAULT_TOL", "Tolerances",
    "RunConfig", "RunResult", "certify", "initialize", "iterate_vs", "run", "run_baseline",
    "Halfspace", "InnerPolyhedron", "Polyhedron",
    "VCP", "check_assumptions", "compile_p1", "compile_p2", "load_problem",
    "derive_dual_weight", "project_onto_inner", "solve",
]
