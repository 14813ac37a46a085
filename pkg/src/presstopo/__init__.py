"""Density-based topology optimization of 2-D structures under design-dependent fluidic pressure loads."""
from .darcy import FlowParams, PressureBC
from .driver import Model, OptimizationResult, optimize
from .elasticity import MaterialParams
from .problems import ProblemSpec, build_custom, make_arch, make_chamber, make_piston, make_problem

__all__ = [
    "FlowParams", "MaterialParams", "Model", "OptimizationResult", "PressureBC", "ProblemSpec",
    "build_custom", "make_arch", "make_chamber", "make_piston", "make_problem", "optimize",
]
__version__ = "0.1.0"
