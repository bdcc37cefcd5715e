"""Filippov dynamics of a planar fold-saddle family: switching-line regions,
sliding motion, return maps, canard cycles and bifurcation-case tables."""
from __future__ import annotations

from .bifurcation import (
    Boundaries,
    CaseLabel,
    Diagram,
    Regime,
    TopologicalClass,
    alpha0,
    boundaries,
    classify_case,
    enumerate_cases,
    find_cycle_fold,
    lambda0,
    locate_cycle_fold,
    mu0,
    solve_connection_lambda,
    sweep_grid,
    sweep_sphere,
    topological_class,
)
from .family import FamilyParams, FilippovSystem, KeyPoints, TauKind, Window, key_points, make_system
from .flow import Trajectory, integrate, return_map, return_map_derivative, x_return, y_return
from .sigma import classify_point, direction, pseudo_equilibria
from .structures import CanardCycle, SigmaGraph, connection_defect, find_canard_cycles, find_sigma_graph

__version__ = "0.1.0"

__all__ = [
    "Boundaries",
    "CanardCycle",
    "CaseLabel",
    "Diagram",
    "FamilyParams",
    "FilippovSystem",
    "KeyPoints",
    "Regime",
    "SigmaGraph",
    "TauKind",
    "TopologicalClass",
    "Trajectory",
    "Window",
    "alpha0",
    "boundaries",
    "classify_case",
    "classify_point",
    "connection_defect",
    "direction",
    "enumerate_cases",
    "find_canard_cycles",
    "find_cycle_fold",
    "find_sigma_graph",
    "integrate",
    "key_points",
    "lambda0",
    "locate_cycle_fold",
    "make_system",
    "mu0",
    "pseudo_equilibria",
    "return_map",
    "return_map_derivative",
    "solve_connection_lambda",
    "sweep_grid",
    "sweep_sphere",
    "topological_class",
    "x_return",
    "y_return",
]
