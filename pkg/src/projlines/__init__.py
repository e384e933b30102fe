"""Optimal configurations of 2^d - 1 lines and the statistical potential f_{d,r,alpha}."""

__version__ = "0.1.0"

from .energy import Kernel, energy_gradient, kernel_derivative, kernel_value, potential_energy
from .geometry import (Line, LineSet, chordal_distance_sq, line_from_vector, min_pairwise_distance_sq,
                       sample_projected_gaussian, sample_uniform_sphere)
from .io import load_lineset, save_lineset
from .optimize import OptimOptions, minimize_energy, multistart_minimize, packing_optimize
from .symmetry import canonical_config, group_closure, orbit_lines

__all__ = [
    "Kernel", "Line", "LineSet", "OptimOptions", "canonical_config", "chordal_distance_sq",
    "energy_gradient", "group_closure", "kernel_derivative", "kernel_value", "line_from_vector",
    "load_lineset", "min_pairwise_distance_sq", "minimize_energy", "multistart_minimize",
    "orbit_lines", "packing_optimize", "potential_energy", "sample_projected_gaussian",
    "sample_uniform_sphere", "save_lineset",
]
