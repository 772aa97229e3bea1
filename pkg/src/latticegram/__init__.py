"""Controllability Gramians of infinite lattice networks."""

from .lattice import (
    LatticeError,
    LatticeSpec,
    UnstableLatticeError,
    build_lattice_spec,
    is_stable,
    lattice_function,
    load_lattice_spec,
    nearest_neighbor_1d,
    nearest_neighbor_2d,
)
from .metrics import OutputGramian, OutputUncontrollableError
from .nn1d import NN1DParams
from .quadrature import QuadratureConfig
from .spectral import gramian_entry_ss, gramian_entry_t, output_gramian

__all__ = [
    "LatticeError",
    "LatticeSpec",
    "NN1DParams",
    "OutputGramian",
    "OutputUncontrollableError",
    "QuadratureConfig",
    "UnstableLatticeError",
    "build_lattice_spec",
    "gramian_entry_ss",
    "gramian_entry_t",
    "is_stable",
    "lattice_function",
    "load_lattice_spec",
    "nearest_neighbor_1d",
    "nearest_neighbor_2d",
    "output_gramian",
]

__version__ = "0.1.0"
