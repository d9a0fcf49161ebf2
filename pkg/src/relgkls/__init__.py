"""Desk-scale laboratory for a dissipative scalar-field master equation and its boost covariance."""
from .fockspace import FockBasis, MatrixOperator, ModeSet
from .generators import GKLSGenerator, blp_spec, gkls_generator, hamiltonian, momentum, poulin_spec
from .integrator import DensityMatrix, Trajectory, evolve

__all__ = ["FockBasis", "MatrixOperator", "ModeSet", "GKLSGenerator", "blp_spec", "gkls_generator",
           "hamiltonian", "momentum", "poulin_spec", "DensityMatrix", "Trajectory", "evolve"]
__version__ = "0.1.0"
