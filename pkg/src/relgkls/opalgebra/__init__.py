"""Symbolic normal-ordered boson algebra with the boost rule and identity checks."""
from .boost import SIGMA, boost_commutator, integrate_by_parts, leibniz
from .expr import (AlgebraError, OpExpr, adjoint, annihilator, commutator, creator, delta, derivative,
                   integrate, normal_order, tensor_pair, to_text)
from .identities import BUILTIN_CORPUS, IdentityReport, check_identity, check_text, run_corpus
from .lattice import LatticeSuperoperator, evaluate_on_lattice, lattice_difference
from .parser import ParseError, parse, parse_identity_file
from .scalar import Scalar

__all__ = [
    "SIGMA", "boost_commutator", "integrate_by_parts", "leibniz", "AlgebraError", "OpExpr", "adjoint",
    "annihilator", "commutator", "creator", "delta", "derivative", "integrate", "normal_order",
    "tensor_pair", "to_text", "BUILTIN_CORPUS", "IdentityReport", "check_identity", "check_text",
    "run_corpus", "LatticeSuperoperator", "evaluate_on_lattice", "lattice_difference", "ParseError",
    "parse", "parse_identity_file", "Scalar",
]
