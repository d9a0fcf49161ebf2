"""Numeric image of symbolic expressions on the periodic lattice.

    int dk      -> (2 pi / L) sum_j
    a(k)        -> sqrt(L / 2 pi) a_j
    delta(k, q) -> (L / 2 pi) delta_jq,      delta(0) -> L / 2 pi

so that ``[a(k), a^dag(q)] = delta(k - q)`` maps onto ``[a_j, a_q^dag] = delta_jq``.
Products are multiplied in the order stored, which lets raw (not yet
normal-ordered) expressions be compared with their canonical forms.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..fockspace import FockBasis, MatrixOperator, annihilation, creation
from .expr import AlgebraError, Factor, OpExpr, Term


@dataclass(frozen=True)
class LatticeSuperoperator:
    """``rho -> sum_n c_n L_n rho R_n`` on a Fock basis."""

    basis: FockBasis
    pairs: tuple[tuple[np.ndarray, np.ndarray], ...]

    def apply(self, rho) -> np.ndarray:
        r = rho.entries if isinstance(rho, MatrixOperator) else np.asarray(rho)
        out = np.zeros((self.basis.dim, self.basis.dim), dtype=complex)
        for left, right in self.pairs:
            out += left @ r @ right
        return out

    def matrix(self) -> np.ndarray:
        """Row-major superoperator, ``vec(L rho R) = (L kron R^T) vec(rho)``."""
        D = self.basis.dim
        out = np.zeros((D * D, D * D), dtype=complex)
        for left, right in self.pairs:
            out += np.kron(left, right.T)
        return out


class _Ladders:
    def __init__(self, basis: FockBasis):
        self.basis = basis
        self.ms = basis.mode_set
        self.a = {int(j): annihilation(basis, int(j)).entries for j in self.ms.indices}
        self.ad = {int(j): creation(basis, int(j)).entries for j in self.ms.indices}
        self.eye = np.eye(basis.dim, dtype=complex)

    def product(self, prod: tuple[Factor, ...], assign: dict[str, int]) -> np.ndarray:
        out = self.eye
        for f in prod:
            out = out @ (self.ad if f.dagger else self.a)[assign[f.var]]
        return out


def _mode_values(ms, assign: dict[str, int]):
    momenta = {v: ms.k_of(j) for v, j in assign.items()}
    omegas = {v: ms.omega_of(j) for v, j in assign.items()}
    return momenta, omegas


def _term_weight(t: Term, assign: dict[str, int], ms, params) -> complex:
    dens = ms.L / (2 * math.pi)
    for x, y in t.deltas:
        if assign[x] != assign[y]:
            return 0.0
    momenta, omegas = _mode_values(ms, assign)
    try:
        c = t.coeff.evaluate(momenta, omegas, params)
    except (TypeError, ZeroDivisionError):
        c = complex("nan")
    if not np.isfinite(c):
        raise ZeroDivisionError(f"coefficient {t.coeff.text()} is singular at modes {assign}")
    n_ops = len(t.factors)
    return (c * dens ** (len(t.deltas) + t.zero_deltas + 0.5 * n_ops)
            * (1 / dens) ** len(t.bound))


def evaluate_on_lattice(e: OpExpr, basis: FockBasis, params: dict[str, float] | None = None,
                        assignment: dict[str, int] | None = None):
    """``MatrixOperator`` for plain expressions, :class:`LatticeSuperoperator` for pairs.

    Free momenta must be pinned to mode indices through ``assignment``; the mass
    is taken from the basis, ``gamma`` and ``g`` from ``params``.
    """
    params = dict(params or {})
    params.setdefault("m", basis.mode_set.m)
    assignment = dict(assignment or {})
    lad = _Ladders(basis)
    ms = basis.mode_set
    modes = [int(j) for j in ms.indices]
    D = basis.dim
    if any(f.deriv for t in e.terms for f in t.factors):
        raise AlgebraError("momentum derivatives have no lattice image; integrate them away first")
    plain = np.zeros((D, D), dtype=complex)
    pairs: dict = {}
    for t in e.terms:
        missing = t.free_vars() - set(assignment)
        if missing:
            raise AlgebraError(f"free momenta {sorted(missing)} need a mode assignment")
        for values in itertools.product(modes, repeat=len(t.bound)):
            assign = {**assignment, **dict(zip(t.bound, values))}
            w = _term_weight(t, assign, ms, params)
            if w == 0:
                continue
            left = lad.product(t.left, assign)
            if t.is_pair:
                key = (tuple((f.dagger, assign[f.var]) for f in t.left),
                       tuple((f.dagger, assign[f.var]) for f in t.right))
                if key in pairs:
                    pairs[key][0] += w
                else:
                    pairs[key] = [w, left, lad.product(t.right, assign)]
            else:
                plain += w * left
    if e.is_pair:
        return LatticeSuperoperator(basis, tuple((c * L, R) for c, L, R in pairs.values() if c != 0))
    return MatrixOperator(basis, plain)


def lattice_difference(x: OpExpr, y: OpExpr, basis: FockBasis, params: dict[str, float] | None = None,
                       free_vars: tuple[str, ...] | None = None) -> float:
    """Max entrywise deviation between the lattice images of ``x`` and ``y``.

    Free momenta are run over every assignment of mode indices; superoperators
    are compared through their full matrices.
    """
    names = sorted(set(free_vars or ()) | x.free_vars() | y.free_vars())
    modes = [int(j) for j in basis.mode_set.indices]
    worst = 0.0
    for values in itertools.product(modes, repeat=len(names)):
        assign = dict(zip(names, values))
        ex = evaluate_on_lattice(x, basis, params, assign)
        ey = evaluate_on_lattice(y, basis, params, assign)
        if isinstance(ex, LatticeSuperoperator) or isinstance(ey, LatticeSuperoperator):
            zero = np.zeros((basis.dim**2,) * 2)
            mx = ex.matrix() if isinstance(ex, LatticeSuperoperator) else zero
            my = ey.matrix() if isinstance(ey, LatticeSuperoperator) else zero
            dev = float(np.max(np.abs(mx - my)))
        else:
            dev = float(np.max(np.abs(ex.entries - ey.entries), initial=0.0))
        worst = max(worst, dev)
    return worst
