"""Physical operators on the lattice and the GKLS generators built from them."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .fockspace import (
    BasisMismatchError,
    FockBasis,
    MatrixOperator,
    annihilation,
    creation,
    diagonal_operator,
    total_number,
)

DissipatorKind = Literal["poulin", "blp", "none"]


def hamiltonian(basis: FockBasis) -> MatrixOperator:
    """Normal-ordered free Hamiltonian ``sum_j omega_j a_j^dag a_j``."""
    return diagonal_operator(basis, basis.mode_set.omega)


def momentum(basis: FockBasis) -> MatrixOperator:
    return diagonal_operator(basis, basis.mode_set.k)


@dataclass(frozen=True)
class FieldOperators:
    """Site-resolved ``phi``, ``pi`` and the two frequency parts of ``pi``.

    Lists are indexed by site ``s``; ``sites[s] = s*L/M``.
    """

    basis: FockBasis
    sites: np.ndarray
    phi: list[MatrixOperator]
    pi: list[MatrixOperator]
    pi_plus: list[MatrixOperator]
    pi_minus: list[MatrixOperator]


def field_operators(basis: FockBasis, phases: np.ndarray | None = None) -> FieldOperators:
    """Build ``phi(x_s)`` and ``pi(x_s)`` from the mode expansion.

    ``phases`` optionally multiplies each ``a_j`` by a c-number (``a_j^dag`` by
    its conjugate); used to realise mode relabelings such as translations.
    """
    modes = basis.mode_set
    omega, k, L = modes.omega, modes.k, modes.L
    if np.any(omega <= 0):
        raise ValueError("field operators need omega_j > 0 for every mode (massless zero mode present)")
    if phases is None:
        phases = np.ones(modes.M, dtype=complex)
    a = [annihilation(basis, j).entries for j in modes.indices]
    sites = modes.sites
    phi, pi, pi_plus, pi_minus = [], [], [], []
    for x in sites:
        phi_pos = np.zeros((basis.dim, basis.dim), dtype=complex)
        pip = np.zeros_like(phi_pos)
        for p in range(modes.M):
            wave = phases[p] * np.exp(1j * k[p] * x)
            phi_pos += wave / np.sqrt(2 * omega[p] * L) * a[p]
            pip += -1j * np.sqrt(omega[p] / (2 * L)) * wave * a[p]
        phi_x = phi_pos + phi_pos.conj().T
        pim = pip.conj().T
        phi.append(MatrixOperator(basis, phi_x))
        pi_plus.append(MatrixOperator(basis, pip))
        pi_minus.append(MatrixOperator(basis, pim))
        pi.append(MatrixOperator(basis, pip + pim))
    return FieldOperators(basis, sites, phi, pi, pi_plus, pi_minus)


@dataclass(frozen=True)
class DissipatorSpec:
    """Jump operators of a dissipator, rates already folded in."""

    kind: DissipatorKind
    basis: FockBasis
    gamma: float = 0.0
    g: float = 0.0
    jump_ops: tuple[MatrixOperator, ...] = field(default=(), repr=False)


def poulin_spec(basis: FockBasis, gamma: float, ordering: str = "decay") -> DissipatorSpec:
    """One jump operator per mode, ``sqrt(2 gamma omega_j) a_j``.

    ``ordering="heating"`` swaps in ``a_j^dag``; it is an escape hatch for the
    reversed operator ordering and not the physical default.
    """
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    if ordering not in ("decay", "heating"):
        raise ValueError(f"unknown ordering {ordering!r}")
    ladder = annihilation if ordering == "decay" else creation
    modes = basis.mode_set
    ops = tuple(
        np.sqrt(2 * gamma * w) * ladder(basis, j) for j, w in zip(modes.indices, modes.omega)
    )
    return DissipatorSpec("poulin", basis, gamma=gamma, jump_ops=ops)


def blp_spec(basis: FockBasis, g: float) -> DissipatorSpec:
    """Site-local Hermitian jumps ``g sqrt(L/M) phi(x_s)``."""
    if g < 0:
        raise ValueError("g must be non-negative")
    fields = field_operators(basis)
    scale = g * np.sqrt(basis.mode_set.L / basis.M)
    return DissipatorSpec("blp", basis, g=g, jump_ops=tuple(scale * ph for ph in fields.phi))


def no_dissipator(basis: FockBasis) -> DissipatorSpec:
    return DissipatorSpec("none", basis)


class GKLSGenerator:
    """``rho -> -i[H, rho] + sum_n (A rho A^dag - {A^dag A, rho}/2)`` and its adjoint.

    ``H=None`` drops the commutator term. Both actions accept raw arrays or
    :class:`MatrixOperator` and return the same kind.
    """

    def __init__(self, H: MatrixOperator | None, spec: DissipatorSpec):
        basis = spec.basis
        if H is not None and H.basis != basis:
            raise BasisMismatchError("Hamiltonian and dissipator use different bases")
        for A in spec.jump_ops:
            if A.basis != basis:
                raise BasisMismatchError("jump operator on a foreign basis")
        self.basis = basis
        self.H = H
        self.spec = spec
        dim = basis.dim
        h = np.zeros((dim, dim), dtype=complex) if H is None else H.entries
        self._jumps = [A.entries for A in spec.jump_ops]
        self._jumps_dag = [A.conj().T for A in self._jumps]
        loss = sum((Ad @ A for A, Ad in zip(self._jumps, self._jumps_dag)), np.zeros((dim, dim), complex))
        self._h = h
        # effective non-Hermitian Hamiltonian absorbs the anticommutator
        self._heff = h - 0.5j * loss
        self._heff_dag = self._heff.conj().T

    def _unwrap(self, x):
        if isinstance(x, MatrixOperator):
            if x.basis != self.basis:
                raise BasisMismatchError("argument lives on a different basis")
            return x.entries, True
        return np.asarray(x), False

    def _wrap(self, arr, wrapped):
        return MatrixOperator(self.basis, arr) if wrapped else arr

    def apply(self, rho):
        r, wrapped = self._unwrap(rho)
        out = -1j * (self._heff @ r - r @ self._heff_dag)
        for A, Ad in zip(self._jumps, self._jumps_dag):
            out = out + A @ r @ Ad
        return self._wrap(out, wrapped)

    def apply_adjoint(self, X):
        x, wrapped = self._unwrap(X)
        out = 1j * (self._heff_dag @ x - x @ self._heff)
        for A, Ad in zip(self._jumps, self._jumps_dag):
            out = out + Ad @ x @ A
        return self._wrap(out, wrapped)

    def superoperator(self) -> np.ndarray:
        """Matrix of ``apply`` on row-major vectorised ``rho``."""
        dim = self.basis.dim
        eye = np.eye(dim)
        S = -1j * (np.kron(self._heff, eye) - np.kron(eye, self._heff_dag.T))
        for A, Ad in zip(self._jumps, self._jumps_dag):
            S = S + np.kron(A, Ad.T)
        return S


def gkls_generator(H: MatrixOperator | None, spec: DissipatorSpec) -> GKLSGenerator:
    return GKLSGenerator(H, spec)


def blp_vacuum_production_rate(basis: FockBasis, g: float) -> float:
    """``tr(N D_blp(|vac><vac|))`` evaluated by matrix arithmetic."""
    gen = GKLSGenerator(None, blp_spec(basis, g))
    vac = basis.vacuum()
    drho = gen.apply(np.outer(vac, vac.conj()))
    return float(total_number(basis).expect(drho).real)


def blp_rate_mode_sum(mode_set, g: float) -> float:
    """Closed form ``g^2 sum_j 1/(2 omega_j)``."""
    return float(g**2 * np.sum(1.0 / (2.0 * mode_set.omega)))
