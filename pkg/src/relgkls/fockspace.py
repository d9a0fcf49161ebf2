"""Momentum lattice, truncated multimode Fock basis and ladder matrices.

Everything lives in 1+1 dimensions on a periodic box of length ``L``. Modes
are labelled by ``j = -J..J`` with ``k_j = 2*pi*j/L``. Basis states are
occupation vectors ``(n_{-J}, ..., n_J)`` enumerated with mode ``-J`` varying
slowest, i.e. the matrix of a single-mode operator on mode ``j`` is
``I ⊗ ... ⊗ op ⊗ ... ⊗ I`` with the factor for ``-J`` on the far left.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class BasisMismatchError(ValueError):
    """Raised when operators defined on different Fock bases are combined."""


@dataclass(frozen=True)
class ModeSet:
    """Discrete momenta ``k_j`` and frequencies ``omega_j`` of a periodic box."""

    L: float
    J: int
    m: float

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"box length must be positive, got {self.L}")
        if int(self.J) != self.J or self.J < 0:
            raise ValueError(f"max_index J must be a non-negative integer, got {self.J}")
        if self.m < 0:
            raise ValueError(f"mass must be non-negative, got {self.m}")

    @property
    def M(self) -> int:
        return 2 * self.J + 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.J, self.J + 1)

    @property
    def k(self) -> np.ndarray:
        return 2.0 * np.pi * self.indices / self.L

    @property
    def omega(self) -> np.ndarray:
        return np.sqrt(self.k**2 + self.m**2)

    def position(self, j: int) -> int:
        """Array position of mode ``j`` (0 for ``j = -J``)."""
        if int(j) != j or not -self.J <= j <= self.J:
            raise IndexError(f"mode index {j} outside [-{self.J}, {self.J}]")
        return int(j) + self.J

    def k_of(self, j: int) -> float:
        return float(self.k[self.position(j)])

    def omega_of(self, j: int) -> float:
        return float(self.omega[self.position(j)])

    @property
    def sites(self) -> np.ndarray:
        """Lattice positions ``x_s = s*L/M`` dual to the momentum lattice."""
        return np.arange(self.M) * self.L / self.M


@dataclass(frozen=True)
class FockBasis:
    mode_set: ModeSet
    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"cutoff n_max must be a positive integer, got {self.n_max}")

    @property
    def M(self) -> int:
        return self.mode_set.M

    @property
    def dim(self) -> int:
        return (self.n_max + 1) ** self.M

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_max + 1,) * self.M

    def index(self, occupations: Sequence[int]) -> int:
        occ = tuple(int(n) for n in occupations)
        if len(occ) != self.M:
            raise ValueError(f"expected {self.M} occupations, got {len(occ)}")
        if any(n < 0 or n > self.n_max for n in occ):
            raise ValueError(f"occupations {occ} exceed cutoff {self.n_max}")
        return int(np.ravel_multi_index(occ, self.shape))

    def occupations(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.dim:
            raise IndexError(f"basis index {index} outside [0, {self.dim})")
        return tuple(int(n) for n in np.unravel_index(index, self.shape))

    @cached_property
    def occupation_table(self) -> np.ndarray:
        """``(D, M)`` integer array; row ``i`` is the occupation vector of state ``i``."""
        grids = np.indices(self.shape).reshape(self.M, -1)
        return grids.T.copy()

    def basis_vector(self, occupations: Sequence[int]) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(occupations)] = 1.0
        return v

    def vacuum(self) -> np.ndarray:
        return self.basis_vector([0] * self.M)

    def below_edge(self) -> np.ndarray:
        """Boolean mask of states with every occupation strictly below ``n_max``."""
        return np.all(self.occupation_table < self.n_max, axis=1)

    def embed(self, op: np.ndarray, j: int) -> np.ndarray:
        """Lift a single-mode ``(n_max+1)``-square matrix to mode ``j``."""
        pos = self.mode_set.position(j)
        eye = np.eye(self.n_max + 1)
        out = np.ones((1, 1))
        for p in range(self.M):
            out = np.kron(out, op if p == pos else eye)
        return out


@dataclass(frozen=True, eq=False)
class MatrixOperator:
    """Dense complex matrix on a :class:`FockBasis`.

    Arithmetic between two operators requires equal bases.
    """

    basis: FockBasis
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=complex)
        if arr.shape != (self.basis.dim, self.basis.dim):
            raise ValueError(f"entries of shape {arr.shape} do not match dimension {self.basis.dim}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    def _check(self, other: "MatrixOperator") -> np.ndarray:
        if not isinstance(other, MatrixOperator):
            return NotImplemented
        if other.basis != self.basis:
            raise BasisMismatchError("operators live on different Fock bases")
        return other.entries

    def __add__(self, other):
        rhs = self._check(other)
        if rhs is NotImplemented:
            return rhs
        return MatrixOperator(self.basis, self.entries + rhs)

    def __sub__(self, other):
        rhs = self._check(other)
        if rhs is NotImplemented:
            return rhs
        return MatrixOperator(self.basis, self.entries - rhs)

    def __matmul__(self, other):
        rhs = self._check(other)
        if rhs is NotImplemented:
            return rhs
        return MatrixOperator(self.basis, self.entries @ rhs)

    def __mul__(self, scalar):
        if isinstance(scalar, MatrixOperator):
            return NotImplemented
        return MatrixOperator(self.basis, complex(scalar) * self.entries)

    __rmul__ = __mul__

    def __neg__(self):
        return MatrixOperator(self.basis, -self.entries)

    @property
    def dag(self) -> "MatrixOperator":
        return MatrixOperator(self.basis, self.entries.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def expect(self, rho) -> complex:
        """``tr(self @ rho)`` for a MatrixOperator or raw array ``rho``."""
        r = self._check(rho) if isinstance(rho, MatrixOperator) else np.asarray(rho)
        return complex(np.einsum("ij,ji->", self.entries, r))

    def allclose(self, other: "MatrixOperator", atol: float = 1e-12) -> bool:
        rhs = self._check(other)
        return bool(np.max(np.abs(self.entries - rhs), initial=0.0) <= atol)


def commutator(x: MatrixOperator, y: MatrixOperator) -> MatrixOperator:
    return x @ y - y @ x


def identity(basis: FockBasis) -> MatrixOperator:
    return MatrixOperator(basis, np.eye(basis.dim))


def _ladder(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1)


def annihilation(basis: FockBasis, j: int) -> MatrixOperator:
    """Matrix of ``a_j``: ``a_j|..n_j..> = sqrt(n_j)|..n_j-1..>``."""
    return MatrixOperator(basis, basis.embed(_ladder(basis.n_max), j))


def creation(basis: FockBasis, j: int) -> MatrixOperator:
    return MatrixOperator(basis, basis.embed(_ladder(basis.n_max).T, j))


def number_operator(basis: FockBasis, j: int) -> MatrixOperator:
    pos = basis.mode_set.position(j)
    return MatrixOperator(basis, np.diag(basis.occupation_table[:, pos].astype(float)))


def total_number(basis: FockBasis) -> MatrixOperator:
    return MatrixOperator(basis, np.diag(basis.occupation_table.sum(axis=1).astype(float)))


def edge_projector(basis: FockBasis, j: int) -> MatrixOperator:
    """Projector onto states whose mode ``j`` sits at the cutoff ``n_max``."""
    pos = basis.mode_set.position(j)
    mask = basis.occupation_table[:, pos] == basis.n_max
    return MatrixOperator(basis, np.diag(mask.astype(float)))


def diagonal_operator(basis: FockBasis, weights: Iterable[float]) -> MatrixOperator:
    """``sum_j weights[j] * N_j`` as a diagonal matrix (weights ordered ``-J..J``)."""
    w = np.asarray(list(weights), dtype=float)
    if w.shape != (basis.M,):
        raise ValueError(f"expected {basis.M} weights, got shape {w.shape}")
    return MatrixOperator(basis, np.diag(basis.occupation_table @ w))
