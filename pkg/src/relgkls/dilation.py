"""Repeated-interaction (collision) dilation of the mode-decay dissipator.

Each time step, every system mode ``j`` in turn meets a fresh vacuum ancilla
``b`` through ``H_int = sqrt(2 gamma omega_j / dt) (a_j b^dag + a_j^dag b)``
for a time ``dt``; the ancilla is then discarded. The free Hamiltonian is
applied exactly as a diagonal phase rotation.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .fockspace import FockBasis, MatrixOperator, annihilation
from .generators import GKLSGenerator, hamiltonian
from .integrator import Trajectory, _Recorder, evolve, step_count, trace_distance

DEFAULT_MAX_DIM = 4096


class MemoryGuardError(ValueError):
    pass


@dataclass(frozen=True)
class CollisionConfig:
    basis: FockBasis
    dt: float
    t_max: float
    gamma: float
    n_anc: int = 1
    max_dim: int = DEFAULT_MAX_DIM

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if int(self.n_anc) != self.n_anc or self.n_anc < 1:
            raise ValueError("n_anc must be an integer >= 1")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")

    def halved(self) -> "CollisionConfig":
        return CollisionConfig(self.basis, self.dt / 2, self.t_max, self.gamma, self.n_anc, self.max_dim)


def _ancilla_ladder(n_anc: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_anc + 1, dtype=float)), 1)


class CollisionStepper:
    """Precomputed pair unitaries for one ``(basis, dt, gamma, n_anc)``."""

    def __init__(self, config: CollisionConfig):
        basis = config.basis
        self.config = config
        self.dim = basis.dim
        self.d_anc = config.n_anc + 1
        if self.dim * self.d_anc > config.max_dim:
            raise MemoryGuardError(
                f"pair dimension {self.dim * self.d_anc} exceeds the configured bound {config.max_dim}")
        b = _ancilla_ladder(config.n_anc)
        self.unitaries = []
        for j, w in zip(basis.mode_set.indices, basis.mode_set.omega):
            a = annihilation(basis, j).entries
            coupling = np.sqrt(2 * config.gamma * w / config.dt)
            pair = np.kron(a, b.conj().T)
            H_int = coupling * (pair + pair.conj().T)
            self.unitaries.append(expm(-1j * config.dt * H_int))
        energies = hamiltonian(basis).entries.diagonal().real
        self.phase = np.exp(-1j * config.dt * energies)
        self.anc_vac = np.zeros((self.d_anc, self.d_anc))
        self.anc_vac[0, 0] = 1.0

    def free(self, r: np.ndarray) -> np.ndarray:
        return self.phase[:, None] * r * self.phase.conj()[None, :]

    def collide(self, r: np.ndarray, p: int) -> np.ndarray:
        """One collision of mode position ``p`` with a fresh ancilla, ancilla traced out."""
        U = self.unitaries[p]
        joint = U @ np.kron(r, self.anc_vac) @ U.conj().T
        joint = joint.reshape(self.dim, self.d_anc, self.dim, self.d_anc)
        return np.einsum("iaja->ij", joint)

    def step(self, r: np.ndarray) -> np.ndarray:
        r = self.free(r)
        for p in range(len(self.unitaries)):
            r = self.collide(r, p)
        return r

    def step_deferred(self, r: np.ndarray) -> np.ndarray:
        """Same step, but every ancilla is kept until the end of the step.

        Allocates ``D * (n_anc+1)^M``; subject to the memory guard.
        """
        M = len(self.unitaries)
        total = self.dim * self.d_anc**M
        if total > self.config.max_dim:
            raise MemoryGuardError(f"deferred-trace dimension {total} exceeds bound {self.config.max_dim}")
        r = self.free(r)
        anc_dim = self.d_anc**M
        vac = np.zeros((anc_dim, anc_dim))
        vac[0, 0] = 1.0
        joint = np.kron(r, vac)
        for p, U in enumerate(self.unitaries):
            # U acts on (system, ancilla p); ancillas ordered p = 0..M-1
            left = np.eye(self.d_anc**p)
            right = np.eye(self.d_anc ** (M - p - 1))
            full = _embed_pair(U, self.dim, self.d_anc, left, right)
            joint = full @ joint @ full.conj().T
        joint = joint.reshape(self.dim, anc_dim, self.dim, anc_dim)
        return np.einsum("iaja->ij", joint)


def _embed_pair(U, dim, d_anc, left, right):
    # reorder U (system x ancilla_p) into system x (anc_0..anc_{M-1})
    nl, nr = left.shape[0], right.shape[0]
    U4 = U.reshape(dim, d_anc, dim, d_anc)
    full = np.einsum("iajb,xy,uv->ixaujybv", U4, left, right)
    n = dim * nl * d_anc * nr
    return full.reshape(n, n)


def collision_evolve(rho0, config: CollisionConfig, record_every: int = 1,
                     keep_states: bool = True) -> Trajectory:
    basis = config.basis
    n_steps = step_count(config.t_max, config.dt)
    stepper = CollisionStepper(config)
    r = rho0.entries if isinstance(rho0, MatrixOperator) else np.asarray(rho0, dtype=complex)
    rec = _Recorder(basis, keep_states)
    rec.record(0.0, r)
    for step in range(1, n_steps + 1):
        r = stepper.step(r)
        if step % record_every == 0 or step == n_steps:
            rec.record(step * config.dt, r)
    return rec.trajectory()


@dataclass
class OracleReport:
    max_trace_distance: float
    distances: list[float]
    times: list[float]
    dt: float
    dt_half_ratio: float
    max_trace_distance_half: float

    def to_dict(self) -> dict:
        return {
            "max_trace_distance": self.max_trace_distance,
            "distances": self.distances,
            "times": self.times,
            "dt": self.dt,
            # undefined when both distances vanish (e.g. a common fixed point)
            "dt_half_ratio": None if math.isnan(self.dt_half_ratio) else self.dt_half_ratio,
            "max_trace_distance_half": self.max_trace_distance_half,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _distance_series(rho0, generator: GKLSGenerator, config: CollisionConfig):
    coll = collision_evolve(rho0, config)
    ref = evolve(rho0, generator, config.t_max, config.dt)
    d = [trace_distance(x, y) for x, y in zip(coll.states, ref.states)]
    return coll.times, np.array(d)


def oracle_compare(rho0, generator: GKLSGenerator, config: CollisionConfig) -> OracleReport:
    """Run the collision model and the GKLS integrator on the same grid.

    The ratio compares the maximal trace distance at ``dt/2`` to the one at
    ``dt``; for first-order convergence it sits near 0.5.
    """
    if generator.basis != config.basis:
        raise ValueError("generator and collision config use different bases")
    times, d = _distance_series(rho0, generator, config)
    _, d_half = _distance_series(rho0, generator, config.halved())
    dmax, dmax_half = float(np.max(d)), float(np.max(d_half))
    ratio = dmax_half / dmax if dmax > 0 else float("nan")
    return OracleReport(dmax, [float(x) for x in d], [float(t) for t in times], config.dt, ratio, dmax_half)
