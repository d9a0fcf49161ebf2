"""Fixed-step RK4 evolution of density matrices with physicality monitors."""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fockspace import FockBasis, MatrixOperator, annihilation, number_operator, total_number
from .generators import GKLSGenerator, field_operators

log = logging.getLogger(__name__)

# DensityMatrix invariants
TRACE_TOL = 1e-9
HERM_TOL = 1e-10
POS_TOL = 1e-8
# evolve aborts past these
TRACE_ABORT = 1e-6
POS_ABORT = 1e-5


class PhysicalityError(RuntimeError):
    """Raised when a trajectory leaves the set of density matrices."""

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


def hermiticity_defect(r: np.ndarray) -> float:
    return float(np.max(np.abs(r - r.conj().T)))


def min_eigenvalue(r: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (r + r.conj().T))[0])


class DensityMatrix(MatrixOperator):
    """A MatrixOperator that passed the density-matrix checks at construction."""

    def __post_init__(self):
        super().__post_init__()
        r = self.entries
        tr = np.trace(r)
        if abs(tr - 1) >= TRACE_TOL:
            raise ValueError(f"trace {tr} differs from 1")
        if hermiticity_defect(r) >= HERM_TOL:
            raise ValueError("matrix is not Hermitian")
        if min_eigenvalue(r) < -POS_TOL:
            raise ValueError("matrix has a negative eigenvalue")

    @classmethod
    def pure(cls, basis: FockBasis, psi: np.ndarray) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(basis, np.outer(psi, psi.conj()))

    @classmethod
    def fock(cls, basis: FockBasis, occupations: Sequence[int]) -> "DensityMatrix":
        return cls.pure(basis, basis.basis_vector(occupations))

    @classmethod
    def vacuum(cls, basis: FockBasis) -> "DensityMatrix":
        return cls.pure(basis, basis.vacuum())

    @classmethod
    def random(cls, basis: FockBasis, rng: np.random.Generator, rank: int | None = None,
               support: np.ndarray | None = None) -> "DensityMatrix":
        """Random mixed state, optionally restricted to a boolean ``support`` mask."""
        dim = basis.dim
        rank = dim if rank is None else rank
        G = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
        if support is not None:
            G[~np.asarray(support)] = 0.0
        r = G @ G.conj().T
        return cls(basis, r / np.trace(r).real)


@dataclass
class Trajectory:
    """Recorded observables; one row per entry of ``times``.

    ``N_modes[i, p]`` is ``<N_j>`` for mode position ``p`` (``j = p - J``),
    ``a_modes`` the matching ``<a_j>``, ``phi`` the ``<phi(x_s)>`` per site
    (empty when the field operators are undefined, e.g. ``m = 0``).
    """

    basis: FockBasis
    times: np.ndarray
    trace: np.ndarray
    purity: np.ndarray
    N_total: np.ndarray
    N_modes: np.ndarray
    a_modes: np.ndarray
    phi: np.ndarray
    flags: list[str]
    trace_defect: np.ndarray
    herm_defect: np.ndarray
    min_eig: np.ndarray
    states: list[np.ndarray] = field(default_factory=list, repr=False)

    def __len__(self):
        return len(self.times)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        J = self.basis.mode_set.J
        header = ["t", "trace", "purity", "N_total"]
        header += [f"N_{{j={j}}}" for j in range(-J, J + 1)]
        header.append("monitor_flags")
        writer.writerow(header)
        for i, t in enumerate(self.times):
            row = [repr(float(t)), repr(float(self.trace[i])), repr(float(self.purity[i])),
                   repr(float(self.N_total[i]))]
            row += [repr(float(n)) for n in self.N_modes[i]]
            row.append(self.flags[i])
            writer.writerow(row)
        return buf.getvalue()

    def monitor_maxima(self) -> dict:
        return {
            "max_trace_defect": float(np.max(self.trace_defect)),
            "max_hermiticity_defect": float(np.max(self.herm_defect)),
            "min_eigenvalue": float(np.min(self.min_eig)),
        }


def read_trajectory_csv(text: str) -> dict[str, list]:
    """Parse the CSV export back into columns (floats except ``monitor_flags``)."""
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    cols: dict[str, list] = {h: [] for h in header}
    for row in body:
        for h, v in zip(header, row):
            cols[h].append(v if h == "monitor_flags" else float(v))
    return cols


class _Recorder:
    def __init__(self, basis: FockBasis, keep_states: bool):
        self.basis = basis
        self.keep_states = keep_states
        modes = basis.mode_set
        self.N = [number_operator(basis, j).entries.diagonal().real for j in modes.indices]
        self.Ntot = total_number(basis).entries.diagonal().real
        self.a = [annihilation(basis, j).entries for j in modes.indices]
        try:
            self.phi = [p.entries for p in field_operators(basis).phi]
        except ValueError:
            self.phi = []
        self.rows: list[tuple] = []
        self.states: list[np.ndarray] = []

    def record(self, t: float, r: np.ndarray):
        diag = r.diagonal().real
        tr = np.trace(r)
        trace_defect = abs(tr - 1)
        herm = hermiticity_defect(r)
        lam = min_eigenvalue(r)
        flags = []
        if trace_defect >= TRACE_TOL:
            flags.append("trace")
        if herm >= HERM_TOL:
            flags.append("hermiticity")
        if lam < -POS_TOL:
            flags.append("positivity")
        self.rows.append((
            t, tr.real, float(np.einsum("ij,ji->", r, r).real), float(diag @ self.Ntot),
            [float(diag @ n) for n in self.N],
            [complex(np.einsum("ij,ji->", a, r)) for a in self.a],
            [float(np.einsum("ij,ji->", p, r).real) for p in self.phi],
            "|".join(flags) or "ok", trace_defect, herm, lam,
        ))
        if self.keep_states:
            self.states.append(r.copy())

    def trajectory(self) -> Trajectory:
        cols = list(zip(*self.rows))
        return Trajectory(
            basis=self.basis,
            times=np.array(cols[0], dtype=float),
            trace=np.array(cols[1], dtype=float),
            purity=np.array(cols[2], dtype=float),
            N_total=np.array(cols[3], dtype=float),
            N_modes=np.array(cols[4], dtype=float),
            a_modes=np.array(cols[5], dtype=complex),
            phi=np.array(cols[6], dtype=float).reshape(len(self.rows), -1),
            flags=list(cols[7]),
            trace_defect=np.array(cols[8], dtype=float),
            herm_defect=np.array(cols[9], dtype=float),
            min_eig=np.array(cols[10], dtype=float),
            states=self.states,
        )


def step_count(t_max: float, dt: float) -> int:
    if not dt > 0:
        raise ValueError("dt must be positive")
    if t_max < dt:
        raise ValueError("t_max must be at least dt")
    n = int(round(t_max / dt))
    if abs(n * dt - t_max) > 1e-9 * max(1.0, t_max):
        raise ValueError(f"t_max={t_max} is not an integer multiple of dt={dt}")
    return n


def rk4_step(apply, r: np.ndarray, dt: float) -> np.ndarray:
    k1 = apply(r)
    k2 = apply(r + 0.5 * dt * k1)
    k3 = apply(r + 0.5 * dt * k2)
    k4 = apply(r + dt * k3)
    return r + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def evolve(rho0, generator: GKLSGenerator, t_max: float, dt: float, record_every: int = 1,
           keep_states: bool = True) -> Trajectory:
    """Integrate ``d rho/dt = generator.apply(rho)`` with classical RK4.

    No trace renormalisation is applied. Raises :class:`PhysicalityError` as
    soon as the trace drifts by more than ``1e-6`` or an eigenvalue drops
    below ``-1e-5``.
    """
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    n_steps = step_count(t_max, dt)
    basis = generator.basis
    r = rho0.entries if isinstance(rho0, MatrixOperator) else np.asarray(rho0, dtype=complex)
    if isinstance(rho0, MatrixOperator) and rho0.basis != basis:
        raise ValueError("initial state and generator use different bases")
    if not isinstance(rho0, DensityMatrix):
        DensityMatrix(basis, r)
    rec = _Recorder(basis, keep_states)
    rec.record(0.0, r)
    for step in range(1, n_steps + 1):
        r = rk4_step(generator.apply, r, dt)
        drift = abs(np.trace(r) - 1)
        if drift > TRACE_ABORT:
            raise PhysicalityError(f"step {step}: trace drift {drift:.3e} exceeds {TRACE_ABORT}", step)
        lam = min_eigenvalue(r)
        if lam < -POS_ABORT:
            raise PhysicalityError(f"step {step}: eigenvalue {lam:.3e} below {-POS_ABORT}", step)
        if step % record_every == 0 or step == n_steps:
            rec.record(step * dt, r)
    return rec.trajectory()


def stationarity_check(generator: GKLSGenerator, rho) -> float:
    """Max-norm of ``generator.apply(rho)``."""
    out = generator.apply(rho)
    arr = out.entries if isinstance(out, MatrixOperator) else out
    return float(np.max(np.abs(arr)))


def decay_fit(trajectory: Trajectory, j: int) -> float:
    """Least-squares slope of ``ln <N_j>`` against ``t``."""
    pos = trajectory.basis.mode_set.position(j)
    n = trajectory.N_modes[:, pos]
    if len(n) < 10:
        raise ValueError(f"need at least 10 records, have {len(n)}")
    if np.any(n <= 1e-12):
        raise ValueError(f"<N_{j}> is not strictly positive along the trajectory")
    slope, _ = np.polyfit(trajectory.times, np.log(n), 1)
    return float(slope)


def fidelity_to_pure(r: np.ndarray, psi: np.ndarray) -> float:
    return float(np.real(psi.conj() @ r @ psi))


def trace_distance(r: np.ndarray, s: np.ndarray) -> float:
    d = r - s
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (d + d.conj().T)))))
