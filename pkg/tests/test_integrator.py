import math

import numpy as np
import pytest

from relgkls.fockspace import FockBasis, ModeSet, annihilation, total_number
from relgkls.generators import GKLSGenerator, blp_spec, hamiltonian, no_dissipator, poulin_spec
from relgkls.integrator import (DensityMatrix, PhysicalityError, decay_fit, evolve, fidelity_to_pure,
                                read_trajectory_csv, stationarity_check, step_count, trace_distance)


def poulin(basis, gamma, with_h=True):
    return GKLSGenerator(hamiltonian(basis) if with_h else None, poulin_spec(basis, gamma))



def superposed(basis, j):
    occ = [0] * basis.M
    occ[basis.mode_set.position(j)] = 1
    return DensityMatrix.pure(basis, basis.vacuum() + basis.basis_vector(occ))


# ---------------------------------------------------------------- density matrices

def test_density_matrix_validation(desk_basis, rng):
    with pytest.raises(ValueError):
        DensityMatrix(desk_basis, 2 * DensityMatrix.vacuum(desk_basis).entries)
    bad = np.zeros((27, 27), complex)
    bad[0, 1] = 1.0
    bad[0, 0] = 1.0
    with pytest.raises(ValueError):
        DensityMatrix(desk_basis, bad)  # not Hermitian
    neg = np.diag([1.5, -0.5] + [0.0] * 25)
    with pytest.raises(ValueError):
        DensityMatrix(desk_basis, neg)
    r = DensityMatrix.random(desk_basis, rng)
    assert abs(r.trace() - 1) < 1e-12
    r = DensityMatrix.random(desk_basis, rng, rank=2, support=desk_basis.below_edge())
    assert np.allclose(r.entries[~desk_basis.below_edge()], 0)


def test_step_count():
    assert step_count(1.0, 0.01) == 100
    assert step_count(40.0, 0.05) == 800
    with pytest.raises(ValueError):
        step_count(1.0, 0.3)
    with pytest.raises(ValueError):
        step_count(1.0, 0.0)
    with pytest.raises(ValueError):
        step_count(0.001, 0.01)


# ---------------------------------------------------------------- analytic solutions

def test_unitary_evolution_keeps_purity(desk_basis, rng):
    rho0 = DensityMatrix.random(desk_basis, rng, rank=1)
    gen = GKLSGenerator(hamiltonian(desk_basis), no_dissipator(desk_basis))
    # RK4 is slightly contractive on fast phases (|R(iz)| = 1 - z^6/144 + ...);
    # at dt = 0.005 the largest gap gives z < 0.04 and the loss stays far below 1e-9
    traj = evolve(rho0, gen, 1.0, 0.005)
    assert np.max(np.abs(traj.purity - 1)) < 1e-9
    assert set(traj.flags) == {"ok"}
    # exact solution: rho(t) = U rho0 U^dag with diagonal U
    U = np.exp(-1j * np.diag(hamiltonian(desk_basis).entries) * 1.0)
    exact = U[:, None] * rho0.entries * U.conj()[None, :]
    # RK4 global phase error ~ t * gap^5 * dt^4 / 120 with gap = 2 (1 + 2 sqrt 2)
    gap = 2 * (1 + 2 * math.sqrt(2))
    assert trace_distance(traj.states[-1], exact) < gap**5 * 0.005**4 / 120


def test_single_mode_number_decay(single_mode_basis):
    gen = poulin(single_mode_basis, 0.1)
    traj = evolve(DensityMatrix.fock(single_mode_basis, [1]), gen, 1.0, 0.01)
    assert traj.N_total[-1] == pytest.approx(math.exp(-0.2), abs=1e-6)
    assert traj.N_total[-1] == pytest.approx(0.81873, abs=1e-5)


def test_single_mode_coherence_phase_and_envelope(single_mode_basis):
    gen = poulin(single_mode_basis, 0.1)
    traj = evolve(superposed(single_mode_basis, 0), gen, 1.0, 0.01)
    a0 = traj.a_modes[0, 0]
    assert a0 == pytest.approx(0.5)
    for t, a in zip(traj.times, traj.a_modes[:, 0]):
        assert abs(a - a0 * np.exp((-1j - 0.1) * t)) < 1e-6


def test_fourth_order_convergence(single_mode_basis):
    gen = poulin(single_mode_basis, 0.1)
    rho0 = superposed(single_mode_basis, 0)
    errors = []
    for dt in (0.25, 0.125, 0.0625, 0.03125, 0.015625):
        traj = evolve(rho0, gen, 1.0, dt, keep_states=False)
        errors.append(abs(traj.a_modes[-1, 0] - 0.5 * np.exp(-1j - 0.1)))
    ratios = [e0 / e1 for e0, e1 in zip(errors, errors[1:])]
    for r in ratios:
        assert 16 * 0.7 <= r <= 16 * 1.3, ratios


# ---------------------------------------------------------------- decay fits and frame asymmetry

def test_decay_fit_single_mode(single_mode_basis):
    traj = evolve(DensityMatrix.fock(single_mode_basis, [1]), poulin(single_mode_basis, 0.1), 1.0, 0.01)
    assert decay_fit(traj, 0) == pytest.approx(-0.2, rel=1e-4)


def test_decay_fit_without_damping(single_mode_basis):
    traj = evolve(DensityMatrix.fock(single_mode_basis, [1]), poulin(single_mode_basis, 0.0), 1.0, 0.01)
    assert abs(decay_fit(traj, 0)) < 1e-8


def test_decay_fit_rate_ratio_across_modes(desk_basis):
    traj = evolve(DensityMatrix.fock(desk_basis, [0, 1, 1]), poulin(desk_basis, 0.1), 1.0, 0.01)
    r0, r1 = decay_fit(traj, 0), decay_fit(traj, 1)
    assert r1 / r0 == pytest.approx(math.sqrt(2), abs=1e-3)
    for j, r in ((0, r0), (1, r1)):
        assert r == pytest.approx(-2 * 0.1 * desk_basis.mode_set.omega_of(j), rel=1e-4)
    with pytest.raises(ValueError):
        decay_fit(traj, -1)  # unoccupied mode


def test_decay_fit_needs_ten_records(single_mode_basis):
    traj = evolve(DensityMatrix.fock(single_mode_basis, [1]), poulin(single_mode_basis, 0.1), 0.5, 0.1)
    with pytest.raises(ValueError):
        decay_fit(traj, 0)


def test_frame_asymmetry_witness(desk_basis):
    # every mode in (|0> + |1>)/sqrt(2)
    one = np.array([1, 1, 0]) / math.sqrt(2)
    psi = np.kron(np.kron(one, one), one)
    traj = evolve(DensityMatrix.pure(desk_basis, psi), poulin(desk_basis, 0.1), 2.0, 0.01)
    env = np.abs(traj.a_modes)
    # parity partners k -> -k share omega and decay identically
    np.testing.assert_allclose(env[:, 0], env[:, 2], atol=1e-12)
    # different omega, different rate: |<a_j(t)>| ~ exp(-gamma omega_j t)
    assert abs(env[-1, 0] - env[-1, 1]) > 1e-3
    for p, w in enumerate(desk_basis.mode_set.omega):
        assert env[-1, p] == pytest.approx(env[0, p] * math.exp(-0.1 * w * 2.0), abs=1e-6)


def test_total_number_monotone_under_decay(desk_basis, rng):
    rho0 = DensityMatrix.random(desk_basis, rng)
    traj = evolve(rho0, poulin(desk_basis, 0.2), 1.0, 0.01)
    assert np.all(np.diff(traj.N_total) <= 1e-10)


# ---------------------------------------------------------------- stationarity and monitors

def test_stationarity_examples(desk_basis):
    vac = DensityMatrix.vacuum(desk_basis)
    assert stationarity_check(poulin(desk_basis, 0.1), vac) < 1e-12
    assert stationarity_check(GKLSGenerator(hamiltonian(desk_basis), blp_spec(desk_basis, 1.0)), vac) > 0
    one = DensityMatrix.fock(desk_basis, [0, 1, 0])
    assert stationarity_check(poulin(desk_basis, 0.1), one) > 0


def test_vacuum_fidelity_after_long_decay(single_mode_basis):
    gen = poulin(single_mode_basis, 0.1)
    traj = evolve(DensityMatrix.fock(single_mode_basis, [1]), gen, 400.0, 0.05,
                  record_every=100, keep_states=True)
    assert fidelity_to_pure(traj.states[-1], single_mode_basis.vacuum()) > 1 - 1e-6


def test_monitors_stay_clean(desk_basis, rng):
    traj = evolve(DensityMatrix.random(desk_basis, rng), poulin(desk_basis, 0.3), 2.0, 0.02)
    assert set(traj.flags) == {"ok"}
    m = traj.monitor_maxima()
    assert m["max_trace_defect"] < 1e-9
    assert m["max_hermiticity_defect"] < 1e-10
    assert m["min_eigenvalue"] >= -1e-8


class _Leaky:
    """A bogus generator that inflates the trace."""

    def __init__(self, basis):
        self.basis = basis

    def apply(self, r):
        return r


def test_physicality_abort_names_step(desk_basis):
    with pytest.raises(PhysicalityError) as err:
        evolve(DensityMatrix.vacuum(desk_basis), _Leaky(desk_basis), 1.0, 0.01)
    assert err.value.step == 1
    assert "step 1" in str(err.value)


def test_record_every_and_times(desk_basis):
    traj = evolve(DensityMatrix.vacuum(desk_basis), poulin(desk_basis, 0.1), 1.0, 0.01, record_every=7)
    assert np.all(np.diff(traj.times) > 0)
    assert traj.times[0] == 0.0
    assert traj.times[-1] == pytest.approx(1.0)
    assert len(traj) == 1 + 100 // 7 + 1


def test_csv_export_round_trip(desk_basis, rng):
    traj = evolve(DensityMatrix.random(desk_basis, rng), poulin(desk_basis, 0.1), 0.1, 0.01)
    text = traj.to_csv()
    assert text.splitlines()[0] == "t,trace,purity,N_total,N_{j=-1},N_{j=0},N_{j=1},monitor_flags"
    cols = read_trajectory_csv(text)
    np.testing.assert_array_equal(cols["t"], traj.times)
    np.testing.assert_array_equal(cols["purity"], traj.purity)
    np.testing.assert_array_equal(cols["N_{j=0}"], traj.N_modes[:, 1])
    assert cols["monitor_flags"] == ["ok"] * len(traj)


def test_number_expectation_matches_operator(desk_basis, rng):
    traj = evolve(DensityMatrix.random(desk_basis, rng), poulin(desk_basis, 0.1), 0.05, 0.01)
    N = total_number(desk_basis)
    a0 = annihilation(desk_basis, 0)
    assert traj.N_total[-1] == pytest.approx(N.expect(traj.states[-1]).real)
    assert traj.a_modes[-1, 1] == pytest.approx(a0.expect(traj.states[-1]))
