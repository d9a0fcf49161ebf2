import math

import numpy as np
import pytest

from relgkls.fockspace import FockBasis, ModeSet, annihilation, creation
from relgkls.generators import GKLSGenerator, hamiltonian, momentum, poulin_spec
from relgkls.opalgebra.expr import AlgebraError, Factor, Term, raw
from relgkls.opalgebra.lattice import LatticeSuperoperator, evaluate_on_lattice, lattice_difference
from relgkls.opalgebra.parser import parse
from relgkls.opalgebra.scalar import Scalar, omega_symbol

BODY = "({a(k)||ad(k)} - 1/2*{ad(k)*a(k)||1} - 1/2*{1||ad(k)*a(k)})"


def test_hamiltonian_and_momentum_images(desk_basis):
    Hs = evaluate_on_lattice(parse("int k [ w*ad(k)*a(k) ]"), desk_basis)
    Ps = evaluate_on_lattice(parse("int k [ k*ad(k)*a(k) ]"), desk_basis)
    assert np.max(np.abs(Hs.entries - hamiltonian(desk_basis).entries)) < 1e-10
    assert np.max(np.abs(Ps.entries - momentum(desk_basis).entries)) < 1e-10


def test_images_in_a_non_unit_box():
    basis = FockBasis(ModeSet(3.7, 1, 0.6), 2)
    Hs = evaluate_on_lattice(parse("int k [ w*ad(k)*a(k) ]"), basis)
    assert np.max(np.abs(Hs.entries - hamiltonian(basis).entries)) < 1e-10
    # delta(0) is the mode density L / 2 pi
    zero = evaluate_on_lattice(parse("delta(k,k)"), basis)
    np.testing.assert_allclose(zero.entries, 3.7 / (2 * math.pi) * np.eye(basis.dim))
    # a(k) carries sqrt(L / 2 pi)
    a = evaluate_on_lattice(parse("a(k)"), basis, assignment={"k": 1})
    np.testing.assert_allclose(a.entries, math.sqrt(3.7 / (2 * math.pi)) * annihilation(basis, 1).entries)


def test_dissipator_pair_matches_numeric_generator(desk_basis, rng):
    gamma = 0.3
    S = evaluate_on_lattice(parse(f"int k [ gamma*w*{BODY} ]"), desk_basis, {"gamma": gamma})
    assert isinstance(S, LatticeSuperoperator)
    # numeric jump operators sqrt(2 gamma' w) a carry rate 2 gamma' w; gamma' = gamma / 2
    gen = GKLSGenerator(None, poulin_spec(desk_basis, gamma / 2))
    for _ in range(3):
        rho = rng.normal(size=(27, 27)) + 1j * rng.normal(size=(27, 27))
        np.testing.assert_allclose(S.apply(rho), gen.apply(rho), atol=1e-10)
    np.testing.assert_allclose(S.matrix(), gen.superoperator(), atol=1e-10)


def test_normal_ordering_example_on_lattice(desk_basis):
    # raw product in the stated order versus its canonical form
    w = Scalar(omega_symbol("k"))
    raw_e = raw([Term(w, ("k",), (Factor(False, "k"), Factor(True, "k"), Factor(False, "k")))])
    canon = parse("int k [ w*a(k)*ad(k)*a(k) ]")
    assert lattice_difference(raw_e, canon, desk_basis) < 1e-10


def test_ccr_image_below_cutoff(desk_basis):
    raw_e = raw([Term(Scalar(1), (), (Factor(False, "k"), Factor(True, "q")))])
    canon = parse("ad(q)*a(k) + delta(k,q)")
    below = desk_basis.below_edge()
    for j in (-1, 0, 1):
        for q in (-1, 0, 1):
            x = evaluate_on_lattice(raw_e, desk_basis, assignment={"k": j, "q": q}).entries
            y = evaluate_on_lattice(canon, desk_basis, assignment={"k": j, "q": q}).entries
            np.testing.assert_allclose(x[np.ix_(below, below)], y[np.ix_(below, below)], atol=1e-12)


def test_double_integral(desk_basis):
    e = parse("int k [ int q [ k*q*ad(k)*ad(q)*a(q)*a(k) ] ]")
    P = momentum(desk_basis).entries
    # (sum k N)^2 = sum_kq k q ad_k ad_q a_q a_k + sum k^2 N
    P2 = parse("int k [ k^2*ad(k)*a(k) ]")
    got = evaluate_on_lattice(e, desk_basis).entries + evaluate_on_lattice(P2, desk_basis).entries
    np.testing.assert_allclose(got, P @ P, atol=1e-12)


def test_errors(desk_basis):
    with pytest.raises(AlgebraError):
        evaluate_on_lattice(parse("int k [ D[ad(k)]*a(k) ]"), desk_basis)
    with pytest.raises(AlgebraError):
        evaluate_on_lattice(parse("a(k)"), desk_basis)
    with pytest.raises(Exception):
        evaluate_on_lattice(parse("int k [ gamma*a(k) ]"), desk_basis)  # no gamma supplied
    massless = FockBasis(ModeSet(2 * math.pi, 1, 0.0), 1)
    with pytest.raises(ZeroDivisionError):
        evaluate_on_lattice(parse("int k [ 1/w*ad(k)*a(k) ]"), massless)


def test_superoperator_matrix_convention(desk_basis, rng):
    S = evaluate_on_lattice(parse("int k [ k*{ a(k) || ad(k)*a(k) } ]"), desk_basis)
    rho = rng.normal(size=(27, 27))
    np.testing.assert_allclose((S.matrix() @ rho.reshape(-1)).reshape(27, 27), S.apply(rho), atol=1e-12)
    expected = sum(desk_basis.mode_set.k_of(j) * annihilation(desk_basis, j).entries @ rho
                   @ creation(desk_basis, j).entries @ annihilation(desk_basis, j).entries for j in (-1, 0, 1))
    np.testing.assert_allclose(S.apply(rho), expected, atol=1e-12)


def test_coefficient_with_omega_sum_denominator_on_the_diagonal():
    basis = FockBasis(ModeSet(2 * math.pi, 1, 1.0), 2)
    e = parse("int k [ int q [ (1/(w + w(q)))*ad(k)*a(q) ] ]")
    ms = basis.mode_set
    expected = np.zeros((basis.dim, basis.dim), dtype=complex)
    for j in ms.indices:
        for l in ms.indices:
            c = 1 / (ms.omega_of(int(j)) + ms.omega_of(int(l)))
            expected += c * creation(basis, int(j)).entries @ annihilation(basis, int(l)).entries
    got = evaluate_on_lattice(e, basis)
    assert np.max(np.abs(got.entries - expected)) < 1e-12
