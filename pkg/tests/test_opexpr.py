import numpy as np
import pytest

from relgkls.opalgebra.expr import (AlgebraError, Factor, OpExpr, Term, adjoint, annihilator, canonical,
                                    commutator, creator, delta, derivative, integrate, normal_order, raw,
                                    sift_expr, tensor_pair, to_text)
from relgkls.opalgebra.lattice import evaluate_on_lattice
from relgkls.opalgebra.parser import parse
from relgkls.opalgebra.scalar import ONE, Scalar


def test_canonical_commutation_relations():
    assert commutator(annihilator("k"), creator("q")) == delta("k", "q")
    assert to_text(commutator(annihilator("k"), creator("q"))) == "delta(k,q)"
    assert commutator(annihilator("k"), annihilator("q")).is_zero
    assert commutator(creator("k"), creator("q")).is_zero


def test_single_reordering():
    e = raw([Term(ONE, left=(Factor(False, "k"), Factor(True, "q")))])
    assert normal_order(e) == creator("q") * annihilator("k") + delta("k", "q")


def test_hamiltonian_canonical_text():
    H = parse("int k [ w * ad(k)*a(k) ]")
    assert to_text(H) == "int k [ w*ad(k)*a(k) ]"
    assert H == parse("int q [ ad(q)*a(q)*w(q) ]")  # alpha-equivalence


def test_sifting():
    assert parse("int q [ delta(k,q) * w(q) * a(q) ]") == parse("w*a(k)")
    assert to_text(parse("int q [ delta(k,q) * w(q) * a(q) ]")) == "w*a(k)"
    assert parse("int q [ delta(q,k) * q * ad(q) ]") == parse("k*ad(k)")


def test_normal_order_example_keeps_zero_delta():
    e = parse("int k [ w*a(k)*ad(k)*a(k) ]")
    assert to_text(e) == "int k [ w*ad(k)*a(k)*a(k) ] + int k [ w*delta(k,k)*a(k) ]"


def test_like_terms_merge_and_cancel():
    H = parse("int k [ w*ad(k)*a(k) ]")
    assert H + H == 2 * H
    assert (H - H).is_zero
    assert (H + H - 2 * H).terms == ()
    assert H / 2 + H / 2 == H


def test_products_of_integrals_rename_apart():
    A = parse("int k [ a(k) ]")
    prod = A * A
    assert prod == parse("int k [ int q [ a(k)*a(q) ] ]")
    # symmetric product of identical integrals is stored once
    assert len(prod.terms) == 1


def test_pairs_and_plain_do_not_mix():
    pair = parse("{ a(k) || ad(k) }")
    plain = parse("a(k)")
    with pytest.raises(AlgebraError):
        pair + plain
    with pytest.raises(AlgebraError):
        pair * plain
    with pytest.raises(AlgebraError):
        tensor_pair(pair, plain)


def test_pair_composition_on_lattice(desk_basis, rng):
    x = parse("int k [ w*{ a(k) || ad(k) } ]")
    y = parse("int k [ k*{ ad(k)*a(k) || 1 } ] + int k [ {1 || a(k)*a(k)} ]")
    lx, ly, lxy = (evaluate_on_lattice(e, desk_basis) for e in (x, y, x * y))
    rho = rng.normal(size=(27, 27)) + 1j * rng.normal(size=(27, 27))
    # the composed right factor a a a^dag is normal-ordered symbolically; the truncated
    # a^dag kills n = n_max, so the two agree on columns below the cutoff edge
    cols = desk_basis.below_edge()
    np.testing.assert_allclose(lxy.apply(rho)[:, cols], lx.apply(ly.apply(rho))[:, cols], atol=1e-11)
    assert to_text(x * y).count("||") >= 3


def test_adjoint():
    H = parse("int k [ w*ad(k)*a(k) ]")
    assert adjoint(H) == H
    assert adjoint(parse("int k [ (1+i)*k*a(k) ]")) == parse("int k [ (1-i)*k*ad(k) ]")
    assert adjoint(parse("a(k)*a(q)")) == parse("ad(q)*ad(k)")
    with pytest.raises(AlgebraError):
        adjoint(parse("{a(k)||ad(k)}"))


def test_derivative_rules():
    e = parse("w*a(k)")
    assert derivative(e, "k") == parse("k/w*a(k) + w*D[a(k)]")
    assert derivative(parse("int k [ ad(k)*a(k) ]"), "k").is_zero  # bound variable
    assert derivative(parse("q*a(q)"), "k").is_zero
    with pytest.raises(AlgebraError):
        derivative(parse("D[a(k)]"), "k")


def test_integrate_rejects_rebinding():
    with pytest.raises(AlgebraError):
        integrate("k", parse("int k [ a(k) ]"))


def test_operator_algebra_misc():
    A = parse("int k [ a(k) ]")
    assert (A ** 2) == A * A
    assert (A ** 0) == OpExpr.scalar(1)
    with pytest.raises(AlgebraError):
        A / A
    assert OpExpr.scalar(Scalar(3)).scalar_value() == Scalar(3)
    assert parse("a(k)").free_vars() == {"k"}
    assert parse("int k [ a(k) ]").free_vars() == set()


_RAW_CORPUS = [
    "int k [ w*a(k)*ad(k)*a(k) ]",
    "int k [ int q [ delta(k,q)*a(q)*ad(k) ] ]",
    "a(k)*ad(q)*a(p)",
    "int k [ k*a(k)*ad(k) ] + int q [ -q*ad(q)*a(q) ]",
    "int k [ {a(k)*ad(k) || ad(k)*a(k)} ]",
]


@pytest.mark.parametrize("text", _RAW_CORPUS)
def test_sifting_commutes_with_canonicalization(text):
    e = parse(text)
    assert canonical(sift_expr(e)) == canonical(e)
    assert normal_order(normal_order(e)) == normal_order(e)
