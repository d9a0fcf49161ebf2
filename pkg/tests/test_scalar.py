import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from relgkls.opalgebra.parser import parse
from relgkls.opalgebra.scalar import (COUPLING, GAMMA, MASS, Scalar, ScalarError, momentum_symbol,
                                      omega_symbol)

k, q = momentum_symbol("k"), momentum_symbol("q")
w, wq = omega_symbol("k"), omega_symbol("q")
m = MASS


def numeric(expr, kv, qv, mv, gv=0.3):
    """Direct float evaluation with omega replaced by its square root."""
    sub = {k: kv, q: qv, m: mv, GAMMA: gv, COUPLING: 2 * gv,
           w: math.sqrt(kv * kv + mv * mv), wq: math.sqrt(qv * qv + mv * mv)}
    return complex(sp.N(sp.sympify(expr).xreplace(sub)))


def test_mass_shell_relation():
    assert Scalar(w**2) == Scalar(k**2 + m**2)
    assert Scalar((w + k) * (w - k)) == Scalar(m**2)
    assert Scalar(w**3) == Scalar((k**2 + m**2) * w)


def test_denominators_are_rationalized():
    s = Scalar(1 / w)
    assert s == Scalar(w / (k**2 + m**2))
    num, den = sp.fraction(s.expr)
    assert not den.has(w)
    s = Scalar(1 / (w + k))
    assert not sp.fraction(s.expr)[1].has(w)
    assert s == Scalar((w - k) / m**2)


def test_derivative_of_omega():
    assert Scalar(w).diff("k") == Scalar(k / w)
    assert Scalar(k / w).diff("k") == Scalar(m**2 / w**3)
    assert Scalar(w * wq).diff("q") == Scalar(w * q / wq)
    assert Scalar(q).diff("k").is_zero


def test_rename_is_simultaneous():
    s = Scalar(k * wq + 2 * q)
    assert s.rename({"k": "q", "q": "k"}) == Scalar(q * w + 2 * k)


def test_substitute_named_symbol():
    s = Scalar(COUPLING * w)
    assert s.substitute("g", Scalar(GAMMA)) == Scalar(GAMMA * w)


def test_errors():
    with pytest.raises(ScalarError):
        Scalar(k) ** 0.5
    with pytest.raises(ScalarError):
        Scalar(1) / Scalar(0)
    with pytest.raises(ScalarError):
        Scalar(0) ** -1
    with pytest.raises(ScalarError):
        momentum_symbol("x")


def test_variables_and_flags():
    s = Scalar(k * wq / m)
    assert s.variables() == {"k", "q"}
    assert Scalar(3).is_number and not s.is_number
    assert Scalar(0).is_zero


_atoms = st.sampled_from([k, q, w, wq, m, GAMMA, sp.Integer(2), sp.Rational(-1, 3), sp.I])


@st.composite
def rational_exprs(draw, depth=2):
    if depth == 0:
        return draw(_atoms)
    a = draw(rational_exprs(depth=depth - 1))
    b = draw(rational_exprs(depth=depth - 1))
    op = draw(st.sampled_from(["+", "-", "*", "/", "^"]))
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "^":
        return a ** draw(st.integers(-2, 3))
    return a / (b + w)  # w > 0 kept generic so denominators stay nonzero


@settings(max_examples=60, deadline=None)
@given(rational_exprs(), st.floats(-2, 2), st.floats(-2, 2), st.floats(0.3, 2.0))
def test_canonical_form_preserves_value(expr, kv, qv, mv):
    try:
        direct = numeric(expr, kv, qv, mv)
    except (ZeroDivisionError, TypeError):
        return
    if not np.isfinite(direct) or abs(direct) > 1e8:
        return
    s = Scalar(expr)
    got = s.evaluate({"k": kv, "q": qv}, {"k": math.sqrt(kv * kv + mv * mv), "q": math.sqrt(qv * qv + mv * mv)},
                     {"m": mv, "gamma": 0.3, "g": 0.6})
    assert got == pytest.approx(direct, rel=1e-8, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(rational_exprs(), rational_exprs())
def test_equality_agrees_with_numbers(x, y):
    sx, sy = Scalar(x), Scalar(y)
    points = [(0.37, -1.1, 0.8), (1.3, 0.2, 1.7), (-0.6, 0.9, 0.45)]
    try:
        same_numerically = all(
            abs(numeric(x, *p) - numeric(y, *p)) <= 1e-9 * max(1.0, abs(numeric(x, *p))) for p in points)
    except (ZeroDivisionError, TypeError):
        return
    assert (sx == sy) == same_numerically


@settings(max_examples=60, deadline=None)
@given(rational_exprs())
def test_text_round_trips_through_parser(expr):
    s = Scalar(expr)
    assert parse(s.text()).scalar_value() == s


def test_text_examples():
    assert Scalar(w).text() == "w"
    assert Scalar(wq).text() == "w(q)"
    assert Scalar(sp.I * k).text() == "i*k"
    assert Scalar(-k / 2).text() == "-k/2"
    assert Scalar(m + 1).text() == "m + 1"
    assert Scalar(k**2).text() == "k^2"


@settings(max_examples=40, deadline=None)
@given(rational_exprs(), rational_exprs())
def test_mass_shell_rewrites_are_equal(x, y):
    # x and x + (w^2 - k^2 - m^2) * y agree on the mass shell
    try:
        Scalar(y)
    except ScalarError:
        return
    assert Scalar(x) == Scalar(x + (w**2 - k**2 - m**2) * y)
    assert Scalar(x) != Scalar(x + 1)


def test_rationalized_denominator_keeps_its_value_where_k_equals_q():
    # the normal form divides by k^2 - q^2, the value itself is regular there
    k, q = momentum_symbol("k"), momentum_symbol("q")
    s = Scalar(2 * k + k / (omega_symbol("k") + omega_symbol("q")))
    assert sp.fraction(s.expr)[1] == k**2 - q**2
    for kv in (0.0, 0.7):
        w = math.sqrt(kv * kv + 1)
        got = s.evaluate({"k": kv, "q": kv}, {"k": w, "q": w}, {"m": 1.0})
        assert got == pytest.approx(2 * kv + kv / (2 * w), abs=1e-14)
    # derived scalars inherit the regular value form
    assert (s - 2 * parse("k").scalar_value()).rename({"q": "k"}) == Scalar(k / (2 * omega_symbol("k")))
