"""Commutator with the boost generator ``K``, acting through its mode rule.

    [K, a(k)] = -i sigma (w(k) d/dk + k / (2 w(k))) a(k),   same for a^dag(k).

``sigma = +1`` is oriented so that ``[K, H] = i P`` for the free field.
Products follow by the Leibniz rule, tensor pairs by the adjoint-action
lift ``{[K,L] || R} + {L || [K,R]}``, and the momentum derivatives produced
on the way are removed by integration by parts.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import replace

import sympy as sp

from .expr import AlgebraError, Factor, OpExpr, Term, _sorted_normal, canonical, raw
from .scalar import MASS, ZERO, Scalar, momentum_symbol, omega_symbol

SIGMA = 1


def _w(var: str) -> Scalar:
    return Scalar(omega_symbol(var))


def _pref(sigma: int) -> Scalar:
    if sigma not in (1, -1):
        raise ValueError("sigma must be +1 or -1")
    return Scalar(-sp.I * sigma)


def leibniz(e: OpExpr, sigma: int = SIGMA) -> OpExpr:
    """Apply the mode rule factor by factor; the result still carries d/dk factors."""
    pref = _pref(sigma)
    out = []
    for t in e.terms:
        if any(f.deriv for f in t.factors):
            raise AlgebraError("boost input must be free of momentum derivatives")
        loose = {f.var for f in t.factors} - set(t.bound)
        if loose:
            raise AlgebraError(f"un-integrated momentum {sorted(loose)} in an operator factor")
        if not t.factors:
            continue  # c-numbers commute with K
        base = t.coeff * pref
        local = ZERO
        for side in ("left", "right"):
            prod = getattr(t, side)
            if prod is None:
                continue
            for i, f in enumerate(prod):
                v = f.var
                moved = prod[:i] + (replace(f, deriv=1),) + prod[i + 1:]
                out.append(replace(t, coeff=base * _w(v), **{side: moved}))
                local = local + Scalar(momentum_symbol(v)) / (2 * _w(v))
        if not local.is_zero:
            out.append(replace(t, coeff=base * local))
    return raw(out)


def _check_boundary_class(c: Scalar, var: str):
    """Reject coefficients whose by-parts boundary terms are not discardable.

    The admitted denominators are ``(var^2 + m^2)^n`` times var-free factors,
    i.e. smooth for every real momentum.
    """
    x = momentum_symbol(var)
    _, den = sp.fraction(c.expr)
    quad = x**2 + MASS**2
    rest = sp.expand(den)
    while rest.has(x):
        q, r = sp.div(rest, quad, x)
        if r != 0:
            raise AlgebraError(
                f"coefficient {c.text()} is singular in {var}; boundary terms cannot be discarded")
        rest = sp.expand(q)


def _split_derivative(t: Term):
    """(base term with the derivative cleared, (side, dagger), var) of a one-derivative term."""
    found = []
    for side in ("left", "right"):
        prod = getattr(t, side)
        if prod is None:
            continue
        for i, f in enumerate(prod):
            if f.deriv:
                found.append((side, i, f))
    if len(found) != 1:
        raise AlgebraError("integration by parts handles terms with exactly one derivative factor")
    side, i, f = found[0]
    prod = getattr(t, side)
    cleared = prod[:i] + (replace(f, deriv=0),) + prod[i + 1:]
    base = replace(t, **{side: cleared})
    base = replace(base, left=_sorted_normal(base.left),
                   right=None if base.right is None else _sorted_normal(base.right))
    return base, (side, f.dagger), f.var


def integrate_by_parts(e: OpExpr) -> OpExpr:
    """Replace groups ``c * d_v(product)`` by ``-(d_v c) * product``.

    Terms are grouped by their derivative-free skeleton and the derivative's
    momentum, in the naming they arrive with. A group is eliminated only if
    it forms a total derivative, i.e. every factor at ``v`` carries the same
    coefficient per multiplicity; anything else is returned unchanged.
    """
    plain, groups = [], defaultdict(list)
    for t in e.terms:
        if not any(f.deriv for f in t.factors):
            plain.append(t)
            continue
        base, kind, var = _split_derivative(t)
        if var not in t.bound:
            raise AlgebraError(f"derivative with respect to un-integrated momentum {var!r}")
        key = (replace(base, coeff=Scalar(0, _canonical=True)).skeleton(), var)
        groups[key].append((base, kind, t))
    out = list(plain)
    for (_, var), members in groups.items():
        base = members[0][0]
        weights: dict = defaultdict(lambda: ZERO)
        for _, kind, t in members:
            weights[kind] = weights[kind] + t.coeff
        mult: dict = defaultdict(int)
        for side in ("left", "right"):
            for f in getattr(base, side) or ():
                if f.var == var:
                    mult[(side, f.dagger)] += 1
        per = {kind: weights[kind] / mult[kind] for kind in mult}
        values = list(per.values())
        if any(v != values[0] for v in values[1:]):
            out.extend(t for _, _, t in members)
            continue
        c = values[0]
        _check_boundary_class(c, var)
        out.append(replace(base, coeff=-c.diff(var)))
    return OpExpr(tuple(out))


def boost_commutator(e: OpExpr, sigma: int = SIGMA) -> OpExpr:
    """Canonical ``[K, e]`` with all derivative factors integrated away."""
    if e.is_zero:
        return e
    result = integrate_by_parts(leibniz(canonical(e), sigma))
    result = canonical(result)
    if result.has_derivatives():
        raise AlgebraError("derivative factors survive integration by parts")
    return result
