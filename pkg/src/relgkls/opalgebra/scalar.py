"""Exact scalar coefficients: rational functions of momenta with ``w(x)^2 = x^2 + m^2``.

Every value is kept in a normal form ``(P_0 + sum_S P_S prod_{x in S} w(x)) / Q``
where ``Q`` contains no ``w`` symbol, the numerator is multilinear in the
``w`` symbols, ``gcd(numerator, Q) = 1`` and the leading coefficient of ``Q``
(lex order over the sorted generators) is 1. The multilinear representation
over ``Q(i)(k, ..., m, gamma, g)`` is unique, so structural equality of the
stored sympy expression is mathematical equality.
"""
from __future__ import annotations

import re
from functools import lru_cache

import sympy as sp

MASS = sp.Symbol("m", positive=True)
GAMMA = sp.Symbol("gamma", real=True)
COUPLING = sp.Symbol("g", real=True)
NAMED_SYMBOLS = {"m": MASS, "gamma": GAMMA, "g": COUPLING}

MOMENTUM_NAME = re.compile(r"^[kpqrsuv][0-9]*$")
_OMEGA_PREFIX = "w_"


class ScalarError(ValueError):
    pass


def is_momentum_name(name: str) -> bool:
    return bool(MOMENTUM_NAME.match(name))


@lru_cache(maxsize=None)
def momentum_symbol(var: str) -> sp.Symbol:
    if not is_momentum_name(var):
        raise ScalarError(f"{var!r} is not a momentum variable name")
    return sp.Symbol(var, real=True)


@lru_cache(maxsize=None)
def omega_symbol(var: str) -> sp.Symbol:
    momentum_symbol(var)
    return sp.Symbol(_OMEGA_PREFIX + var, positive=True)


def omega_var(sym: sp.Symbol) -> str | None:
    """Momentum variable of an ``w_x`` symbol, else ``None``."""
    name = sym.name
    if name.startswith(_OMEGA_PREFIX) and is_momentum_name(name[len(_OMEGA_PREFIX):]):
        return name[len(_OMEGA_PREFIX):]
    return None


def _omegas(expr: sp.Expr) -> list[sp.Symbol]:
    return sorted((s for s in expr.free_symbols if omega_var(s) is not None), key=lambda s: s.name)


def _reduce_omegas(p: sp.Expr) -> sp.Expr:
    """Replace ``w_x^2`` by ``x^2 + m^2`` until every ``w`` has degree <= 1."""
    p = sp.expand(p)
    for w in _omegas(p):
        x = momentum_symbol(omega_var(w))
        poly = sp.Poly(p, w)
        if poly.degree() <= 1:
            continue
        sq = x**2 + MASS**2
        out = sp.Integer(0)
        for (n,), c in poly.terms():
            out += c * sq ** (n // 2) * w ** (n % 2)
        p = sp.expand(out)
    return p


def canonical(expr) -> sp.Expr:
    return _normal_form(sp.sympify(expr))[0]


@lru_cache(maxsize=1 << 16)
def _normal_form(expr: sp.Expr) -> tuple[sp.Expr, sp.Expr | None]:
    """Normal form plus, when a ``w`` had to be cleared from the denominator,
    the pre-rationalized value form.

    Multiplying by the conjugate ``A - B w`` adds zeros to the denominator
    (``k^2 = q^2`` for ``1/(w(k) + w(q))``) that the value itself does not
    have, so numeric evaluation uses the value form.
    """
    # the same coefficients recur constantly under renaming and merging
    if expr.is_number:
        return sp.expand(expr), None
    num, den = sp.fraction(sp.together(expr))
    num, den = _reduce_omegas(num), _reduce_omegas(den)
    if den == 0:
        raise ScalarError("division by zero")
    value = num / den if _omegas(den) else None
    for w in _omegas(den):
        if not den.has(w):
            continue
        A, B = den.coeff(w, 0), den.coeff(w, 1)
        conj = A - B * w
        num = _reduce_omegas(num * conj)
        den = _reduce_omegas(den * conj)
    if den == 0:
        raise ScalarError("division by zero")
    num, den = sp.fraction(sp.cancel(num / den))
    num, den = _reduce_omegas(num), sp.expand(den)
    gens = sorted(num.free_symbols | den.free_symbols, key=lambda s: s.name)
    lc = sp.Poly(den, *gens).LC() if gens else den
    num, den = sp.expand(num / lc), sp.expand(den / lc)
    return (num if den == 1 else num / den), value


class Scalar:
    """Immutable exact coefficient in normal form."""

    __slots__ = ("expr", "_value")

    def __init__(self, expr=0, _canonical: bool = False):
        if _canonical:
            canon, value = sp.sympify(expr), None
        else:
            canon, value = _normal_form(sp.sympify(expr))
        object.__setattr__(self, "expr", canon)
        # equal in value to ``expr``, free of denominator zeros added by rationalizing
        object.__setattr__(self, "_value", canon if value is None else value)

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    @staticmethod
    def _coerce(other) -> "Scalar":
        return other if isinstance(other, Scalar) else Scalar(other)

    def __add__(self, other):
        return Scalar(self._value + self._coerce(other)._value)

    __radd__ = __add__

    def __sub__(self, other):
        return Scalar(self._value - self._coerce(other)._value)

    def __rsub__(self, other):
        return Scalar(self._coerce(other)._value - self._value)

    def __mul__(self, other):
        return Scalar(self._value * self._coerce(other)._value)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.is_zero:
            raise ScalarError("division by zero")
        return Scalar(self._value / o._value)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __neg__(self):
        return Scalar(-self.expr, _canonical=True) if self.expr.is_number else Scalar(-self._value)

    def __pow__(self, n: int):
        if int(n) != n:
            raise ScalarError("only integer powers are supported")
        if n < 0 and self.is_zero:
            raise ScalarError("division by zero")
        return Scalar(self._value ** int(n))

    def __eq__(self, other):
        if not isinstance(other, Scalar):
            try:
                other = Scalar(other)
            except (sp.SympifyError, TypeError):
                return NotImplemented
        return self.expr == other.expr

    def __hash__(self):
        return hash(self.expr)

    def __repr__(self):
        return f"Scalar({self.text()})"

    @property
    def is_zero(self) -> bool:
        return self.expr == 0

    @property
    def is_number(self) -> bool:
        return bool(self.expr.is_number)

    def variables(self) -> set[str]:
        out = set()
        for s in self.expr.free_symbols:
            v = omega_var(s)
            if v is not None:
                out.add(v)
            elif is_momentum_name(s.name):
                out.add(s.name)
        return out

    def diff(self, var: str) -> "Scalar":
        """Total d/d(var), with ``d w(var)/d var = var / w(var)``."""
        x, w = momentum_symbol(var), omega_symbol(var)
        return Scalar(sp.diff(self._value, x) + sp.diff(self._value, w) * x / w)

    def rename(self, mapping: dict[str, str]) -> "Scalar":
        """Simultaneous renaming of momentum variables (``w`` symbols follow)."""
        sub = {}
        for old, new in mapping.items():
            if old == new:
                continue
            sub[momentum_symbol(old)] = momentum_symbol(new)
            sub[omega_symbol(old)] = omega_symbol(new)
        if not sub:
            return self
        return Scalar(self._value.xreplace(sub))

    def substitute(self, name: str, value: "Scalar") -> "Scalar":
        """Replace a named symbol (``m``, ``gamma``, ``g``) by a scalar."""
        sym = NAMED_SYMBOLS[name]
        return Scalar(self._value.xreplace({sym: value._value}))

    def evaluate(self, momenta: dict[str, float], omegas: dict[str, float], params: dict[str, float]) -> complex:
        sub = {}
        for s in self._value.free_symbols:
            v = omega_var(s)
            if v is not None:
                sub[s] = omegas[v]
            elif s.name in NAMED_SYMBOLS:
                if s.name not in params:
                    raise ScalarError(f"no numeric value supplied for {s.name!r}")
                sub[s] = params[s.name]
            else:
                sub[s] = momenta[s.name]
        return complex(sp.N(self._value.xreplace({s: sp.Float(v, 17) for s, v in sub.items()}), 17))

    def conjugate(self) -> "Scalar":
        return Scalar(sp.conjugate(self._value))

    def text(self) -> str:
        return scalar_text(self.expr)


ZERO = Scalar(0, _canonical=True)
ONE = Scalar(1, _canonical=True)
I_UNIT = Scalar(sp.I, _canonical=True)


def _symbol_text(s: sp.Symbol) -> str:
    v = omega_var(s)
    if v is not None:
        return "w" if v == "k" else f"w({v})"
    return s.name


def _number_text(c) -> tuple[str, bool]:
    """Text of a Gaussian rational; second item tells whether it is a sum."""
    c = sp.nsimplify(c) if not isinstance(c, sp.Basic) else c
    re_, im_ = sp.re(c), sp.im(c)
    if im_ == 0:
        return str(re_), False
    if re_ == 0:
        if im_ == 1:
            return "i", False
        if im_ == -1:
            return "-i", False
        return f"{im_}*i", False
    sign = "+" if im_ > 0 else "-"
    mag = abs(im_)
    im_txt = "i" if mag == 1 else f"{mag}*i"
    return f"({re_} {sign} {im_txt})", True


def _poly_text(p: sp.Expr) -> tuple[str, int]:
    """Polynomial text and its number of monomials."""
    p = sp.expand(p)
    if p == 0:
        return "0", 1
    gens = sorted(p.free_symbols, key=lambda s: s.name)
    if not gens:
        txt, _ = _number_text(p)
        return txt, 1
    poly = sp.Poly(p, *gens)
    pieces = []
    for monom, c in poly.terms():
        factors = []
        for g, e in zip(gens, monom):
            if e == 1:
                factors.append(_symbol_text(g))
            elif e > 1:
                factors.append(f"{_symbol_text(g)}^{e}")
        ctxt, _ = _number_text(c)
        if not factors:
            body = ctxt
        elif ctxt == "1":
            body = "*".join(factors)
        elif ctxt == "-1":
            body = "-" + "*".join(factors)
        else:
            body = "*".join([ctxt] + factors)
        pieces.append(body)
    out = pieces[0]
    for piece in pieces[1:]:
        out += f" - {piece[1:]}" if piece.startswith("-") else f" + {piece}"
    return out, len(pieces)


def scalar_text(expr: sp.Expr) -> str:
    num, den = sp.fraction(expr)
    ntxt, nterms = _poly_text(num)
    if den == 1:
        return ntxt
    dtxt, dterms = _poly_text(den)
    sign = ""
    if nterms == 1 and ntxt.startswith("-"):
        sign, ntxt = "-", ntxt[1:]
    if nterms > 1 or "*" in ntxt or ntxt.startswith("("):
        ntxt = f"({ntxt})"
    if dterms > 1 or "*" in dtxt or "^" in dtxt or dtxt.startswith("-"):
        dtxt = f"({dtxt})"
    return f"{sign}{ntxt}/{dtxt}"
