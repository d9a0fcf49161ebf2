"""Normal-ordered bosonic operator expressions over one momentum dimension.

A :class:`Term` is ``int d(bound...) coeff * deltas * product`` where the
product is a sequence of :class:`Factor` (``a``, ``a^dag`` or their
momentum derivatives). Superoperator terms carry a second product; the pair
``{L || R}`` acts as ``rho -> L rho R``.

:class:`OpExpr` values built through the public constructors and arithmetic
are canonical: products normal-ordered (``a(k) a^dag(q) = a^dag(q) a(k) +
delta(k - q)``), deltas on integrated momenta contracted, bound variables
renamed to a fixed pool, like terms merged and the terms sorted. Raw,
non-canonical expressions can be assembled with :func:`raw` for testing the
rewriting rules themselves.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import permutations
from typing import Iterable, Sequence

from .scalar import ONE, ZERO, Scalar, is_momentum_name

# canonical names handed to integrated momenta, in order
NAME_POOL = ("k", "q", "p", "r", "s", "u", "v") + tuple(f"{c}{i}" for i in range(1, 10) for c in "kqprsuv")


class AlgebraError(ValueError):
    pass


@dataclass(frozen=True)
class Factor:
    dagger: bool
    var: str
    deriv: int = 0

    def key(self):
        return (0 if self.dagger else 1, self.var, self.deriv)

    def rename(self, mapping: dict[str, str]) -> "Factor":
        return replace(self, var=mapping.get(self.var, self.var))

    def text(self) -> str:
        base = f"{'ad' if self.dagger else 'a'}({self.var})"
        if not self.deriv:
            return base
        return f"D[{base}]" if self.var == "k" else f"D({self.var})[{base}]"


@dataclass(frozen=True)
class Term:
    coeff: Scalar
    bound: tuple[str, ...] = ()
    left: tuple[Factor, ...] = ()
    right: tuple[Factor, ...] | None = None
    deltas: tuple[tuple[str, str], ...] = ()
    zero_deltas: int = 0

    @property
    def is_pair(self) -> bool:
        return self.right is not None

    @property
    def factors(self) -> tuple[Factor, ...]:
        return self.left + (self.right or ())

    @property
    def is_scalar(self) -> bool:
        return not self.is_pair and not self.left

    def mentioned(self) -> set[str]:
        names = {f.var for f in self.factors}
        for x, y in self.deltas:
            names.update((x, y))
        return names | self.coeff.variables()

    def free_vars(self) -> set[str]:
        return self.mentioned() - set(self.bound)

    def rename(self, mapping: dict[str, str]) -> "Term":
        return Term(
            self.coeff.rename(mapping),
            tuple(mapping.get(b, b) for b in self.bound),
            tuple(f.rename(mapping) for f in self.left),
            None if self.right is None else tuple(f.rename(mapping) for f in self.right),
            tuple((mapping.get(x, x), mapping.get(y, y)) for x, y in self.deltas),
            self.zero_deltas,
        )

    def skeleton(self):
        """Everything but the coefficient, as a sortable tuple."""
        return (
            len(self.bound),
            self.bound,
            self.is_pair,
            tuple(f.key() for f in self.left),
            tuple(f.key() for f in self.right or ()),
            self.deltas,
            self.zero_deltas,
        )


# ---------------------------------------------------------------- rewriting

def _is_normal(product: Sequence[Factor]) -> bool:
    seen_annihilator = False
    for f in product:
        if f.dagger and seen_annihilator:
            return False
        seen_annihilator |= not f.dagger
    return True


def _sorted_normal(product: Sequence[Factor]) -> tuple[Factor, ...]:
    # creators commute among themselves, as do annihilators
    creators = sorted((f for f in product if f.dagger), key=Factor.key)
    annihilators = sorted((f for f in product if not f.dagger), key=Factor.key)
    return tuple(creators) + tuple(annihilators)


def normal_order_product(product: Sequence[Factor]) -> list[tuple[tuple[Factor, ...], tuple[tuple[str, str], ...]]]:
    """Expand a factor sequence into normal-ordered products with delta contractions."""
    out = []
    stack = [(tuple(product), ())]
    while stack:
        prod, deltas = stack.pop()
        for i in range(len(prod) - 1):
            x, y = prod[i], prod[i + 1]
            if not x.dagger and y.dagger:
                if x.deriv or y.deriv:
                    raise AlgebraError(
                        "reordering a derivative factor past its conjugate produces delta', "
                        "which the algebra does not represent")
                swapped = prod[:i] + (y, x) + prod[i + 2:]
                contracted = prod[:i] + prod[i + 2:]
                stack.append((swapped, deltas))
                stack.append((contracted, deltas + ((x.var, y.var),)))
                break
        else:
            out.append((_sorted_normal(prod), deltas))
    return out


def sift(term: Term) -> Term:
    """Contract every delta that touches an integrated momentum."""
    bound = list(term.bound)
    deltas = list(term.deltas)
    zero = term.zero_deltas
    t = term
    changed = True
    while changed:
        changed = False
        for idx, (x, y) in enumerate(deltas):
            if x == y:
                zero += 1
                del deltas[idx]
                changed = True
                break
            if y in bound or x in bound:
                gone, keep = (y, x) if y in bound else (x, y)
                del deltas[idx]
                bound.remove(gone)
                mapping = {gone: keep}
                t = Term(t.coeff.rename(mapping), (), tuple(f.rename(mapping) for f in t.left),
                         None if t.right is None else tuple(f.rename(mapping) for f in t.right))
                deltas = [(mapping.get(a, a), mapping.get(b, b)) for a, b in deltas]
                changed = True
                break
    deltas = sorted(tuple(sorted(d)) for d in deltas)
    return Term(t.coeff, tuple(sorted(bound)), t.left, t.right, tuple(deltas), zero)


def _expand_normal(term: Term) -> list[Term]:
    lefts = normal_order_product(term.left)
    rights = [(None, ())] if term.right is None else normal_order_product(term.right)
    out = []
    for lprod, ldel in lefts:
        for rprod, rdel in rights:
            out.append(Term(term.coeff, term.bound, lprod, rprod, term.deltas + ldel + rdel, term.zero_deltas))
    return out


def alpha_normalize(term: Term) -> Term:
    """Rename bound momenta to the canonical pool; symmetrise over automorphisms."""
    free = term.free_vars()
    n = len(term.bound)
    if n == 0:
        return Term(term.coeff, (), _sorted_normal(term.left),
                    None if term.right is None else _sorted_normal(term.right),
                    tuple(sorted(tuple(sorted(d)) for d in term.deltas)), term.zero_deltas)
    pool = [name for name in NAME_POOL if name not in free][:n]
    if len(pool) < n:
        raise AlgebraError("ran out of canonical momentum names")
    best_key, best = None, []
    for perm in permutations(pool):
        mapping = dict(zip(term.bound, perm))
        cand = Term(
            term.coeff, tuple(sorted(perm)),
            _sorted_normal([f.rename(mapping) for f in term.left]),
            None if term.right is None else _sorted_normal([f.rename(mapping) for f in term.right]),
            tuple(sorted(tuple(sorted((mapping.get(x, x), mapping.get(y, y)))) for x, y in term.deltas)),
            term.zero_deltas,
        )
        key = cand.skeleton()
        if best_key is None or key < best_key:
            best_key, best = key, [(cand, mapping)]
        elif key == best_key:
            best.append((cand, mapping))
    coeffs = [term.coeff.rename(mapping) for _, mapping in best]
    coeff = coeffs[0]
    if len(coeffs) > 1:
        total = ZERO
        for c in coeffs:
            total = total + c
        coeff = total / len(coeffs)
    return replace(best[0][0], coeff=coeff)


def canonical_terms(terms: Iterable[Term]) -> tuple[Term, ...]:
    merged: dict = {}
    for term in terms:
        if term.coeff.is_zero:
            continue
        for t in _expand_normal(term):
            t = alpha_normalize(sift(t))
            key = t.skeleton()
            if key in merged:
                merged[key] = replace(merged[key], coeff=merged[key].coeff + t.coeff)
            else:
                merged[key] = t
    return tuple(merged[key] for key in sorted(merged) if not merged[key].coeff.is_zero)


# ---------------------------------------------------------------- expressions

@dataclass(frozen=True)
class OpExpr:
    terms: tuple[Term, ...] = ()

    # constructors ------------------------------------------------------
    @staticmethod
    def from_terms(terms: Iterable[Term]) -> "OpExpr":
        return OpExpr(canonical_terms(terms))

    @staticmethod
    def scalar(value) -> "OpExpr":
        s = value if isinstance(value, Scalar) else Scalar(value)
        return OpExpr.from_terms([Term(s)])

    # properties --------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_pair(self) -> bool:
        return any(t.is_pair for t in self.terms)

    @property
    def is_scalar(self) -> bool:
        return all(t.is_scalar and not t.bound and not t.deltas and not t.zero_deltas for t in self.terms)

    def scalar_value(self) -> Scalar:
        if not self.is_scalar:
            raise AlgebraError("expression is not a pure scalar")
        return self.terms[0].coeff if self.terms else ZERO

    def free_vars(self) -> set[str]:
        out = set()
        for t in self.terms:
            out |= t.free_vars()
        return out

    def has_derivatives(self) -> bool:
        return any(f.deriv for t in self.terms for f in t.factors)

    # arithmetic --------------------------------------------------------
    @staticmethod
    def _coerce(other) -> "OpExpr":
        if isinstance(other, OpExpr):
            return other
        return OpExpr.scalar(other)

    def _check_kinds(self, other: "OpExpr"):
        if self.terms and other.terms and self.is_pair != other.is_pair:
            raise AlgebraError("cannot add an operator and a superoperator")

    def __add__(self, other):
        other = self._coerce(other)
        self._check_kinds(other)
        return OpExpr.from_terms(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return OpExpr(tuple(replace(t, coeff=-t.coeff) for t in self.terms))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        return OpExpr.from_terms(_multiply(x, y) for x in self.terms for y in other.terms)

    def __rmul__(self, other):
        return self._coerce(other) * self

    def __truediv__(self, other):
        divisor = self._coerce(other).scalar_value()
        if divisor.is_zero:
            raise AlgebraError("division by zero")
        inv = ONE / divisor
        return OpExpr.from_terms(replace(t, coeff=t.coeff * inv) for t in self.terms)

    def __pow__(self, n: int):
        if n < 0:
            return OpExpr.scalar(self.scalar_value() ** n)
        out = OpExpr.scalar(1)
        for _ in range(n):
            out = out * self
        return out

    def scale(self, c: Scalar) -> "OpExpr":
        return OpExpr.from_terms(replace(t, coeff=t.coeff * c) for t in self.terms)

    def __str__(self):
        return to_text(self)

    def __repr__(self):
        return f"OpExpr({to_text(self)})"


def raw(terms: Iterable[Term]) -> OpExpr:
    """Wrap terms without canonicalising (for exercising the rewrite rules)."""
    return OpExpr(tuple(terms))


def canonical(e: OpExpr) -> OpExpr:
    return OpExpr.from_terms(e.terms)


def normal_order(e: OpExpr) -> OpExpr:
    """Normal-order every product, contract deltas and merge; i.e. the canonical form."""
    return canonical(e)


def sift_expr(e: OpExpr) -> OpExpr:
    """Delta contraction alone, without reordering or merging."""
    return OpExpr(tuple(sift(t) for t in e.terms))


def _fresh(names: Iterable[str], avoid: set[str]) -> dict[str, str]:
    mapping = {}
    pool = (n for n in NAME_POOL if n not in avoid)
    for name in names:
        new = next(pool)
        mapping[name] = new
        avoid.add(new)
    return mapping


def _multiply(x: Term, y: Term) -> Term:
    if x.is_pair != y.is_pair and not (x.is_scalar or y.is_scalar):
        raise AlgebraError("cannot multiply an operator with a superoperator")
    avoid = x.free_vars() | y.free_vars()
    x = x.rename(_fresh(x.bound, avoid))
    y = y.rename(_fresh(y.bound, avoid))
    if x.is_pair or y.is_pair:
        xr = x.right if x.is_pair else ()
        yr = y.right if y.is_pair else ()
        right = yr + xr
    else:
        right = None
    return Term(x.coeff * y.coeff, x.bound + y.bound, x.left + y.left, right,
                x.deltas + y.deltas, x.zero_deltas + y.zero_deltas)


def commutator(x: OpExpr, y: OpExpr) -> OpExpr:
    return x * y - y * x


def _check_var(var: str):
    if not is_momentum_name(var):
        raise AlgebraError(f"{var!r} is not a momentum variable name")


def annihilator(var: str) -> OpExpr:
    _check_var(var)
    return OpExpr.from_terms([Term(ONE, left=(Factor(False, var),))])


def creator(var: str) -> OpExpr:
    _check_var(var)
    return OpExpr.from_terms([Term(ONE, left=(Factor(True, var),))])


def delta(x: str, y: str) -> OpExpr:
    _check_var(x)
    _check_var(y)
    return OpExpr.from_terms([Term(ONE, deltas=((x, y),))])


def integrate(var: str, e: OpExpr) -> OpExpr:
    """Attach an integral over ``var`` to every term."""
    _check_var(var)
    out = []
    for t in e.terms:
        if var in t.bound:
            raise AlgebraError(f"momentum {var!r} is already integrated")
        out.append(replace(t, bound=t.bound + (var,)))
    return OpExpr.from_terms(out)


def tensor_pair(left: OpExpr, right: OpExpr) -> OpExpr:
    """``{left || right}``: the superoperator ``rho -> left rho right``."""
    if left.is_pair or right.is_pair:
        raise AlgebraError("tensor-pair sides must be plain operators")
    out = []
    for x in left.terms:
        for y in right.terms:
            avoid = x.free_vars() | y.free_vars()
            xx = x.rename(_fresh(x.bound, avoid))
            yy = y.rename(_fresh(y.bound, avoid))
            out.append(Term(xx.coeff * yy.coeff, xx.bound + yy.bound, xx.left, yy.left,
                            xx.deltas + yy.deltas, xx.zero_deltas + yy.zero_deltas))
    return OpExpr.from_terms(out)


def derivative(e: OpExpr, var: str) -> OpExpr:
    """Formal ``d/d(var)`` of a canonical expression (Leibniz over factors)."""
    _check_var(var)
    out = []
    for t in e.terms:
        if var in t.bound:
            continue
        if any(var in d for d in t.deltas):
            raise AlgebraError("derivative of a delta function is not representable")
        dc = t.coeff.diff(var)
        if not dc.is_zero:
            out.append(replace(t, coeff=dc))
        for side in ("left", "right"):
            prod = getattr(t, side)
            if prod is None:
                continue
            for i, f in enumerate(prod):
                if f.var != var:
                    continue
                if f.deriv:
                    raise AlgebraError("second momentum derivatives are not supported")
                new = prod[:i] + (replace(f, deriv=1),) + prod[i + 1:]
                out.append(replace(t, **{side: new}))
    return OpExpr.from_terms(out)


def substitute_symbol(e: OpExpr, name: str, value: Scalar) -> OpExpr:
    return OpExpr.from_terms(replace(t, coeff=t.coeff.substitute(name, value)) for t in e.terms)


def adjoint(e: OpExpr) -> OpExpr:
    """Hermitian conjugate of a plain operator expression."""
    if e.is_pair:
        raise AlgebraError("adjoint is defined here for plain operators only")
    out = []
    for t in e.terms:
        rev = tuple(replace(f, dagger=not f.dagger) for f in reversed(t.left))
        out.append(replace(t, coeff=t.coeff.conjugate(), left=rev))
    return OpExpr.from_terms(out)


# ---------------------------------------------------------------- printing

def _product_text(prod: Sequence[Factor]) -> str:
    return "*".join(f.text() for f in prod) if prod else "1"


def _term_body(t: Term, coeff: Scalar) -> str:
    parts = []
    ctxt = coeff.text()
    if ctxt != "1":
        num_terms = ctxt.count(" + ") + ctxt.count(" - ")
        parts.append(f"({ctxt})" if num_terms and not ctxt.startswith("(") else ctxt)
    parts += [f"delta({x},{y})" for x, y in t.deltas]
    parts += ["delta(k,k)"] * t.zero_deltas
    if t.is_pair:
        parts.append(f"{{ {_product_text(t.left)} || {_product_text(t.right)} }}")
    elif t.left:
        parts.append(_product_text(t.left))
    body = "*".join(parts) if parts else "1"
    for b in reversed(t.bound):
        body = f"int {b} [ {body} ]"
    return body


def to_text(e: OpExpr) -> str:
    if not e.terms:
        return "0"
    pieces = []
    for t in e.terms:
        c = t.coeff
        neg = c.text().startswith("-") and (" + " not in c.text() and " - " not in c.text())
        pieces.append(("-", _term_body(t, -c)) if neg else ("+", _term_body(t, c)))
    sign, body = pieces[0]
    out = f"-{body}" if sign == "-" else body
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out
