"""Exact identity checks, the built-in corpus and randomized algebra properties."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from ..fockspace import FockBasis, ModeSet
from .boost import SIGMA
from .expr import OpExpr, commutator, normal_order, to_text
from .lattice import lattice_difference
from .parser import parse, parse_identity_file

LATTICE_TOL = 1e-10
# generic rates for the lattice confirmation, chosen unequal so g/gamma mixups show
LATTICE_PARAMS = {"gamma": 0.37, "g": 0.61}

SUPEROP_BODY = "({a(k)||ad(k)} - 1/2*{ad(k)*a(k)||1} - 1/2*{1||ad(k)*a(k)})"

BUILTIN_CORPUS = f"""\
# free field generators and the decay dissipator, in one momentum dimension
let
  H = int k [ w*ad(k)*a(k) ]
  P = int k [ k*ad(k)*a(k) ]
  D_poulin = int k [ gamma*w*{SUPEROP_BODY} ]
  Psuper0 = int k [ g*w*{SUPEROP_BODY} ]
  Psuper1 = int k [ g*k*{SUPEROP_BODY} ]
end
assert boost_H_is_P: boost(H) == i*sigma*P
assert boost_P_is_H: boost(P) == i*sigma*H
assert dissipator_is_P0: D_poulin == subs(Psuper0, g, gamma)
assert boost_dissipator_nonzero: boost(D_poulin) != 0
assert boost_dissipator_is_P1: boost(D_poulin) == i*sigma*subs(Psuper1, g, gamma)
"""


@dataclass
class IdentityReport:
    name: str
    lhs: str
    rhs: str
    verdict: str  # "equal" | "differ"
    difference: str | None
    expected: str = "equal"
    lattice_max_error: float | None = None
    source: str = "builtin"

    @property
    def passed(self) -> bool:
        if self.verdict != self.expected:
            return False
        return self.lattice_max_error is None or self.lattice_max_error <= LATTICE_TOL

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def check_identity(name: str, lhs: OpExpr, rhs: OpExpr, expected: str = "equal",
                   basis: FockBasis | None = None, params: dict | None = None,
                   source: str = "builtin") -> IdentityReport:
    """Exact verdict by canonical subtraction; an ``equal`` verdict is also
    confirmed on ``basis`` when one is given."""
    diff = lhs - rhs
    verdict = "equal" if diff.is_zero else "differ"
    err = None
    if basis is not None and verdict == "equal":
        err = lattice_difference(lhs, rhs, basis, {**LATTICE_PARAMS, **(params or {})})
    return IdentityReport(name, to_text(lhs), to_text(rhs), verdict,
                          None if diff.is_zero else to_text(diff), expected, err, source)


def check_text(text: str, basis: FockBasis | None = None, sigma: int = SIGMA,
               source: str = "user", env: dict | None = None) -> list[IdentityReport]:
    f = parse_identity_file(text, env=env, sigma=sigma)
    return [check_identity(a.name, a.lhs, a.rhs, "equal" if a.expect_equal else "differ",
                           basis, source=source) for a in f.assertions]


# ---------------------------------------------------------------- random corpus

_COEFFS = ("1", "k", "w", "k^2", "k*w", "1/w", "m", "2", "-1", "1/2")
_QUADRATICS = ("ad(k)*a(k)", "a(k)*a(k)", "ad(k)*ad(k)", "a(k)*ad(k)")
_LINEARS = ("a(k)", "ad(k)")


def random_quadratic_text(rng: np.random.Generator) -> str:
    """Single-integral quadratic such as ``int k [ (k*w)*ad(k)*a(k) ]``."""
    c = _COEFFS[rng.integers(len(_COEFFS))]
    q = _QUADRATICS[rng.integers(len(_QUADRATICS))]
    return f"int k [ ({c})*{q} ]"


def random_expression_text(rng: np.random.Generator, max_terms: int = 3) -> str:
    """Small mixed expression: sums of integrated linears and quadratics."""
    pieces = []
    for _ in range(int(rng.integers(1, max_terms + 1))):
        c = _COEFFS[rng.integers(len(_COEFFS))]
        if rng.random() < 0.3:
            body = _LINEARS[rng.integers(len(_LINEARS))]
        else:
            body = _QUADRATICS[rng.integers(len(_QUADRATICS))]
        pieces.append(f"int k [ ({c})*{body} ]")
    return " + ".join(pieces)


def _property(name: str, lhs: OpExpr, rhs: OpExpr) -> IdentityReport:
    return check_identity(name, lhs, rhs, source="property")


def property_checks(seed: int = 0, n_pairs: int = 6, n_triples: int = 3,
                    n_idem: int = 50) -> list[IdentityReport]:
    """Seeded antisymmetry, bilinearity, Jacobi, idempotence and round-trip checks."""
    rng = np.random.default_rng(seed)
    out = []
    for n in range(n_pairs):
        x, y, z = (parse(random_expression_text(rng)) for _ in range(3))
        out.append(_property(f"antisymmetry[{n}]", commutator(x, y), -commutator(y, x)))
        alpha, beta = (int(v) for v in rng.integers(-3, 4, size=2))
        out.append(_property(f"bilinearity[{n}]", commutator(alpha * x + beta * y, z),
                             alpha * commutator(x, z) + beta * commutator(y, z)))
    for n in range(n_triples):
        x, y, z = (parse(random_quadratic_text(rng)) for _ in range(3))
        jac = (commutator(x, commutator(y, z)) + commutator(y, commutator(z, x))
               + commutator(z, commutator(x, y)))
        out.append(_property(f"jacobi[{n}]", jac, OpExpr(())))
    for n in range(n_idem):
        e = parse(random_expression_text(rng))
        out.append(_property(f"normal_order_idempotent[{n}]", normal_order(normal_order(e)), normal_order(e)))
        out.append(_property(f"round_trip[{n}]", parse(to_text(e)), e))
    return out


def default_basis() -> FockBasis:
    return FockBasis(ModeSet(2 * np.pi, 1, 1.0), 2)


def run_corpus(user_text: str | None = None, seed: int = 0, basis: FockBasis | None = None,
               sigma: int = SIGMA, properties: bool = True) -> list[IdentityReport]:
    """Built-ins (lattice confirmed), optional user file, then the property set."""
    basis = basis or default_basis()
    reports = check_text(BUILTIN_CORPUS, basis, sigma, source="builtin")
    if user_text and user_text.strip():
        reports += check_text(user_text, basis, sigma, source="user")
    if properties:
        reports += property_checks(seed)
    return reports


def builtins_ok(reports: list[IdentityReport]) -> bool:
    return all(r.passed for r in reports if r.source != "user")


def reports_json(reports: list[IdentityReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True)
