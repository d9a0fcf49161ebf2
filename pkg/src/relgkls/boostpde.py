"""Finite Lorentz boosts of second-order constant-coefficient field equations.

The equation ``c_tt phi_tt + c_tx phi_tx + c_xx phi_xx + c_0 phi = 0`` is
carried to a frame with rapidity ``zeta`` by
``d_t -> cosh d_t' + sinh d_x'`` and ``d_x -> sinh d_t' + cosh d_x'``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import asdict, dataclass

DEFAULT_WITNESS_ZETA = 0.3
INVARIANCE_TOL = 1e-12


@dataclass(frozen=True)
class PdeCoeffs:
    c_tt: float
    c_tx: float
    c_xx: float
    c_0: float

    def __post_init__(self):
        if self.c_tt == 0 and self.c_tx == 0 and self.c_xx == 0:
            raise ValueError("principal part vanishes identically")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.c_tt, self.c_tx, self.c_xx, self.c_0)

    def discriminant(self) -> float:
        return self.c_tt * self.c_xx - 0.25 * self.c_tx**2


def klein_gordon(m: float) -> PdeCoeffs:
    return PdeCoeffs(1.0, 0.0, -1.0, m**2)


def damped_field_equation(gamma: float, m: float) -> PdeCoeffs:
    """``phi_tt = gamma^2 (m^2 - phi_xx) phi``, the amplitude-damped field equation."""
    return PdeCoeffs(1.0, 0.0, gamma**2, -(gamma**2) * m**2)


def boost(c: PdeCoeffs, zeta: float) -> PdeCoeffs:
    ch, sh = math.cosh(zeta), math.sinh(zeta)
    return PdeCoeffs(
        c.c_tt * ch * ch + c.c_tx * ch * sh + c.c_xx * sh * sh,
        2 * ch * sh * (c.c_tt + c.c_xx) + c.c_tx * (ch * ch + sh * sh),
        c.c_tt * sh * sh + c.c_tx * ch * sh + c.c_xx * ch * ch,
        c.c_0,
    )


@dataclass(frozen=True)
class Verdict:
    invariant: bool
    zeta: float
    transformed: PdeCoeffs
    cross_term: float
    max_change: float

    @property
    def label(self) -> str:
        return "invariant" if self.invariant else "non_invariant"


def _is_minkowski(c: PdeCoeffs, tol: float) -> bool:
    scale = max(abs(c.c_tt), abs(c.c_tx), abs(c.c_xx))
    return abs(c.c_tx) <= tol * scale and abs(c.c_tt + c.c_xx) <= tol * scale


def invariance_verdict(c: PdeCoeffs, zeta: float = DEFAULT_WITNESS_ZETA,
                       tol: float = INVARIANCE_TOL) -> Verdict:
    """Form invariance holds iff the principal part is proportional to the Minkowski metric."""
    invariant = _is_minkowski(c, tol)
    out = boost(c, zeta)
    change = max(abs(x - y) for x, y in zip(out.as_tuple(), c.as_tuple()))
    if not invariant and change == 0.0:
        # witness rapidity happened to be a fixed point; any other one works
        zeta = -zeta if zeta else DEFAULT_WITNESS_ZETA
        out = boost(c, zeta)
        change = max(abs(x - y) for x, y in zip(out.as_tuple(), c.as_tuple()))
    return Verdict(invariant, zeta, out, out.c_tx, change)


def dispersion_check(c: PdeCoeffs, k: float) -> tuple[complex, complex]:
    """Roots ``lambda`` of ``c_tt l^2 + i c_tx k l - c_xx k^2 + c_0 = 0`` for ``e^{ikx + l t}``."""
    if c.c_tt == 0:
        raise ValueError("c_tt = 0: the plane-wave equation is not quadratic")
    A, B, C = c.c_tt, 1j * c.c_tx * k, -c.c_xx * k**2 + c.c_0
    root = cmath.sqrt(B * B - 4 * A * C)
    return ((-B + root) / (2 * A), (-B - root) / (2 * A))


def report(c: PdeCoeffs, zeta: float, k: float | None = None) -> dict:
    """JSON-ready record of one check."""
    v = invariance_verdict(c, zeta)
    out = {
        "input": asdict(c),
        "zeta": v.zeta,
        "transformed": asdict(v.transformed),
        "verdict": v.label,
        "witness": {"zeta": v.zeta, "cross_term": v.cross_term, "max_coefficient_change": v.max_change},
    }
    if k is not None:
        roots = dispersion_check(c, k)
        out["dispersion"] = {"k": k, "roots": [[r.real, r.imag] for r in roots]}
    return out
