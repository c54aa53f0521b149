"""Independent numeric checks of the reduced integrals.

Two sources: Gamma-function closed forms of the momentum-space integrals
as functions of D, and quadrature of the explicit one-dimensional
propagator

    Delta(t)    = exp(-w|t|) / (2w)
    Delta'(t)   = -sgn(t) exp(-w|t|) / 2
    Delta''(t)  = (w/2) exp(-w|t|) - delta(t)

for integrands that converge at D = 1.  A single delta(t) in the
integrand is integrated against the remaining factors at t = 0, where
Delta'(0) is taken as 0 (the symmetric value); two or more make the
integral divergent at D = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from scipy.integrate import quad

from .reducer import Reducer
from .symexpr import evaluate
from .terms import DELTA, DIRAC, Term, parse_product


class DomainError(ValueError):
    pass


class DivergentAtD1(ValueError):
    pass


def _check(d: float, omega: float):
    if not 0 < d < 2:
        raise DomainError(f"D = {d} outside (0, 2)")
    if omega <= 0:
        raise DomainError("omega must be positive")


def momentum_integral(a: int, b: int, d: float, omega: float) -> float:
    """int d^Dk/(2pi)^D (k^2)^a / (k^2 + w^2)^b."""
    _check(d, omega)
    return (math.gamma(b - a - d / 2) * math.gamma(a + d / 2)
            / ((4 * math.pi) ** (d / 2) * math.gamma(b) * math.gamma(d / 2))
            * omega ** (d + 2 * a - 2 * b))


def delta_at_zero(d: float, omega: float) -> float:
    """Delta(0) = w^(D-2) (4 pi)^(-D/2) Gamma(1 - D/2)."""
    _check(d, omega)
    return omega ** (d - 2) * (4 * math.pi) ** (-d / 2) * math.gamma(1 - d / 2)


# ---------------------------------------------------------------------------
# quadrature at D = 1

def _factor_1d(f) -> tuple[Callable[[float, float], float], float]:
    """(smooth part as a function of u = exp(-w t), t > 0; delta weight)."""
    if f.kind == DIRAC:
        raise DivergentAtD1("bare delta factor")
    if f.order == 0:
        return (lambda u, w: u / (2 * w)), 0.0
    if f.order == 1:
        return (lambda u, w: -u / 2), 0.0
    if f.order == 2:
        return (lambda u, w: w * u / 2), -1.0
    raise DivergentAtD1(f"derivative of order {f.order} carries derivatives of delta")


def _at_zero(f, omega: float) -> float:
    if f.order == 0:
        return 1 / (2 * omega)
    if f.order == 1:
        return 0.0
    raise DivergentAtD1("delta times a second derivative at the same point")


def quadrature_term(t: Term, omega: float) -> float:
    """Integral over t in (-inf, inf) of the product at D = 1."""
    fs = [f for f in t.x_factors() if f.kind in (DELTA, DIRAC)]
    if t.local_factors() or not fs:
        raise ValueError("quadrature needs a purely x-dependent integrand")
    parts = [_factor_1d(f) for f in fs]
    singular = [k for k, (_, dw) in enumerate(parts) if dw]
    # expand the product of (smooth + weight*delta); keep terms with <= 1 delta
    smooth = [p for p, _ in parts]

    def integrand(u):
        val = 1.0
        for p in smooth:
            val *= p(u, omega)
        return val / (omega * u)

    total = 2 * quad(integrand, 0.0, 1.0, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    for k in singular:
        others = [f for j, f in enumerate(fs) if j != k]
        if any(parts[j][1] for j in range(len(fs)) if j != k):
            # cross terms with two deltas survive only if both multiply zeros
            raise DivergentAtD1(f"{t} has a product of delta functions at D = 1")
        val = parts[k][1]
        for f in others:
            val *= _at_zero(f, omega)
        total += val
    return total


# ---------------------------------------------------------------------------
# catalogue

@dataclass(frozen=True)
class ClosedFormIntegral:
    ident: str
    closed: Callable[[float, float], float] | None    # (D, w) -> value
    exact_d1: Callable[[float], float] | None          # w -> value at D = 1
    convergent: bool
    note: str = ""

    @property
    def term(self) -> Term:
        return parse_product(self.ident)


def _j4(w):
    return 1 / (32 * w ** 5)


CATALOGUE: tuple[ClosedFormIntegral, ...] = (
    ClosedFormIntegral("D", lambda d, w: 1 / w ** 2, lambda w: 1 / w ** 2, True),
    ClosedFormIntegral("D^2", lambda d, w: momentum_integral(0, 2, d, w),
                       lambda w: 1 / (4 * w ** 3), True),
    ClosedFormIntegral("Dm^2", lambda d, w: momentum_integral(1, 2, d, w),
                       lambda w: 1 / (4 * w), True),
    ClosedFormIntegral("Dmn^2", lambda d, w: momentum_integral(2, 2, d, w), None, False,
                       "delta squared at D = 1"),
    ClosedFormIntegral("Dmm*Dnn", lambda d, w: momentum_integral(2, 2, d, w), None, False,
                       "delta squared at D = 1"),
    ClosedFormIntegral("D^4", None, _j4, True, "opaque J4"),
    ClosedFormIntegral("Dm^2*D^2", None, lambda w: 1 / (32 * w ** 3), True),
    ClosedFormIntegral("Dmm*D^3", None, lambda w: -3 / (32 * w ** 3), True,
                       "one delta at D = 1"),
    ClosedFormIntegral("Dmm*Dn^2*D", None, lambda w: 1 / (32 * w), True,
                       "one delta at D = 1"),
    ClosedFormIntegral("Dmm*Dnn*D^2", None, lambda w: -7 / (32 * w), False,
                       "delta squared at D = 1"),
    ClosedFormIntegral("Dm^2*Dn^2", None, lambda w: 1 / (32 * w), True,
                       "reduces through I_D"),
)

BY_ID = {c.ident: c for c in CATALOGUE}


def closed_form(ident: str, d: float, omega: float) -> float:
    c = BY_ID.get(ident)
    if c is None:
        raise KeyError(f"{ident!r} not catalogued")
    _check(d, omega)
    if c.closed is not None:
        return c.closed(d, omega)
    if d == 1 and c.exact_d1 is not None:
        return c.exact_d1(omega)
    raise DomainError(f"{ident} has a closed form only at D = 1")


def quadrature(ident: str, omega: float) -> float:
    c = BY_ID.get(ident)
    if c is None:
        raise KeyError(f"{ident!r} not catalogued")
    if not c.convergent:
        raise DivergentAtD1(f"{ident}: {c.note}")
    return quadrature_term(c.term, omega)


def reducer_value(ident: str, d: float, omega: float, reducer: Reducer | None = None):
    """Reducer output evaluated numerically; None when it keeps I_D."""
    e = (reducer or Reducer()).reduce(parse_product(ident))
    atoms = {}
    if "J4" in e.atoms():
        if d != 1:
            return None
        atoms["J4"] = _j4(omega)
    if e.atoms() - atoms.keys():
        return None
    return evaluate(e, d, omega, atoms=atoms, delta_at_zero=delta_at_zero)


@dataclass
class OracleRow:
    ident: str
    omega: float
    closed: float | None
    quad: float | None
    reduced: float | None
    abs_err: float
    rel_err: float
    ok: bool
    note: str = ""

    def to_dict(self) -> dict:
        return dict(self.__dict__)


OMEGAS = (0.5, 1.0, 2.0)
DIMS = (0.7, 1.0, 1.3)


def run_catalogue(omegas=OMEGAS, dims=DIMS, abs_tol=1e-9, rel_tol=1e-12) -> list[OracleRow]:
    """Compare closed forms, quadrature and reducer output for every entry."""
    reducer = Reducer()
    rows = []
    for c in CATALOGUE:
        for w in omegas:
            closed = closed_form(c.ident, 1.0, w) if (c.closed or c.exact_d1) else None
            q = quadrature(c.ident, w) if c.convergent else None
            r = reducer_value(c.ident, 1.0, w, reducer)
            vals = [v for v in (closed, q, r) if v is not None]
            spread = max(vals) - min(vals) if vals else 0.0
            scale = max(abs(v) for v in vals) if vals else 1.0
            ok = spread < abs_tol
            rel = spread / scale if scale else 0.0
            # away from D = 1 only the Gamma forms are available
            if c.closed is not None:
                for d in dims:
                    ref = c.closed(d, w)
                    got = reducer_value(c.ident, d, w, reducer)
                    if got is not None:
                        err = abs(got - ref) / abs(ref)
                        rel = max(rel, err)
                        ok = ok and err < rel_tol
            rows.append(OracleRow(c.ident, w, closed, q, r, spread, rel, ok, c.note))
    return rows


def format_rows(rows: list[OracleRow]) -> str:
    def fmt(v):
        return "-" if v is None else f"{v:.12g}"
    head = f"{'id':<14}{'w':>5}  {'closed':>18}{'quadrature':>18}{'reducer':>18}{'abs':>10}{'rel':>10}  verdict"
    lines = [head]
    for r in rows:
        lines.append(f"{r.ident:<14}{r.omega:>5g}  {fmt(r.closed):>18}{fmt(r.quad):>18}"
                     f"{fmt(r.reduced):>18}{r.abs_err:>10.1e}{r.rel_err:>10.1e}  "
                     f"{'ok' if r.ok else 'FAIL'}")
    return "\n".join(lines)
