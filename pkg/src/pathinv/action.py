"""Coordinate transformation x = f(q) and the vertices it generates.

Substituting ``x = f(q)`` into the oscillator action
``1/2 int [xdot^2 + w^2 x^2]`` gives ``1/2 int [qdot^2 f'(q)^2 + w^2 f(q)^2]``;
the part beyond the free action is the interaction.  The path measure
contributes ``-delta(0) int log f'(q)``.  Both are expanded in powers of
the coupling g.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .symexpr import Expr

MAX_ORDER = 2


class TransformError(ValueError):
    pass


class EvenPower(TransformError):
    pass


class MissingLinearTerm(TransformError):
    pass


class NonPerturbative(TransformError):
    """A higher power of q survives at g = 0."""


class OrderOverflow(ValueError):
    pass


# ---------------------------------------------------------------------------
# sparse polynomials in (g, a, q): {(g_exp, a_exp, q_exp): Fraction}

Poly = dict


def _pmul(p: Poly, q: Poly, max_g: int) -> Poly:
    out: Poly = {}
    for (g1, a1, q1), c1 in p.items():
        for (g2, a2, q2), c2 in q.items():
            if g1 + g2 > max_g:
                continue
            k = (g1 + g2, a1 + a2, q1 + q2)
            out[k] = out.get(k, 0) + c1 * c2
    return {k: v for k, v in out.items() if v}


def _padd(p: Poly, q: Poly, scale=1) -> Poly:
    out = dict(p)
    for k, v in q.items():
        out[k] = out.get(k, 0) + scale * v
    return {k: v for k, v in out.items() if v}


# ---------------------------------------------------------------------------
# coefficient expressions in g and a

_FACTOR_RE = re.compile(r"(\d+(?:/\d+)?|[ga](?:\^\d+)?)")


def parse_coeff(text: str) -> dict[tuple[int, int], Fraction]:
    """Parse a rational polynomial in g and a, e.g. ``-1/3*g`` or ``g^2*a/5``."""
    s = text.replace(" ", "").replace("−", "-")
    if not s:
        raise TransformError("empty coefficient")
    if s[0] not in "+-":
        s = "+" + s
    out: dict[tuple[int, int], Fraction] = {}
    pos = 0
    for m in re.finditer(r"([+-])([^+-]+)", s):
        if m.start() != pos:
            raise TransformError(f"cannot parse coefficient {text!r}")
        pos = m.end()
        sign, body = m.groups()
        c = Fraction(1 if sign == "+" else -1)
        ge = ae = 0
        op = "*"
        i = 0
        while i < len(body):
            fm = _FACTOR_RE.match(body, i)
            if not fm:
                raise TransformError(f"bad token in coefficient {text!r}")
            tok = fm.group(1)
            i = fm.end()
            if tok[0] in "ga":
                if op == "/":
                    raise TransformError(f"cannot divide by {tok} in {text!r}")
                p = int(tok[2:]) if "^" in tok else 1
                if tok[0] == "g":
                    ge += p
                else:
                    ae += p
            else:
                c = c * Fraction(tok) if op == "*" else c / Fraction(tok)
            if i < len(body):
                op = body[i]
                if op not in "*/":
                    raise TransformError(f"bad operator {op!r} in {text!r}")
                i += 1
        out[(ge, ae)] = out.get((ge, ae), 0) + c
    if pos != len(s):
        raise TransformError(f"cannot parse coefficient {text!r}")
    return {k: v for k, v in out.items() if v}


def format_coeff(c: dict[tuple[int, int], Fraction]) -> str:
    if not c:
        return "0"
    parts = []
    for (ge, ae), v in sorted(c.items()):
        sym = "*".join(s for s in (
            "" if ae == 0 else ("a" if ae == 1 else f"a^{ae}"),
            "" if ge == 0 else ("g" if ge == 1 else f"g^{ge}")) if s)
        if not sym:
            parts.append(str(v))
        elif v == 1:
            parts.append(sym)
        elif v == -1:
            parts.append("-" + sym)
        else:
            parts.append(f"{v}*{sym}")
    return "+".join(parts).replace("+-", "-")


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransformSeries:
    """Odd power series f(q) = sum_n c_n(g, a) q^n."""

    terms: tuple[tuple[int, tuple[tuple[tuple[int, int], Fraction], ...]], ...]

    @classmethod
    def from_pairs(cls, pairs) -> "TransformSeries":
        items = []
        seen = set()
        for n, coeff in pairs:
            if isinstance(coeff, str):
                coeff = parse_coeff(coeff)
            n = int(n)
            if n < 1:
                raise TransformError(f"power {n} must be positive")
            if n % 2 == 0:
                raise EvenPower(f"even power q^{n} breaks the q -> -q symmetry")
            if n in seen:
                raise TransformError(f"power q^{n} given twice")
            seen.add(n)
            if n > 1 and any(ge == 0 for (ge, _), v in coeff.items() if v):
                raise NonPerturbative(f"coefficient of q^{n} must vanish at g = 0")
            items.append((n, tuple(sorted(coeff.items()))))
        items.sort()
        if not items or items[0][0] != 1 or dict(items[0][1]) != {(0, 0): Fraction(1)}:
            raise MissingLinearTerm("the coefficient of q must be exactly 1")
        return cls(tuple(items))

    def coefficients(self) -> dict[int, dict[tuple[int, int], Fraction]]:
        return {n: dict(c) for n, c in self.terms}

    def is_identity(self) -> bool:
        return all(not c for n, c in self.terms if n > 1)

    def __str__(self):
        return ",".join(f"{n}:{format_coeff(dict(c))}" for n, c in self.terms)


DEFAULT_TRANSFORM = "1:1,3:-1/3*g,5:1/5*a*g^2"


def parse_transform(spec: str) -> TransformSeries:
    """Build a transform from ``paper-default``, ``identity``,
    ``power:coeff`` pairs (``1:1,3:-1/3*g``) or a tuple list
    (``[(1,1),(3,-g/3)]``)."""
    s = spec.strip()
    if s == "paper-default":
        s = DEFAULT_TRANSFORM
    elif s == "identity":
        s = "1:1"
    if s.startswith("["):
        inner = s.replace("−", "-")
        pairs = re.findall(r"\(\s*(-?\d+)\s*,\s*([^()]*?)\s*\)", inner)
        if not pairs:
            raise TransformError(f"cannot parse transform {spec!r}")
        return TransformSeries.from_pairs(pairs)
    pairs = []
    for chunk in s.split(","):
        n, sep, coeff = chunk.partition(":")
        if not sep:
            raise TransformError(f"expected power:coeff, got {chunk!r}")
        try:
            pairs.append((int(n), coeff))
        except ValueError:
            raise TransformError(f"bad power {n!r}") from None
    return TransformSeries.from_pairs(pairs)


@dataclass(frozen=True)
class ModelParams:
    omega: Fraction | None = None      # None keeps w symbolic
    max_g_order: int = 2
    dimension: str = "symbolic"        # or "D1"

    def __post_init__(self):
        if self.omega is not None and self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.max_g_order not in (1, 2):
            raise OrderOverflow(f"order {self.max_g_order} not supported (max {MAX_ORDER})")
        if self.dimension not in ("symbolic", "D1"):
            raise ValueError(f"bad dimension mode {self.dimension!r}")


@dataclass(frozen=True)
class VertexTerm:
    """coefficient(a) * g^g_order * w^omega_power * qdot^qdot_power * q^q_power.

    Jacobian vertices carry one extra factor delta(0).  The 1/2 of the
    kinetic and potential terms is already inside ``coefficient``.
    """

    coefficient: Expr
    g_order: int
    omega_power: int
    qdot_power: int
    q_power: int
    jacobian: bool = False

    def weight(self) -> Expr:
        """Full coefficient: a-polynomial times w powers and delta(0)."""
        return self.coefficient * Expr.mono(omega=self.omega_power,
                                            dirac0=1 if self.jacobian else 0)

    @property
    def n_fields(self) -> int:
        return self.qdot_power + self.q_power

    def __str__(self):
        fields = []
        if self.qdot_power:
            fields.append(f"qdot^{self.qdot_power}")
        if self.q_power:
            fields.append(f"q^{self.q_power}")
        w = f"*w^{self.omega_power}" if self.omega_power else ""
        d = "*delta0" if self.jacobian else ""
        return f"({self.coefficient})*g^{self.g_order}{w}{d}*{'*'.join(fields) or '1'}"


def _series_polys(f: TransformSeries, max_g: int):
    fpoly: Poly = {}
    dpoly: Poly = {}
    for n, coeff in f.terms:
        for (ge, ae), v in coeff:
            if ge > max_g:
                continue
            fpoly[(ge, ae, n)] = fpoly.get((ge, ae, n), 0) + v
            dpoly[(ge, ae, n - 1)] = dpoly.get((ge, ae, n - 1), 0) + n * v
    return fpoly, dpoly


def _collect(poly: Poly, scale, omega_power, qdot_power, jacobian, out):
    grouped: dict[tuple[int, int], dict] = {}
    for (ge, ae, qe), v in poly.items():
        if ge == 0:
            if v:
                raise AssertionError("g^0 residue in interaction")
            continue
        grouped.setdefault((ge, qe), {})
        grouped[(ge, qe)][ae] = grouped[(ge, qe)].get(ae, 0) + v * scale
    for (ge, qe), apoly in grouped.items():
        coeff = Expr({})
        for ae, v in apoly.items():
            coeff = coeff + Expr.mono(v, a=ae)
        if coeff.is_zero():
            continue
        out.append(VertexTerm(coeff, ge, omega_power, qdot_power, qe, jacobian))


def _sort(vs):
    return sorted(vs, key=lambda v: (v.g_order, v.omega_power, v.q_power))


def expand_interaction(f: TransformSeries, p: ModelParams) -> list[VertexTerm]:
    """Vertices of 1/2 int [qdot^2 (f'^2 - 1) + w^2 (f^2 - q^2)] up to g^max."""
    if p.max_g_order > MAX_ORDER:
        raise OrderOverflow(p.max_g_order)
    g = p.max_g_order
    fpoly, dpoly = _series_polys(f, g)
    kinetic = _padd(_pmul(dpoly, dpoly, g), {(0, 0, 0): Fraction(1)}, -1)
    potential = _padd(_pmul(fpoly, fpoly, g), {(0, 0, 2): Fraction(1)}, -1)
    out: list[VertexTerm] = []
    _collect(kinetic, Fraction(1, 2), 0, 2, False, out)
    _collect(potential, Fraction(1, 2), 2, 0, False, out)
    return _sort(out)


def expand_jacobian(f: TransformSeries, p: ModelParams) -> list[VertexTerm]:
    """Vertices of -delta(0) int log f'(q) up to g^max."""
    if p.max_g_order > MAX_ORDER:
        raise OrderOverflow(p.max_g_order)
    g = p.max_g_order
    _, dpoly = _series_polys(f, g)
    u = _padd(dpoly, {(0, 0, 0): Fraction(1)}, -1)   # f' = 1 + u, u = O(g)
    log: Poly = {}
    power: Poly = {(0, 0, 0): Fraction(1)}
    for k in range(1, g + 1):
        power = _pmul(power, u, g)
        log = _padd(log, power, Fraction((-1) ** (k + 1), k))
    out: list[VertexTerm] = []
    _collect(log, Fraction(-1), 0, 0, True, out)
    return _sort(out)
