"""Exact symbolic algebra for regularized vacuum-diagram values.

Values are finite linear combinations of basis monomials

    Delta0^p * w^q * a^k * delta0^j * ATOM

where ``Delta0`` is the propagator at the origin, ``w`` the oscillator
frequency, ``a`` the free transformation parameter, ``delta0`` the
delta function at the origin, and ``ATOM`` at most one opaque integral
(``J4`` = integral of Delta^4, ``I_D``, and their higher-power analogues).
Coefficients are rational functions of the symbolic dimension ``D`` with
exact rational coefficients.

All objects are immutable.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Mapping, Union

RationalLike = Union[int, Fraction, str]


class OpaqueResidue(ValueError):
    """An opaque atom (J4, I_D, delta(0), ...) survived where a number was needed."""


class PoleAtD1(ZeroDivisionError):
    """A coefficient has a pole at D = 1."""


def rational(x: RationalLike) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not exact; pass int, Fraction or 'p/q'")
    return Fraction(x)


# ---------------------------------------------------------------------------
# univariate polynomials over Q, as tuples of Fractions (ascending powers)

def _trim(c: Iterable[Fraction]) -> tuple[Fraction, ...]:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _padd(p, q):
    n = max(len(p), len(q))
    return _trim((p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0)
                 for i in range(n))


def _pneg(p):
    return tuple(-x for x in p)


def _pmul(p, q):
    if not p or not q:
        return ()
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, x in enumerate(p):
        if x:
            for j, y in enumerate(q):
                out[i + j] += x * y
    return _trim(out)


def _pdivmod(p, q):
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    p = list(p)
    quot = [Fraction(0)] * max(len(p) - len(q) + 1, 0)
    lead = q[-1]
    while len(p) >= len(q) and p:
        shift = len(p) - len(q)
        f = p[-1] / lead
        quot[shift] = f
        for i, y in enumerate(q):
            p[i + shift] -= f * y
        p = list(_trim(p))
    return _trim(quot), _trim(p)


def _pgcd(p, q):
    while q:
        p, q = q, _pdivmod(p, q)[1]
    if not p:
        return ()
    lead = p[-1]
    return tuple(x / lead for x in p)


def _peval(p, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _pformat(p, var="D") -> str:
    if not p:
        return "0"
    parts = []
    for k in range(len(p) - 1, -1, -1):
        c = p[k]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if k == 0:
            body = str(mag)
        else:
            pw = var if k == 1 else f"{var}^{k}"
            body = pw if mag == 1 else f"{mag}*{pw}"
        parts.append((sign, body))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


_TERM_RE = re.compile(r"^(?:(\d+(?:/\d+)?)\*?)?(D(?:\^(\d+))?)?$")


def _pparse(text: str) -> tuple[Fraction, ...]:
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty polynomial")
    if s[0] not in "+-":
        s = "+" + s
    coeffs: dict[int, Fraction] = {}
    for sign, body in re.findall(r"([+-])([^+-]+)", s):
        m = _TERM_RE.match(body)
        if not m or (m.group(1) is None and m.group(2) is None):
            raise ValueError(f"bad polynomial term {body!r}")
        c = Fraction(m.group(1)) if m.group(1) else Fraction(1)
        k = 0
        if m.group(2):
            k = int(m.group(3)) if m.group(3) else 1
        coeffs[k] = coeffs.get(k, Fraction(0)) + (c if sign == "+" else -c)
    n = max(coeffs) + 1
    return _trim(coeffs.get(i, Fraction(0)) for i in range(n))


@dataclass(frozen=True)
class DPoly:
    """Rational function num(D)/den(D) in lowest terms with monic denominator."""

    num: tuple[Fraction, ...]
    den: tuple[Fraction, ...] = (Fraction(1),)

    def __post_init__(self):
        num, den = _trim(self.num), _trim(self.den)
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            den = (Fraction(1),)
        else:
            g = _pgcd(num, den)
            if len(g) > 1:
                num = _pdivmod(num, g)[0]
                den = _pdivmod(den, g)[0]
            lead = den[-1]
            num = tuple(x / lead for x in num)
            den = tuple(x / lead for x in den)
        object.__setattr__(self, "num", tuple(Fraction(x) for x in num))
        object.__setattr__(self, "den", tuple(Fraction(x) for x in den))

    @classmethod
    def const(cls, c: RationalLike) -> "DPoly":
        return cls((rational(c),))

    @classmethod
    def poly(cls, *coeffs: RationalLike) -> "DPoly":
        """``DPoly.poly(c0, c1, ...)`` is c0 + c1*D + ..."""
        return cls(tuple(rational(c) for c in coeffs))

    @classmethod
    def parse(cls, text: str) -> "DPoly":
        s = text.strip()
        m = re.fullmatch(r"\((.*)\)/\((.*)\)", s)
        if m:
            return cls(_pparse(m.group(1)), _pparse(m.group(2)))
        return cls(_pparse(s))

    def is_zero(self) -> bool:
        return not self.num

    def is_const(self) -> bool:
        return len(self.num) <= 1 and len(self.den) == 1

    def __add__(self, other):
        other = _as_dpoly(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return DPoly(_padd(self.num, other.num), self.den)
        return DPoly(_padd(_pmul(self.num, other.den), _pmul(other.num, self.den)),
                     _pmul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self):
        return DPoly(_pneg(self.num), self.den)

    def __sub__(self, other):
        other = _as_dpoly(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _as_dpoly(other)
        if other is NotImplemented:
            return other
        return DPoly(_pmul(self.num, other.num), _pmul(self.den, other.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_dpoly(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return DPoly(_pmul(self.num, other.den), _pmul(self.den, other.num))

    def __rtruediv__(self, other):
        return _as_dpoly(other) / self

    def __call__(self, d):
        """Evaluate at ``d`` (Fraction for exact, float for numeric)."""
        den = _peval(self.den, d)
        if den == 0:
            raise PoleAtD1(f"pole of {self} at D={d}") if d == 1 else ZeroDivisionError(
                f"pole of {self} at D={d}")
        return _peval(self.num, d) / den

    def __str__(self):
        if self.den == (Fraction(1),):
            return _pformat(self.num)
        return f"({_pformat(self.num)})/({_pformat(self.den)})"

    def __repr__(self):
        return f"DPoly({self})"


def _as_dpoly(x):
    if isinstance(x, DPoly):
        return x
    if isinstance(x, (int, Fraction)):
        return DPoly.const(x)
    return NotImplemented


D = DPoly.poly(0, 1)
ONE = DPoly.const(1)


# ---------------------------------------------------------------------------
# basis monomials

_ATOM_RE = re.compile(r"^(J\d+|I_D\d*)$")


def atom_j(n: int) -> str:
    """Opaque integral of Delta(x)^n (n >= 3)."""
    if n < 3:
        raise ValueError("J atoms start at n = 3")
    return f"J{n}"


def atom_i(n: int) -> str:
    """Opaque integral of Delta^n [Delta_mn^2 - Delta_mm^2]; n = 2 is I_D."""
    if n < 1:
        raise ValueError("I_D atoms start at n = 1")
    return "I_D" if n == 2 else f"I_D{n}"


@total_ordering
@dataclass(frozen=True)
class Monomial:
    delta0: int = 0       # power of Delta(0)
    omega: int = 0        # power of w (may be negative)
    a: int = 0            # power of the transform parameter a
    dirac0: int = 0       # power of delta(0)
    atom: str | None = None

    def __post_init__(self):
        if self.delta0 < 0 or self.a < 0 or self.dirac0 < 0:
            raise ValueError(f"negative exponent in {self!r}")
        if self.atom is not None and not _ATOM_RE.match(self.atom):
            raise ValueError(f"unknown atom {self.atom!r}")

    def _key(self):
        return (self.atom or "", self.dirac0, self.a, self.delta0, self.omega)

    def __lt__(self, other):
        return self._key() < other._key()

    def __mul__(self, other: "Monomial") -> "Monomial":
        if self.atom and other.atom:
            raise ValueError(f"product of opaque atoms {self.atom}*{other.atom}")
        return Monomial(self.delta0 + other.delta0, self.omega + other.omega,
                        self.a + other.a, self.dirac0 + other.dirac0,
                        self.atom or other.atom)

    def is_opaque(self) -> bool:
        return self.atom is not None or self.dirac0 > 0

    def __str__(self):
        parts = []
        for name, p in (("Delta0", self.delta0), ("w", self.omega), ("a", self.a),
                        ("delta0", self.dirac0)):
            if p == 1:
                parts.append(name)
            elif p:
                parts.append(f"{name}^{p}")
        if self.atom:
            parts.append(self.atom)
        return "*".join(parts) or "1"

    @classmethod
    def parse(cls, text: str) -> "Monomial":
        if text == "1":
            return cls()
        kw: dict = {}
        names = {"Delta0": "delta0", "w": "omega", "a": "a", "delta0": "dirac0"}
        for tok in text.split("*"):
            if _ATOM_RE.match(tok):
                kw["atom"] = tok
                continue
            base, _, p = tok.partition("^")
            if base not in names:
                raise ValueError(f"bad monomial factor {tok!r}")
            kw[names[base]] = int(p) if p else 1
        return cls(**kw)


UNIT = Monomial()


# ---------------------------------------------------------------------------
# canonical expressions

class Expr:
    """Immutable map Monomial -> DPoly with no zero coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, DPoly] | None = None):
        clean = {}
        for m, c in (terms or {}).items():
            c = _as_dpoly(c)
            if not c.is_zero():
                clean[m] = c
        self._terms = dict(sorted(clean.items()))
        self._hash = None

    # constructors
    @classmethod
    def const(cls, c) -> "Expr":
        return cls({UNIT: _as_dpoly(c) if not isinstance(c, DPoly) else c})

    @classmethod
    def mono(cls, coeff=1, **kw) -> "Expr":
        c = coeff if isinstance(coeff, DPoly) else DPoly.const(coeff)
        return cls({Monomial(**kw): c})

    # access
    def items(self):
        return self._terms.items()

    def monomials(self):
        return list(self._terms)

    def coeff(self, m: Monomial) -> DPoly:
        return self._terms.get(m, DPoly.const(0))

    def is_zero(self) -> bool:
        return not self._terms

    def atoms(self) -> set[str]:
        return {m.atom for m in self._terms if m.atom}

    def has_opaque(self) -> bool:
        return any(m.is_opaque() for m in self._terms)

    def atom_part(self, atom: str | None) -> "Expr":
        """Coefficient expression multiplying ``atom`` (None selects atom-free terms)."""
        return Expr({Monomial(m.delta0, m.omega, m.a, m.dirac0): c
                     for m, c in self._terms.items() if m.atom == atom})

    def as_dpoly(self) -> DPoly:
        """The coefficient if this is a pure D-dependent scalar."""
        if self.is_zero():
            return DPoly.const(0)
        if list(self._terms) != [UNIT]:
            raise ValueError(f"{self} is not a pure scalar")
        return self._terms[UNIT]

    # arithmetic
    def __add__(self, other):
        other = _as_expr(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out[m] + c if m in out else c
        return Expr(out)

    __radd__ = __add__

    def __neg__(self):
        return Expr({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = _as_expr(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, DPoly)):
            c = _as_dpoly(other)
            return Expr({m: v * c for m, v in self._terms.items()})
        other = _as_expr(other)
        if other is NotImplemented:
            return other
        out: dict[Monomial, DPoly] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = m1 * m2
                out[m] = out[m] + c1 * c2 if m in out else c1 * c2
        return Expr(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Expr):
            other = other.as_dpoly()
        c = _as_dpoly(other)
        if c is NotImplemented:
            return c
        return Expr({m: v / c for m, v in self._terms.items()})

    def __pow__(self, n: int):
        out = Expr.const(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        other = _as_expr(other)
        if other is NotImplemented:
            return False
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    # transformations
    def normalize(self) -> "Expr":
        return Expr(self._terms)

    def map_monomials(self, fn) -> "Expr":
        out = Expr()
        for m, c in self._terms.items():
            out = out + fn(m) * c
        return out

    def substitute_a(self, value: RationalLike) -> "Expr":
        v = rational(value)
        out: dict[Monomial, DPoly] = {}
        for m, c in self._terms.items():
            m2 = Monomial(m.delta0, m.omega, 0, m.dirac0, m.atom)
            c2 = c * (v ** m.a)
            out[m2] = out[m2] + c2 if m2 in out else c2
        return Expr(out)

    def diff_a(self) -> "Expr":
        out = {}
        for m, c in self._terms.items():
            if m.a:
                out[Monomial(m.delta0, m.omega, m.a - 1, m.dirac0, m.atom)] = c * m.a
        return Expr(out)

    def drop_dirac0(self) -> "Expr":
        """Veltman's rule on explicit delta(0) factors."""
        return Expr({m: c for m, c in self._terms.items() if m.dirac0 == 0})

    # serialization
    def to_json(self) -> dict[str, str]:
        return {str(m): str(c) for m, c in self._terms.items()}

    @classmethod
    def from_json(cls, data: Mapping[str, str]) -> "Expr":
        return cls({Monomial.parse(k): DPoly.parse(v) for k, v in data.items()})

    def __str__(self):
        if not self._terms:
            return "0"
        chunks = []
        for m, c in self._terms.items():
            cs = str(c)
            if m == UNIT:
                chunks.append(cs if c.is_const() else f"({cs})")
            elif c.is_const() and c.num == (Fraction(1),):
                chunks.append(str(m))
            elif c.is_const() and c.num == (Fraction(-1),):
                chunks.append(f"-{m}")
            elif c.is_const():
                chunks.append(f"{cs}*{m}")
            else:
                chunks.append(f"({cs})*{m}")
        out = chunks[0]
        for ch in chunks[1:]:
            out += f" - {ch[1:]}" if ch.startswith("-") else f" + {ch}"
        return out

    def __repr__(self):
        return f"Expr({self})"


def _as_expr(x):
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction, DPoly)):
        return Expr.const(x)
    return NotImplemented


ZERO = Expr()


def add(a: Expr, b: Expr) -> Expr:
    return a + b


def delta0(power: int = 1) -> Expr:
    return Expr.mono(delta0=power)


def omega(power: int = 1) -> Expr:
    return Expr.mono(omega=power)


def atom(name: str) -> Expr:
    return Expr.mono(atom=name)


# ---------------------------------------------------------------------------
# evaluation

def eval_at_D1(e: Expr, omega: RationalLike, a: RationalLike | None = None) -> Fraction:
    """Exact value at D = 1 with Delta(0) = 1/(2w).

    Raises OpaqueResidue if J/I atoms or delta(0) remain, PoleAtD1 if a
    coefficient is singular at D = 1.
    """
    w = rational(omega)
    if w <= 0:
        raise ValueError("omega must be positive")
    total = Fraction(0)
    for m, c in e.items():
        if m.is_opaque():
            raise OpaqueResidue(f"cannot evaluate {m} numerically")
        if m.a and a is None:
            raise ValueError("expression depends on a; pass a value")
        val = c(Fraction(1))
        val *= (1 / (2 * w)) ** m.delta0 * w ** m.omega
        if m.a:
            val *= rational(a) ** m.a
        total += val
    return total


def evaluate(e: Expr, d: float, omega: float, a: float | None = None,
             atoms: Mapping[str, float] | None = None,
             delta_at_zero=None) -> float:
    """Floating-point value at dimension ``d``.

    ``delta_at_zero(d, omega)`` supplies Delta(0); opaque atoms need values
    in ``atoms``.
    """
    if delta_at_zero is None:
        def delta_at_zero(dd, ww):
            return ww ** (dd - 2) * (4 * math.pi) ** (-dd / 2) * math.gamma(1 - dd / 2)
    atoms = atoms or {}
    d0 = delta_at_zero(d, omega)
    total = 0.0
    for m, c in e.items():
        if m.dirac0:
            raise OpaqueResidue("delta(0) has no numeric value")
        val = float(c(float(d))) * d0 ** m.delta0 * omega ** m.omega
        if m.a:
            if a is None:
                raise ValueError("expression depends on a; pass a value")
            val *= a ** m.a
        if m.atom:
            if m.atom not in atoms:
                raise OpaqueResidue(f"no value supplied for {m.atom}")
            val *= atoms[m.atom]
        total += val
    return total
