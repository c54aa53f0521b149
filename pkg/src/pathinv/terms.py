"""Products of propagator derivatives and delta distributions.

A :class:`Factor` is ``Delta_I(x)`` or ``delta_I(x)`` for a multi-index
``I`` (derivatives commute, so ``I`` is stored sorted), evaluated either
at the relative coordinate x or at the origin.  A :class:`Term` is a
product of factors in which every index label occurs exactly twice
(Einstein summation), optionally integrated over x.

Terms are kept in canonical form: index labels are renamed so that the
sorted factor tuple is lexicographically minimal.  Two terms that differ
only by a renaming of dummy indices therefore compare equal.
"""
from __future__ import annotations

import itertools
import re
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

DELTA = "D"   # propagator
DIRAC = "d"   # delta distribution

_LETTERS = "mnlkijpqrstuvxyz"


@dataclass(frozen=True, order=True)
class Factor:
    origin: bool
    kind: str
    idx: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in (DELTA, DIRAC):
            raise ValueError(f"bad factor kind {self.kind!r}")
        object.__setattr__(self, "idx", tuple(sorted(self.idx)))

    @property
    def order(self) -> int:
        return len(self.idx)

    def has_trace(self) -> bool:
        return len(set(self.idx)) < len(self.idx)

    def with_idx(self, idx) -> "Factor":
        return Factor(self.origin, self.kind, tuple(idx))

    def at_origin(self) -> "Factor":
        return Factor(True, self.kind, self.idx)

    def label(self, names: dict[int, str] | None = None) -> str:
        names = names or {}
        s = self.kind + "".join(names.get(i, _LETTERS[i % len(_LETTERS)]) for i in self.idx)
        return s + "0" if self.origin else s


def _relabel(factors, mapping):
    return tuple(sorted(f.with_idx(mapping[i] for i in f.idx) for f in factors))


def canonical_factors(factors) -> tuple[Factor, ...]:
    factors = tuple(factors)
    counts = Counter(i for f in factors for i in f.idx)
    bad = [i for i, n in counts.items() if n != 2]
    if bad:
        raise ValueError(f"indices {bad} are not contracted pairwise")
    labels = sorted(counts)
    if not labels:
        return tuple(sorted(factors))
    best = None
    for perm in itertools.permutations(range(len(labels))):
        cand = _relabel(factors, dict(zip(labels, perm)))
        if best is None or cand < best:
            best = cand
    return best


@dataclass(frozen=True)
class Term:
    """Product of factors; ``integrated`` adds an integral over x.

    Construct through :func:`make_term` to get canonical form.
    """

    factors: tuple[Factor, ...]
    integrated: bool

    def local_factors(self) -> tuple[Factor, ...]:
        return tuple(f for f in self.factors if f.origin)

    def x_factors(self) -> tuple[Factor, ...]:
        return tuple(f for f in self.factors if not f.origin)

    def n_indices(self) -> int:
        return sum(f.order for f in self.factors)

    def __str__(self):
        return format_term(self)


def make_term(factors, integrated: bool | None = None) -> Term:
    factors = tuple(factors)
    if integrated is None:
        integrated = any(not f.origin for f in factors)
    if not integrated and any(not f.origin for f in factors):
        raise ValueError("x-dependent factors need an integral")
    return Term(canonical_factors(factors), integrated)


def fresh_label(factors) -> int:
    used = [i for f in factors for i in f.idx]
    return max(used, default=-1) + 1


# ---------------------------------------------------------------------------
# text form

def format_term(t: Term) -> str:
    """E.g. ``int Dm^2*D^2`` or ``D0^2*Dmm0``."""
    groups = Counter(t.factors)
    parts = []
    for f in sorted(groups, key=lambda f: (f.origin is False, f)):
        n = groups[f]
        lab = f.label()
        parts.append(lab if n == 1 else f"{lab}^{n}")
    body = "*".join(parts) or "1"
    return f"int {body}" if t.integrated else body


_TOKEN_RE = re.compile(r"^([Dd])([a-z]*?)(0?)(?:\^(\d+))?$")


def parse_product(text: str) -> Term:
    """Parse a product such as ``Dm^2*D^2`` or ``D*Dm*Dn*Dmn``.

    Tokens: ``D``/``d`` (propagator / delta) followed by index letters and
    an optional trailing ``0`` for the value at the origin; ``^k`` repeats
    the factor with the same letters, so ``Dm^2`` is Delta_m Delta_m.
    ``D0`` is Delta(0) and ``d0`` is delta(0).  A leading ``int`` is
    optional; the integral is implied by any x-dependent factor.
    """
    s = text.strip()
    if s.startswith("int "):
        s = s[4:].strip()
    if not s or s == "1":
        return make_term((), integrated=False)
    names: dict[str, int] = {}
    factors = []
    for tok in s.replace(" ", "").split("*"):
        m = _TOKEN_RE.match(tok)
        if not m:
            raise ValueError(f"bad factor token {tok!r}")
        kind, letters, zero, power = m.groups()
        idx = tuple(names.setdefault(ch, len(names)) for ch in letters)
        for _ in range(int(power) if power else 1):
            factors.append(Factor(bool(zero), kind, idx))
    return make_term(factors)


def double_factorial(n: int) -> int:
    """(n)!! with (-1)!! = 0!! = 1."""
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def sign_factor(n: int) -> Fraction:
    return Fraction(-1) if n % 2 else Fraction(1)
