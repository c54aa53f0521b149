"""Dimensionally regularized integrals over products of distributions.

An integrand is a product of ``Delta_I(x)`` and ``delta_I(x)`` factors
with all indices contracted.  Reduction rewrites it into an
:class:`~pathinv.symexpr.Expr` over Delta(0), w, D and the opaque atoms
(``J<n>`` for the integral of Delta^n, ``I_D`` and its analogues).

General rules:

* ``veltman``: delta(0) and all its derivatives vanish.
* ``field_equation``: a traced factor ``Delta_{J m m} = -delta_J + w^2 Delta_J``.
* ``delta_collapse``: ``int delta_I(x) G(x) = (-1)^|I| d_I G(0)``, with
  ``Delta_{i1..i2k}(0) = w^2k Delta(0) sym(delta..)/(D (D+2) .. (D+2k-2))``
  and odd derivatives zero at the origin.
* ``integrate_by_parts``: move one derivative off the factor with fewest
  derivatives; a reappearing copy of the integrand is solved for.
* ``power_rule``: ``int Delta^n Delta_m^2 = -1/(n+1) int Delta^(n+1) Delta_mm``.
* ``mixed_index_split``: ``int Delta^n Delta_mn^2`` is never evaluated, only
  split into ``int Delta^n Delta_mm^2`` plus an opaque remainder.

The closed forms used in the derivation of the second-order cancellation
are also present as direct table rules, so that different rule orders
must agree (checked in the tests).
"""
from __future__ import annotations

import itertools
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .symexpr import D, DPoly, Expr, ZERO, atom, atom_i, atom_j
from .terms import DELTA, DIRAC, Factor, Term, make_term, parse_product, sign_factor
from .wick import CLASSES, ContractionTerm, classify


class IrreducibleTerm(ValueError):
    """No rule sequence reduces the integrand."""


class InvalidMove(ValueError):
    pass


class CancellationFailure(AssertionError):
    def __init__(self, message: str, residue: Expr):
        super().__init__(f"{message}: {residue}")
        self.residue = residue


class _Stuck(Exception):
    pass


def _w(p: int) -> Expr:
    return Expr.mono(omega=p)


def _d0(p: int) -> Expr:
    return Expr.mono(delta0=p)


# ---------------------------------------------------------------------------
# values at the origin

def _pairings(positions):
    if not positions:
        yield []
        return
    first = positions[0]
    for i in range(1, len(positions)):
        rest = positions[1:i] + positions[i + 1:]
        for m in _pairings(rest):
            yield [(first, positions[i])] + m


def _cycles(edges, labels) -> int:
    parent = {l: l for l in labels}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        parent[find(a)] = find(b)
    return len({find(l) for l in labels})


def evaluate_origin(factors: Sequence[Factor]) -> Expr:
    """Product of propagator derivatives at x = 0 (all indices contracted)."""
    if any(f.kind == DIRAC for f in factors):
        return ZERO
    if any(f.order % 2 for f in factors):
        return ZERO
    norm = DPoly.const(1)
    for f in factors:
        for j in range(f.order // 2):
            norm = norm * (D + 2 * j)
    labels = {i for f in factors for i in f.idx}
    total = DPoly.const(0)
    choices = [list(_pairings(list(range(f.order)))) for f in factors]
    for combo in itertools.product(*choices):
        edges = [(f.idx[a], f.idx[b]) for f, pairing in zip(factors, combo)
                 for a, b in pairing]
        total = total + _dpow(_cycles(edges, labels))
    omega_power = sum(f.order for f in factors)
    return Expr.mono(total / norm, delta0=len(factors), omega=omega_power)


def _dpow(n: int) -> DPoly:
    out = DPoly.const(1)
    for _ in range(n):
        out = out * D
    return out


# ---------------------------------------------------------------------------
# rewriting primitives

Piece = tuple  # (Expr, Term | None)


def _x(factors) -> Term:
    return make_term(factors, integrated=True)


def _drop_one(idx, label):
    idx = list(idx)
    idx.remove(label)
    return tuple(idx)


def ibp(t: Term, move: tuple[int, int]) -> list[tuple[Fraction, Term]]:
    """Move derivative ``label`` off factor ``pos`` onto the other factors.

    ``int (d_m F) G = -int F d_m G``; boundary terms vanish because the
    propagator decays exponentially.
    """
    pos, label = move
    fs = list(t.x_factors())
    if not t.integrated or not 0 <= pos < len(fs) or label not in fs[pos].idx:
        raise InvalidMove(f"no derivative {label} on factor {pos} of {t}")
    if t.local_factors():
        raise InvalidMove("integration by parts needs a purely x-dependent integrand")
    stripped = fs[pos].with_idx(_drop_one(fs[pos].idx, label))
    acc: Counter = Counter()
    for j in range(len(fs)):
        if j == pos:
            continue
        new = list(fs)
        new[pos] = stripped
        new[j] = fs[j].with_idx(fs[j].idx + (label,))
        acc[_x(new)] -= 1
    return [(Fraction(c), term) for term, c in acc.items() if c]


def field_equation(t: Term) -> list[Piece] | None:
    fs = list(t.x_factors())
    for k, f in enumerate(fs):
        if f.kind != DELTA or not f.has_trace():
            continue
        label = next(i for i, n in Counter(f.idx).items() if n > 1)
        rest = _drop_one(_drop_one(f.idx, label), label)
        dirac = fs[:k] + [Factor(False, DIRAC, rest)] + fs[k + 1:]
        prop = fs[:k] + [Factor(False, DELTA, rest)] + fs[k + 1:]
        return [(Expr.const(-1), _x(dirac)), (_w(2), _x(prop))]
    return None


def delta_collapse(t: Term) -> list[Piece] | None:
    fs = list(t.x_factors())
    diracs = [f for f in fs if f.kind == DIRAC]
    if len(diracs) != 1:
        return None
    dirac = diracs[0]
    rest = list(fs)
    rest.remove(dirac)
    if not rest:
        return [(Expr.const(1 if dirac.order == 0 else 0), None)]
    total = ZERO
    for assign in itertools.product(range(len(rest)), repeat=dirac.order):
        extra = [[] for _ in rest]
        for label, j in zip(dirac.idx, assign):
            extra[j].append(label)
        local = [Factor(True, f.kind, f.idx + tuple(e)) for f, e in zip(rest, extra)]
        total = total + evaluate_origin(local)
    return [(total * sign_factor(dirac.order), None)]


def veltman(t: Term) -> list[Piece] | None:
    if sum(1 for f in t.x_factors() if f.kind == DIRAC) >= 2:
        return []
    return None


def _shape(fs) -> tuple[int, list[Factor]]:
    """Number of underived propagators and the remaining factors."""
    plain = sum(1 for f in fs if f.kind == DELTA and f.order == 0)
    return plain, [f for f in fs if not (f.kind == DELTA and f.order == 0)]


def _is_mixed_master(t: Term) -> int | None:
    fs = t.x_factors()
    n, rest = _shape(fs)
    if n >= 1 and len(rest) == 2 and all(f.kind == DELTA and f.order == 2 and not f.has_trace()
                                         for f in rest) and rest[0].idx == rest[1].idx:
        return n
    return None


def mixed_index_split(t: Term) -> list[Piece] | None:
    n = _is_mixed_master(t)
    if n is None:
        return None
    traced = [Factor(False, DELTA, ())] * n + [Factor(False, DELTA, (0, 0)),
                                                Factor(False, DELTA, (1, 1))]
    return [(Expr.const(1), _x(traced)), (atom(atom_i(n)), None)]


def power_rule(t: Term) -> list[Piece] | None:
    n, rest = _shape(t.x_factors())
    if len(rest) == 2 and all(f.kind == DELTA and f.order == 1 for f in rest) \
            and rest[0].idx == rest[1].idx:
        new = [Factor(False, DELTA, ())] * (n + 1) + [Factor(False, DELTA, (0, 0))]
        return [(Expr.const(Fraction(-1, n + 1)), _x(new))]
    return None


def integrate_by_parts(t: Term) -> list[Piece] | None:
    fs = list(t.x_factors())
    if any(f.kind == DIRAC for f in fs) or _is_mixed_master(t) is not None:
        return None
    cands = [(f.order, k) for k, f in enumerate(fs) if f.kind == DELTA and f.order > 0]
    if not cands or len(fs) < 2:
        return None
    _, pos = min(cands)
    f = fs[pos]
    counts = Counter(f.idx)
    external = [i for i in f.idx if counts[i] == 1]
    label = external[0] if external else f.idx[0]
    return [(Expr.const(c), term) for c, term in ibp(t, (pos, label))]


def power_atom(t: Term) -> list[Piece] | None:
    fs = t.x_factors()
    if fs and all(f.kind == DELTA and f.order == 0 for f in fs) and len(fs) >= 3:
        return [(atom(atom_j(len(fs))), None)]
    return None


def _table(entries: dict[str, Expr]) -> Callable[[Term], list[Piece] | None]:
    keyed = {parse_product(k): v for k, v in entries.items()}

    def rule(t: Term):
        v = keyed.get(t)
        return None if v is None else [(v, None)]
    rule.entries = keyed
    return rule


J4 = atom("J4")
I_D = atom("I_D")
HALF = Fraction(1, 2)
THIRD = Fraction(1, 3)

# closed forms of the two-propagator integrals (momentum space)
closed_two = _table({
    "D": _w(-2),
    "D^2": Expr.mono((2 - D) * HALF, delta0=1, omega=-2),
})

# integrals with derivatives, as tabulated closed forms
integral_table = _table({
    "Dm^2": Expr.mono(D * HALF, delta0=1),
    "Dmn^2": Expr.mono(-(1 + D * HALF), delta0=1, omega=2),
    "Dmm*D^3": -_d0(3) + _w(2) * J4,
    "Dm^2*D^2": _d0(3) * THIRD - _w(2) * J4 * THIRD,
    "Dmm*Dnn*D^2": -2 * _w(2) * _d0(3) + _w(4) * J4,
    "Dmm*Dn^2*D": _w(2) * _d0(3) * THIRD - _w(4) * J4 * THIRD,
    "Dmnn*Dm*D^2": _w(2) * _d0(3) * Fraction(4, 3) - _w(4) * J4 * THIRD,
})

_W12 = parse_product("D*Dm*Dn*Dmn")
_W13 = parse_product("Dm^2*Dn^2")
_DM2D2 = parse_product("Dm^2*D^2")


def watermelon_split(t: Term) -> list[Piece] | None:
    """Express the two remaining four-line watermelon integrands through I_D."""
    if t == _W12:
        return [(I_D * -HALF, None), (_w(2), _DM2D2)]
    if t == _W13:
        return [(I_D, None), (_w(2) * -3, _DM2D2)]
    return None


@dataclass(frozen=True)
class RewriteRule:
    name: str
    apply: Callable[[Term], list[Piece] | None]
    doc: str = ""


RULES: tuple[RewriteRule, ...] = (
    RewriteRule("veltman", veltman, "delta(0) and its derivatives vanish"),
    RewriteRule("delta_collapse", delta_collapse, "integrate a delta against the rest"),
    RewriteRule("field_equation", field_equation, "Delta_mm = -delta + w^2 Delta"),
    RewriteRule("mixed_index_split", mixed_index_split,
                "Delta^n Delta_mn^2 = Delta^n Delta_mm^2 + I"),
    RewriteRule("watermelon_split", watermelon_split, "four-line watermelons via I_D"),
    RewriteRule("closed_two", closed_two, "momentum-space closed forms"),
    RewriteRule("integral_table", integral_table, "tabulated closed forms"),
    RewriteRule("power_rule", power_rule, "Delta^n Delta_m^2 by parts"),
    RewriteRule("integrate_by_parts", integrate_by_parts, "move one derivative"),
    RewriteRule("power_atom", power_atom, "opaque int Delta^n"),
)

RULES_BY_NAME = {r.name: r for r in RULES}


def measure(t: Term) -> tuple[int, int, int]:
    """(derivatives on propagators, factors sharing an index with another, factors)."""
    fs = t.x_factors()
    derivs = sum(f.order for f in fs if f.kind == DELTA)
    owners: dict[int, set] = {}
    for k, f in enumerate(fs):
        for i in f.idx:
            owners.setdefault(i, set()).add(k)
    mixed = {k for ks in owners.values() if len(ks) > 1 for k in ks}
    return derivs, len(mixed), len(fs)


# ---------------------------------------------------------------------------

@dataclass
class TraceEntry:
    depth: int
    rule: str
    term: str
    result: str


@dataclass
class Reducer:
    """Memoizing reducer.  ``seed`` shuffles the rule order per integrand."""

    rules: Sequence[RewriteRule] = RULES
    seed: int | None = None
    max_depth: int = 40
    trace: list[TraceEntry] | None = None
    memo: dict = field(default_factory=dict)

    def __post_init__(self):
        self._rng = random.Random(self.seed) if self.seed is not None else None

    def _order(self):
        rules = list(self.rules)
        if self._rng is not None:
            self._rng.shuffle(rules)
        return rules

    def reduce(self, t: Term) -> Expr:
        """Value of a (possibly local) term; raises IrreducibleTerm."""
        local = evaluate_origin(t.local_factors())
        if not t.integrated:
            if self.trace is not None and t.factors:
                self.trace.append(TraceEntry(0, "origin", str(t), str(local)))
            return local
        if local.is_zero():
            return ZERO
        xs = t.x_factors()
        if not xs:
            raise IrreducibleTerm("integral of a constant is the volume, not a density")
        try:
            return local * self._reduce(_x(xs), ())
        except _Stuck:
            raise IrreducibleTerm(f"no rule sequence reduces {t}") from None

    def _reduce(self, t: Term, stack: tuple) -> Expr:
        if t in self.memo:
            return self.memo[t]
        if t in stack or len(stack) > self.max_depth:
            raise _Stuck
        for rule in self._order():
            pieces = rule.apply(t)
            if pieces is None:
                continue
            try:
                value = self._combine(t, pieces, stack + (t,))
            except _Stuck:
                continue
            self.memo[t] = value
            if self.trace is not None:
                self.trace.append(TraceEntry(len(stack), rule.name, str(t), str(value)))
            return value
        raise _Stuck

    def _combine(self, t: Term, pieces, stack) -> Expr:
        total, self_coef = ZERO, ZERO
        for c, u in pieces:
            if u is None:
                total = total + c
            elif u == t:
                self_coef = self_coef + c
            else:
                total = total + c * self._reduce(u, stack)
        if not self_coef.is_zero():
            try:
                k = self_coef.as_dpoly()
            except ValueError:
                raise _Stuck from None
            if k == DPoly.const(1):
                raise _Stuck
            total = total / (1 - k)
        return total


def reduce(t: Term | str, reducer: Reducer | None = None) -> Expr:
    if isinstance(t, str):
        t = parse_product(t)
    return (reducer or Reducer()).reduce(t)


def reduce_sum(text: str, reducer: Reducer | None = None) -> Expr:
    """Reduce ``c1*w^k*PRODUCT + ...`` where each summand may carry a
    rational coefficient and a power of w in front."""
    reducer = reducer or Reducer()
    s = text.replace(" ", "").replace("−", "-")
    if s[0] not in "+-":
        s = "+" + s
    total = ZERO
    for sign, body in _split_sum(s):
        coeff = Expr.const(1 if sign == "+" else -1)
        toks = body.split("*")
        prod = []
        for tok in toks:
            if tok[0].isdigit():
                coeff = coeff * Fraction(tok)
            elif tok == "w" or tok.startswith("w^"):
                coeff = coeff * _w(int(tok[2:]) if "^" in tok else 1)
            else:
                prod.append(tok)
        total = total + coeff * reducer.reduce(parse_product("*".join(prod) or "1"))
    return total


def _split_sum(s: str):
    out = []
    depth = 0
    start = 0
    for i, ch in enumerate(s):
        if ch in "+-" and i > 0 and s[i - 1] != "^" and depth == 0:
            out.append((s[start], s[start + 1:i]))
            start = i
    out.append((s[start], s[start + 1:]))
    return out


# ---------------------------------------------------------------------------
# per-order bookkeeping

@dataclass
class DiagramValue:
    tag: str
    signature: str
    coefficient: Expr
    raw: Expr          # coefficient * reduced integral, delta(0) kept
    value: Expr        # after dropping delta(0)


@dataclass
class OrderResult:
    order: int
    diagrams: list[DiagramValue]
    subtotals: dict[str, Expr]
    total: Expr

    def atom_coefficients(self) -> dict[str, Expr]:
        return {name: self.total.atom_part(name) for name in sorted(
            {m.atom for d in self.diagrams for m in d.value.monomials() if m.atom})}


def reduce_order(terms: Sequence[ContractionTerm], order: int,
                 reducer: Reducer | None = None, check: bool = False) -> OrderResult:
    reducer = reducer or Reducer()
    diagrams = []
    subtotals = dict.fromkeys(CLASSES, ZERO)
    for ct in terms:
        raw = ct.coefficient * reducer.reduce(ct.term)
        value = raw.drop_dirac0()
        tag = classify(ct)
        diagrams.append(DiagramValue(tag, ct.signature(), ct.coefficient, raw, value))
        subtotals[tag] = subtotals[tag] + value
    total = ZERO
    for v in subtotals.values():
        total = total + v
    result = OrderResult(order, diagrams, subtotals, total)
    if check and not total.is_zero():
        raise CancellationFailure(f"order {order} does not cancel", total)
    return result


def check_identity_ns5(reducer: Reducer | None = None) -> bool:
    """int [Delta_mn^2 + 2 w^2 Delta_m^2 + w^4 Delta^2] vanishes for every D."""
    return reduce_sum("Dmn^2 + 2*w^2*Dm^2 + w^4*D^2", reducer).is_zero()
