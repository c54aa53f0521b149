"""Wick contractions and the cumulant expansion of the free energy.

Fields at a vertex are slots ``q`` or ``d_mu q``; the two derivative
fields of a ``qdot^2`` vertex share one contracted index.  With vertex 0
at x0, vertex 1 at x1 and ``x = x0 - x1`` the three line types are

    <q(x0) q(x1)>           =  Delta(x)
    <d_i q(x0) q(x1)>       =  Delta_i(x)
    <q(x0) d_j q(x1)>       = -Delta_j(x)
    <d_i q(x0) d_j q(x1)>   = -Delta_ij(x)

so the qdot-qdot line is the negative of the second derivative of Delta,
as for the mixed derivative d_tau d_tau' Delta in one dimension.  Lines
with both ends on one vertex take the same values at x = 0, where the
mixed line d_i q q vanishes.

The free energy per unit volume is collected as ``-F`` (log Z per unit
volume): order 1 is ``-<A_1>``, order 2 is ``-<A_2> + 1/2 <A_1 A_1>_c``.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .action import OrderOverflow, VertexTerm
from .symexpr import Expr
from .terms import DELTA, Factor, Term, fresh_label, make_term

LOCAL = "local"
THREE_BUBBLE = "three-bubble"
WATERMELON = "watermelon"
JACOBIAN_NONLOCAL = "jacobian-nonlocal"
CLASSES = (LOCAL, THREE_BUBBLE, WATERMELON, JACOBIAN_NONLOCAL)


class OddFieldCount(ValueError):
    pass


@dataclass(frozen=True)
class Slot:
    vertex: int
    deriv: bool
    index: int | None = None


@dataclass(frozen=True, order=True)
class PropagatorLine:
    kind: str                       # Delta | DeltaMu | DeltaMuNu
    endpoints: tuple[int, int]
    derivs: tuple[tuple[int, int], ...] = ()   # (vertex, index) per derivative

    @property
    def local(self) -> bool:
        return self.endpoints[0] == self.endpoints[1]

    def value(self) -> tuple[int, Factor] | None:
        """(sign, factor), or None when the line vanishes identically."""
        if self.local and self.kind == "DeltaMu":
            return None
        idx = tuple(i for _, i in self.derivs)
        if self.local:
            sign = -1 if self.kind == "DeltaMuNu" else 1
        else:
            hi = max(self.endpoints)
            sign = (-1) ** sum(1 for v, _ in self.derivs if v == hi)
        return sign, Factor(self.local, DELTA, idx)


def _line(a: Slot, b: Slot) -> PropagatorLine:
    if (a.vertex, not a.deriv) > (b.vertex, not b.deriv):
        a, b = b, a
    derivs = tuple((s.vertex, s.index) for s in (a, b) if s.deriv)
    kind = ("Delta", "DeltaMu", "DeltaMuNu")[len(derivs)]
    return PropagatorLine(kind, (a.vertex, b.vertex), derivs)


def vertex_slots(v: VertexTerm, label: int) -> list[Slot]:
    if v.qdot_power not in (0, 2):
        raise ValueError(f"qdot power {v.qdot_power} unsupported")
    slots = [Slot(label, True, label)] * v.qdot_power
    return slots + [Slot(label, False)] * v.q_power


def perfect_matchings(items: Sequence) -> Iterator[list[tuple]]:
    """All ways to split ``items`` into unordered pairs."""
    items = list(items)
    if not items:
        yield []
        return
    first = items[0]
    for i in range(1, len(items)):
        rest = items[1:i] + items[i + 1:]
        for m in perfect_matchings(rest):
            yield [(first, items[i])] + m


def typed_matchings(slots: Sequence) -> Iterator[tuple[list[tuple], int]]:
    """Pairings of interchangeable slots, grouped by slot type.

    Yields ``(pairs, multiplicity)`` where ``pairs`` lists type pairs and
    ``multiplicity`` counts the individual pairings with that pattern.  The
    multiplicities add up to ``(n - 1)!!``.
    """
    counter: dict = {}
    for s in slots:
        counter[s] = counter.get(s, 0) + 1
    types = list(counter)
    counts = [counter[t] for t in types]

    def rec(start):
        i = next((k for k in range(start, len(types)) if counts[k]), None)
        if i is None:
            yield [], 1
            return
        counts[i] -= 1
        for j in range(i, len(types)):
            c = counts[j]
            if not c:
                continue
            counts[j] -= 1
            for rest, m in rec(i):
                yield [(types[i], types[j])] + rest, m * c
            counts[j] += 1
        counts[i] += 1

    yield from rec(0)


@dataclass(frozen=True)
class ContractionTerm:
    """One class of Wick pairings with identical value.

    The value is ``coefficient * term``; ``count`` is the number of
    pairings merged into it.
    """

    coefficient: Expr
    term: Term
    lines: tuple[PropagatorLine, ...]
    count: int
    g_order: int = 0
    dirac0: int = 0
    n_vertices: int = 1
    jacobian_vertices: tuple[bool, ...] = ()
    connected: bool = True

    @property
    def tag(self) -> str:
        return classify(self)

    def signature(self) -> str:
        return str(self.term)


def classify(t: ContractionTerm) -> str:
    if t.n_vertices == 1 or all(line.local for line in t.lines):
        return LOCAL
    if not t.connected:
        raise ValueError("disconnected term has no diagram class")
    if any(t.jacobian_vertices) or t.dirac0:
        return JACOBIAN_NONLOCAL
    if all(not line.local for line in t.lines):
        return WATERMELON
    return THREE_BUBBLE


def _connected(lines, n_vertices) -> bool:
    if n_vertices == 1:
        return True
    return any(not line.local for line in lines)


def pairings(slots: Sequence[Slot], weight: Expr | None = None,
             g_order: int = 0, jacobian: tuple[bool, ...] = (),
             keep_disconnected: bool = False) -> list[ContractionTerm]:
    """Contract all slots pairwise and merge pairings of equal value."""
    if len(slots) % 2:
        raise OddFieldCount(f"{len(slots)} fields cannot be paired")
    weight = Expr.const(1) if weight is None else weight
    n_vertices = len({s.vertex for s in slots})
    dirac0 = sum(jacobian)
    acc: dict = defaultdict(int)
    reps: dict = {}
    for matching, mult in typed_matchings(slots):
        lines = tuple(sorted(_line(a, b) for a, b in matching))
        sign, factors = 1, []
        for line in lines:
            val = line.value()
            if val is None:
                break
            sign *= val[0]
            factors.append(val[1])
        else:
            conn = _connected(lines, n_vertices)
            if not conn and not keep_disconnected:
                continue
            if conn:
                term = make_term(factors)
            else:
                term = make_term(factors, integrated=False)
            key = (term, conn)
            acc[key] += sign * mult
            reps.setdefault(key, [lines, 0])
            reps[key][1] += mult
    out = []
    for (term, conn), s in acc.items():
        lines, count = reps[(term, conn)]
        if s == 0:
            continue
        out.append(ContractionTerm(weight * Fraction(s), term, lines, count, g_order,
                                   dirac0, n_vertices, jacobian, conn))
    return sorted(out, key=lambda t: str(t.term))


def _merge(terms: list[ContractionTerm]) -> list[ContractionTerm]:
    merged: dict = {}
    for t in terms:
        key = (t.tag if t.connected else "disconnected", t.term)
        if key in merged:
            old = merged[key]
            merged[key] = ContractionTerm(
                old.coefficient + t.coefficient, t.term, old.lines, old.count + t.count,
                t.g_order, max(old.dirac0, t.dirac0), t.n_vertices,
                tuple(a or b for a, b in zip(old.jacobian_vertices, t.jacobian_vertices)),
                t.connected)
        else:
            merged[key] = t
    out = [t for t in merged.values() if not t.coefficient.is_zero()]
    return sorted(out, key=lambda t: (CLASSES.index(t.tag) if t.connected else 9,
                                      t.dirac0, str(t.term)))


def _single(v: VertexTerm, scale) -> list[ContractionTerm]:
    return pairings(vertex_slots(v, 0), v.weight() * scale, v.g_order, (v.jacobian,))


def _double(v: VertexTerm, w: VertexTerm, scale, keep_disconnected=False):
    slots = vertex_slots(v, 0) + vertex_slots(w, 1)
    return pairings(slots, v.weight() * w.weight() * scale, v.g_order + w.g_order,
                    (v.jacobian, w.jacobian), keep_disconnected)


def free_energy_terms(vertices: Sequence[VertexTerm], order: int) -> list[ContractionTerm]:
    """Connected contributions to the g^order coefficient of -F."""
    if order not in (1, 2):
        raise OrderOverflow(f"order {order} not supported")
    out: list[ContractionTerm] = []
    for v in vertices:
        if v.g_order == order:
            out += _single(v, Fraction(-1))
    if order == 2:
        first = [v for v in vertices if v.g_order == 1]
        for v in first:
            for w in first:
                out += _double(v, w, Fraction(1, 2))
    return _merge(out)


def disconnected_residue(vertices: Sequence[VertexTerm]) -> dict[Term, Expr]:
    """Disconnected part of 1/2 <A_1 A_1> minus 1/2 <A_1>^2; empty when the
    cumulant removes all disconnected pieces."""
    first = [v for v in vertices if v.g_order == 1]
    res: dict[Term, Expr] = defaultdict(Expr)
    for v in first:
        for w in first:
            for t in _double(v, w, Fraction(1, 2), keep_disconnected=True):
                if not t.connected:
                    res[t.term] = res[t.term] + t.coefficient
    singles = [t for v in first for t in _single(v, Fraction(1))]
    for s1 in singles:
        for s2 in singles:
            off = fresh_label(s1.term.factors)
            shifted = tuple(f.with_idx(i + off for i in f.idx) for f in s2.term.factors)
            term = make_term(s1.term.factors + shifted, integrated=False)
            res[term] = res[term] - s1.coefficient * s2.coefficient * Fraction(1, 2)
    return {k: v for k, v in res.items() if not v.is_zero()}


def class_counts(terms: Sequence[ContractionTerm]) -> dict[str, int]:
    counts = dict.fromkeys(CLASSES, 0)
    for t in terms:
        counts[t.tag] += 1
    return counts
