"""End-to-end verification: transform -> vertices -> diagrams -> reduced totals."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from fractions import Fraction

from . import __version__
from .action import ModelParams, expand_interaction, expand_jacobian, parse_transform
from .reducer import Reducer, reduce_order
from .symexpr import Expr, OpaqueResidue, eval_at_D1
from .wick import CLASSES, JACOBIAN_NONLOCAL, free_energy_terms

REPORT_VERSION = 1
VELTMAN_NOTE = "eliminated by Veltman rule"


def fmt_decimal(x: Fraction) -> str:
    return f"{float(x):.12g}"


@dataclass
class DiagramEntry:
    order: int
    tag: str
    mult: str
    lines: str
    value: dict
    note: str = ""

    def line(self) -> str:
        s = f"order={self.order} class={self.tag} mult={self.mult} lines={self.lines}"
        return f"{s}  [{self.note}]" if self.note else s


@dataclass
class OrderSection:
    order: int
    diagrams: list[DiagramEntry]
    subtotals: dict[str, dict]
    total: dict
    atom_coefficients: dict[str, dict]
    d1: dict[str, str] | None
    verdict: str


@dataclass
class VerificationReport:
    transform: str
    omega: str
    a: str
    orders: list[OrderSection]
    oracle: list[dict] | None = None
    trace: list[dict] | None = None
    verdict: str = "FAIL"
    engine_version: str = __version__
    report_version: int = REPORT_VERSION

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "VerificationReport":
        if data.get("report_version") != REPORT_VERSION:
            raise ValueError(f"unsupported report_version {data.get('report_version')}")
        orders = []
        for o in data["orders"]:
            o = dict(o)
            o["diagrams"] = [DiagramEntry(**d) for d in o["diagrams"]]
            orders.append(OrderSection(**o))
        return cls(**{**data, "orders": orders})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        return cls.from_dict(json.loads(text))

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"

    def to_text(self) -> str:
        out = [f"transform: {self.transform}", f"omega = {self.omega}, a = {self.a}"]
        for sec in self.orders:
            out.append(f"\n== order g^{sec.order} ({len(sec.diagrams)} diagram classes)")
            for d in sec.diagrams:
                out.append("  " + d.line())
            for tag in CLASSES:
                val = str(Expr.from_json(sec.subtotals[tag]))
                d1 = ""
                if sec.d1 and tag in sec.d1:
                    d1 = f"   D=1: {sec.d1[tag]}"
                out.append(f"  subtotal {tag:<18} {val}{d1}")
            for name, coeff in sec.atom_coefficients.items():
                out.append(f"  coefficient of {name} in total: {Expr.from_json(coeff)}")
            out.append(f"  TOTAL {Expr.from_json(sec.total)}  -> {sec.verdict}")
        if self.oracle is not None:
            bad = [r for r in self.oracle if not r["ok"]]
            out.append(f"\noracle: {len(self.oracle) - len(bad)}/{len(self.oracle)} checks ok")
            for r in bad:
                out.append(f"  mismatch {r['ident']} at w={r['omega']}")
        if self.trace is not None:
            out.append(f"\ntrace ({len(self.trace)} rule applications)")
            for t in self.trace:
                out.append(f"  {'  ' * t['depth']}{t['rule']}: {t['term']} -> {t['result']}")
        out.append(f"\nverdict: {self.verdict}")
        return "\n".join(out)


def _d1(e: Expr, omega: Fraction, a) -> str | None:
    try:
        v = eval_at_D1(e, omega, a)
    except (OpaqueResidue, ValueError, ZeroDivisionError):
        return None
    return f"{v} ({fmt_decimal(v)})"


def run(transform: str = "paper-default", order: int = 2, omega: Fraction = Fraction(1),
        a: Fraction | None = None, oracle: bool = False, trace: bool = False,
        seed: int | None = None) -> VerificationReport:
    """Verify orders 1..``order``.  Expressions stay symbolic in w and D;
    ``omega`` is used only for the D = 1 evaluations, ``a`` (if given) is
    substituted before reporting."""
    f = parse_transform(transform)
    params = ModelParams(max_g_order=order)
    vertices = expand_interaction(f, params) + expand_jacobian(f, params)
    log = [] if trace else None
    reducer = Reducer(seed=seed, trace=log)

    def fix(e: Expr) -> Expr:
        return e if a is None else e.substitute_a(a)

    sections = []
    for k in range(1, order + 1):
        terms = free_energy_terms(vertices, k)
        res = reduce_order(terms, k, reducer)
        diagrams = []
        for dv, ct in zip(res.diagrams, terms):
            note = VELTMAN_NOTE if (dv.tag == JACOBIAN_NONLOCAL or ct.dirac0) else ""
            diagrams.append(DiagramEntry(k, dv.tag, str(fix(dv.coefficient)), dv.signature,
                                         fix(dv.value).to_json(), note))
        subtotals = {tag: fix(v) for tag, v in res.subtotals.items()}
        total = fix(res.total)
        d1 = {tag: _d1(v, omega, a) for tag, v in subtotals.items()}
        d1["total"] = _d1(total, omega, a)
        d1 = {t: v for t, v in d1.items() if v is not None}
        sections.append(OrderSection(
            k, diagrams, {t: v.to_json() for t, v in subtotals.items()}, total.to_json(),
            {n: fix(c).to_json() for n, c in res.atom_coefficients().items()},
            d1, "PASS" if total.is_zero() else "FAIL"))

    oracle_rows = None
    oracle_ok = True
    if oracle:
        from .oracle import run_catalogue
        rows = run_catalogue()
        oracle_ok = all(r.ok for r in rows)
        oracle_rows = [r.to_dict() for r in rows]

    ok = all(s.verdict == "PASS" for s in sections) and oracle_ok
    return VerificationReport(
        str(f), str(omega), "symbolic" if a is None else str(a), sections, oracle_rows,
        [asdict(t) for t in log] if log is not None else None,
        "PASS" if ok else "FAIL")
