from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from pathinv.symexpr import (D, DPoly, Expr, Monomial, OpaqueResidue, PoleAtD1, ZERO, add,
                             atom, delta0, eval_at_D1, evaluate, omega)

fracs = st.fractions(min_value=-20, max_value=20, max_denominator=12)
polys = st.lists(fracs, min_size=1, max_size=4).map(lambda c: DPoly.poly(*c))
nonzero_polys = polys.filter(lambda p: not p.is_zero())
dpolys = st.tuples(polys, nonzero_polys).map(lambda t: t[0] / t[1])

monos = st.builds(Monomial, delta0=st.integers(0, 4), omega=st.integers(-4, 4),
                  a=st.integers(0, 2), dirac0=st.integers(0, 1),
                  atom=st.sampled_from([None, None, None, "J4", "I_D"]))
plain_monos = st.builds(Monomial, delta0=st.integers(0, 4), omega=st.integers(-4, 4),
                        a=st.integers(0, 2))


def exprs(m=monos):
    return st.dictionaries(m, dpolys, max_size=4).map(Expr)


def scalars(m=plain_monos):
    return st.dictionaries(m, fracs.map(DPoly.const), max_size=4).map(Expr)


Dsym = sympy.Symbol("D")


def to_sympy(p: DPoly):
    num = sum(sympy.Rational(c.numerator, c.denominator) * Dsym ** i for i, c in enumerate(p.num))
    den = sum(sympy.Rational(c.numerator, c.denominator) * Dsym ** i for i, c in enumerate(p.den))
    return num / den


# -- DPoly ------------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(dpolys, dpolys)
def test_dpoly_arithmetic_agrees_with_sympy(p, q):
    assert sympy.simplify(to_sympy(p + q) - (to_sympy(p) + to_sympy(q))) == 0
    assert sympy.simplify(to_sympy(p * q) - to_sympy(p) * to_sympy(q)) == 0
    if not q.is_zero():
        assert sympy.simplify(to_sympy(p / q) - to_sympy(p) / to_sympy(q)) == 0


@settings(max_examples=60, deadline=None)
@given(dpolys)
def test_dpoly_canonical_form(p):
    assert p.den[-1] == 1
    assert sympy.degree(sympy.gcd(sympy.Poly(to_sympy(DPoly(p.num)), Dsym),
                                  sympy.Poly(to_sympy(DPoly(p.den)), Dsym))) == 0 or p.is_zero()
    assert DPoly.parse(str(p)) == p


def test_dpoly_cancels_common_factor():
    p = (D * D - 1) / (D - 1)
    assert p == D + 1
    assert str((2 - D) / 2) == "-1/2*D + 1"


def test_pole_at_d1():
    with pytest.raises(PoleAtD1):
        (1 / (D - 1))(Fraction(1))


# -- Expr -------------------------------------------------------------------

def test_add_examples():
    d0 = delta0()
    assert (2 * d0 + (-2) * d0).is_zero()
    w2d = omega(2) * d0
    assert add(w2d, w2d) == 2 * w2d
    lhs = Expr.mono((2 - D) / 2, delta0=1, omega=-2) + Expr.mono(D / 2, delta0=1, omega=-2)
    assert lhs == Expr.mono(1, delta0=1, omega=-2)


@settings(max_examples=50, deadline=None)
@given(exprs(), exprs(), exprs())
def test_addition_associative(x, y, z):
    assert (x + y) + z == x + (y + z)


@settings(max_examples=50, deadline=None)
@given(scalars(), exprs(), exprs())
def test_distributive(s, y, z):
    assert s * (y + z) == s * y + s * z


@settings(max_examples=50, deadline=None)
@given(exprs())
def test_normalize_idempotent_and_zero_free(x):
    assert x.normalize().normalize() == x.normalize()
    assert all(not c.is_zero() for _, c in x.items())
    assert (x - x) == ZERO


@settings(max_examples=50, deadline=None)
@given(exprs())
def test_json_round_trip(x):
    assert Expr.from_json(x.to_json()) == x


def test_two_atoms_in_one_monomial_rejected():
    with pytest.raises(ValueError):
        atom("J4") * atom("I_D")


def test_monomial_parse_round_trip():
    m = Monomial(3, -2, 1, 1, "J4")
    assert Monomial.parse(str(m)) == m


# -- evaluation ---------------------------------------------------------------

def test_eval_at_d1_examples():
    assert eval_at_D1(Fraction(2, 3) * omega(2) * delta0(3), 1) == Fraction(1, 12)
    assert eval_at_D1(ZERO, 1) == 0
    assert eval_at_D1(Expr.mono(D / 2, delta0=1), 2) == Fraction(1, 8)


def test_eval_at_d1_errors():
    with pytest.raises(OpaqueResidue):
        eval_at_D1(atom("J4"), 1)
    with pytest.raises(OpaqueResidue):
        eval_at_D1(Expr.mono(dirac0=1), 1)
    with pytest.raises(PoleAtD1):
        eval_at_D1(Expr.mono(1 / (D - 1)), 1)


@settings(max_examples=50, deadline=None)
@given(scalars(), scalars(), st.fractions(min_value=Fraction(1, 4), max_value=4,
                                          max_denominator=8), fracs)
def test_eval_at_d1_is_ring_homomorphism(x, y, w, a):
    ev = lambda e: eval_at_D1(e, w, a)
    assert ev(x + y) == ev(x) + ev(y)
    assert ev(x * y) == ev(x) * ev(y)


def test_float_evaluate_matches_exact_at_d1():
    e = Expr.mono((2 - D) / 2, delta0=1, omega=-2) + 3 * omega(2) * delta0(3)
    assert evaluate(e, 1.0, 2.0) == pytest.approx(float(eval_at_D1(e, 2)), rel=1e-14)


def test_substitute_and_diff_a():
    e = Expr.mono(3, a=2, delta0=1) + Expr.mono(1, a=1)
    assert e.diff_a() == Expr.mono(6, a=1, delta0=1) + Expr.mono(1)
    assert e.substitute_a(2) == Expr.mono(12, delta0=1) + Expr.mono(2)
