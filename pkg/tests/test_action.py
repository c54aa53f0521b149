from fractions import Fraction

import pytest
import sympy

from pathinv.action import (EvenPower, MissingLinearTerm, ModelParams, NonPerturbative,
                            OrderOverflow, TransformError, TransformSeries, expand_interaction,
                            expand_jacobian, parse_coeff, parse_transform)
from pathinv.symexpr import Expr

g, a, q, w = sympy.symbols("g a q w")


def as_sympy_f(f: TransformSeries):
    out = 0
    for n, coeff in f.coefficients().items():
        for (ge, ae), v in coeff.items():
            out += sympy.Rational(v.numerator, v.denominator) * g ** ge * a ** ae * q ** n
    return out


def truncate(expr, order=2):
    expr = sympy.expand(expr)
    return sum(expr.coeff(g, k) * g ** k for k in range(1, order + 1))


def vertices_as_sympy(vs, qdot):
    out = 0
    for v in vs:
        c = sum(sympy.Rational(cf.num[0].numerator, cf.num[0].denominator) * a ** m.a
                for m, cf in v.coefficient.items())
        d0 = sympy.Symbol("d0") if v.jacobian else 1
        out += c * g ** v.g_order * w ** v.omega_power * qdot ** v.qdot_power * q ** v.q_power * d0
    return sympy.expand(out)


TRANSFORMS = ["paper-default", "1:1,3:-1/3*g", "1:1,3:2*g-1/7*g^2,5:3*a*g^2,7:g^2",
              "1:1,3:g,5:2*a*g"]


@pytest.mark.parametrize("spec", TRANSFORMS)
def test_interaction_matches_series_oracle(spec):
    f = parse_transform(spec)
    qd = sympy.Symbol("qd")
    fs = as_sympy_f(f)
    ref = truncate(sympy.Rational(1, 2) * (qd ** 2 * (sympy.diff(fs, q) ** 2 - 1)
                                           + w ** 2 * (fs ** 2 - q ** 2)))
    got = vertices_as_sympy(expand_interaction(f, ModelParams()), qd)
    assert sympy.expand(ref - got) == 0


@pytest.mark.parametrize("spec", TRANSFORMS)
def test_jacobian_matches_series_oracle(spec):
    f = parse_transform(spec)
    fs = as_sympy_f(f)
    log = sympy.series(sympy.log(sympy.diff(fs, q)), g, 0, 3).removeO()
    ref = truncate(-sympy.Symbol("d0") * log)
    got = vertices_as_sympy(expand_jacobian(f, ModelParams()), 1)
    assert sympy.expand(ref - got) == 0


def test_default_vertices_exact():
    vs = {(v.g_order, v.omega_power, v.qdot_power, v.q_power): v.coefficient
          for v in expand_interaction(parse_transform("paper-default"), ModelParams())}
    assert vs == {
        (1, 0, 2, 2): Expr.const(-1),
        (1, 2, 0, 4): Expr.const(Fraction(-1, 3)),
        (2, 0, 2, 4): Expr.const(Fraction(1, 2)) + Expr.mono(1, a=1),
        (2, 2, 0, 6): Expr.const(Fraction(1, 18)) + Expr.mono(Fraction(1, 5), a=1),
    }


def test_default_jacobian_exact():
    vs = {(v.g_order, v.q_power): v.coefficient
          for v in expand_jacobian(parse_transform("paper-default"), ModelParams())}
    assert vs == {(1, 2): Expr.const(1), (2, 4): Expr.const(Fraction(1, 2)) - Expr.mono(1, a=1)}
    assert all(v.jacobian for v in expand_jacobian(parse_transform("paper-default"),
                                                   ModelParams()))


def test_truncated_transform():
    vs = {(v.g_order, v.omega_power, v.q_power): v.coefficient
          for v in expand_interaction(parse_transform("[(1,1),(3,−g/3)]"), ModelParams())}
    assert vs[(2, 0, 4)] == Expr.const(Fraction(1, 2))
    assert vs[(2, 2, 6)] == Expr.const(Fraction(1, 18))


def test_cubic_plus_jacobian():
    vs = {(v.g_order, v.q_power): v.coefficient
          for v in expand_jacobian(parse_transform("1:1,3:g"), ModelParams())}
    # -log(1 + 3 g q^2) = -3 g q^2 + 9/2 g^2 q^4
    assert vs == {(1, 2): Expr.const(-3), (2, 4): Expr.const(Fraction(9, 2))}


def test_identity_has_no_vertices():
    f = parse_transform("identity")
    assert expand_interaction(f, ModelParams()) == []
    assert expand_jacobian(f, ModelParams()) == []
    assert parse_transform("[(1,1)]") == f


def test_field_counts_even():
    f = parse_transform("1:1,3:2*g-1/7*g^2,5:3*a*g^2,7:g^2")
    for v in expand_interaction(f, ModelParams()) + expand_jacobian(f, ModelParams()):
        assert v.n_fields % 2 == 0
        assert v.g_order >= 1


def test_parse_forms_agree():
    a1 = parse_transform("paper-default")
    a2 = parse_transform("1:1,3:-1/3*g,5:1/5*a*g^2")
    a3 = parse_transform("[(1,1),(3,-g/3),(5,g^2*a/5)]")
    assert a1 == a2 == a3
    assert parse_coeff("g^2*a/5") == {(2, 1): Fraction(1, 5)}


@pytest.mark.parametrize("spec,err", [
    ("1:1,2:g", EvenPower),
    ("1:2,3:g", MissingLinearTerm),
    ("3:g", MissingLinearTerm),
    ("1:1,3:1/3", NonPerturbative),
    ("1:1,3:g,3:g", TransformError),
    ("1:1,3:x", TransformError),
    ("nonsense", TransformError),
])
def test_parse_errors(spec, err):
    with pytest.raises(err):
        parse_transform(spec)


def test_order_limits():
    with pytest.raises(OrderOverflow):
        ModelParams(max_g_order=3)
    with pytest.raises(ValueError):
        ModelParams(omega=Fraction(-1))
