import math

import gmpy2
import pytest
from gmpy2 import mpfr

from chordenum.jet import Jet, compose_last, space


@pytest.fixture(autouse=True)
def precision():
    with gmpy2.context(gmpy2.get_context(), precision=128):
        yield


def point(d=3):
    sp = space(2, d)
    return Jet.seed(sp, 0, mpfr("0.3")), Jet.seed(sp, 1, mpfr("1.7"))


def f_value(x, y):
    return gmpy2.exp(x * y) / (1 + x) + gmpy2.log(y) * x**3 + y ** mpfr("0.5")


def f_jet(x, y):
    return (x * y).exp() / (1 + x) + y.log() * x**3 + y.power(mpfr("0.5"))


def test_space_layout():
    sp = space(2, 2)
    assert sp.monos[:3] == ((0, 0), (1, 0), (0, 1))
    assert len(sp) == 6
    # lower degrees form a prefix
    assert space(3, 2).monos == space(3, 3).monos[: len(space(3, 2))]


def test_derivatives_match_finite_differences():
    x, y = point()
    J = f_jet(x, y)
    x0, y0, h = mpfr("0.3"), mpfr("1.7"), mpfr("1e-8")
    fx = (f_value(x0 + h, y0) - f_value(x0 - h, y0)) / (2 * h)
    fy = (f_value(x0, y0 + h) - f_value(x0, y0 - h)) / (2 * h)
    fxy = (
        f_value(x0 + h, y0 + h) - f_value(x0 + h, y0 - h) - f_value(x0 - h, y0 + h) + f_value(x0 - h, y0 - h)
    ) / (4 * h * h)
    assert J.value == pytest.approx(float(f_value(x0, y0)), rel=1e-30)
    assert float(J.derivative((1, 0))) == pytest.approx(float(fx), rel=1e-6)
    assert float(J.derivative((0, 1))) == pytest.approx(float(fy), rel=1e-6)
    assert float(J.derivative((1, 1))) == pytest.approx(float(fxy), rel=1e-6)


def test_exp_log_inverse():
    x, y = point(4)
    u = x * y + 1
    v = u.log().exp()
    assert max(abs(a - b) for a, b in zip(u.c, v.c)) < mpfr("1e-35")


def test_reciprocal_and_powers():
    x, _ = point(4)
    one = x * x.reciprocal()
    assert abs(one.value - 1) < mpfr("1e-35")
    assert max(abs(c) for c in one.c[1:]) < mpfr("1e-35")
    p = x.power(3)
    q = x**3
    assert max(abs(a - b) for a, b in zip(p.c, q.c)) < mpfr("1e-35")


def test_polynomial_is_exact():
    x, y = point(3)
    p = (x - mpfr("0.3")) ** 2 * (y - mpfr("1.7"))
    assert p.coeff((2, 1)) == 1
    assert sum(1 for c in p.c if c) == 1


def test_compose_last_chain_rule():
    # J(s, z) = exp(s + 2 z); substitute z = w(s) = s^2 (nilpotent)
    sp = space(2, 3)
    s, z = Jet.seed(sp, 0), Jet.seed(sp, 1)
    J = (s + z * 2).exp()
    tgt = space(1, 3)
    w = Jet.seed(tgt, 0) ** 2
    out = compose_last(J, w)
    ref = (Jet.seed(tgt, 0) + w * 2).exp()
    assert max(abs(a - b) for a, b in zip(out.c, ref.c)) < mpfr("1e-35")
    with pytest.raises(ValueError):
        compose_last(J, Jet.const(tgt, 1))


def test_diff_last():
    sp = space(2, 3)
    s, z = Jet.seed(sp, 0), Jet.seed(sp, 1)
    J = s * z**2 + z**3
    D = J.diff_last()
    assert D.sp.d == 2
    assert D.coeff((1, 1)) == 2 and D.coeff((0, 2)) == 3


def test_space_mismatch():
    a = Jet.const(space(1, 2), 1)
    b = Jet.const(space(2, 2), 1)
    with pytest.raises(ValueError):
        a + b
    assert math.isclose(float((a * 3).value), 3.0)
