import math
from fractions import Fraction

import pytest

from chordenum import gfsystem as gf, mps
from chordenum.mps import Series, SeriesError, monomial


@pytest.fixture(scope="module")
def towers():
    return {t: gf.assemble(t, 10, check_integral=True) for t in (1, 2, 3)}


def test_build_top():
    assert gf.build_top(1, 5).terms == {(2, 1): Fraction(1, 2)}
    assert gf.build_top(2, 5).terms == {(3, 3, 1): Fraction(1, 6)}
    assert gf.build_top(3, 5).terms == {(4, 6, 4, 1): Fraction(1, 24)}
    with pytest.raises(SeriesError):
        gf.build_top(3, 3)


def test_root_k():
    assert gf.root_k(gf.build_top(1, 5), 1).terms == {(1, 1): 1}
    assert gf.root_k(gf.build_top(2, 5), 2).terms == {(1, 2, 1): 1}
    assert gf.root_k(Series.zero(3, 5), 2).is_zero()


def test_solve_level_rooted_trees():
    F = monomial(1, (1, 1), 2, 8)
    G = gf.solve_level(F, 1)
    # G = e^T = T/x, so [x^n] counts rooted trees on n+1 vertices: (n+1)^(n-1) / n!
    for n in range(1, 8):
        assert G.coeff((n, n)) == Fraction((n + 1) ** (n - 1), math.factorial(n))
    assert G.coeff((3, 3)) == Fraction(16, 6)
    assert G.constant_term() == 1
    assert gf.solve_level(Series.zero(2, 8), 1) == Series.one(2, 8)


@pytest.mark.parametrize("t,k", [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2), (3, 3)])
def test_solve_level_matches_iteration(t, k):
    sys_ = gf.assemble(t, 8)
    F = sys_.rooted_below[k + 1]
    assert gf.solve_level(F, k, 8 - k) == gf.solve_level_iterative(F, k, 8 - k)


def test_unroot_examples(towers):
    G1 = towers[1].unrooted[1]
    assert mps.coeff_at_ones(G1, 4) == Fraction(16, 24)
    assert G1.coeff((2, 1)) == Fraction(1, 2)
    assert gf.unroot_integral(Series.zero(2, 5), 1).is_zero()
    assert gf.count(towers[2], 2, 4) == 6


def test_unroot_dissymmetry_degenerate():
    t, N, k = 2, 6, 2
    upper = gf.build_top(t, N)
    out = gf.unroot_dissymmetry(upper, Series.zero(t + 1, N), Series.one(t + 1, N), k)
    lone = monomial(Fraction(1, 2), (2, 1, 0), t + 1, N)
    assert out == upper + lone


@pytest.mark.parametrize("t", [1, 2, 3, 4])
def test_unrooting_routes_agree(t):
    sys_ = gf.assemble(t, 12, check_integral=True)
    for k in range(1, t + 1):
        assert sys_.integral_check[k] == sys_.unrooted[k]


def test_assemble_examples(towers):
    assert gf.count(gf.assemble(1, 6), 0, 4) == 38
    assert gf.count(gf.assemble(2, 5), 0, 3) == 8
    for sys_ in towers.values():
        assert sys_.unrooted[0].constant_term() == 1


def test_count_examples(towers):
    assert gf.count(towers[1], 1, 5) == 125
    assert gf.count(towers[2], 2, 5) == 70
    assert gf.counts(towers[1], 1)[:5] == [1, 1, 3, 16, 125]
    assert gf.counts(towers[2], 2)[:5] == [0, 1, 1, 6, 70]
    with pytest.raises(SeriesError):
        gf.count(towers[1], 1, 11)


def test_ktree_diagonal(towers):
    for t, sys_ in towers.items():
        for n in range(1, 11):
            assert gf.count(sys_, t, n) == gf.ktree_count(t, n)


def test_small_n_convention(towers):
    for t, sys_ in towers.items():
        for k in range(1, t + 2):
            for n in range(1, k):
                assert gf.count(sys_, k, n) == 0
            assert gf.count(sys_, k, k) == 1


def test_monotonicity(towers):
    for t, sys_ in towers.items():
        for k in range(1, t + 1):
            for n in range(k, 11):
                assert gf.count(sys_, k, n) <= gf.count(sys_, k - 1, n) <= gf.count(sys_, 0, n)
    for k in range(0, 2):
        for n in range(1, 11):
            assert gf.count(towers[1], k, n) <= gf.count(towers[2], k, n) <= gf.count(towers[3], k, n)


def test_factor_invariants(towers):
    for t, sys_ in towers.items():
        for k in range(1, t + 2):
            e = tuple(math.comb(k, j) for j in range(1, k + 1)) + (0,) * (t + 1 - k)
            mps.mono_div(sys_.unrooted[k], e)  # raises if the factor is missing
            e = tuple(math.comb(k - 1, j - 1) for j in range(1, k + 1)) + (0,) * (t + 1 - k)
            assert sys_.rooted_below[k].min_e1() >= 1
            if k >= 2:
                mps.mono_div(sys_.rooted_below[k], e)
        for k in range(1, t + 1):
            assert sys_.rooted[k].constant_term() == 1


def test_moments(towers):
    for n in range(1, 11):
        assert gf.clique_moments(towers[1], 1, n, 2) == (n - 1, 0)
    assert gf.clique_moments(towers[1], 0, 3, 2)[0] == Fraction(9, 7)
    assert gf.clique_moments(towers[2], 2, 4, 2)[0] == 5
    with pytest.raises(SeriesError):
        gf.clique_moments(towers[2], 2, 1, 2)
    with pytest.raises(SeriesError):
        gf.clique_moments(towers[2], 2, 4, 4)


def test_ktree_closed_form():
    assert [gf.ktree_count(1, n) for n in range(1, 6)] == [1, 1, 3, 16, 125]
    assert [gf.ktree_count(2, n) for n in range(1, 6)] == [0, 1, 1, 6, 70]
