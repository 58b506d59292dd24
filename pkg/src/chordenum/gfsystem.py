"""Exact generating-function tower for k-connected chordal graphs.

Series here use ``t + 1`` variables: ``x_j`` marks ``j``-cliques for
``j = 1..t+1`` (``x_1`` marks vertices).  For tree-width at most ``t`` the
tower runs from the single monomial ``G_{t+1}`` (the complete graph
``K_{t+1}``) down to ``G_0``, the series of all graphs in the class.

Rooted series ``G_k^{(i)}`` count the vertices *outside* the root, so with a
global bound ``N`` on the number of vertices they are only meaningful for
``e_1 <= N - i``; they are stored truncated to that range.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from gmpy2 import mpq

from . import mps
from .mps import Series, SeriesError, _poly_mul_into, _clean, _exponent

__all__ = [
    "LevelSystem",
    "build_top",
    "root_k",
    "solve_level",
    "solve_level_iterative",
    "unroot_integral",
    "unroot_dissymmetry",
    "assemble",
    "count",
    "counts",
    "clique_moments",
    "ktree_count",
]


class PipelineError(RuntimeError):
    """A structural invariant of the tower failed (indicates a bug)."""


def build_top(t: int, N: int) -> Series:
    """``G_{t+1}``: the complete graph on ``t+1`` vertices."""
    if t < 1:
        raise SeriesError("tree-width bound must be at least 1")
    if N < t + 1:
        raise SeriesError(f"N={N} is below t+1={t + 1}")
    e = tuple(math.comb(t + 1, j) for j in range(1, t + 2))
    return mps.monomial(mpq(1, math.factorial(t + 1)), e, t + 1, N)


def root_k(upper: Series, k: int) -> Series:
    """``G_{k+1}^{(k)} = k! prod_{j<k} x_j^{-C(k,j)} dG_{k+1}/dx_k``.

    The result is truncated to ``e_1 <= N - k`` (root vertices are not counted).
    """
    t = upper.t - 1
    d = mps.diff(upper, k)
    e = [0] * upper.t
    for j in range(1, k):
        e[j - 1] = math.comb(k, j)
    try:
        q = mps.mono_div(d, tuple(e))
    except SeriesError as exc:
        raise PipelineError(f"level {k} of t={t}: rooting factor missing ({exc})") from exc
    return q.scale(math.factorial(k)).truncated(upper.N - k)


def solve_level(F: Series, k: int, N: int | None = None) -> Series:
    """Unique ``G`` with ``G(0) = 1`` and ``G = exp(F[x_k -> x_k G])``.

    ``F`` must have every term with ``e_1 >= 1``.  Slices of ``G`` are
    produced in increasing ``e_1``: slice ``n`` of the substituted series only
    involves slices ``< n`` of ``G``, and ``exp`` follows the recurrence
    ``n B_n = sum_m m A_m B_{n-m}``.  Only slices ``e_1 <= N`` are computed
    (default ``F.N``).
    """
    mps._check_var(F, k)
    if F._slices[0]:
        raise SeriesError("solve_level needs min e_1 >= 1 in F")
    M = F.N if N is None else min(N, F.N)
    # group F by (power of G, e_1)
    groups: dict[tuple[int, int], dict] = {}
    for a, s in enumerate(F._slices[: M + 1]):
        for key, v in s.items():
            m = a if k == 1 else _exponent(key, k)
            groups.setdefault((m, a), {})[key] = v
    G: list[dict] = [{0: mpq(1)}]
    S: list[dict] = [{}]
    powers: dict[int, list[dict]] = {0: [{0: mpq(1)}]}

    def power_slice(m: int, s: int) -> dict:
        # slice s of G^m; needs slices <= s of G
        if m == 0:
            return powers[0][0] if s == 0 else {}
        if m == 1:
            return G[s]
        for mm in range(2, m + 1):
            p = powers.setdefault(mm, [])
            lower = G if mm == 2 else powers[mm - 1]
            while len(p) <= s:
                r = len(p)
                d: dict = {}
                for i in range(r + 1):
                    if G[i] and lower[r - i]:
                        _poly_mul_into(d, G[i], lower[r - i])
                p.append(_clean(d))
        return powers[m][s]

    for n in range(1, M + 1):
        sn: dict = {}
        for (m, a), poly in groups.items():
            if a <= n:
                ps = power_slice(m, n - a)
                if ps:
                    _poly_mul_into(sn, poly, ps)
        S.append(_clean(sn))
        gn: dict = {}
        for i in range(1, n + 1):
            if S[i] and G[n - i]:
                _poly_mul_into(gn, S[i], G[n - i], scale=mpq(i, n))
        G.append(_clean(gn))
    return Series._raw(F.t, F.N, G)


def solve_level_iterative(F: Series, k: int, N: int | None = None) -> Series:
    """Plain fixed-point iteration ``G <- exp(F[x_k -> x_k G])`` from ``G = 1``.

    Slow; kept as an independent check of :func:`solve_level`.
    """
    M = F.N if N is None else min(N, F.N)
    F = F.truncated(M)
    G = Series.one(F.t, F.N)
    for _ in range(M + 2):
        nxt = mps.exp_series(mps.subst_scaled(F, k, G)).truncated(M)
        if nxt == G:
            return G
        G = nxt
    raise PipelineError(f"no fixed point after {M + 2} iterations")


def unroot_integral(Gkk: Series, k: int) -> Series:
    """``G_k = (1/k!) prod_{j<k} x_j^{C(k,j)} * int G_k^{(k)} dx_k``."""
    integ = mps.anti_diff(Gkk, k)
    e = [0] * Gkk.t
    for j in range(1, k):
        e[j - 1] = math.comb(k, j)
    return mps.mono_mul(integ, tuple(e), mpq(1, math.factorial(k)))


def unroot_dissymmetry(upper: Series, upper_rooted: Series, Gkk: Series, k: int) -> Series:
    """``G_k`` from the dissymmetry decomposition (no integration).

    ``G_k = G_{k+1}(.., x_k G, ..) + (1/k!) prod_{j<=k} x_j^{C(k,j)} G (1 - G_{k+1}^{(k)}(.., x_k G, ..))``
    with ``G = G_k^{(k)}``.
    """
    blocks = mps.subst_scaled(upper, k, Gkk)
    rooted = mps.subst_scaled(upper_rooted, k, Gkk)
    e = [0] * Gkk.t
    for j in range(1, k + 1):
        e[j - 1] = math.comb(k, j)
    glue = mps.mono_mul(mps.mul(Gkk, 1 - rooted), tuple(e), mpq(1, math.factorial(k)))
    return blocks + glue


@dataclass(frozen=True)
class LevelSystem:
    """The full tower for tree-width ``<= t`` truncated at ``N`` vertices.

    ``unrooted[k]`` is ``G_k`` (``0 <= k <= t+1``), ``rooted_below[k]`` is
    ``G_k^{(k-1)}`` (``1 <= k <= t+1``) and ``rooted[k]`` is ``G_k^{(k)}``
    (``1 <= k <= t``).
    """

    t: int
    N: int
    unrooted: dict[int, Series] = field(repr=False)
    rooted_below: dict[int, Series] = field(repr=False)
    rooted: dict[int, Series] = field(repr=False)
    integral_check: dict[int, Series] | None = field(default=None, repr=False)

    def G(self, k: int) -> Series:
        return self.unrooted[k]


def assemble(t: int, N: int, check_integral: bool = False) -> LevelSystem:
    """Build ``G_{t+1} -> ... -> G_1 -> G_0`` for tree-width ``<= t``.

    With ``check_integral`` both unrooting routes are computed at every
    level and must agree exactly.
    """
    if t < 1 or N < 1:
        raise SeriesError("need t >= 1 and N >= 1")
    top_N = max(N, t + 1)
    unrooted = {t + 1: build_top(t, top_N).with_bound(N)}
    rooted_below: dict[int, Series] = {}
    rooted: dict[int, Series] = {}
    integral: dict[int, Series] | None = {} if check_integral else None
    for k in range(t, 0, -1):
        upper = unrooted[k + 1]
        Fk = root_k(upper, k)
        rooted_below[k + 1] = Fk
        Gkk = solve_level(Fk, k, N - k)
        rooted[k] = Gkk
        Gk = unroot_dissymmetry(upper, Fk, Gkk, k)
        if integral is not None:
            alt = unroot_integral(Gkk, k)
            integral[k] = alt
            if alt != Gk:
                raise PipelineError(f"unrooting routes disagree at level {k} (t={t}, N={N})")
        unrooted[k] = Gk
    # rooting at the empty clique changes nothing
    rooted_below[1] = unrooted[1]
    unrooted[0] = mps.exp_series(unrooted[1])
    return LevelSystem(t, N, unrooted, rooted_below, rooted, integral)


def count(sys: LevelSystem, k: int, n: int) -> int:
    """Number of labelled k-connected chordal graphs on ``n`` vertices, tree-width ``<= t``."""
    if not 0 <= k <= sys.t + 1:
        raise SeriesError(f"k={k} outside 0..{sys.t + 1}")
    if n > sys.N:
        raise SeriesError(f"n={n} exceeds truncation N={sys.N}")
    if n < 1:
        raise SeriesError("counts start at n = 1")
    value = mps.coeff_at_ones(sys.unrooted[k], n) * math.factorial(n)
    if value.denominator != 1:
        raise PipelineError(f"non-integral count {value} at k={k}, n={n}")
    if value < 0:
        raise PipelineError(f"negative count {value} at k={k}, n={n}")
    return int(value)


def counts(sys: LevelSystem, k: int) -> list[int]:
    return [count(sys, k, n) for n in range(1, sys.N + 1)]


def clique_moments(sys: LevelSystem, k: int, n: int, i: int) -> tuple[mpq, mpq]:
    """Exact mean and variance of the number of ``i``-cliques, uniform over the class."""
    if not 2 <= i <= sys.t + 1:
        raise SeriesError(f"clique size i={i} outside 2..{sys.t + 1}")
    if n > sys.N or n < 1:
        raise SeriesError(f"n={n} outside 1..{sys.N}")
    s = sys.unrooted[k]._slices[n]
    if not s:
        raise SeriesError(f"empty class at k={k}, n={n}")
    total = s1 = s2 = mpq(0)
    for key, c in s.items():
        e = _exponent(key, i)
        total += c
        s1 += c * e
        s2 += c * e * e
    mean = s1 / total
    return mean, s2 / total - mean * mean


def ktree_count(k: int, n: int) -> int:
    """Closed form ``C(n,k) (k(n-k)+1)^(n-k-2)`` for labelled k-trees (``n >= k``).

    ``n == k`` gives the lone complete graph ``K_k``.
    """
    if n < k:
        return 0
    value = math.comb(n, k) * Fraction(k * (n - k) + 1) ** (n - k - 2)
    assert value.denominator == 1
    return int(value)
