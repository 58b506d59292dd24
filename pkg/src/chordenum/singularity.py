"""Numeric evaluation of the level tower and its branch points.

Points carry ``t + 1`` coordinates ``(x_1, .., x_{t+1})``.  Level ``t`` has a
closed form through the tree function ``T(z) = z e^{T(z)}``; every lower
level ``j`` is the fixed point ``y = exp(F(x, y))`` with

    F(x, y) = j! prod_{i<j} x_i^{-C(j,i)} dG_{j+1}/dx_j  at x_j -> x_j y,

and ``G_j`` follows from the dissymmetry identity.  The derivative in ``x_j``
is obtained by evaluating level ``j+1`` on jets with one extra seed, so a
level-``k`` evaluation of degree ``d`` drives the top level at degree
``d + t - k``.

The radius ``rho_{t,k}`` is where the smallest root ``y`` ceases to exist, i.e.
``y = e^F`` and ``y dF/dy = 1`` hold simultaneously.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr

from .jet import Jet, compose_last, space

log = logging.getLogger(__name__)

__all__ = [
    "NonConvergence",
    "BranchPoint",
    "tree_T",
    "eval_top",
    "eval_level",
    "branch_point",
    "table",
    "ratio_estimate",
    "constant_estimate",
    "ktree_constant",
    "precision_bits",
    "TABLE_LIMIT",
]

TABLE_LIMIT = 5
DEFAULT_PREC = 1e-12
_MAX_NEWTON = 400


class NonConvergence(ArithmeticError):
    """A numeric solve failed: no root, diverging iteration or a point out of range."""


class OutOfDomain(NonConvergence):
    """The evaluation point lies at or beyond a singularity."""


def precision_bits(prec: float) -> int:
    """Working precision for a requested tolerance, with headroom for nesting."""
    if not 0 < prec < 1:
        raise ValueError("prec must lie in (0, 1)")
    return max(128, int(-math.log2(prec)) + 80)


def _ctx(prec: float):
    return gmpy2.context(gmpy2.get_context(), precision=precision_bits(prec))


# -- tree function ------------------------------------------------------------

def tree_T(z, prec: float = DEFAULT_PREC) -> mpfr:
    """Principal branch of ``T = z e^T`` on ``[0, 1/e]``."""
    with _ctx(prec):
        return _tree_T(mpfr(z))


def _tree_T(z: mpfr) -> mpfr:
    e_inv = gmpy2.exp(mpfr(-1))
    # slack of a few double ulps so that a float literal for 1/e is accepted
    if z < 0 or z > e_inv * (1 + mpfr(2) ** -50):
        raise OutOfDomain(f"tree function argument {z} outside [0, 1/e]")
    if z == 0:
        return mpfr(0)
    eps = mpfr(2) ** (-gmpy2.get_context().precision + 6)
    if z >= e_inv:
        return mpfr(1)
    # damped Newton on T - z e^T from T = 0; monotone since the map is concave
    T = mpfr(0)
    for _ in range(_MAX_NEWTON):
        ez = z * gmpy2.exp(T)
        step = (T - ez) / (1 - ez)
        T -= step
        if T > 1:
            T = mpfr(1)
        if abs(step) <= eps * max(T, mpfr(1)):
            return T
    raise NonConvergence(f"tree function did not converge at z={z}")


def _tree_T_jet(z: Jet) -> Jet:
    T0 = _tree_T(z.value)
    if T0 >= 1:
        raise OutOfDomain("tree function jet requested at its singularity")
    u = Jet.const(z.sp, T0)
    # chord iteration: one extra correct order per sweep
    for _ in range(z.sp.d + 1):
        u = u - (u - z * u.exp()) / (1 - T0)
        u.c[0] = T0
    return u


# -- top level ----------------------------------------------------------------

def _prod_powers(P, exps) -> Jet:
    out = None
    for p, e in zip(P, exps):
        if e:
            term = p**e
            out = term if out is None else out * term
    return out if out is not None else Jet.const(P[0].sp, 1)


def _top(t: int, P: list[Jet]):
    """``(G_t, G_t^{(t)}, G_{t+1}^{(t)} = X)`` at jet point ``P``."""
    X = _prod_powers(P, [math.comb(t, j - 1) for j in range(1, t + 2)])
    z = X * t
    if z.value >= gmpy2.exp(mpfr(-1)):
        raise OutOfDomain(f"t*X = {z.value} is at or beyond 1/e")
    if z.value < 0:
        raise OutOfDomain("negative coordinates are not supported")
    T = _tree_T_jet(z)
    y = (T / t).exp()
    A = _prod_powers(P, [math.comb(t, j) for j in range(1, t + 1)])
    G = A * y * (1 - T / (t + 1)) / math.factorial(t)
    return G, y, X


def eval_top(t: int, point):
    """``(G_t, G_t^{(t)}, G_{t+1}, G_{t+1}^{(t)})`` from the closed form.

    ``point`` holds ``t`` or ``t + 1`` coordinates (numbers or jets of one
    space); a missing ``x_{t+1}`` is taken as 1.
    """
    P = _coerce(t, point)
    G, y, X = _top(t, P)
    top = _prod_powers(P, [math.comb(t + 1, j) for j in range(1, t + 2)]) / math.factorial(t + 1)
    return G, y, top, X


def _coerce(t: int, point) -> list[Jet]:
    pts = list(point)
    if len(pts) == t:
        pts.append(1)
    if len(pts) != t + 1:
        raise ValueError(f"point needs {t} or {t + 1} coordinates")
    sp = next((p.sp for p in pts if isinstance(p, Jet)), space(0, 0))
    return [p.embed(sp) if isinstance(p, Jet) else Jet.const(sp, p) for p in pts]


# -- lower levels -------------------------------------------------------------

class _Solver:
    """Nested level evaluation with a per-level warm start for the scalar roots."""

    def __init__(self, t: int):
        self.t = t
        self.warm: dict[int, mpfr] = {}
        self.cache: dict[tuple, mpfr] = {}

    # scalar F(y), F'(y) at level j for scalar centres c
    def F_scalar(self, j: int, c: list[mpfr], y: mpfr):
        sp = space(1, 2)
        Q = [Jet.const(sp, v) for v in c]
        Q[j - 1] = Jet.seed(sp, 0, c[j - 1] * y)
        H = self.level(j + 1, Q)[0]
        Hd = H.diff_last()
        coef = _root_factor(j, c)
        return coef * Hd.c[0], coef * Hd.c[1] * c[j - 1]

    def root(self, j: int, c: list[mpfr]) -> mpfr:
        """Smallest root of ``y = exp(F(y))``; raises :class:`NonConvergence` if none."""
        key = (j, tuple(c))
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        if c[0] == 0:
            return mpfr(1)
        eps = mpfr(2) ** (-gmpy2.get_context().precision + 12)

        def g_and_slope(y):
            F, dF = self.F_scalar(j, c, y)
            eF = gmpy2.exp(F)
            return eF - y, eF * dF - 1

        y = mpfr(1)
        w = self.warm.get(j)
        if w is not None and w > 1:
            try:
                g, s = g_and_slope(w)
                if g > 0 and s < 0:
                    y = w
            except NonConvergence:
                pass
        for _ in range(_MAX_NEWTON):
            try:
                g, s = g_and_slope(y)
            except NonConvergence as exc:
                raise NonConvergence(f"level {j}: no fixed point ({exc})") from exc
            if g <= 0:
                # converged from the left to rounding level
                break
            if s >= 0:
                raise NonConvergence(f"level {j}: no fixed point at {c[0]}")
            step = g / s
            y -= step
            if -step <= eps * y:
                break
        else:
            raise NonConvergence(f"level {j}: Newton did not converge")
        self.warm[j] = y
        if len(self.cache) > 4096:
            self.cache.clear()
        self.cache[key] = y
        return y

    def level(self, j: int, P: list[Jet]):
        """``(G_j, G_j^{(j)}, F)`` at jet point ``P``; ``F`` taken at the substituted point."""
        t = self.t
        if j == t:
            G, y, X = _top(t, P)
            return G, y, X * y**t
        sp = P[0].sp
        m, d = sp.m, sp.d
        c = [p.value for p in P]
        if c[0] == 0 and all(not any(p.c[1:]) for p in P):
            return Jet.const(sp, 0), Jet.const(sp, 1), Jet.const(sp, 0)
        if c[0] <= 0:
            raise OutOfDomain("level evaluation needs x_1 > 0")
        y0 = self.root(j, c)
        Fz, H = self._upper(j, P, c[j - 1] * y0)
        # nilpotent part of y by chord iteration on y = exp(F(p_j y))
        y = Jet.const(sp, y0)
        if d:
            slope = 1 - y0 * c[j - 1] * Fz.diff_last().c[0]
        for _ in range(d + 1 if d else 0):
            w = P[j - 1] * y
            w.c[0] = mpfr(0)
            Fw = compose_last(Fz, w)
            y = y - (y - Fw.exp()) / slope
            y.c[0] = y0
        w = P[j - 1] * y
        w.c[0] = mpfr(0)
        Fw = compose_last(Fz, w)
        Hw = compose_last(H, w)
        A = _prod_powers(P, [math.comb(j, i) for i in range(1, j + 1)]) / math.factorial(j)
        G = Hw + A * y * (1 - Fw)
        return G, y, Fw

    def _upper(self, j: int, P: list[Jet], centre: mpfr):
        """Level ``j+1`` around ``x_j = centre + zeta``: returns (F_zeta, G_{j+1})."""
        sp = P[0].sp
        up = space(sp.m + 1, sp.d + 1)
        Q = [p.embed(up) for p in P]
        Q[j - 1] = Jet.seed(up, sp.m, centre)
        H = self.level(j + 1, Q)[0]
        Hd = H.diff_last()
        below = _prod_powers(P, [math.comb(j, i) for i in range(1, j)])
        coef = below.reciprocal() * math.factorial(j)
        return coef.embed(Hd.sp) * Hd, H

    def unsubstituted(self, j: int, P: list[Jet]) -> Jet:
        """``G_{j+1}^{(j)}`` at ``P`` itself."""
        if j == self.t:
            return _prod_powers(P, [math.comb(self.t, i - 1) for i in range(1, self.t + 2)])
        Fz, _ = self._upper(j, P, P[j - 1].value)
        w = P[j - 1].nil()
        return compose_last(Fz, w)


def _root_factor(j: int, c: list[mpfr]) -> mpfr:
    den = mpfr(1)
    for i in range(1, j):
        den *= c[i - 1] ** math.comb(j, i)
    return math.factorial(j) / den


def eval_level(t: int, k: int, point, prec: float = DEFAULT_PREC):
    """``(G_k, G_k^{(k)}, G_{k+1}^{(k)})`` as jets at ``point``.

    ``point`` holds ``t`` or ``t+1`` coordinates, numbers or jets of a common
    space.  Raises :class:`NonConvergence` if ``x_1`` is at or beyond the
    radius of the level.
    """
    if not 1 <= k <= t:
        raise ValueError(f"level k={k} outside 1..{t}")
    with _ctx(prec):
        P = _coerce(t, point)
        if P[0].value == 0 and all(not any(p.c[1:]) for p in P):
            # every series here has min e_1 >= 1 except the rooted one (= 1)
            sp = P[0].sp
            return Jet.const(sp, 0), Jet.const(sp, 1), Jet.const(sp, 0)
        s = _Solver(t)
        G, y, _ = s.level(k, P)
        return G, y, s.unsubstituted(k, P)


# -- branch points ------------------------------------------------------------

@dataclass(frozen=True)
class BranchPoint:
    t: int
    k: int
    rho: mpfr
    y_star: mpfr
    residuals: tuple[mpfr, mpfr]


def _table_point(t: int, x1) -> list[mpfr]:
    return [mpfr(x1)] + [mpfr(1)] * t


def _has_root(s: _Solver, k: int, x1: mpfr) -> bool:
    try:
        s.root(k, _table_point(s.t, x1))
        return True
    except NonConvergence:
        return False


def _branch_system(s: _Solver, k: int, x1: mpfr, y: mpfr):
    """Defects ``(y - e^F, y F_y - 1)`` and their Jacobian in ``(x_1, y)``."""
    t = s.t
    base = space(1, 2)
    P = [Jet.seed(base, 0, x1)] + [Jet.const(base, 1) for _ in range(t)]
    ck = P[k - 1].value
    Fz, _ = s._upper(k, P, ck * y)
    two = space(2, 2)
    eta = Jet.seed(two, 1, y)
    w = P[k - 1].embed(two) * eta
    w.c[0] = mpfr(0)
    F = compose_last(Fz, w)
    f = F.value
    fx = F.derivative((1, 0))
    fy = F.derivative((0, 1))
    fxy = F.derivative((1, 1))
    fyy = F.derivative((0, 2))
    ef = gmpy2.exp(f)
    r1 = y - ef
    r2 = y * fy - 1
    J = ((-ef * fx, 1 - ef * fy), (y * fxy, fy + y * fyy))
    return (r1, r2), J


def branch_point(t: int, k: int, prec: float = DEFAULT_PREC, _solver=None, upper=None) -> BranchPoint:
    """``rho_{t,k}`` at ``x_2 = .. = x_{t+1} = 1``.

    ``k = t`` uses the closed form ``1/(e t)``.  Otherwise the existence of a
    fixed point is bisected on ``(0, rho_{t,k+1})`` to a coarse bracket and
    the characteristic system is polished by Newton inside that bracket.
    """
    if not 1 <= k <= t:
        raise ValueError(f"need 1 <= k <= t, got t={t}, k={k}")
    with _ctx(prec):
        if k == t:
            rho = 1 / (gmpy2.exp(mpfr(1)) * t)
            y = gmpy2.exp(mpfr(1) / t)
            return BranchPoint(t, k, rho, y, (mpfr(0), mpfr(0)))
        s = _solver or _Solver(t)
        hi = upper if upper is not None else branch_point(t, k + 1, prec, s).rho
        hi = mpfr(hi)
        lo = mpfr(0)
        # bisection gives the bracket; Newton only polishes inside it
        while (hi - lo) > hi * mpfr("1e-9"):
            mid = (lo + hi) / 2
            if _has_root(s, k, mid):
                lo = mid
            else:
                hi = mid
        x1 = lo
        y = s.root(k, _table_point(t, lo))
        floor = mpfr(2) ** (-gmpy2.get_context().precision + 24)
        system = _branch_system(s, k, x1, y)
        for _ in range(60):
            (r1, r2), J = system
            det = J[0][0] * J[1][1] - J[0][1] * J[1][0]
            if det == 0:
                raise NonConvergence(f"singular Jacobian at t={t}, k={k}")
            dx = (r1 * J[1][1] - r2 * J[0][1]) / det
            dy = (J[0][0] * r2 - J[1][0] * r1) / det
            lam = mpfr(1)
            while True:
                x_new, y_new = x1 - lam * dx, y - lam * dy
                if lo - (hi - lo) <= x_new <= hi + (hi - lo):
                    try:
                        system = _branch_system(s, k, x_new, y_new)
                        break
                    except NonConvergence:
                        pass
                lam /= 2
                if lam < mpfr("1e-6"):
                    raise NonConvergence(f"branch Newton stalled at t={t}, k={k}")
            x1, y = x_new, y_new
            if abs(dx) <= floor * x1 and abs(dy) <= floor * y:
                break
        else:
            raise NonConvergence(f"branch Newton did not converge at t={t}, k={k}")
        (r1, r2), _ = system
        if abs(r1) > prec or abs(r2) > prec:
            raise NonConvergence(f"residuals {float(r1):.3g}, {float(r2):.3g} above {prec}")
        log.debug("rho_{%d,%d} = %s", t, k, x1)
        return BranchPoint(t, k, x1, y, (r1, r2))


def table(t_max: int, prec: float = DEFAULT_PREC, limit: int = TABLE_LIMIT) -> dict[tuple[int, int], BranchPoint]:
    """Branch points for ``1 <= k <= t <= t_max``; ``rho_{t,0}`` equals ``rho_{t,1}``."""
    if t_max > limit:
        raise ValueError(f"t_max={t_max} exceeds the table limit {limit}")
    out: dict[tuple[int, int], BranchPoint] = {}
    for t in range(1, t_max + 1):
        s = _Solver(t)
        upper = None
        for k in range(t, 0, -1):
            bp = branch_point(t, k, prec, _solver=s, upper=upper)
            out[t, k] = bp
            upper = bp.rho
    return out


# -- coefficient-based estimates -------------------------------------------

def _neville(xs, ys, at=0.0):
    """Polynomial extrapolation of ``ys`` (as a function of ``xs``) to ``at``."""
    p = list(ys)
    n = len(xs)
    for level in range(1, n):
        for i in range(n - level):
            p[i] = ((at - xs[i + level]) * p[i] + (xs[i] - at) * p[i + 1]) / (xs[i] - xs[i + level])
    return p[0]


def ratio_estimate(coeffs, order: int = 4):
    """Radius and subexponential exponent from ``a_n ~ C rho^{-n} n^alpha``.

    ``coeffs[i]`` is ``a_{n0+i}`` for consecutive ``n``; by default ``n0 = 1``
    (pass ``(n0, coeffs)`` otherwise).  Ratios ``r_n = a_n / a_{n-1}`` behave
    like ``(1/rho)(1 + alpha/n + O(n^-2))``; both ``1/rho`` and ``alpha`` are
    extrapolated in ``1/n`` from the last ``order + 1`` values.
    """
    n0 = 1
    if isinstance(coeffs, tuple) and len(coeffs) == 2 and isinstance(coeffs[0], int):
        n0, coeffs = coeffs
    a = [Fraction(c) for c in coeffs]
    if len(a) < 10:
        raise ValueError("ratio_estimate needs at least 10 coefficients")
    if any(v == 0 for v in a):
        raise ValueError("ratio_estimate needs nonzero coefficients")
    ns = list(range(n0, n0 + len(a)))
    ratios = {n: a[i] / a[i - 1] for i, n in enumerate(ns) if i > 0}
    last = ns[-(order + 1):]
    inv = [Fraction(1, n) for n in last]
    gamma = _neville(inv, [ratios[n] for n in last], 0)
    if gamma <= 0:
        raise ValueError("extrapolated growth rate is not positive")
    # n (r_n / gamma - 1) -> alpha; its own correction is O(1/n)
    last2 = ns[-(order + 1):]
    alpha = _neville([Fraction(1, n) for n in last2], [n * (ratios[n] / gamma - 1) for n in last2], 0)
    return 1 / float(gamma), float(alpha)


def constant_estimate(t: int, k: int, N: int, coeffs=None, rho=None, order: int = 4) -> float:
    """Extrapolated limit of ``a_n n^{5/2} rho^n`` with ``a_n = count / n!``.

    For ``t = k`` the coefficients come from the closed form for labelled
    ``k``-trees and ``rho = 1/(e k)``, so large ``N`` is cheap.  Otherwise
    exact counts are taken from the series tower (or passed as ``coeffs``,
    ``a_1..a_N``) and ``rho`` from :func:`branch_point`.
    """
    from . import gfsystem

    with gmpy2.context(gmpy2.get_context(), precision=256):
        if coeffs is None:
            if t == k:
                coeffs = [Fraction(gfsystem.ktree_count(k, n), math.factorial(n)) for n in range(1, N + 1)]
            else:
                sys = gfsystem.assemble(t, N)
                coeffs = [Fraction(gfsystem.count(sys, k, n), math.factorial(n)) for n in range(1, N + 1)]
        if rho is None:
            rho = branch_point(t, k).rho if t != k else 1 / (gmpy2.exp(mpfr(1)) * k)
        rho = mpfr(rho)
        ns = list(range(N - order, N + 1))
        vals = []
        for n in ns:
            a = coeffs[n - 1]
            vals.append(mpfr(a.numerator) / mpfr(a.denominator) * mpfr(n) ** mpfr(2.5) * rho**n)
        est = _neville([mpfr(1) / n for n in ns], vals, 0)
        return float(est)


def ktree_constant(k: int) -> float:
    """Limit of ``a_n n^{5/2} (e k)^{-n}`` for labelled ``k``-trees.

    From Stirling applied to ``C(n,k) (k(n-k)+1)^(n-k-2) / n!``; the factor
    ``exp(-(k^2-1)/k)`` comes from ``(1 - (k^2-1)/(kn))^n`` and equals 1 only
    for ``k = 1``.
    """
    return math.exp(-(k * k - 1) / k) / (math.sqrt(2 * math.pi) * math.factorial(k) * k ** (k + 2))
