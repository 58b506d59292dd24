"""Truncated multivariate Taylor jets over ``gmpy2.mpfr``.

A :class:`Jet` stores the Taylor coefficients of a function at a point,
in ``m`` seed variables up to total degree ``d``.  Monomials are ordered by
degree first, so a lower-degree space is a prefix of a higher one.  New seeds
are always appended as the *last* variable, and :func:`compose_last` replaces
that last seed by a nilpotent jet, which is how nested derivatives are chained.
"""
from __future__ import annotations

import math
from functools import lru_cache

import gmpy2
from gmpy2 import mpfr

__all__ = ["JetSpace", "Jet", "space", "compose_last"]


class JetSpace:
    """Monomials in ``m`` variables of total degree ``<= d``."""

    __slots__ = ("m", "d", "monos", "index", "degree", "_mul")

    def __init__(self, m: int, d: int):
        self.m, self.d = m, d
        monos = []
        for deg in range(d + 1):
            # reverse-lex inside a degree: x_0 powers first
            monos.extend(sorted(_compositions(deg, m), reverse=True))
        self.monos = tuple(monos)
        self.index = {e: i for i, e in enumerate(monos)}
        self.degree = tuple(sum(e) for e in monos)
        self._mul = None

    def __len__(self) -> int:
        return len(self.monos)

    def __repr__(self) -> str:
        return f"JetSpace(m={self.m}, d={self.d})"

    @property
    def mul_table(self):
        # for each i: parallel lists (j, k) with monos[i] + monos[j] = monos[k]
        if self._mul is None:
            table = []
            for a in self.monos:
                da = sum(a)
                js, ks = [], []
                for j, b in enumerate(self.monos):
                    if da + self.degree[j] > self.d:
                        break
                    js.append(j)
                    ks.append(self.index[tuple(x + y for x, y in zip(a, b))])
                table.append(tuple(zip(js, ks)))
            self._mul = tuple(table)
        return self._mul


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def space(m: int, d: int) -> JetSpace:
    return JetSpace(m, d)


@lru_cache(maxsize=None)
def _embed_map(src: JetSpace, dst: JetSpace) -> tuple[tuple[int, int], ...]:
    """Index pairs mapping ``src`` into ``dst`` (prefix variables, truncated)."""
    if dst.m < src.m:
        raise ValueError("cannot embed into a space with fewer seeds")
    pad = (0,) * (dst.m - src.m)
    return tuple(
        (i, dst.index[e + pad]) for i, e in enumerate(src.monos) if sum(e) <= dst.d
    )


@lru_cache(maxsize=None)
def _last_split(src: JetSpace, dst: JetSpace):
    """For each power ``p`` of the last seed of ``src``: pairs (src idx, dst idx)."""
    out = [[] for _ in range(src.d + 1)]
    pad = (0,) * (dst.m - (src.m - 1))
    for i, e in enumerate(src.monos):
        rest = e[:-1] + pad
        if sum(rest) <= dst.d:
            out[e[-1]].append((i, dst.index[rest]))
    return tuple(tuple(x) for x in out)


@lru_cache(maxsize=None)
def _diff_last(src: JetSpace):
    dst = space(src.m, src.d - 1)
    pairs = []
    for i, e in enumerate(src.monos):
        if e[-1]:
            pairs.append((i, dst.index[e[:-1] + (e[-1] - 1,)], e[-1]))
    return dst, tuple(pairs)


class Jet:
    __slots__ = ("sp", "c")

    def __init__(self, sp: JetSpace, coeffs):
        self.sp = sp
        self.c = coeffs

    # -- construction -----------------------------------------------------

    @classmethod
    def const(cls, sp: JetSpace, value) -> "Jet":
        c = [mpfr(0)] * len(sp)
        c[0] = mpfr(value)
        return cls(sp, c)

    @classmethod
    def seed(cls, sp: JetSpace, i: int, center=0) -> "Jet":
        """``center + s_i``."""
        j = cls.const(sp, center)
        if sp.d >= 1:
            e = [0] * sp.m
            e[i] = 1
            j.c[sp.index[tuple(e)]] = mpfr(1)
        return j

    @property
    def value(self) -> mpfr:
        return self.c[0]

    def coeff(self, e) -> mpfr:
        """Taylor coefficient of the monomial with exponents ``e``."""
        i = self.sp.index.get(tuple(e))
        return mpfr(0) if i is None else self.c[i]

    def derivative(self, e) -> mpfr:
        """Partial derivative ``d^|e| f / ds^e`` at the centre."""
        return self.coeff(e) * math.prod(math.factorial(k) for k in e)

    def nil(self) -> "Jet":
        c = list(self.c)
        c[0] = mpfr(0)
        return Jet(self.sp, c)

    def embed(self, dst: JetSpace) -> "Jet":
        if dst is self.sp:
            return self
        c = [mpfr(0)] * len(dst)
        for i, k in _embed_map(self.sp, dst):
            c[k] = self.c[i]
        return Jet(dst, c)

    def truncate(self, d: int) -> "Jet":
        return self.embed(space(self.sp.m, d))

    def diff_last(self) -> "Jet":
        """Derivative with respect to the last seed (one degree is lost)."""
        dst, pairs = _diff_last(self.sp)
        c = [mpfr(0)] * len(dst)
        for i, k, f in pairs:
            c[k] = self.c[i] * f
        return Jet(dst, c)

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: "Jet") -> None:
        if other.sp is not self.sp:
            raise ValueError(f"jet spaces differ: {self.sp} vs {other.sp}")

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(self.sp, [a + b for a, b in zip(self.c, other.c)])
        c = list(self.c)
        c[0] = c[0] + other
        return Jet(self.sp, c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.sp, [-a for a in self.c])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.sp, [a * other for a in self.c])
        self._check(other)
        out = [mpfr(0)] * len(self.sp)
        b = other.c
        for i, row in enumerate(self.sp.mul_table):
            a = self.c[i]
            if a:
                for j, k in row:
                    if b[j]:
                        out[k] += a * b[j]
        return Jet(self.sp, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.sp, [a / other for a in self.c])

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n):
        if isinstance(n, int) and n >= 0:
            result = Jet.const(self.sp, 1)
            base = self
            while n:
                if n & 1:
                    result = result * base
                n >>= 1
                if n:
                    base = base * base
            return result
        return self.power(n)

    def taylor(self, coeffs) -> "Jet":
        """``sum_i coeffs[i] * (self - value)^i`` (``coeffs`` = f^{(i)}(value)/i!)."""
        n = self.nil()
        d = self.sp.d
        r = Jet.const(self.sp, coeffs[d])
        for i in range(d - 1, -1, -1):
            r = r * n + coeffs[i]
        return r

    def exp(self) -> "Jet":
        e0 = gmpy2.exp(self.value)
        return self.taylor([e0 / math.factorial(i) for i in range(self.sp.d + 1)])

    def log(self) -> "Jet":
        v = self.value
        if v <= 0:
            raise ValueError("log of a jet with non-positive centre")
        co = [gmpy2.log(v)] + [(-1) ** (i + 1) / (i * v**i) for i in range(1, self.sp.d + 1)]
        return self.taylor(co)

    def reciprocal(self) -> "Jet":
        v = self.value
        if v == 0:
            raise ZeroDivisionError("reciprocal of a jet with zero centre")
        return self.taylor([(-1) ** i / v ** (i + 1) for i in range(self.sp.d + 1)])

    def power(self, p) -> "Jet":
        v = self.value
        if v <= 0:
            raise ValueError("real power of a jet with non-positive centre")
        p = mpfr(p)
        co, binom = [], mpfr(1)
        for i in range(self.sp.d + 1):
            co.append(binom * v ** (p - i))
            binom = binom * (p - i) / (i + 1)
        return self.taylor(co)

    def __repr__(self) -> str:
        return f"Jet({self.sp}, value={self.value})"


def compose_last(J: Jet, w: Jet) -> Jet:
    """Substitute the nilpotent jet ``w`` for the last seed of ``J``.

    ``J`` lives in ``(m+1, d)``; ``w`` lives in ``(m', d')`` with ``m' >= m``,
    its first ``m`` seeds being the first ``m`` seeds of ``J``.  Result in
    ``w``'s space.
    """
    if w.value != 0:
        raise ValueError("compose_last needs a nilpotent substitution")
    dst = w.sp
    parts = _last_split(J.sp, dst)
    top = min(J.sp.d, dst.d)
    coeffs = []
    for p in range(top + 1):
        c = [mpfr(0)] * len(dst)
        for i, k in parts[p]:
            c[k] = J.c[i]
        coeffs.append(Jet(dst, c))
    r = coeffs[top]
    for p in range(top - 1, -1, -1):
        r = r * w + coeffs[p]
    return r


def jets_from_point(point, sp: JetSpace) -> list[Jet]:
    """Coerce a mixed list of numbers / jets into jets of ``sp``."""
    return [p.embed(sp) if isinstance(p, Jet) else Jet.const(sp, p) for p in point]

