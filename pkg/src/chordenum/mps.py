"""Sparse multivariate truncated power series over exact rationals.

A :class:`Series` in ``t`` variables ``x_1..x_t`` keeps every term whose
``x_1`` exponent is at most ``N``; the other exponents are unbounded.
Internally the terms are grouped in *slices* by ``e_1``.  Inside a slice the
remaining exponent vector ``(e_2, .., e_t)`` is packed into a single Python
integer (fixed-width bit fields), so adding exponent vectors is plain integer
addition.  Coefficients are :class:`gmpy2.mpq`.
"""
from __future__ import annotations

import json
from collections.abc import Iterable, Mapping
from fractions import Fraction
from typing import Union

from gmpy2 import mpq

Rational = Union[int, Fraction, "mpq"]

BITS = 24
_MASK = (1 << BITS) - 1

__all__ = [
    "Series",
    "SeriesError",
    "monomial",
    "add",
    "mul",
    "mono_div",
    "diff",
    "anti_diff",
    "exp_series",
    "subst_scaled",
    "coeff_at_ones",
    "to_json",
    "from_json",
]


class SeriesError(ValueError):
    """Raised on contract violations of the series operations."""


def as_mpq(value: Rational) -> mpq:
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    return mpq(value)


def _pack(rest: Iterable[int]) -> int:
    key = 0
    for pos, e in enumerate(rest):
        if e < 0:
            raise SeriesError(f"negative exponent {e}")
        if e > _MASK:
            raise SeriesError(f"exponent {e} exceeds packing width")
        key |= e << (BITS * pos)
    return key


def _unpack(key: int, width: int) -> tuple[int, ...]:
    return tuple((key >> (BITS * pos)) & _MASK for pos in range(width))


def _exponent(key: int, j: int) -> int:
    # j is the 1-based variable index, j >= 2
    return (key >> (BITS * (j - 2))) & _MASK


def _unit(j: int) -> int:
    return 1 << (BITS * (j - 2))


def _poly_mul_into(out: dict, a: dict, b: dict, scale=None) -> None:
    """``out += a * b`` (times ``scale``) for packed-key polynomials."""
    if len(a) > len(b):
        a, b = b, a
    get = out.get
    for ka, va in a.items():
        if scale is not None:
            va = va * scale
        for kb, vb in b.items():
            k = ka + kb
            out[k] = get(k, 0) + va * vb


def _clean(d: dict) -> dict:
    return {k: v for k, v in d.items() if v}


class Series:
    """Immutable truncated exponential-type power series.

    ``Series(t, N, terms)`` builds a series from a mapping of exponent tuples
    (length ``t``) to rational coefficients; terms with ``e_1 > N`` and zero
    coefficients are dropped.
    """

    __slots__ = ("t", "N", "_slices")

    def __init__(self, t: int, N: int, terms: Mapping[tuple[int, ...], Rational] | None = None):
        if t < 1:
            raise SeriesError("a series needs at least one variable")
        if N < 0:
            raise SeriesError("truncation bound must be non-negative")
        slices: list[dict] = [dict() for _ in range(N + 1)]
        for e, c in (terms or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != t:
                raise SeriesError(f"exponent vector {e} has length {len(e)}, expected {t}")
            if min(e) < 0:
                raise SeriesError(f"negative exponent in {e}")
            c = as_mpq(c)
            if not c or e[0] > N:
                continue
            key = _pack(e[1:])
            s = slices[e[0]]
            s[key] = s.get(key, 0) + c
        self.t = t
        self.N = N
        self._slices = tuple(_clean(s) for s in slices)

    @classmethod
    def _raw(cls, t: int, N: int, slices: Iterable[dict]) -> "Series":
        obj = object.__new__(cls)
        obj.t = t
        obj.N = N
        sl = [_clean(s) for s in slices]
        if len(sl) < N + 1:
            sl.extend({} for _ in range(N + 1 - len(sl)))
        obj._slices = tuple(sl[: N + 1])
        return obj

    @classmethod
    def zero(cls, t: int, N: int) -> "Series":
        return cls._raw(t, N, [])

    @classmethod
    def one(cls, t: int, N: int) -> "Series":
        return cls._raw(t, N, [{0: mpq(1)}])

    # -- inspection -------------------------------------------------------
    def slice(self, n: int) -> dict[tuple[int, ...], mpq]:
        """Terms with ``e_1 == n`` as ``{(e_2, .., e_t): coeff}``."""
        return {_unpack(k, self.t - 1): v for k, v in self._slices[n].items()}

    @property
    def terms(self) -> dict[tuple[int, ...], mpq]:
        out = {}
        for n, s in enumerate(self._slices):
            for k, v in s.items():
                out[(n,) + _unpack(k, self.t - 1)] = v
        return out

    def __len__(self) -> int:
        return sum(len(s) for s in self._slices)

    def is_zero(self) -> bool:
        return not any(self._slices)

    def min_e1(self) -> int | None:
        for n, s in enumerate(self._slices):
            if s:
                return n
        return None

    def max_e1(self) -> int | None:
        for n in range(self.N, -1, -1):
            if self._slices[n]:
                return n
        return None

    def constant_term(self) -> mpq:
        return self._slices[0].get(0, mpq(0))

    def coeff(self, e: tuple[int, ...]) -> mpq:
        if len(e) != self.t:
            raise SeriesError("exponent length mismatch")
        if e[0] > self.N:
            return mpq(0)
        return self._slices[e[0]].get(_pack(e[1:]), mpq(0))

    def truncated(self, n: int) -> "Series":
        """Same bound ``N``, with every term of ``e_1 > n`` removed."""
        return Series._raw(self.t, self.N, self._slices[: max(n, -1) + 1])

    def with_bound(self, N: int) -> "Series":
        """Re-truncate to a different bound (smaller bounds drop terms)."""
        return Series._raw(self.t, N, self._slices[: N + 1])

    # -- arithmetic sugar -------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Series):
            return add(self, other)
        return add(self, monomial(other, (0,) * self.t, self.t, self.N))

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        if isinstance(other, Series):
            return add(self, other.scale(-1))
        return self + (-as_mpq(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Series):
            return mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, c: Rational) -> "Series":
        c = as_mpq(c)
        return Series._raw(self.t, self.N, ({k: v * c for k, v in s.items()} for s in self._slices))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Series):
            return NotImplemented
        return self.t == other.t and self.N == other.N and self._slices == other._slices

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        shown = []
        for e, c in sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]))[:6]:
            mono = "*".join(f"x{j + 1}^{p}" for j, p in enumerate(e) if p) or "1"
            shown.append(f"{c}*{mono}")
        more = "" if len(self) <= 6 else f" + ... ({len(self)} terms)"
        return f"Series(t={self.t}, N={self.N}: {' + '.join(shown) or '0'}{more})"


def _check_compatible(a: Series, b: Series) -> None:
    if a.t != b.t:
        raise SeriesError(f"variable count mismatch: {a.t} vs {b.t}")
    if a.N != b.N:
        raise SeriesError(f"truncation mismatch: {a.N} vs {b.N}")


def _check_var(a: Series, j: int) -> None:
    if not 1 <= j <= a.t:
        raise SeriesError(f"variable index {j} outside 1..{a.t}")


def monomial(coeff: Rational, e: tuple[int, ...], t: int, N: int) -> Series:
    return Series(t, N, {tuple(e): coeff})


def add(a: Series, b: Series) -> Series:
    _check_compatible(a, b)
    out = []
    for sa, sb in zip(a._slices, b._slices):
        d = dict(sa)
        for k, v in sb.items():
            d[k] = d.get(k, 0) + v
        out.append(d)
    return Series._raw(a.t, a.N, out)


def _mul_slices(sa, sb, bound: int) -> list[dict]:
    out: list[dict] = [dict() for _ in range(bound + 1)]
    nz_b = [(j, s) for j, s in enumerate(sb) if s]
    for i, ai in enumerate(sa):
        if not ai or i > bound:
            continue
        for j, bj in nz_b:
            if i + j > bound:
                break
            _poly_mul_into(out[i + j], ai, bj)
    return out


def mul(a: Series, b: Series, bound: int | None = None) -> Series:
    """Exact product, truncated at ``e_1 <= N`` (or the tighter ``bound``)."""
    _check_compatible(a, b)
    n = a.N if bound is None else min(bound, a.N)
    return Series._raw(a.t, a.N, _mul_slices(a._slices, b._slices, n))


def mono_div(a: Series, e: tuple[int, ...]) -> Series:
    """Divide by the monomial ``x^e``; every term must be divisible."""
    if len(e) != a.t:
        raise SeriesError("exponent length mismatch")
    e1 = e[0]
    rest = [(j, p) for j, p in enumerate(e[1:], start=2) if p]
    shift = _pack(e[1:])
    out = []
    for n, s in enumerate(a._slices):
        if not s:
            continue
        if n < e1:
            raise SeriesError(f"term with e_1={n} not divisible by x_1^{e1}")
        for k in s:
            for j, p in rest:
                if _exponent(k, j) < p:
                    raise SeriesError(f"term {(n,) + _unpack(k, a.t - 1)} not divisible by x^{tuple(e)}")
        while len(out) < n - e1:
            out.append({})
        out.append({k - shift: v for k, v in s.items()})
    return Series._raw(a.t, a.N, out)


def mono_mul(a: Series, e: tuple[int, ...], coeff: Rational = 1) -> Series:
    """Multiply by ``coeff * x^e`` (a shift of exponents, truncated)."""
    if len(e) != a.t:
        raise SeriesError("exponent length mismatch")
    c = as_mpq(coeff)
    shift = _pack(e[1:])
    out = [dict() for _ in range(e[0])]
    out.extend({k + shift: v * c for k, v in s.items()} for s in a._slices)
    return Series._raw(a.t, a.N, out)


def diff(a: Series, j: int) -> Series:
    """Formal partial derivative in ``x_j``."""
    _check_var(a, j)
    if j == 1:
        out = [{k: v * n for k, v in s.items()} for n, s in enumerate(a._slices)][1:]
        return Series._raw(a.t, a.N, out)
    u = _unit(j)
    out = []
    for s in a._slices:
        d = {}
        for k, v in s.items():
            p = _exponent(k, j)
            if p:
                d[k - u] = v * p
        out.append(d)
    return Series._raw(a.t, a.N, out)


def anti_diff(a: Series, j: int) -> Series:
    """Formal antiderivative in ``x_j`` with zero integration constant.

    For ``j == 1`` the terms with ``e_1 == N`` are dropped.
    """
    _check_var(a, j)
    if j == 1:
        out = [{}]
        out.extend({k: v / (n + 1) for k, v in s.items()} for n, s in enumerate(a._slices[: a.N]))
        return Series._raw(a.t, a.N, out)
    u = _unit(j)
    out = []
    for s in a._slices:
        out.append({k + u: v / (_exponent(k, j) + 1) for k, v in s.items()})
    return Series._raw(a.t, a.N, out)


def _exp_slices(sa, bound: int) -> list[dict]:
    # B = exp(A) with A_0 = 0:  n B_n = sum_{m=1}^n m A_m B_{n-m}
    out = [{0: mpq(1)}]
    for n in range(1, bound + 1):
        d: dict = {}
        for m in range(1, n + 1):
            am = sa[m]
            if am and out[n - m]:
                _poly_mul_into(d, am, out[n - m], scale=mpq(m, n))
        out.append(_clean(d))
    return out


def exp_series(a: Series) -> Series:
    """``exp(a)`` for a series without ``e_1 = 0`` terms."""
    if a.constant_term():
        raise SeriesError("exp_series needs a zero constant term")
    if a._slices[0]:
        raise SeriesError("exp_series needs every term to have e_1 >= 1")
    return Series._raw(a.t, a.N, _exp_slices(a._slices, a.N))


def subst_scaled(a: Series, j: int, g: Series) -> Series:
    """Substitute ``x_j -> x_j * g`` where ``g`` has constant term 1."""
    _check_compatible(a, g)
    _check_var(a, j)
    if g.constant_term() != 1:
        raise SeriesError("substitution factor must have constant term 1")
    # group a by the exponent of x_j; each group is multiplied by g^m
    groups: dict[int, list[dict]] = {}
    for n, s in enumerate(a._slices):
        for k, v in s.items():
            m = n if j == 1 else _exponent(k, j)
            groups.setdefault(m, [dict() for _ in range(a.N + 1)])[n][k] = v
    if not groups:
        return Series.zero(a.t, a.N)
    order = sorted(groups)
    # power m is only needed up to N - (smallest e_1 among groups m' >= m)
    need = {}
    lowest = a.N + 1
    for m in reversed(order):
        lo = next(n for n, s in enumerate(groups[m]) if s)
        lowest = min(lowest, lo)
        need[m] = a.N - lowest
    out: list[dict] = [dict() for _ in range(a.N + 1)]
    power: list[dict] = [{0: mpq(1)}]
    have = 0
    for m in order:
        while have < m:
            power = _mul_slices(power, g._slices, need[m])
            have += 1
        part = _mul_slices(groups[m], power, a.N)
        for n, s in enumerate(part):
            if s:
                d = out[n]
                for k, v in s.items():
                    d[k] = d.get(k, 0) + v
    return Series._raw(a.t, a.N, out)


def coeff_at_ones(a: Series, n: int) -> mpq:
    """``[x_1^n] a(x_1, 1, .., 1)``."""
    if n > a.N or n < 0:
        raise SeriesError(f"n={n} outside 0..{a.N}")
    return sum(a._slices[n].values(), mpq(0))


def graded_lex_key(e: tuple[int, ...]):
    return (sum(e), e)


def to_json(a: Series) -> dict:
    terms = sorted(a.terms.items(), key=lambda kv: graded_lex_key(kv[0]))
    return {
        "t": a.t,
        "N": a.N,
        "terms": [
            {"e": list(e), "num": str(c.numerator), "den": str(c.denominator)} for e, c in terms
        ],
    }


def from_json(data: Mapping | str) -> Series:
    if isinstance(data, str):
        data = json.loads(data)
    terms = {}
    for item in data["terms"]:
        terms[tuple(item["e"])] = mpq(int(item["num"]), int(item["den"]))
    return Series(int(data["t"]), int(data["N"]), terms)
