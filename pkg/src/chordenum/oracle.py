"""Brute-force ground truth on small labelled graphs.

Graphs are stored as adjacency bitmasks over the vertex set ``{0, .., n-1}``.
Everything here is deliberately naive (subset enumeration, simplicial
elimination) so it stays independent of the generating-function machinery.
"""
from __future__ import annotations

import itertools
import logging
import math
import warnings
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from multiprocessing import Pool

log = logging.getLogger(__name__)

DEFAULT_CAP = 8


class OracleError(ValueError):
    """Precondition violation in the oracle (bad input or size over the cap)."""


@dataclass(frozen=True)
class LabelledGraph:
    n: int
    adj: tuple[int, ...]

    def __post_init__(self):
        if len(self.adj) != self.n:
            raise OracleError("adjacency length must equal n")
        full = (1 << self.n) - 1
        for v, row in enumerate(self.adj):
            if row & (1 << v):
                raise OracleError(f"loop at vertex {v}")
            if row & ~full:
                raise OracleError(f"vertex {v} has a neighbour outside [n]")
            for u in _bits(row):
                if not self.adj[u] >> v & 1:
                    raise OracleError(f"asymmetric edge {v}-{u}")

    @classmethod
    def from_edges(cls, n: int, edges) -> "LabelledGraph":
        adj = [0] * n
        for u, v in edges:
            if u == v:
                raise OracleError("loops are not allowed")
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return cls(n, tuple(adj))

    @classmethod
    def from_mask(cls, n: int, mask: int) -> "LabelledGraph":
        """Edge set given as a bitmask over :func:`edge_order` (n)."""
        return cls.from_edges(n, (e for i, e in enumerate(edge_order(n)) if mask >> i & 1))

    @classmethod
    def complete(cls, n: int) -> "LabelledGraph":
        return cls.from_edges(n, itertools.combinations(range(n), 2))

    @classmethod
    def path(cls, n: int) -> "LabelledGraph":
        return cls.from_edges(n, ((i, i + 1) for i in range(n - 1)))

    @classmethod
    def cycle(cls, n: int) -> "LabelledGraph":
        return cls.from_edges(n, [(i, (i + 1) % n) for i in range(n)])

    @property
    def vertices(self) -> int:
        return (1 << self.n) - 1

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in _bits(self.adj[u]) if u < v]

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def induced(self, vertices) -> "LabelledGraph":
        """Induced subgraph relabelled to ``0..m-1`` in increasing label order."""
        vs = sorted(_as_set(vertices))
        pos = {v: i for i, v in enumerate(vs)}
        return LabelledGraph.from_edges(
            len(vs), ((pos[u], pos[v]) for u, v in self.edges() if u in pos and v in pos)
        )


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _mask(vertices) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def _as_set(vertices) -> frozenset[int]:
    if isinstance(vertices, int):
        return frozenset(_bits(vertices))
    return frozenset(vertices)


@lru_cache(maxsize=None)
def edge_order(n: int) -> tuple[tuple[int, int], ...]:
    """Edges of ``K_n`` ordered by their larger endpoint, then the smaller.

    Bit ``i`` of an edge mask is edge ``edge_order(n)[i]``; the edges of the
    first ``n-1`` vertices form a prefix, so masks extend cleanly.
    """
    return tuple((u, v) for v in range(n) for u in range(v))


# -- elementary predicates ---------------------------------------------------

def _components(adj, alive: int) -> list[int]:
    comps = []
    while alive:
        seed = alive & -alive
        comp = frontier = seed
        while frontier:
            reach = 0
            for v in _bits(frontier):
                reach |= adj[v]
            reach &= alive & ~comp
            comp |= reach
            frontier = reach
        comps.append(comp)
        alive &= ~comp
    return comps


def _disconnected(adj, alive: int) -> bool:
    if not alive:
        return False
    seed = alive & -alive
    comp = frontier = seed
    while frontier:
        reach = 0
        for v in _bits(frontier):
            reach |= adj[v]
        reach &= alive & ~comp
        comp |= reach
        frontier = reach
    return comp != alive


def _elimination(adj, n: int) -> int:
    """Clique number via simplicial elimination, or -1 if not chordal."""
    alive = (1 << n) - 1
    omega = 0
    while alive:
        rest = alive
        while rest:
            b = rest & -rest
            rest ^= b
            v = b.bit_length() - 1
            nb = adj[v] & alive
            x = nb
            while x:
                c = x & -x
                x ^= c
                if nb & ~adj[c.bit_length() - 1] & ~c:
                    break
            else:
                break
        else:
            return -1
        size = bin(nb).count("1") + 1
        if size > omega:
            omega = size
        alive ^= b
    return omega


def is_chordal(g: LabelledGraph) -> bool:
    """True iff repeatedly deleting simplicial vertices empties the graph."""
    return _elimination(g.adj, g.n) >= 0


def treewidth_chordal(g: LabelledGraph) -> int:
    omega = _elimination(g.adj, g.n)
    if omega < 0:
        raise OracleError("treewidth_chordal called on a non-chordal graph")
    return omega - 1


def separates(g: LabelledGraph, S) -> bool:
    """True iff deleting ``S`` leaves at least two components."""
    return _disconnected(g.adj, g.vertices & ~_mask(_as_set(S)))


@lru_cache(maxsize=None)
def _subsets_by_size(n: int) -> tuple[tuple[int, ...], ...]:
    return tuple(
        tuple(_mask(c) for c in itertools.combinations(range(n), s)) for s in range(n + 1)
    )


def _min_separator_size(adj, n: int, limit: int | None = None) -> int | None:
    """Smallest separator size (``None`` if there is none below ``limit``)."""
    full = (1 << n) - 1
    top = n - 1 if limit is None else min(limit, n - 1)
    subsets = _subsets_by_size(n)
    for s in range(0, top):
        for S in subsets[s]:
            if _disconnected(adj, full & ~S):
                return s
    return None


def is_k_connected(g: LabelledGraph, k: int) -> bool:
    """At least ``k`` vertices and no separator with fewer than ``k`` vertices."""
    if g.n < k:
        return False
    if g.n == 0:
        return True
    return _min_separator_size(g.adj, g.n, k) is None


def connectivity(g: LabelledGraph) -> int:
    """Largest ``k`` with :func:`is_k_connected` true."""
    s = _min_separator_size(g.adj, g.n)
    return g.n if s is None else min(s, g.n)


def count_cliques(g: LabelledGraph, i: int) -> int:
    if i < 0:
        raise OracleError("clique size must be non-negative")
    return len(cliques(g, i))


def cliques(g: LabelledGraph, i: int) -> list[frozenset[int]]:
    out = []

    def grow(chosen, cand, need):
        if need == 0:
            out.append(frozenset(chosen))
            return
        for v in _bits(cand):
            grow(chosen + [v], cand & g.adj[v] & ~((2 << v) - 1), need - 1)

    grow([], g.vertices, i)
    return out


# -- census --------------------------------------------------------------------

def _census_chunk(args) -> Counter:
    n, high_lo, high_hi = args
    low_edges = math.comb(n - 1, 2)
    low_adj = _low_adjacencies(n - 1)
    tally: Counter = Counter()
    last = n - 1
    for high in range(high_lo, high_hi):
        # ``high`` is the neighbourhood of the last vertex
        for low_mask in range(1 << low_edges):
            adj = list(low_adj[low_mask])
            adj.append(high)
            for v in _bits(high):
                adj[v] |= 1 << last
            omega = _elimination(adj, n)
            if omega < 0:
                continue
            s = _min_separator_size(adj, n)
            conn = n if s is None else min(s, n)
            tally[omega, conn] += 1
    return tally


@lru_cache(maxsize=4)
def _low_adjacencies(m: int) -> tuple[tuple[int, ...], ...]:
    order = edge_order(m)
    out = []
    for mask in range(1 << len(order)):
        adj = [0] * m
        i = 0
        x = mask
        while x:
            if x & 1:
                u, v = order[i]
                adj[u] |= 1 << v
                adj[v] |= 1 << u
            x >>= 1
            i += 1
        out.append(tuple(adj))
    return tuple(out)


_CENSUS: dict[int, Counter] = {}


def census(n: int, workers: int = 1, cap: int = DEFAULT_CAP) -> Counter:
    """Tally of all chordal graphs on ``[n]`` by (clique number, connectivity).

    Every edge mask of ``K_n`` is visited; the mask range is split by the
    neighbourhood of the last vertex so chunks can run in separate processes.
    """
    if n > cap:
        raise OracleError(f"n={n} exceeds the oracle cap {cap}")
    if n > DEFAULT_CAP:
        warnings.warn(f"brute force over 2^{math.comb(n, 2)} graphs", RuntimeWarning, stacklevel=2)
    if n in _CENSUS:
        return _CENSUS[n]
    if n == 0:
        result = Counter({(0, 0): 1})
    elif n == 1:
        result = Counter({(1, 1): 1})
    else:
        highs = 1 << (n - 1)
        step = max(1, highs // max(1, workers * 4))
        jobs = [(n, lo, min(highs, lo + step)) for lo in range(0, highs, step)]
        if workers > 1:
            with Pool(workers) as pool:
                parts = pool.map(_census_chunk, jobs)
        else:
            parts = [_census_chunk(j) for j in jobs]
        result = Counter()
        for p in parts:
            result.update(p)
    log.debug("census n=%d: %d chordal graphs", n, sum(result.values()))
    _CENSUS[n] = result
    return result


def enumerate_count(t: int, k: int, n: int, workers: int = 1, cap: int = DEFAULT_CAP) -> int:
    """Number of chordal, tree-width ``<= t``, k-connected graphs on ``[n]``."""
    if n < 0 or k < 0 or t < 0:
        raise OracleError("t, k, n must be non-negative")
    tally = census(n, workers=workers, cap=cap)
    return sum(c for (omega, conn), c in tally.items() if omega <= t + 1 and conn >= k)


# -- decomposition -------------------------------------------------------------

@dataclass(frozen=True)
class SliceDecomposition:
    separator: frozenset[int]
    slices: tuple[frozenset[int], ...]


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def minimal_separators(g: LabelledGraph) -> list[frozenset[int]]:
    """Sets ``S`` such that ``g - S`` has two components fully adjacent to ``S``."""
    out = []
    full = g.vertices
    for s in range(g.n - 1):
        for S in _subsets_by_size(g.n)[s]:
            comps = _components(g.adj, full & ~S)
            if len(comps) < 2:
                continue
            fulls = 0
            for C in comps:
                reach = 0
                for v in _bits(C):
                    reach |= g.adj[v]
                if reach & S == S:
                    fulls += 1
            if fulls >= 2:
                out.append(_as_set(S))
    return out


def is_clique(g: LabelledGraph, vertices) -> bool:
    vs = list(_as_set(vertices))
    return all(g.has_edge(u, v) for u, v in itertools.combinations(vs, 2))


def slices(g: LabelledGraph, S, within=None) -> SliceDecomposition:
    """Cut ``g[within]`` through ``S``: one slice per component of ``g[within] - S``."""
    alive = g.vertices if within is None else _mask(_as_set(within))
    Sm = _mask(_as_set(S))
    comps = _components(g.adj, alive & ~Sm)
    return SliceDecomposition(_as_set(Sm), tuple(_as_set(C | Sm) for C in comps))


def _k_separators(g: LabelledGraph, piece: int, k: int) -> list[int]:
    members = list(_bits(piece))
    out = []
    for combo in itertools.combinations(members, k):
        S = _mask(combo)
        if _disconnected(g.adj, piece & ~S):
            out.append(S)
    return out


def _require(g: LabelledGraph, k: int) -> None:
    if not is_chordal(g):
        raise OracleError("decomposition needs a chordal graph")
    if not is_k_connected(g, k):
        raise OracleError(f"decomposition needs a {k}-connected graph")


def decompose(g: LabelledGraph, k: int, order: str = "first") -> list[frozenset[int]]:
    """Vertex sets of the (k+1)-connected components of a k-connected chordal graph.

    Pieces are cut through one of their k-separators until none is left;
    ``order`` picks the first or last separator in lexicographic order, which
    must not change the result.
    """
    _require(g, k)
    if order not in ("first", "last"):
        raise OracleError("order must be 'first' or 'last'")
    done = []
    todo = [g.vertices]
    while todo:
        piece = todo.pop()
        seps = _k_separators(g, piece, k)
        if not seps:
            done.append(_as_set(piece))
            continue
        S = seps[0] if order == "first" else seps[-1]
        todo.extend(_mask(sl) for sl in slices(g, S, within=piece).slices)
    return sorted(done, key=lambda s: sorted(s))


def validate_decomposition(g: LabelledGraph, k: int) -> Verdict:
    """Check the structural facts behind the cut-into-components recursion."""
    _require(g, k)
    for S in minimal_separators(g):
        if not is_clique(g, S):
            return Verdict(False, f"minimal separator {sorted(S)} is not a clique")
    for S in _k_separators(g, g.vertices, k):
        for sl in slices(g, S).slices:
            if not is_k_connected(g.induced(sl), k):
                return Verdict(False, f"slice {sorted(sl)} of separator {sorted(_as_set(S))} is not {k}-connected")
    parts = decompose(g, k)
    if decompose(g, k, order="last") != parts:
        return Verdict(False, "decomposition depends on the cut order")
    covered = frozenset().union(*parts) if parts else frozenset()
    if covered != _as_set(g.vertices):
        return Verdict(False, "components do not cover the vertex set")
    glued = set()
    for p in parts:
        sub = g.induced(p)
        # a lone K_k is k-connected by convention but can never be (k+1)-connected
        if len(p) > k and not is_k_connected(sub, k + 1):
            return Verdict(False, f"component {sorted(p)} is not {k + 1}-connected")
        glued.update((u, v) for u, v in g.edges() if u in p and v in p)
    if glued != set(g.edges()):
        return Verdict(False, "gluing the components does not give back the edge set")
    return Verdict(True)


def clique_bookkeeping(g: LabelledGraph, k: int, parts: list[frozenset[int]] | None = None) -> bool:
    """Cliques of ``g`` versus cliques of its (k+1)-connected components.

    Cliques with more than ``k`` vertices lie in exactly one component; the
    smaller ones are shared and must be counted once per distinct clique.
    """
    if parts is None:
        parts = decompose(g, k)
    for i in range(1, g.n + 1):
        whole = set(cliques(g, i))
        per_part = Counter()
        for p in parts:
            per_part.update(c for c in whole if c <= p)
        if set(per_part) != whole:
            return False
        if i > k and any(m != 1 for m in per_part.values()):
            return False
    return True
