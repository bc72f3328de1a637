"""Labeled rooted trees, the Penrose partition scheme and tree concatenation.

Trees are rooted at vertex ``0``.  Non-root labels are positive integers; the
canonical family ``T0[n]`` uses labels ``1..n`` but sub-trees produced while
splitting keep whatever labels they inherited.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .errors import InvalidDegreeSequence, InvalidTree, LabelCollision, TooLarge

__all__ = [
    "RootedTree",
    "LabeledGraph",
    "SplitClass",
    "N_MAX",
    "enumerate_rooted_trees",
    "trees_from_parent_maps",
    "trees_from_pruefer",
    "penrose_graph",
    "connected_graphs",
    "verify_partition_scheme",
    "truncated_weight_direct",
    "truncated_weight_scheme",
    "j_max",
    "penrose_concatenate",
    "splittings",
    "count_splittings",
    "count_splittings_bruteforce",
    "split_class",
    "classify_splittable",
    "cayley_degree_count",
]

N_MAX = 7

Edge = tuple[int, int]


def _edge(i: int, j: int) -> Edge:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class RootedTree:
    """A tree rooted at ``0`` stored as sorted ``(vertex, parent)`` pairs."""

    parent_pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        pairs = tuple(sorted(self.parent_pairs))
        object.__setattr__(self, "parent_pairs", pairs)
        parent = dict(pairs)
        if len(parent) != len(pairs) or 0 in parent:
            raise InvalidTree("each non-root vertex needs exactly one parent")
        for v, p in pairs:
            if p != 0 and p not in parent:
                raise InvalidTree(f"parent {p} of {v} is not a vertex")
        for v in parent:
            seen = 0
            while v != 0:
                v = parent[v]
                seen += 1
                if seen > len(parent):
                    raise InvalidTree("parent map contains a cycle")

    @classmethod
    def from_parent(cls, parent: Mapping[int, int]) -> "RootedTree":
        return cls(tuple(parent.items()))

    @classmethod
    def from_edges(cls, edges: Iterable[Edge], root: int = 0) -> "RootedTree":
        """Orient an undirected edge list away from ``root`` (relabelled ``0``)."""
        adj: dict[int, list[int]] = {}
        edges = list(edges)
        for i, j in edges:
            adj.setdefault(i, []).append(j)
            adj.setdefault(j, []).append(i)
        parent: dict[int, int] = {}
        stack = [root]
        seen = {root}
        while stack:
            u = stack.pop()
            for v in adj.get(u, ()):
                if v not in seen:
                    seen.add(v)
                    parent[v] = 0 if u == root else u
                    stack.append(v)
        if len(parent) != len(edges):
            raise InvalidTree("edges do not form a tree containing the root")
        return cls.from_parent(parent)

    @cached_property
    def parent(self) -> dict[int, int]:
        return dict(self.parent_pairs)

    @property
    def n(self) -> int:
        return len(self.parent_pairs)

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(v for v, _ in self.parent_pairs)

    @cached_property
    def children(self) -> dict[int, tuple[int, ...]]:
        ch: dict[int, list[int]] = {0: []}
        for v in self.labels:
            ch.setdefault(v, [])
        for v, p in self.parent_pairs:
            ch[p].append(v)
        return {v: tuple(c) for v, c in ch.items()}

    @cached_property
    def depth(self) -> dict[int, int]:
        d = {0: 0}
        stack = [0]
        while stack:
            u = stack.pop()
            for c in self.children[u]:
                d[c] = d[u] + 1
                stack.append(c)
        return d

    @cached_property
    def edges(self) -> frozenset[Edge]:
        return frozenset(_edge(v, p) for v, p in self.parent_pairs)

    def sibling_count(self, v: int) -> int:
        """Number of children ``s_v``."""
        return len(self.children[v])

    def degree(self, v: int) -> int:
        return self.sibling_count(v) + (v != 0)

    def descendants(self, v: int) -> list[int]:
        out: list[int] = []
        stack = list(self.children[v])
        while stack:
            u = stack.pop()
            out.append(u)
            stack.extend(self.children[u])
        return out

    def relabel(self, mapping: Mapping[int, int]) -> "RootedTree":
        """Rename non-root labels; unmapped labels are kept."""
        m = dict(mapping)
        m.setdefault(0, 0)
        return RootedTree(tuple((m.get(v, v), m.get(p, p)) for v, p in self.parent_pairs))


@dataclass(frozen=True)
class LabeledGraph:
    """Simple undirected graph on ``{0..n}``."""

    n: int
    edges: frozenset[Edge]

    def __post_init__(self):
        es = frozenset(_edge(*e) for e in self.edges)
        for i, j in es:
            if i == j:
                raise ValueError("self-loops are not allowed")
            if not (0 <= i <= self.n and 0 <= j <= self.n):
                raise ValueError(f"edge {(i, j)} out of range")
        object.__setattr__(self, "edges", es)

    def __le__(self, other: "LabeledGraph") -> bool:
        return self.edges <= other.edges


@dataclass(frozen=True)
class SplitClass:
    tree: RootedTree
    ell: int


# enumeration ---------------------------------------------------------------


def _check_n(n: int, n_max: int) -> None:
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > n_max:
        raise TooLarge(f"n={n} exceeds the enumeration limit {n_max}")


def trees_from_parent_maps(n: int) -> list[RootedTree]:
    """All trees of ``T0[n]`` by filtering every parent map for acyclicity."""
    out = []
    for par in itertools.product(range(n + 1), repeat=n):
        ok = True
        for start in range(1, n + 1):
            v, steps = start, 0
            while v != 0 and steps <= n:
                v = par[v - 1]
                steps += 1
            if v != 0:
                ok = False
                break
        if ok:
            out.append(RootedTree(tuple((i + 1, par[i]) for i in range(n))))
    return out


def _pruefer_decode(seq: Sequence[int], n_vertices: int) -> list[Edge]:
    degree = [1] * n_vertices
    for x in seq:
        degree[x] += 1
    edges = []
    for x in seq:
        for leaf in range(n_vertices):
            if degree[leaf] == 1:
                edges.append((leaf, x))
                degree[leaf] -= 1
                degree[x] -= 1
                break
    u, v = (i for i in range(n_vertices) if degree[i] == 1)
    edges.append((u, v))
    return edges


def trees_from_pruefer(n: int) -> list[RootedTree]:
    """All trees of ``T0[n]`` decoded from Pruefer sequences over ``{0..n}``."""
    if n == 1:
        return [RootedTree(((1, 0),))]
    return [
        RootedTree.from_edges(_pruefer_decode(seq, n + 1))
        for seq in itertools.product(range(n + 1), repeat=n - 1)
    ]


def enumerate_rooted_trees(n: int, n_max: int = N_MAX) -> list[RootedTree]:
    """Every labeled tree on ``{0..n}`` rooted at 0; there are ``(n+1)**(n-1)``."""
    _check_n(n, n_max)
    if n <= 5:
        return trees_from_parent_maps(n)
    return trees_from_pruefer(n)


# Penrose scheme --------------------------------------------------------------


def penrose_graph(t: RootedTree) -> LabeledGraph:
    """``R_Pen(t)``: add same-generation edges and edges to lower-index uncles."""
    d = t.depth
    par = t.parent
    vertices = (0,) + t.labels
    extra = set()
    for i, j in itertools.combinations(vertices, 2):
        e = _edge(i, j)
        if e in t.edges:
            continue
        if d[i] == d[j]:
            extra.add(e)
            continue
        # orient so that a sits one generation below b
        for a, b in ((i, j), (j, i)):
            if d[b] == d[a] - 1 and par[a] < b:
                extra.add(e)
    n = max(vertices)
    return LabeledGraph(n, t.edges | frozenset(extra))


def _connected(vertices: Sequence[int], edges: Iterable[Edge]) -> bool:
    adj: dict[int, list[int]] = {v: [] for v in vertices}
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    start = vertices[0]
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(vertices)


def connected_graphs(n: int) -> Iterator[frozenset[Edge]]:
    """Edge sets of the connected spanning graphs on ``{0..n}``."""
    vertices = list(range(n + 1))
    all_edges = list(itertools.combinations(vertices, 2))
    for mask in range(1 << len(all_edges)):
        es = [all_edges[b] for b in range(len(all_edges)) if mask >> b & 1]
        if len(es) >= n and _connected(vertices, es):
            yield frozenset(es)


def verify_partition_scheme(
    n: int, scheme: Callable[[RootedTree], LabeledGraph] = penrose_graph, n_max: int = 5
) -> bool:
    """Check that the intervals ``[t, scheme(t)]`` tile the connected graphs.

    Every connected graph on ``{0..n}`` has to be hit exactly once and the
    scheme graph must contain its tree.
    """
    _check_n(n, n_max)
    hits: Counter[frozenset[Edge]] = Counter()
    for t in enumerate_rooted_trees(n):
        big = scheme(t).edges
        if not t.edges <= big:
            return False
        extra = sorted(big - t.edges)
        for r in range(len(extra) + 1):
            for sub in itertools.combinations(extra, r):
                hits[t.edges | frozenset(sub)] += 1
    if any(c != 1 for c in hits.values()):
        return False
    return set(hits) == set(connected_graphs(n))


def _w(w, i: int, j: int):
    return w[i][j]


def truncated_weight_direct(n: int, w, n_max: int = 6):
    """Truncated weight as a sum over connected spanning graphs of ``K_n``.

    ``w`` is an ``n x n`` symmetric matrix indexed ``0..n-1``; each edge
    contributes ``w_ij - 1``.
    """
    _check_n(n, n_max)
    if n == 1:
        return 1
    vertices = list(range(n))
    all_edges = list(itertools.combinations(vertices, 2))
    total = 0
    for mask in range(1 << len(all_edges)):
        es = [all_edges[b] for b in range(len(all_edges)) if mask >> b & 1]
        if len(es) < n - 1 or not _connected(vertices, es):
            continue
        term = 1
        for i, j in es:
            term *= _w(w, i, j) - 1
        total += term
    return total


def truncated_weight_scheme(
    n: int, w, scheme: Callable[[RootedTree], LabeledGraph] = penrose_graph, n_max: int = 6
):
    """Truncated weight as a sum over trees with scheme edges weighted by ``w``."""
    _check_n(n, n_max)
    if n == 1:
        return 1
    total = 0
    for t in enumerate_rooted_trees(n - 1):
        term = 1
        for i, j in t.edges:
            term *= _w(w, i, j) - 1
        for i, j in scheme(t).edges - t.edges:
            term *= _w(w, i, j)
        total += term
    return total


# concatenation and splitting ----------------------------------------------


def j_max(t: RootedTree) -> int:
    """Largest label among the vertices farthest from the root."""
    if t.n == 0:
        raise InvalidTree("j_max of a tree without non-root vertices")
    d = t.depth
    deepest = max(d[v] for v in t.labels)
    return max(v for v in t.labels if d[v] == deepest)


def penrose_concatenate(ts: Sequence[RootedTree]) -> RootedTree:
    """Hang the root of each tree on ``j_max`` of the previous one."""
    if not ts:
        raise ValueError("need at least one tree")
    seen: set[int] = set()
    for t in ts:
        if t.n == 0:
            raise InvalidTree("concatenated trees need non-root vertices")
        if seen & set(t.labels):
            raise LabelCollision("label sets of concatenated trees overlap")
        seen |= set(t.labels)
    parent: dict[int, int] = {}
    anchor = 0
    for t in ts:
        for v, p in t.parent_pairs:
            parent[v] = anchor if p == 0 else p
        anchor = j_max(t)
    return RootedTree.from_parent(parent)


def _split_first(t: RootedTree) -> Iterator[tuple[RootedTree, RootedTree]]:
    """All ``(t1, rest)`` with ``penrose_concatenate([t1] + split(rest)) == t``.

    ``rest`` is the subtree hanging below the cut vertex ``j``, re-rooted at 0;
    ``j`` must be ``j_max`` of what remains.
    """
    par = t.parent
    for j in t.labels:
        if not t.children[j]:
            continue
        below = set(t.descendants(j))
        first = RootedTree(tuple((v, p) for v, p in t.parent_pairs if v not in below))
        if j_max(first) != j:
            continue
        rest = RootedTree(tuple((v, 0 if par[v] == j else par[v]) for v in below))
        yield first, rest


def splittings(t: RootedTree, k: int) -> Iterator[tuple[RootedTree, ...]]:
    """The ordered ``k``-splittings of ``t`` (trees rooted at 0)."""
    if k < 1:
        return
    if k == 1:
        yield (t,)
        return
    for first, rest in _split_first(t):
        for tail in splittings(rest, k - 1):
            yield (first,) + tail


def count_splittings(t: RootedTree, k: int, n_max: int = N_MAX) -> int:
    """``|Sp_k(t)|`` by peeling off the first component."""
    _check_n(max(t.n, 1), n_max)
    return sum(1 for _ in splittings(t, k))


def _set_partitions_ordered(labels: Sequence[int], k: int) -> Iterator[tuple[tuple[int, ...], ...]]:
    for assignment in itertools.product(range(k), repeat=len(labels)):
        blocks = [[] for _ in range(k)]
        for lab, b in zip(labels, assignment):
            blocks[b].append(lab)
        if all(blocks):
            yield tuple(tuple(b) for b in blocks)


def _trees_on(labels: Sequence[int]) -> list[RootedTree]:
    mapping = {i + 1: lab for i, lab in enumerate(labels)}
    return [t.relabel(mapping) for t in trees_from_parent_maps(len(labels))]


def count_splittings_bruteforce(t: RootedTree, k: int, n_max: int = 5) -> int:
    """``|Sp_k(t)|`` by concatenating every ordered family of trees."""
    _check_n(max(t.n, 1), n_max)
    count = 0
    for blocks in _set_partitions_ordered(t.labels, k):
        for family in itertools.product(*(_trees_on(b) for b in blocks)):
            if penrose_concatenate(family) == t:
                count += 1
    return count


def split_class(t: RootedTree) -> SplitClass:
    """Maximal splitting multiplicity of ``t``."""
    ell = 1
    frontier = [t]
    while True:
        nxt = list({rest for s in frontier for _, rest in _split_first(s)})
        if not nxt:
            return SplitClass(t, ell)
        ell += 1
        frontier = nxt


def classify_splittable(n: int, n_max: int = N_MAX) -> dict[int, int]:
    """Number of Penrose ``ell``-splittable trees in ``T0[n]`` for each ``ell``."""
    counts: Counter[int] = Counter(split_class(t).ell for t in enumerate_rooted_trees(n, n_max))
    return dict(sorted(counts.items()))


def cayley_degree_count(degrees: Sequence[int]) -> int:
    """Number of labeled trees with the given vertex degrees ``d_0..d_n``."""
    n = len(degrees) - 1
    if n < 1:
        raise InvalidDegreeSequence("need at least two vertices")
    if any(d < 1 for d in degrees) or sum(degrees) != 2 * n:
        raise InvalidDegreeSequence(f"degrees {tuple(degrees)} are not those of a tree on {n + 1} vertices")
    count = math.factorial(n - 1)
    for d in degrees:
        count //= math.factorial(d - 1)
    return count


def rational_weight_matrix(n: int, rng, denominator: int = 7) -> list[list[Fraction]]:
    """Random symmetric matrix of rationals in ``[-1, 1]`` with unit diagonal."""
    w = [[Fraction(1)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            w[i][j] = w[j][i] = Fraction(int(rng.integers(-denominator, denominator + 1)), denominator)
    return w
