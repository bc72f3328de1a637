"""Self-checks of the combinatorial and formal-series machinery.

Each check compares two independent computations (or a computation against
a closed-form count) and reports pass/fail.  The partition scheme is
injectable so that a deliberately broken rule can be shown to fail.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import series as fs
from . import trees as tr
from .potentials import VertexCoefficients
from .virial import (
    t_pen1_series,
    tree_sum_degrees,
    tree_sum_functional,
    virial_from_cluster_bell,
    virial_from_cluster_lagrange,
)

__all__ = ["Check", "run_verification", "naive_inverse", "bell_by_set_partitions", "set_partitions"]


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def as_dict(self) -> dict:
        return asdict(self)


def set_partitions(items: list[int]):
    """Unordered set partitions, generated by placing one element at a time."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]


def bell_by_set_partitions(n: int, k: int, b) -> Fraction:
    """``B_{n,k}`` as a sum over partitions of ``{1..n}`` into ``k`` blocks."""
    total = Fraction(0)
    for part in set_partitions(list(range(1, n + 1))):
        if len(part) == k:
            total += math.prod((Fraction(b[len(blk) - 1]) for blk in part), start=Fraction(1))
    return total


def naive_inverse(b: fs.Series) -> fs.Series:
    """Compositional inverse by solving ``c(b(X)) = X`` one coefficient at a time."""
    n = b.order
    powers = [fs.Series.one(n)]
    for _ in range(n):
        powers.append(fs.mul(powers[-1], b))
    c = [Fraction(0), 1 / b[1]]
    for m in range(2, n + 1):
        acc = sum((c[k] * powers[k][m] for k in range(1, m)), Fraction(0))
        c.append(-acc / b[1] ** m)
    return fs.Series(tuple(c[: n + 1]))


def _random_series(rng, order: int, c0=None, c1=None, den: int = 5) -> fs.Series:
    cs = [Fraction(int(rng.integers(-den, den + 1)), int(rng.integers(1, den + 1))) for _ in range(order + 1)]
    if c0 is not None:
        cs[0] = Fraction(c0)
    if c1 is not None:
        cs[1] = Fraction(c1)
    return fs.Series(tuple(cs))


def _faithful(t: tr.RootedTree, scheme) -> bool:
    """Added scheme edges of a concatenation are those of its pieces."""
    extra = scheme(t).edges - t.edges
    for k in range(2, t.n + 1):
        for pieces in tr.splittings(t, k):
            union: set = set()
            anchor = 0
            for piece in pieces:
                add = {tuple(sorted(anchor if v == 0 else v for v in e)) for e in scheme(piece).edges - piece.edges}
                if union & add:
                    return False
                union |= add
                anchor = tr.j_max(piece)
            if union != extra:
                return False
    return True


def tree_checks(n_max: int, scheme: Callable = tr.penrose_graph, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    out: list[Check] = []
    for n in range(1, min(n_max, 6) + 1):
        a = set(tr.trees_from_parent_maps(n)) if n <= 5 else None
        b = set(tr.trees_from_pruefer(n))
        ok = len(b) == (n + 1) ** (n - 1) and (a is None or a == b)
        out.append(Check(f"tree_count[n={n}]", ok, f"{len(b)} trees"))
    for n in range(1, min(n_max, 4) + 1):
        out.append(Check(f"partition_scheme[n={n}]", tr.verify_partition_scheme(n, scheme)))
    counts = {}
    for n in range(1, min(n_max, 6) + 1):
        counts[n] = tr.classify_splittable(n)
        got = counts[n].get(1, 0)
        out.append(Check(f"unsplittable_count[n={n}]", got == (n - 1) ** (n - 1), f"{got}"))
        out.append(Check(f"split_classes_total[n={n}]", sum(counts[n].values()) == (n + 1) ** (n - 1)))
    if counts:
        top = max(counts)
        t1 = fs.Series(tuple([Fraction(0)] + [Fraction(counts[n].get(1, 0), math.factorial(n)) for n in range(1, top + 1)]))
        ok = True
        for ell in range(1, top + 1):
            power = fs.pow_int(t1, ell)
            for n in range(1, top + 1):
                ok &= power[n] * math.factorial(n) == counts[n].get(ell, 0)
        out.append(Check("splittable_egf_law", ok))
    for n in range(2, min(n_max, 5) + 1):
        ok = all(
            tr.truncated_weight_direct(n, w) == tr.truncated_weight_scheme(n, w, scheme)
            for w in (tr.rational_weight_matrix(n, rng) for _ in range(5))
        )
        out.append(Check(f"truncated_weight_dual_path[n={n}]", ok))
    for n in range(2, min(n_max, 5) + 1):
        ok = all(_faithful(t, scheme) for t in tr.enumerate_rooted_trees(n))
        out.append(Check(f"concatenation_faithful[n={n}]", ok))
    for n in range(1, min(n_max, 5) + 1):
        by_degree: dict[tuple, int] = {}
        for t in tr.enumerate_rooted_trees(n):
            key = tuple(t.degree(v) for v in range(n + 1))
            by_degree[key] = by_degree.get(key, 0) + 1
        ok = all(tr.cayley_degree_count(k) == v for k, v in by_degree.items())
        out.append(Check(f"cayley_degree_count[n={n}]", ok))
    return out


def series_checks(seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    out: list[Check] = []
    ok = True
    for _ in range(5):
        b = _random_series(rng, 12, c0=0, c1=int(rng.integers(1, 4)))
        inv = fs.lagrange_inverse(b)
        x = fs.Series.x(12)
        ok &= fs.compose(inv, b) == x and fs.compose(b, inv) == x and inv == naive_inverse(b)
    out.append(Check("lagrange_inverse_round_trip", ok))
    ok = True
    for _ in range(5):
        a = _random_series(rng, 10)
        b = _random_series(rng, 10, c0=0)
        ok &= fs.compose(a, b) == fs.compose_bell(a, b)
    out.append(Check("composition_dual_path", ok))
    bvals = [Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 6))) for _ in range(8)]
    ok = all(
        fs.bell_exponential(n, k, bvals) == bell_by_set_partitions(n, k, bvals)
        for n in range(1, 9)
        for k in range(1, n + 1)
    )
    out.append(Check("bell_exponential_set_partitions", ok))
    rs = [Fraction(r) for r in range(-10, 11)] + [Fraction(int(rng.integers(-30, 31)), int(rng.integers(1, 9))) for _ in range(29)]
    ok = all(
        sum((fs.generalized_binomial(r, k + 1) * math.comb(m, k) for k in range(m + 1)), Fraction(0))
        == fs.generalized_binomial(m + r, m + 1)
        for r in rs
        for m in range(11)
    )
    out.append(Check("binomial_identity", ok))
    ok = True
    for _ in range(20):
        b = [Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 9))) for _ in range(5)]
        ok &= all(virial_from_cluster_bell(b, n) == virial_from_cluster_lagrange(b, n) for n in range(6))
    out.append(Check("virial_dual_path", ok))
    ok = True
    for _ in range(3):
        vals = {n: Fraction(int(rng.integers(0, 6)), int(rng.integers(1, 6))) for n in range(2, 9)}
        vc = VertexCoefficients.from_values(Fraction(1), vals)
        ok &= tree_sum_functional(vc, 8).coeffs == tree_sum_degrees(vc, 8).coeffs
    out.append(Check("tree_sum_dual_path", ok))
    unit = VertexCoefficients.from_values(Fraction(1), {n: Fraction(1) for n in range(1, 8)})
    t = t_pen1_series(tree_sum_functional(unit, 7))
    ok = all(t[n] * math.factorial(n) == (n - 1) ** (n - 1) for n in range(1, 8))
    out.append(Check("unsplittable_series_unit_weights", ok))
    return out


def run_verification(n_max: int, scheme: Callable = tr.penrose_graph, seed: int = 0) -> list[Check]:
    """All tree and series checks up to size ``n_max`` (at most 7)."""
    if n_max < 1 or n_max > tr.N_MAX:
        raise tr.TooLarge(f"n_max must lie in 1..{tr.N_MAX}")
    return tree_checks(n_max, scheme, seed) + series_checks(seed)


def _drop_same_generation(t: tr.RootedTree) -> tr.LabeledGraph:
    """Penrose rule without the same-generation edges; used as a known-bad scheme."""
    d, par = t.depth, t.parent
    edges = set(t.edges)
    for a, b in itertools.permutations(t.labels + (0,), 2):
        if a != 0 and d[a] == d[b] + 1 and par[a] < b:
            edges.add(tuple(sorted((a, b))))
    return tr.LabeledGraph(max((0,) + t.labels), frozenset(edges))
