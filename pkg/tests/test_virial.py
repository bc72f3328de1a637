import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from virialbounds import virial as vr
from virialbounds.cluster import optimize_r_star
from virialbounds.errors import DomainEmpty, InsufficientCoefficients, TooLarge
from virialbounds.potentials import VertexCoefficients
from virialbounds.series import Series, pow_int
from virialbounds.trees import enumerate_rooted_trees

ROD = VertexCoefficients.from_normalized(F(1), {2: F(1, 4)}, degree_cap=2)
g_st = st.lists(st.fractions(0, 3, max_denominator=5), min_size=7, max_size=7)


def vc_from(vals):
    return VertexCoefficients.from_values(F(1), {n: v for n, v in enumerate(vals, start=2)})


def test_tree_sum_free_gas_and_first_order():
    free = VertexCoefficients.from_values(F(0), {n: F(0) for n in range(2, 6)})
    assert vr.tree_sum_functional(free, 5).coeffs == (1, 0, 0, 0, 0, 0)
    vc = VertexCoefficients.from_values(F(3, 2), {2: F(1), 3: F(1, 2)})
    assert vr.tree_sum_functional(vc, 3).coeffs[1] == F(3, 2)
    assert vr.tree_sum_degrees(vc, 3).egf(1) == F(3, 2)


def test_tree_sum_order_two():
    vc = VertexCoefficients.from_values(F(2), {2: F(3)})
    assert vr.tree_sum_degrees(vc, 2).egf(2) == 3 + 2 * 2**2


def _tree_weight(t, g):
    w = F(1)
    for v in (0,) + t.labels:
        w *= g[t.sibling_count(v)]
    return w


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_tree_sum_matches_tree_enumeration(n):
    g = [F(1), F(2), F(3, 2), F(1, 3), F(5), F(1, 7)]
    vc = VertexCoefficients.from_values(g[1], dict(enumerate(g[2:], start=2)))
    brute = sum(_tree_weight(t, g) for t in enumerate_rooted_trees(n))
    assert vr.tree_sum_functional(vc, 5).egf(n) == brute
    assert vr.tree_sum_degrees(vc, 5).egf(n) == brute


def test_tree_sum_hard_rods_dual_path():
    assert vr.tree_sum_functional(ROD, 8).coeffs == vr.tree_sum_degrees(ROD, 8).coeffs


def test_tree_sum_unit_weights_cayley():
    c = F(3)
    vc = VertexCoefficients.from_values(c, {n: c**n for n in range(2, 9)})
    b = vr.tree_sum_degrees(vc, 8)
    assert all(b.egf(n) == c**n * (n + 1) ** (n - 1) for n in range(9))


def test_tree_sum_limits():
    with pytest.raises(TooLarge):
        vr.tree_sum_degrees(ROD, 11)
    with pytest.raises(InsufficientCoefficients):
        vr.tree_sum_functional(VertexCoefficients.from_values(1, {2: 0.5}), 4)


@given(g_st)
def test_tree_sum_dual_path_property(vals):
    vc = vc_from(vals)
    a, b = vr.tree_sum_functional(vc, 8), vr.tree_sum_degrees(vc, 8)
    assert a.coeffs == b.coeffs
    assert all(x >= 0 for x in a.coeffs) and a.coeffs[0] == 1


def test_t_pen1_unit_weights():
    unit = VertexCoefficients.from_values(F(1), {n: F(1) for n in range(2, 8)})
    t = vr.t_pen1_series(vr.tree_sum_functional(unit, 7))
    assert [t[n] * math.factorial(n) for n in range(8)] == [0] + [(n - 1) ** (n - 1) for n in range(1, 8)]
    assert t[3] * 6 == 4
    assert vr.t_pen1_series(Series.one(4)) == Series.zero(4)


@given(g_st)
def test_t_pen1_positive_and_lemma(vals):
    b = vr.tree_sum_functional(vc_from(vals), 8)
    t = vr.t_pen1_series(b)
    assert all(x >= 0 for x in t.coeffs)
    total = Series.zero(8)
    for m in range(1, 9):
        total = total + pow_int(t, m)
    assert total == b.series - 1


def test_virial_from_cluster_examples():
    b = [F(-3, 2), F(1, 3), F(2), F(-1), F(5)]
    assert vr.virial_from_cluster_bell(b, 1) == F(3, 2) == vr.virial_from_cluster_lagrange(b, 1)
    assert vr.virial_from_cluster_bell(b, 0) == 1 == vr.virial_from_cluster_lagrange(b, 0)
    assert all(vr.virial_from_cluster_bell([0] * 6, n) == 0 for n in range(1, 7))
    with pytest.raises(InsufficientCoefficients):
        vr.virial_from_cluster_bell(b, 6)
    with pytest.raises(InsufficientCoefficients):
        vr.virial_from_cluster_lagrange(b, 6)


def test_virial_second_order_closed_form():
    b2, b3 = F(2, 3), F(-5, 7)
    assert vr.virial_from_cluster_bell([b2, b3], 2) == 6 * b2 * b2 - 2 * b3


def test_virial_hard_rods():
    # rods of length L: b_n = (-nL)^(n-1), beta_n = n! L^(n-1)
    L = F(3, 4)
    b = [(-n * L) ** (n - 1) for n in range(2, 10)]
    for n in range(8):
        expected = math.factorial(n + 1) * L**n
        assert vr.virial_from_cluster_bell(b, n) == expected
        assert vr.virial_from_cluster_lagrange(b, n) == expected


@given(st.lists(st.fractions(-6, 6, max_denominator=7), min_size=5, max_size=5))
def test_virial_dual_path(b):
    for n in range(6):
        assert vr.virial_from_cluster_bell(b, n) == vr.virial_from_cluster_lagrange(b, n)


def test_grt_bound():
    g = vr.grt_bound(1.0)
    assert g.r_hat == pytest.approx(0.356310, abs=1e-6)
    assert g.normalized == pytest.approx(0.231961, abs=1e-6)
    assert vr.grt_bound(2.0).value == pytest.approx(g.value / 2, rel=1e-14)
    assert g.value / vr.LP_CONSTANT > 1.6
    assert g.tail_bound < 1e-6


def test_grt_equals_efficient_criterion_of_exponential_psi():
    # with g(n) = C^n the tree sum is Cayley's and both bounds coincide
    m = vr.m_star(lambda mu: math.exp(mu), mu_star=1.0)
    assert vr.grt_bound(1.0).normalized == pytest.approx(m.value, abs=1e-9)


def test_m_star_examples():
    m = vr.m_star(lambda mu: math.exp(mu), mu_star=1.0)
    assert m.value == pytest.approx(0.231961, abs=1e-6)
    assert m.mu == pytest.approx(0.768039, abs=1e-6)
    r = optimize_r_star(ROD)
    mr = vr.m_star(ROD, r.mu_star)
    assert mr.value == pytest.approx(1 / 3, abs=1e-9)
    assert mr.mu == pytest.approx(2.0, abs=1e-6)


def test_m_star_at_least_lp():
    for vals in ({2: 0.9, 3: 0.7}, {2: 0.1}, {}):
        vc = VertexCoefficients.from_normalized(1.0, vals)
        from virialbounds.potentials import pad_submultiplicative

        vc = pad_submultiplicative(vc, 10)
        assert vr.m_star(vc).value >= vr.LP_CONSTANT


def test_r_star_virial():
    one = vr.TreeSum((F(1), F(0), F(0)), "test")
    assert vr.r_star_virial(one, 0.3).value == pytest.approx(0.3)
    with pytest.raises(DomainEmpty):
        vr.r_star_virial(one, 0.0)
    r = optimize_r_star(ROD)
    tree = vr.tree_sum_functional(ROD, 24)
    est = vr.r_star_virial(tree, r.r_star)
    assert est.label == "estimate"
    assert est.value >= vr.m_star(ROD, r.mu_star).value
    cert = vr.r_star_virial(tree.certified(r.r_star), r.r_star, certified=True)
    assert cert.label == "certified" and cert.value <= est.value


def test_certified_tree_sum_is_an_upper_bound():
    # exact hard-rod tree sum: B(r) = mu_r / r with mu_r the smallest fixed point
    r = optimize_r_star(ROD)
    tree = vr.tree_sum_functional(ROD, 12).certified(r.r_star)
    for x in np.linspace(0.05, 0.55, 11):
        a, b, c = x / 8, x - 1, x
        exact = (-b - math.sqrt(b * b - 4 * a * c)) / (2 * a) / x
        assert tree(x) <= exact * (1 + 1e-12) and exact <= tree.upper(x)


def test_virial_term_bound():
    r = optimize_r_star(ROD)
    tree = vr.tree_sum_functional(ROD, 24)
    assert vr.virial_term_bound(tree, 0, r.r_star).value == 1
    with pytest.raises(DomainEmpty):
        vr.virial_term_bound(tree, 1, -1.0)
    tb = vr.virial_term_bound(tree, 1, r.r_star)
    assert tb.value >= 0.5  # |beta_2| / 2! = C / 2
    assert tb.forms_agree


def test_term_bound_forms_agree_on_grid():
    tree = vr.tree_sum_functional(ROD, 40)
    t = vr.t_pen1_series(tree)
    for x in np.linspace(0.01, 0.15, 15):
        assert (2 - 1 / tree(x)) / x == pytest.approx((1 + t(x)) / x, rel=1e-12)


def test_grt_table_rows():
    rows = vr.grt_table()
    assert [r["n"] for r in rows] == [4, 5, 6, 7, 8]
    for r in rows:
        assert r["r_grt"] * r["c1"] == pytest.approx(vr.grt_bound(1.0).normalized)


def test_virial_report():
    r = optimize_r_star(ROD)
    rep = vr.virial_report(ROD, r.r_star, r.mu_star)
    assert rep.m_star == pytest.approx(1 / 3, abs=1e-9)
    assert rep.r_lp_classical <= rep.m_star <= rep.r_star_estimate
    assert rep.r_lp_classical <= rep.r_grt
