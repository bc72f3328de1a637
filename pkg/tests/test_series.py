import math
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from virialbounds import series as fs
from virialbounds.errors import (
    ConstantTermNotOne,
    IndexOutOfRange,
    NonzeroInnerConstant,
    NotInvertibleForm,
    ZeroConstantTerm,
)
from virialbounds.verify import bell_by_set_partitions, naive_inverse

S = fs.Series.from_coeffs

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)


def series_st(order, const=None, lin=None):
    def build(cs):
        cs = list(cs)
        if const is not None:
            cs[0] = F(const)
        if lin is not None and order >= 1:
            cs[1] = lin
        return S(cs)

    return st.lists(rationals, min_size=order + 1, max_size=order + 1).map(build)


def geometric(order):
    return S([1] * (order + 1))


def test_add_examples():
    assert S([1, 1]) + S([1, -1]) == S([2, 0])
    assert fs.add(S([0, 0, 0]), S([1, 2, 3])) == S([1, 2, 3])
    assert fs.add(S([1, 2, 3]), S([0, 0, 4])) == S([1, 2, 7])


def test_add_truncates_to_min_order():
    assert fs.add(S([1, 2, 3]), S([1, 1])).order == 1


def test_mul_examples():
    assert fs.mul(S([1, -1, 0, 0, 0]), geometric(4)) == fs.Series.one(4)
    a = S([3, F(1, 2), 7])
    assert fs.mul(a, fs.Series.one(2)) == a
    assert fs.mul(S([1, 1, 0]), S([1, 1, 0])) == S([1, 2, 1])


def test_pow_int():
    assert fs.pow_int(S([1, 1, 0]), 0) == fs.Series.one(2)
    assert fs.pow_int(fs.Series.x(4), 3) == fs.Series.monomial(3, 4)
    a = S([1, 1, F(1, 2), 0, 0])
    assert fs.pow_int(a, 2) == fs.mul(a, a)


def test_mul_inverse():
    assert fs.mul_inverse(S([1, -1, 0, 0, 0])) == geometric(4)
    assert fs.mul_inverse(fs.Series.one(3)) == fs.Series.one(3)
    assert fs.mul_inverse(S([1, 1, 0, 0])) == S([1, -1, 1, -1])
    with pytest.raises(ZeroConstantTerm):
        fs.mul_inverse(S([0, 1]))


def test_compose_examples():
    a = S([2, 3, 5, 7])
    assert fs.compose(a, fs.Series.x(3)) == a
    assert fs.compose(geometric(6), fs.Series.monomial(2, 6)) == S([1, 0, 1, 0, 1, 0, 1])
    with pytest.raises(NonzeroInnerConstant):
        fs.compose(a, S([1, 1, 0, 0]))
    with pytest.raises(NonzeroInnerConstant):
        fs.compose_bell(a, S([1, 1, 0, 0]))


def test_derivative():
    assert fs.derivative(S([1, 1, 1])) == S([1, 2])
    assert fs.derivative(S([5, 0, 0])) == S([0, 0])


def test_generalized_binomial():
    assert all(fs.generalized_binomial(-1, k) == (-1) ** k for k in range(8))
    assert fs.generalized_binomial(F(7, 3), 0) == 1
    assert fs.generalized_binomial(-3, 2) == 6
    assert fs.generalized_binomial(5, 7) == 0


def test_real_power():
    assert fs.real_power(S([1, -1, 0, 0, 0, 0]), -1) == geometric(5)
    a = S([1, 2, F(-1, 3), 4, 0, 1])
    assert fs.real_power(a, 1) == a
    assert fs.real_power(a, 3) == fs.pow_int(a, 3)
    assert fs.real_power(a, -1) == fs.mul_inverse(a)
    with pytest.raises(ConstantTermNotOne):
        fs.real_power(S([2, 1]), F(1, 2))


def test_real_power_square_root_round_trip():
    a = S([1, F(1, 2), -3, F(2, 7), 1, 0, 5, -1, F(1, 9), 2, 3])
    root = fs.real_power(a, F(1, 2))
    assert fs.real_power(root, 2) == a


def test_bell_ordinary():
    b = [F(2), F(3), F(5), F(7)]
    assert fs.bell_ordinary(4, 4, b) == b[0] ** 4
    assert fs.bell_ordinary(4, 1, b) == b[3]
    assert fs.bell_ordinary(3, 2, b) == 2 * b[0] * b[1]
    with pytest.raises(IndexOutOfRange):
        fs.bell_ordinary(2, 3, b)


def test_bell_exponential():
    b = [F(2), F(3), F(5), F(7)]
    assert fs.bell_exponential(4, 4, b) == b[0] ** 4
    assert fs.bell_exponential(4, 1, b) == b[3]
    assert fs.bell_exponential(3, 2, b) == 3 * b[0] * b[1]
    with pytest.raises(IndexOutOfRange):
        fs.bell_exponential(3, 0, b)


def test_bell_exponential_matches_set_partitions():
    b = [F(k * k - 3, k + 1) for k in range(1, 9)]
    for n in range(1, 9):
        for k in range(1, n + 1):
            assert fs.bell_exponential(n, k, b) == bell_by_set_partitions(n, k, b)


def test_bell_exponential_counts_stirling_numbers():
    ones = [1] * 8
    assert [fs.bell_exponential(5, k, ones) for k in range(1, 6)] == [1, 15, 25, 10, 1]


def test_lagrange_inverse_examples():
    x = fs.Series.x(6)
    assert fs.lagrange_inverse(x) == x
    order = 10
    xex = S([0] + [F(1, math.factorial(k - 1)) for k in range(1, order + 1)])
    inv = fs.lagrange_inverse(xex)
    assert fs.compose(inv, xex) == fs.Series.x(order)
    # Lambert series: [X^k] W(X) = (-k)^(k-1)/k!
    assert all(inv[k] == F((-k) ** (k - 1), math.factorial(k)) for k in range(1, order + 1))
    with pytest.raises(NotInvertibleForm):
        fs.lagrange_inverse(S([0, 0, 1]))
    with pytest.raises(NotInvertibleForm):
        fs.lagrange_inverse(S([1, 1, 1]))


def test_lagrange_compose_coeff_examples():
    b = S([0, 3, 1, -2, 5])
    inv = fs.lagrange_inverse(b)
    for k in range(1, 5):
        assert fs.lagrange_compose_coeff(fs.Series.x(4), b, k) == inv[k]
    c = S([4, 7, 1, 1, 1])
    assert fs.lagrange_compose_coeff(c, b, 1) == F(7, 3)
    assert fs.lagrange_compose_coeff(c, b, 0) == 4


def test_egf_view_round_trip():
    e = fs.EgfView.from_egf([1, 1, 2, 6, 24])
    assert e.series == geometric(4)
    assert e.to_list() == [1, 1, 2, 6, 24]


def test_index_out_of_range():
    with pytest.raises(IndexOutOfRange):
        S([1, 2])[2]


# properties -------------------------------------------------------------------


@given(series_st(12), series_st(12), series_st(12))
def test_ring_laws(a, b, c):
    assert fs.add(a, b) == fs.add(b, a)
    assert fs.mul(a, b) == fs.mul(b, a)
    assert fs.mul(a, fs.mul(b, c)) == fs.mul(fs.mul(a, b), c)
    assert fs.mul(a, fs.add(b, c)) == fs.add(fs.mul(a, b), fs.mul(a, c))


@given(series_st(12))
def test_inverse_property(a):
    if a[0] == 0:
        return
    assert fs.mul(a, fs.mul_inverse(a)) == fs.Series.one(12)


@given(series_st(10), series_st(10, const=0))
def test_compose_paths_agree(a, b):
    assert fs.compose(a, b) == fs.compose_bell(a, b)


@given(series_st(8), series_st(8, const=0))
def test_chain_rule(a, b):
    lhs = fs.derivative(fs.compose(a, b))
    rhs = fs.mul(fs.compose(fs.derivative(a), b.truncate(7)), fs.derivative(b))
    assert lhs == rhs


@given(series_st(12, const=0, lin=F(2, 3)))
def test_lagrange_round_trip(b):
    inv = fs.lagrange_inverse(b)
    x = fs.Series.x(12)
    assert fs.compose(inv, b) == x
    assert fs.compose(b, inv) == x
    assert inv == naive_inverse(b)


@given(series_st(8), series_st(8, const=0, lin=F(-3, 2)))
def test_lagrange_compose_coeff_matches_composition(c, b):
    full = fs.compose(c, fs.lagrange_inverse(b))
    assert all(fs.lagrange_compose_coeff(c, b, k) == full[k] for k in range(9))


@given(series_st(6, const=1), st.fractions(min_value=-4, max_value=4, max_denominator=5))
def test_real_power_exponent_law(a, r):
    assert fs.mul(fs.real_power(a, r), fs.real_power(a, 1 - r)) == a


@given(st.fractions(min_value=-20, max_value=20, max_denominator=9))
def test_binomial_identity(r):
    for m in range(11):
        lhs = sum((fs.generalized_binomial(r, k + 1) * math.comb(m, k) for k in range(m + 1)), F(0))
        assert lhs == fs.generalized_binomial(m + r, m + 1)


def test_binomial_identity_sample():
    terms = [fs.generalized_binomial(-3, k + 1) * math.comb(2, k) for k in range(3)]
    assert terms == [-3, 12, -10]
    assert sum(terms) == fs.generalized_binomial(-1, 3) == -1
