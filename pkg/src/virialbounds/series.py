"""Truncated formal power series with exact rational coefficients.

A :class:`Series` stores the ordinary coefficients ``a_0 .. a_N`` of a power
series known up to and including ``X**N``.  Binary operations truncate to the
smaller of the two orders; nothing ever extends the order silently, so a zero
coefficient inside the order is a genuine zero and not a missing value.

Exponential (``a_n / n!``) conventions are handled by :class:`EgfView`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Iterator, Sequence

from .errors import (
    ConstantTermNotOne,
    IndexOutOfRange,
    NonzeroInnerConstant,
    NotInvertibleForm,
    ZeroConstantTerm,
)

__all__ = [
    "Series",
    "EgfView",
    "add",
    "mul",
    "pow_int",
    "mul_inverse",
    "compose",
    "compose_bell",
    "derivative",
    "generalized_binomial",
    "binomial_series",
    "real_power",
    "bell_ordinary",
    "bell_exponential",
    "lagrange_inverse",
    "lagrange_compose_coeff",
    "partitions_exact",
]


def _q(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational, float)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot use {type(value).__name__} as an exact coefficient")


@dataclass(frozen=True)
class Series:
    """Power series truncated after ``X**order``.

    >>> s = Series.from_coeffs([1, 2, 3])
    >>> s.order, s[2]
    (2, Fraction(3, 1))
    """

    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.coeffs) == 0:
            raise ValueError("a series needs at least the constant coefficient")
        object.__setattr__(self, "coeffs", tuple(_q(c) for c in self.coeffs))

    @classmethod
    def from_coeffs(cls, coeffs: Iterable, order: int | None = None) -> "Series":
        """Build a series, zero-padding or truncating to ``order`` if given."""
        cs = [_q(c) for c in coeffs]
        if order is not None:
            if order < 0:
                raise ValueError("order must be non-negative")
            cs = (cs + [Fraction(0)] * (order + 1))[: order + 1]
        return cls(tuple(cs))

    @classmethod
    def zero(cls, order: int) -> "Series":
        return cls.from_coeffs([], order)

    @classmethod
    def one(cls, order: int) -> "Series":
        return cls.from_coeffs([1], order)

    @classmethod
    def x(cls, order: int) -> "Series":
        """The series ``X`` (for order 0 this is just ``0``)."""
        return cls.from_coeffs([0, 1], order)

    @classmethod
    def monomial(cls, m: int, order: int, coeff=1) -> "Series":
        cs = [0] * (order + 1)
        if m <= order:
            cs[m] = coeff
        return cls.from_coeffs(cs)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __len__(self) -> int:
        return len(self.coeffs)

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self.coeffs)

    def __getitem__(self, m):
        if isinstance(m, slice):
            return self.coeffs[m]
        if m < 0 or m > self.order:
            raise IndexOutOfRange(f"[X^{m}] is outside truncation order {self.order}")
        return self.coeffs[m]

    def truncate(self, order: int) -> "Series":
        if order > self.order:
            raise ValueError("truncate cannot raise the order")
        return Series(self.coeffs[: order + 1])

    def shift_down(self) -> "Series":
        """``(a - a_0) / X``; the order drops by one."""
        if self.order == 0:
            raise ValueError("cannot divide an order-0 series by X")
        return Series(self.coeffs[1:])

    def scale(self, c) -> "Series":
        c = _q(c)
        return Series(tuple(c * a for a in self.coeffs))

    def __call__(self, x: float) -> float:
        """Evaluate the truncated polynomial at a float ``x`` (Horner)."""
        acc = 0.0
        for a in reversed(self.coeffs):
            acc = acc * x + float(a)
        return acc

    def __add__(self, other):
        if not isinstance(other, Series):
            other = Series.from_coeffs([other], self.order)
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        if not isinstance(other, Series):
            other = Series.from_coeffs([other], self.order)
        return add(self, -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Series):
            return mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        return pow_int(self, n)

    def __repr__(self) -> str:
        terms = ", ".join(str(c) for c in self.coeffs)
        return f"Series([{terms}])"


@dataclass(frozen=True)
class EgfView:
    """Exponential reading of a series: ``self[n] == n! * series[n]``."""

    series: Series

    @classmethod
    def from_egf(cls, coeffs: Iterable, order: int | None = None) -> "EgfView":
        cs = [_q(c) / math.factorial(n) for n, c in enumerate(coeffs)]
        return cls(Series.from_coeffs(cs, order))

    @property
    def order(self) -> int:
        return self.series.order

    def __getitem__(self, n: int) -> Fraction:
        return math.factorial(n) * self.series[n]

    def to_list(self) -> list[Fraction]:
        return [self[n] for n in range(self.order + 1)]


def add(a: Series, b: Series) -> Series:
    n = min(a.order, b.order)
    return Series(tuple(a.coeffs[i] + b.coeffs[i] for i in range(n + 1)))


def mul(a: Series, b: Series) -> Series:
    n = min(a.order, b.order)
    ac, bc = a.coeffs, b.coeffs
    out = []
    for m in range(n + 1):
        s = Fraction(0)
        for k in range(m + 1):
            if ac[k] and bc[m - k]:
                s += ac[k] * bc[m - k]
        out.append(s)
    return Series(tuple(out))


def pow_int(a: Series, n: int) -> Series:
    """``a**n`` by binary exponentiation; ``a**0 == 1``."""
    if n < 0:
        raise ValueError("pow_int needs a non-negative exponent; use real_power")
    result = Series.one(a.order)
    base = a
    while n:
        if n & 1:
            result = mul(result, base)
        n >>= 1
        if n:
            base = mul(base, base)
    return result


def mul_inverse(a: Series) -> Series:
    """Multiplicative inverse by the triangular recursion on coefficients."""
    a0 = a.coeffs[0]
    if a0 == 0:
        raise ZeroConstantTerm("a series with zero constant term has no inverse")
    inv = [1 / a0]
    for m in range(1, a.order + 1):
        s = sum((a.coeffs[k] * inv[m - k] for k in range(1, m + 1)), Fraction(0))
        inv.append(-s / a0)
    return Series(tuple(inv))


def _check_inner(b: Series) -> None:
    if b.coeffs[0] != 0:
        raise NonzeroInnerConstant("inner series of a composition must have b_0 = 0")


def compose(a: Series, b: Series) -> Series:
    """``a(b(X))`` as the sum of ``a_k * b**k``; requires ``b_0 == 0``."""
    _check_inner(b)
    n = min(a.order, b.order)
    b = b.truncate(n)
    result = [Fraction(0)] * (n + 1)
    result[0] = a.coeffs[0]
    power = Series.one(n)
    for k in range(1, n + 1):
        power = mul(power, b)
        ak = a.coeffs[k]
        if ak:
            # b**k starts at X**k
            for m in range(k, n + 1):
                result[m] += ak * power.coeffs[m]
    return Series(tuple(result))


def compose_bell(a: Series, b: Series) -> Series:
    """Composition through partial ordinary Bell polynomials (Faa di Bruno)."""
    _check_inner(b)
    n = min(a.order, b.order)
    tail = b.coeffs[1 : n + 1]
    out = [a.coeffs[0]]
    for m in range(1, n + 1):
        out.append(sum((a.coeffs[k] * bell_ordinary(m, k, tail) for k in range(1, m + 1)), Fraction(0)))
    return Series(tuple(out))


def derivative(a: Series) -> Series:
    """Term-wise derivative; the result has order ``a.order - 1``."""
    if a.order == 0:
        raise ValueError("derivative of an order-0 series has no known coefficients")
    return Series(tuple((m + 1) * a.coeffs[m + 1] for m in range(a.order)))


def generalized_binomial(r, n: int) -> Fraction:
    """``r (r-1) ... (r-n+1) / n!`` for rational ``r``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    r = _q(r)
    num = Fraction(1)
    for i in range(n):
        num *= r - i
    return num / math.factorial(n)


def binomial_series(r, order: int) -> Series:
    """Coefficients of ``(1 + X)**r`` up to ``order``."""
    return Series(tuple(generalized_binomial(r, n) for n in range(order + 1)))


def real_power(a: Series, r) -> Series:
    """``a**r`` for rational ``r``, valid when ``a_0 == 1``."""
    if a.coeffs[0] != 1:
        raise ConstantTermNotOne("real_power needs a series with constant term 1")
    shifted = Series((Fraction(0),) + a.coeffs[1:])
    return compose(binomial_series(r, a.order), shifted)


def partitions_exact(m: int, k: int, largest: int | None = None) -> Iterator[tuple[int, ...]]:
    """Partitions of ``m`` into exactly ``k`` positive parts, non-increasing."""
    if largest is None:
        largest = m
    if k == 0:
        if m == 0:
            yield ()
        return
    # the remaining k-1 parts need at least k-1
    top = min(largest, m - (k - 1))
    for first in range(top, 0, -1):
        if first * k < m:
            break
        for rest in partitions_exact(m - first, k - 1, first):
            yield (first,) + rest


def _multiplicities(parts: Sequence[int]) -> dict[int, int]:
    mult: dict[int, int] = {}
    for p in parts:
        mult[p] = mult.get(p, 0) + 1
    return mult


def _check_bell_args(m: int, k: int, b: Sequence) -> None:
    if not 1 <= k <= m:
        raise IndexOutOfRange(f"Bell polynomial index needs 1 <= k <= m, got m={m}, k={k}")
    if len(b) < m - k + 1:
        raise IndexOutOfRange(f"need {m - k + 1} arguments, got {len(b)}")


def bell_ordinary(m: int, k: int, b: Sequence):
    """Partial ordinary Bell polynomial; ``b[0]`` plays the role of ``b_1``.

    Sums ``k! / prod(alpha_i!) * prod(b_i**alpha_i)`` over the multiplicity
    vectors of partitions of ``m`` into ``k`` parts.
    """
    _check_bell_args(m, k, b)
    total = 0
    for parts in partitions_exact(m, k):
        mult = _multiplicities(parts)
        coef = math.factorial(k)
        term = 1
        for size, count in mult.items():
            coef //= math.factorial(count)
            term *= b[size - 1] ** count
        total += coef * term
    return total


def bell_exponential(n: int, k: int, b: Sequence):
    """Partial exponential Bell polynomial ``B_{n,k}``; ``b[0]`` is ``b_1``."""
    _check_bell_args(n, k, b)
    total = 0
    for parts in partitions_exact(n, k):
        mult = _multiplicities(parts)
        # number of set partitions of {1..n} with this block-size profile
        count = math.factorial(n)
        term = 1
        for size, alpha in mult.items():
            count //= math.factorial(alpha) * math.factorial(size) ** alpha
            term *= b[size - 1] ** alpha
        total += count * term
    return total


def _check_lagrange_form(b: Series) -> None:
    if b.order < 1 or b.coeffs[0] != 0 or b.coeffs[1] == 0:
        raise NotInvertibleForm("compositional inverse needs b_0 = 0 and b_1 != 0")


def lagrange_inverse(b: Series) -> Series:
    """Compositional inverse from ``[X^k] b_inv = [X^(k-1)] (b/X)**(-k) / k``."""
    _check_lagrange_form(b)
    inv_tilde = mul_inverse(b.shift_down())
    out = [Fraction(0)]
    power = Series.one(inv_tilde.order)
    for k in range(1, b.order + 1):
        power = mul(power, inv_tilde)
        out.append(power.coeffs[k - 1] / k)
    return Series(tuple(out))


def lagrange_compose_coeff(c: Series, b: Series, k: int) -> Fraction:
    """``[X^k] c(b_inv(X))`` without building the inverse of ``b``."""
    _check_lagrange_form(b)
    if k < 0 or k > min(c.order, b.order):
        raise IndexOutOfRange(f"k={k} outside the available orders")
    if k == 0:
        return c.coeffs[0]
    inv_tilde = mul_inverse(b.shift_down())
    prod = mul(derivative(c).truncate(k - 1), pow_int(inv_tilde.truncate(k - 1), k))
    return prod.coeffs[k - 1] / k
