"""Virial coefficients and lower bounds on the virial (density) radius.

The central object is the tree sum ``B``, the generating function of rooted
labeled trees whose vertices carry the weights ``g(n)``.  It solves
``B(r) = Psi(r B(r))`` and yields both the efficient criterion ``M*`` and the
sharper (but truncation-sensitive) ``R*``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from ._optimize import maximize
from .errors import DomainEmpty, InsufficientCoefficients, TooLarge, TruncationInsufficient
from .potentials import PairPotential, VertexCoefficients, c_beta, pad_submultiplicative
from .series import Series, bell_exponential, compose, generalized_binomial, mul_inverse, real_power
from .cluster import optimize_r_star

__all__ = [
    "TreeSum",
    "VirialReport",
    "GRTBound",
    "MStar",
    "RStarVirial",
    "TermBound",
    "LP_CONSTANT",
    "tree_sum_functional",
    "tree_sum_degrees",
    "t_pen1_series",
    "virial_from_cluster_bell",
    "virial_from_cluster_lagrange",
    "grt_bound",
    "m_star",
    "r_star_virial",
    "virial_term_bound",
    "grt_table",
    "virial_report",
]

# classical Lagrange-inversion virial radius, in units of 1/C
LP_CONSTANT = 0.144766998

# extrapolated radii for the 3d inverse-power potentials, exponents 4..8
R_NUM_REFERENCE = {4: 0.1092, 5: 0.2418, 6: 0.3280, 7: 0.4022, 8: 0.4634}

DEGREE_SUM_MAX = 10
TREE_ORDER = 24


@dataclass(frozen=True)
class TreeSum:
    """Ordinary coefficients ``B_n / n!`` of the tree sum, exact to ``order``.

    ``envelope_slope`` is ``1/r*`` for a certified ``r*``; when present,
    :meth:`upper` gives a rigorous upper bound on the full (untruncated) sum
    for ``r < r*``.
    """

    coeffs: tuple[Fraction, ...]
    source: str
    mode: str = "value"
    envelope_slope: float | None = None

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def series(self) -> Series:
        return Series(self.coeffs)

    def egf(self, n: int) -> Fraction:
        return self.coeffs[n] * math.factorial(n)

    def __call__(self, r: float) -> float:
        acc = 0.0
        for a in reversed(self.coeffs):
            acc = acc * r + float(a)
        return acc

    def _envelope(self, r: float) -> float:
        x = r * self.envelope_slope
        return math.inf if x >= 1 else 1.0 / (1.0 - x)

    def tail(self, r: float) -> float:
        """Bound on the coefficients past ``order`` at ``r`` (Cauchy estimate)."""
        if self.envelope_slope is None:
            raise ValueError("tree sum carries no envelope; certify it first")
        r_max = 1.0 / self.envelope_slope
        if r >= r_max:
            return math.inf
        if r == 0:
            return 0.0
        best = math.inf
        for r0 in np.geomspace(r, r_max, 202)[1:-1]:
            q = r / r0
            best = min(best, self._envelope(r0) * q ** (self.order + 1) / (1 - q))
        return best

    def upper(self, r: float) -> float:
        return min(self._envelope(r), self(r) + self.tail(r))

    def certified(self, r_star: float) -> "TreeSum":
        return TreeSum(self.coeffs, self.source, self.mode, 1.0 / r_star)


def _g_table(vc: VertexCoefficients, n: int, mode: str) -> list[Fraction]:
    out = [Fraction(1)]
    for k in range(1, n + 1):
        if k in vc.g:
            out.append(Fraction(vc.upper(k) if mode == "upper" else vc.value(k)))
        elif vc.degree_cap is not None and k > vc.degree_cap:
            out.append(Fraction(0))
        else:
            raise InsufficientCoefficients(f"g({k}) is needed up to order {n}")
    return out


def tree_sum_functional(vc: VertexCoefficients, order: int, mode: str = "value") -> TreeSum:
    """Solve ``B = Psi(X B)`` order by order; each pass fixes one more coefficient."""
    g = _g_table(vc, order, mode)
    psi = Series(tuple(gk / math.factorial(k) for k, gk in enumerate(g)))
    b = Series.one(order)
    for _ in range(order):
        xb = Series((Fraction(0),) + b.coeffs[:order])
        b = compose(psi, xb)
    return TreeSum(b.coeffs, "functional_equation", mode)


def _degree_sequences(n: int):
    """``(d_0, ..., d_n)`` with ``d_0 >= 1``, ``d_i >= 1`` and total ``2n``."""

    def rest(k: int, total: int, prefix: list[int]):
        if k == 1:
            yield prefix + [total]
            return
        for d in range(1, total - (k - 1) + 1):
            yield from rest(k - 1, total - d, prefix + [d])

    yield from rest(n + 1, 2 * n, [])


def tree_sum_degrees(vc: VertexCoefficients, order: int, mode: str = "value") -> TreeSum:
    """Tree sum grouped by degree sequence, counted with Cayley's formula.

    The root of degree ``d_0`` carries ``g(d_0)``; any other vertex of degree
    ``d_i`` has ``d_i - 1`` children and carries ``g(d_i - 1)``.
    """
    if order > DEGREE_SUM_MAX:
        raise TooLarge(f"degree-sequence sum limited to order {DEGREE_SUM_MAX}")
    g = _g_table(vc, order, mode)
    coeffs = [Fraction(1)]
    for n in range(1, order + 1):
        total = Fraction(0)
        top = math.factorial(n - 1)
        for degs in _degree_sequences(n):
            count = top
            for d in degs:
                count //= math.factorial(d - 1)
            weight = g[degs[0]]
            for d in degs[1:]:
                weight *= g[d - 1]
            total += count * weight
        coeffs.append(total / math.factorial(n))
    return TreeSum(tuple(coeffs), "degree_sum", mode)


def t_pen1_series(b: TreeSum | Series) -> Series:
    """Generating function of unsplittable trees, ``1 - 1/B``."""
    s = b.series if isinstance(b, TreeSum) else b
    if s.coeffs[0] != 1:
        raise ValueError("tree sum must start with 1")
    return Series.one(s.order) - mul_inverse(s)


def _check_b(b: Sequence, n: int) -> None:
    if len(b) < n:
        raise InsufficientCoefficients(f"need b_2..b_{n + 1}, got {len(b)} values")


def virial_from_cluster_bell(b: Sequence, n: int) -> Fraction:
    """``beta_{n+1}`` from cluster coefficients via exponential Bell polynomials.

    ``b[0]`` is ``b_2``; coefficients follow ``beta p = sum b_n z**n / n!``
    and ``beta p = sum beta_n rho**n / n!``.
    """
    if n == 0:
        return Fraction(1)
    _check_b(b, n)
    seq = [Fraction(x) for x in b[:n]]
    return sum(
        (generalized_binomial(-n, k) * math.factorial(k) * bell_exponential(n, k, seq) for k in range(1, n + 1)),
        Fraction(0),
    )


def virial_from_cluster_lagrange(b: Sequence, n: int) -> Fraction:
    """``beta_{n+1}`` as ``n! [X^n] (b')**(-n)`` with ``b' = 1 + sum b_{k+1} X**k / k!``."""
    if n == 0:
        return Fraction(1)
    _check_b(b, n)
    deriv = Series((Fraction(1),) + tuple(Fraction(b[k - 1]) / math.factorial(k) for k in range(1, n + 1)))
    return real_power(deriv, -n).coeffs[n] * math.factorial(n)


@dataclass(frozen=True)
class GRTBound:
    r_hat: float
    value: float
    normalized: float
    tail_bound: float
    terms: int


def _t1_terms(r: float, terms: int) -> tuple[np.ndarray, np.ndarray]:
    n = np.arange(1, terms + 1, dtype=float)
    log_t = n * np.log(n) + (n + 1) * math.log(r) - gammaln(n + 2)
    return n, np.exp(log_t)


def _t1(r: float, terms: int) -> tuple[float, float]:
    """``T_1(r)`` and ``r T_1'(r) - T_1(r)``, both truncated after ``terms``."""
    n, t = _t1_terms(r, terms)
    return r + math.fsum(t), math.fsum(n * t)


def grt_bound(c: float, terms: int = 400, tol: float = 1e-6) -> GRTBound:
    """Groeneveld-type virial radius ``r_hat / (1 + T_1(r_hat)) / C``.

    ``r_hat`` solves ``r T_1'(r) - T_1(r) = 1`` and is found by bisection on
    ``(0, 1/e)``.  The omitted terms obey ``n**n/(n+1)! <= e**n/((n+1) sqrt(2 pi n))``,
    which gives a geometric remainder in ``q = e r``.
    """
    if c <= 0:
        raise ValueError("C must be positive")
    lo, hi = 0.0, 1.0 / math.e
    while hi - lo > 1e-15:
        mid = 0.5 * (lo + hi)
        if _t1(mid, terms)[1] < 1.0:
            lo = mid
        else:
            hi = mid
    r_hat = 0.5 * (lo + hi)
    q = math.e * r_hat
    m = terms + 1
    # remainder of sum n * n**n r**(n+1) / (n+1)!, which dominates that of T_1
    tail = r_hat * q**m / (math.sqrt(2 * math.pi * m) * (1 - q))
    if tail > tol:
        raise TruncationInsufficient(f"tail bound {tail:.3g} above {tol:.3g}; increase terms")
    t_val, _ = _t1(r_hat, terms)
    norm = r_hat / (1.0 + t_val)
    return GRTBound(r_hat, norm / c, norm, tail, terms)


@dataclass(frozen=True)
class MStar:
    value: float
    mu: float
    mu_star: float


def m_star(vc, mu_star: float | None = None, mode: str = "upper", c: float | None = None) -> MStar:
    """Efficient criterion ``sup mu / (2 Psi(mu) - 1)`` over ``[0, mu*]``."""
    if isinstance(vc, VertexCoefficients):
        f = vc.psi_function(mode)
        c = float(vc.c_beta)
    else:
        f = vc
        c = 1.0 if c is None else c
    if mu_star is None:
        mu_star = optimize_r_star(f, c=c).mu_star
    best = maximize(lambda mu: mu / (2.0 * f(mu) - 1.0), 0.0, mu_star)
    return MStar(best.value, best.x, mu_star)


@dataclass(frozen=True)
class RStarVirial:
    value: float
    r: float
    label: str
    order: int


def r_star_virial(b: TreeSum, r_cap: float, certified: bool = False) -> RStarVirial:
    """``sup r B(r) / (2 B(r) - 1)`` over ``[0, r_cap]``.

    Since the ratio decreases in ``B``, the certified variant evaluates it
    with the envelope-backed upper value of ``B``; the plain variant uses
    the truncated sum and is only an estimate.
    """
    if r_cap <= 0:
        raise DomainEmpty("r_cap must be positive")
    ev = b.upper if certified else b

    def f(r):
        x = ev(r)
        return r * x / (2 * x - 1) if math.isfinite(x) else r / 2

    best = maximize(f, 0.0, r_cap)
    return RStarVirial(best.value, best.x, "certified" if certified else "estimate", b.order)


@dataclass(frozen=True)
class TermBound:
    value: float
    r: float
    value_t_form: float
    forms_agree: bool


def virial_term_bound(b: TreeSum, n: int, r_cap: float, rtol: float = 1e-12) -> TermBound:
    """``|beta_{n+1}|/(n+1)! <= (1/(n+1)) [inf_r (2 - 1/B(r))/r]**n``.

    The same infimum is computed a second time as ``inf (1 + T(r))/r`` from
    the unsplittable-tree series ``T = 1 - 1/B``; ``forms_agree`` records
    whether the two match to within ``rtol`` plus the truncation size.
    """
    if r_cap <= 0:
        raise DomainEmpty("r_cap must be positive")
    if n == 0:
        return TermBound(1.0, 0.0, 1.0, True)
    t = t_pen1_series(b)
    best_b = maximize(lambda r: -(2.0 - 1.0 / b(r)) / r if r > 0 else -math.inf, 0.0, r_cap)
    best_t = maximize(lambda r: -(1.0 + t(r)) / r if r > 0 else -math.inf, 0.0, r_cap)
    inf_b, inf_t = -best_b.value, -best_t.value
    r = best_b.x
    slack = abs(float(b.coeffs[-1])) * r ** b.order + abs(float(t.coeffs[-1])) * r ** t.order
    agree = abs(inf_b - inf_t) <= rtol * abs(inf_b) + 10 * slack / max(r, 1e-300)
    return TermBound(inf_b**n / (n + 1), r, inf_t**n / (n + 1), agree)


def grt_table(exponents: Sequence[int] = (4, 5, 6, 7, 8), dim: int = 3, terms: int = 400) -> list[dict]:
    """GRT radii for inverse-power potentials with ``beta = eps = sigma = 1``."""
    grt = grt_bound(1.0, terms)
    rows = []
    for n in exponents:
        c = c_beta(PairPotential.power_law(n, dim))
        rows.append({"n": n, "c1": c, "r_grt": grt.normalized / c, "r_num": R_NUM_REFERENCE.get(n)})
    return rows


@dataclass
class VirialReport:
    """Virial-radius bounds; ``m_star`` is certified, estimates are labelled."""

    c_beta: float
    m_star: float
    m_star_mu: float
    r_grt: float
    r_lp_classical: float
    r_star_estimate: float | None = None
    r_star_certified: float | None = None
    m_star_estimate: float | None = None
    beta_coeffs: list | None = None
    metadata: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def virial_report(
    vc: VertexCoefficients, r_star: float, mu_star: float, estimate: bool = True, tree_order: int = TREE_ORDER
) -> VirialReport:
    """Collect ``M*``, ``R*``, the GRT and Lagrange radii for one ``Psi``.

    Tree sums run to ``tree_order``; missing ``g(n)`` are filled by
    submultiplicative padding first.
    """
    c = float(vc.c_beta)
    ms = m_star(vc, mu_star, "upper")
    grt = grt_bound(c)
    padded = pad_submultiplicative(vc, max(tree_order, vc.order))
    upper_tree = tree_sum_functional(padded, tree_order, "upper").certified(r_star)
    rep = VirialReport(
        c_beta=c,
        m_star=ms.value,
        m_star_mu=ms.mu,
        r_grt=grt.value,
        r_lp_classical=LP_CONSTANT / c,
        r_star_certified=r_star_virial(upper_tree, r_star, certified=True).value,
        metadata={
            "truncation": vc.order,
            "tree_order": tree_order,
            "grt_terms": grt.terms,
            "grt_tail_bound": grt.tail_bound,
        },
    )
    if estimate:
        rep.m_star_estimate = m_star(vc, None, "lower").value
        tree = tree_sum_functional(padded, tree_order, "value")
        rep.r_star_estimate = r_star_virial(tree, r_star).value
    return rep
