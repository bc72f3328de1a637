"""Lower bounds on the convergence radius of the cluster (fugacity) expansion.

Everything here works with a vertex sum ``Psi``: either a
:class:`~virialbounds.potentials.VertexCoefficients` (the ``"upper"`` mode
gives certified numbers) or any callable with ``Psi(0) = 1``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

from ._optimize import maximize
from .errors import InvalidG2, NoConvergence, NoInteriorMax, OutOfDomain, PreconditionViolated, ZeroCoefficient
from .potentials import VertexCoefficients

__all__ = [
    "ClusterReport",
    "RStar",
    "FirstCorrection",
    "classical_bound",
    "lambert_w",
    "lambert_pressure_bound",
    "first_correction_bound",
    "optimize_r_star",
    "fixed_point_mu_z",
    "pi_iteration_sequence",
    "penrose_upper_bound",
    "cluster_report",
]

FIXED_POINT_TOL = 1e-12


def _resolve(psi, mode: str, c: float | None) -> tuple[Callable[[float], float], float]:
    if isinstance(psi, VertexCoefficients):
        return psi.psi_function(mode), float(psi.c_beta)
    return psi, 1.0 if c is None else float(c)


def classical_bound(c: float) -> float:
    """``1 / (e C)``: the radius obtained from ``Psi(mu) <= exp(C mu)``."""
    if c <= 0:
        raise ValueError("C must be positive")
    return 1.0 / (math.e * c)


def lambert_w(x: float, tol: float = 1e-14) -> float:
    """Principal branch ``W_0`` on ``[-1/e, inf)`` by Halley's method."""
    branch = -1.0 / math.e
    if x < branch:
        if x > branch - 1e-15:
            x = branch
        else:
            raise OutOfDomain(f"W_0 undefined below -1/e (got {x})")
    if x == 0:
        return 0.0
    if x < -0.25:
        p = math.sqrt(max(2.0 * (1.0 + math.e * x), 0.0))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    elif x < 3:
        w = math.log1p(x) * (1 - math.log1p(math.log1p(x)) / (2 + math.log1p(x)))
    else:
        lx = math.log(x)
        w = lx - math.log(lx)
    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - x
        if f == 0 or w == -1.0:
            break
        step = f / (ew * (w + 1) - (w + 2) * f / (2 * w + 2))
        w -= step
        if abs(step) <= tol * (1 + abs(w)):
            break
    return w


def lambert_pressure_bound(z_abs: float, c: float) -> float:
    """``-W(-C|z|)/C``, bounding the pressure and the fixed point of ``z exp(C mu)``."""
    if z_abs < 0:
        raise OutOfDomain("|z| must be non-negative")
    if z_abs * c * math.e > 1 + 1e-12:
        raise OutOfDomain(f"|z| = {z_abs} exceeds 1/(eC) = {classical_bound(c)}")
    return -lambert_w(-c * z_abs) / c


@dataclass(frozen=True)
class FirstCorrection:
    r2: float
    r1: float
    ratio: float
    delta: float


def first_correction_bound(c: float, g2: float) -> FirstCorrection:
    """Radius from keeping ``g(2)`` exactly, at the trial point ``mu = g(2)**-1/2``.

    Odd and even ``g(n)`` are bounded through powers of ``g(2)``, which
    gives ``Psi(mu) <= (C/sqrt(g2)) sinh(mu sqrt(g2)) + cosh(mu sqrt(g2))``.
    """
    if c <= 0 or g2 <= 0:
        raise InvalidG2("need C > 0 and g(2) > 0")
    if g2 > c * c * (1 + 1e-12):
        raise InvalidG2(f"g(2) = {g2} exceeds C**2 = {c * c}")
    s = math.sqrt(g2)
    r2 = 1.0 / (s * math.e + (c - s) * math.sinh(1.0))
    r1 = classical_bound(c)
    return FirstCorrection(r2, r1, r2 / r1, s / c)


@dataclass(frozen=True)
class RStar:
    r_star: float
    mu_star: float
    iterations: int
    mu_cap: float
    mode: str


def optimize_r_star(psi, mode: str = "upper", c: float | None = None, mu_cap: float | None = None) -> RStar:
    """``r* = max_mu mu / Psi(mu)`` and its maximizer ``mu*``.

    The search runs over ``[0, mu_cap]`` (default ``10/C``); a maximum at the
    cap triggers one retry with a ten times larger cap before
    :class:`NoInteriorMax` is raised.
    """
    f, c = _resolve(psi, mode, c)
    if abs(f(0.0) - 1.0) > 1e-12:
        raise ValueError("Psi(0) must equal 1")
    cap = 10.0 / c if mu_cap is None else float(mu_cap)
    for attempt in range(2):
        best = maximize(lambda mu: mu / f(mu), 0.0, cap)
        if not best.at_upper:
            return RStar(best.value, best.x, best.iterations, cap, mode)
        cap *= 10.0
    raise NoInteriorMax(f"mu/Psi(mu) still increasing at mu = {cap / 10}")


def fixed_point_mu_z(
    z_abs: float,
    psi,
    mode: str = "upper",
    c: float | None = None,
    mu_star: float | None = None,
    tol: float = FIXED_POINT_TOL,
    max_iter: int = 10_000,
) -> float:
    """Smallest solution of ``mu = |z| Psi(mu)``.

    Runs the increasing iteration from ``mu = 0``.  Near tangency
    (``|z|`` close to ``r*``) convergence is only algebraic, so after
    ``max_iter`` steps the root is finished by bisection on
    ``mu - |z| Psi(mu)`` over ``[mu_k, mu*]``, where that function increases.
    """
    f, c = _resolve(psi, mode, c)
    if z_abs < 0:
        raise ValueError("|z| must be non-negative")
    if z_abs == 0:
        return 0.0
    if mu_star is None:
        mu_star = optimize_r_star(f, c=c).mu_star
    mu = 0.0
    for _ in range(max_iter):
        nxt = z_abs * f(mu)
        if nxt > mu_star * (1 + 1e-9):
            raise NoConvergence(f"iteration passed mu* = {mu_star}; |z| = {z_abs} exceeds r*")
        if abs(nxt - mu) * c < tol:
            return nxt
        mu = nxt

    def h(m):
        return m - z_abs * f(m)

    lo, hi = mu, mu_star
    if h(hi) < -tol / c:
        raise NoConvergence(f"no fixed point below mu* = {mu_star}; |z| = {z_abs} exceeds r*")
    while (hi - lo) * c > tol:
        mid = 0.5 * (lo + hi)
        if h(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def pi_iteration_sequence(z_abs: float, psi, mu0: float, k: int, mode: str = "upper", c: float | None = None) -> list[float]:
    """``Pi_z^1(mu0), ..., Pi_z^k(mu0)`` with ``Pi_z(mu) = |z| Psi(mu)``.

    Started from a point with ``Pi_z(mu0) <= mu0`` the sequence decreases to
    the smallest fixed point above the start's basin.
    """
    f, _ = _resolve(psi, mode, c)
    out = []
    mu = mu0
    for i in range(k):
        nxt = z_abs * f(mu)
        if i == 0 and nxt > mu0 * (1 + 1e-14):
            raise PreconditionViolated(f"|z| Psi(mu0) = {nxt} > mu0 = {mu0}")
        out.append(nxt)
        mu = nxt
    return out


def penrose_upper_bound(b: Sequence[float], n: int) -> float:
    """Upper bound on the cluster radius from the single coefficient ``b_n``.

    ``b[0]`` is ``b_1``.  For ``n = 2`` the sharper ``1/|b_2|`` is returned.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    bn = abs(float(b[n - 1]))
    if bn == 0:
        raise ZeroCoefficient(f"b_{n} vanishes")
    if n == 2:
        return 1.0 / bn
    return (n / ((n - 1) * bn / math.factorial(n))) ** (1.0 / (n - 1))


@dataclass
class ClusterReport:
    """Cluster-radius bounds; ``r_star`` is certified, ``r_star_estimate`` is not."""

    c_beta: float
    r_star: float
    mu_star: float
    r_classical: float
    r_first_correction: float | None
    r_star_estimate: float | None = None
    mu_star_estimate: float | None = None
    mu_z: float | None = None
    z_abs: float | None = None
    penrose_upper: dict[int, float] | None = None
    endpoint: bool = False
    metadata: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def cluster_report(
    vc: VertexCoefficients,
    z_abs: float | None = None,
    cluster_coeffs: Sequence[float] | None = None,
    estimate: bool = True,
) -> ClusterReport:
    """Run every cluster bound for one set of vertex coefficients."""
    c = float(vc.c_beta)
    cert = optimize_r_star(vc, "upper")
    g2 = vc.g.get(2)
    first = first_correction_bound(c, float(g2.upper)).r2 if g2 is not None and g2.upper > 0 else None
    rep = ClusterReport(
        c_beta=c,
        r_star=cert.r_star,
        mu_star=cert.mu_star,
        r_classical=classical_bound(c),
        r_first_correction=first,
        metadata={"truncation": vc.order, "psi_mode": "upper", "optimizer_iterations": cert.iterations},
    )
    if estimate:
        est = optimize_r_star(vc, "lower")
        rep.r_star_estimate = est.r_star
        rep.mu_star_estimate = est.mu_star
    if z_abs is not None:
        rep.z_abs = z_abs
        rep.mu_z = fixed_point_mu_z(z_abs, vc, mu_star=cert.mu_star)
        rep.endpoint = math.isclose(z_abs, cert.r_star, rel_tol=1e-9)
    if cluster_coeffs is not None:
        rep.penrose_upper = {
            n: penrose_upper_bound(cluster_coeffs, n) for n in range(2, len(cluster_coeffs) + 1) if cluster_coeffs[n - 1]
        }
    return rep
