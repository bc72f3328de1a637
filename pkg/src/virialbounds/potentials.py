"""Repulsive pair potentials and the vertex integrals built from them.

``g(n)`` is the integral over ``n`` points, each overlapping a particle pinned
at the origin (Mayer magnitude ``1 - exp(-beta*phi)``), weighted by the
Boltzmann factors between the ``n`` points.  The vertex sum
``Psi(mu) = 1 + sum_n mu**n g(n) / n!`` drives every radius bound downstream.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Mapping

import numpy as np
from scipy import integrate, special

from .errors import DegenerateSampler, NotTempered

__all__ = [
    "PairPotential",
    "GEntry",
    "VertexCoefficients",
    "MCEstimate",
    "PsiBounds",
    "HARD_SPHERE_DEGREE_CAP",
    "MC_INFLATION",
    "ball_volume",
    "c_beta",
    "c_beta_quadrature",
    "g_exact",
    "g_monte_carlo",
    "RadialSampler",
    "pad_submultiplicative",
    "psi",
    "potential_from_config",
    "load_potential",
    "read_table_csv",
]

# maximal number of points in the closed unit ball with pairwise distances > 1
HARD_SPHERE_DEGREE_CAP = {1: 2, 2: 5, 3: 12}

# Monte Carlo estimates enter certified bounds as estimate + MC_INFLATION * std_err
MC_INFLATION = 3.0

KINDS = ("hard_sphere", "power_law", "tabulated", "ideal")


def ball_volume(d: int, radius: float = 1.0) -> float:
    # V_d = V_{d-2} * 2 pi / d keeps low dimensions exact (V_1 = 2 r)
    v = 1.0 if d % 2 == 0 else 2.0
    for k in range(2 + d % 2, d + 1, 2):
        v *= 2 * math.pi / k
    return v * radius**d


@dataclass(frozen=True)
class PairPotential:
    """Radial, non-negative two-body potential at inverse temperature ``beta``.

    Use the classmethod constructors; ``kind`` selects which parameters are
    meaningful.  Tabulated potentials are interpolated linearly in ``phi``,
    held constant below the first radius and set to zero past the last one.
    """

    kind: str
    dim: int
    beta: float = 1.0
    radius: float | None = None
    epsilon: float | None = None
    sigma: float | None = None
    exponent: float | None = None
    table_r: tuple[float, ...] = ()
    table_phi: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if self.kind == "tabulated":
            if any(p < 0 for p in self.table_phi):
                raise ValueError("repulsive potentials need phi >= 0")
            if list(self.table_r) != sorted(self.table_r) or len(self.table_r) < 2:
                raise ValueError("table radii must be increasing, at least two rows")

    @classmethod
    def hard_sphere(cls, radius: float, dim: int, beta: float = 1.0) -> "PairPotential":
        if radius <= 0:
            raise ValueError("radius must be positive")
        return cls("hard_sphere", dim, beta, radius=radius)

    @classmethod
    def power_law(
        cls, exponent: float, dim: int, epsilon: float = 1.0, sigma: float = 1.0, beta: float = 1.0
    ) -> "PairPotential":
        if epsilon < 0 or sigma <= 0:
            raise ValueError("need epsilon >= 0 and sigma > 0")
        return cls("power_law", dim, beta, epsilon=epsilon, sigma=sigma, exponent=exponent)

    @classmethod
    def tabulated(cls, r, phi, dim: int, beta: float = 1.0) -> "PairPotential":
        return cls("tabulated", dim, beta, table_r=tuple(map(float, r)), table_phi=tuple(map(float, phi)))

    @classmethod
    def ideal(cls, dim: int, beta: float = 1.0) -> "PairPotential":
        return cls("ideal", dim, beta)

    def phi(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "hard_sphere":
            return np.where(r <= self.radius, np.inf, 0.0)
        if self.kind == "power_law":
            with np.errstate(divide="ignore", over="ignore"):
                return self.epsilon * (self.sigma / r) ** self.exponent
        if self.kind == "tabulated":
            return np.interp(r, self.table_r, self.table_phi, right=0.0)
        return np.zeros_like(r)

    def boltzmann(self, r):
        """``exp(-beta * phi(r))``."""
        if self.kind == "hard_sphere":
            return (np.asarray(r) > self.radius).astype(float)
        with np.errstate(invalid="ignore", over="ignore"):
            return np.exp(-self.beta * self.phi(r))

    def mayer_magnitude(self, r):
        """``1 - exp(-beta * phi(r))``, in ``[0, 1]``."""
        if self.kind == "hard_sphere":
            return (np.asarray(r) <= self.radius).astype(float)
        with np.errstate(invalid="ignore", over="ignore"):
            return -np.expm1(-self.beta * self.phi(r))

    def describe(self) -> dict:
        out = {"kind": self.kind, "dimension": self.dim, "beta": self.beta}
        for name in ("radius", "epsilon", "sigma", "exponent"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        if self.kind == "tabulated":
            out["table_rows"] = len(self.table_r)
        return out


# C(beta) --------------------------------------------------------------------


def _check_tempered(p: PairPotential) -> None:
    if p.kind == "power_law" and p.epsilon * p.beta > 0 and p.exponent <= p.dim:
        raise NotTempered(f"power law with exponent {p.exponent} <= dimension {p.dim} is not integrable")


def c_beta_quadrature(p: PairPotential) -> float:
    """``C(beta)`` by adaptive radial quadrature of the Mayer magnitude."""
    _check_tempered(p)
    shell = p.dim * ball_volume(p.dim)

    def integrand(r):
        return float(p.mayer_magnitude(r)) * r ** (p.dim - 1)

    opts = dict(epsabs=1e-14, epsrel=1e-12, limit=500)
    if p.kind == "hard_sphere":
        val, _ = integrate.quad(integrand, 0.0, p.radius, **opts)
    elif p.kind == "ideal" or p.beta == 0:
        return 0.0
    elif p.kind == "power_law":
        if p.epsilon == 0:
            return 0.0
        scale = p.sigma * (p.beta * p.epsilon) ** (1.0 / p.exponent)
        head, _ = integrate.quad(integrand, 0.0, scale, **opts)
        tail, _ = integrate.quad(integrand, scale, np.inf, **opts)
        val = head + tail
    else:
        rs = (0.0,) + tuple(x for x in p.table_r if x > 0)
        val = 0.0
        for a, b in zip(rs[:-1], rs[1:]):
            piece, _ = integrate.quad(integrand, a, b, **opts)
            val += piece
    return shell * val


def c_beta(p: PairPotential, method: str = "auto") -> float:
    """Temperedness constant ``C(beta) = int |exp(-beta phi) - 1| dx``.

    Closed forms are used for hard spheres (ball volume) and power laws
    (``V_d(1) sigma**d (beta eps)**(d/n) Gamma(1 - d/n)``); tabulated
    potentials always go through quadrature.
    """
    _check_tempered(p)
    if method == "quadrature" or (method == "auto" and p.kind == "tabulated"):
        return c_beta_quadrature(p)
    if p.kind == "hard_sphere":
        return ball_volume(p.dim, p.radius)
    if p.kind == "ideal" or p.beta == 0:
        return 0.0
    if p.kind == "power_law":
        d, n = p.dim, p.exponent
        if p.epsilon == 0:
            return 0.0
        return ball_volume(d) * p.sigma**d * (p.beta * p.epsilon) ** (d / n) * math.gamma(1 - d / n)
    raise ValueError(f"no closed form for {p.kind} potentials")


# vertex integrals -----------------------------------------------------------


def g_exact(p: PairPotential, n: int, c: float | None = None):
    """Closed-form ``g(n)`` when one is known, else ``None``.

    Known cases: ``g(1) = C`` for every potential; hard rods in one
    dimension for all ``n``; ``g(2)`` for hard disks; and zero beyond the
    packing degree of hard spheres.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if c is None:
        c = c_beta(p)
    if n == 1:
        return c
    if p.kind == "ideal" or c == 0:
        return 0.0
    if p.kind != "hard_sphere":
        return None
    cap = HARD_SPHERE_DEGREE_CAP.get(p.dim)
    if cap is not None and n > cap:
        return 0.0
    if p.dim == 1:
        return c**2 / 4 if n == 2 else 0.0
    if p.dim == 2 and n == 2:
        return c**2 * 3 * math.sqrt(3) / (4 * math.pi)
    return None


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    std_err: float
    samples: int


def _uniform_ball(rng: np.random.Generator, size, d: int, radius) -> np.ndarray:
    """Points uniform in balls of the given radii (broadcast over ``size``)."""
    x = rng.standard_normal(size + (d,))
    x /= np.linalg.norm(x, axis=-1, keepdims=True)
    u = rng.random(size)
    return x * (np.asarray(radius) * u ** (1.0 / d))[..., None]


class RadialSampler:
    """Draws points with density ``(1 - exp(-beta phi(|x|))) / C(beta)``.

    ``method="exact"`` is available for hard spheres (uniform ball) and power
    laws: writing the Mayer magnitude as ``P(E <= beta phi(r))`` with ``E``
    standard exponential makes ``E`` Gamma(1 - d/n) distributed and the
    point uniform in the ball where ``beta phi > E``.  ``"inverse_cdf"``
    tabulates the radial CDF on a log grid and works for any potential.
    """

    def __init__(self, p: PairPotential, method: str = "auto", grid_points: int = 1 << 16):
        if c_beta(p) == 0:
            raise DegenerateSampler("Mayer magnitude vanishes identically; nothing to sample")
        if method == "auto":
            method = "exact" if p.kind in ("hard_sphere", "power_law") else "inverse_cdf"
        if method == "exact" and p.kind not in ("hard_sphere", "power_law"):
            raise ValueError(f"no exact sampler for {p.kind} potentials")
        self.potential = p
        self.method = method
        if method == "inverse_cdf":
            self._build_cdf(grid_points)

    def _build_cdf(self, grid_points: int) -> None:
        p = self.potential
        if p.kind == "hard_sphere":
            lo, hi = p.radius * 1e-9, p.radius
        elif p.kind == "power_law":
            scale = p.sigma * (p.beta * p.epsilon) ** (1.0 / p.exponent)
            # tail mass beyond hi is O((hi/scale)**(d - n)), below 1e-12 here
            hi = scale * 1e-12 ** (1.0 / (p.dim - p.exponent))
            lo = scale * 1e-6
        else:
            hi = p.table_r[-1]
            lo = max(min(x for x in p.table_r if x > 0) * 1e-3, hi * 1e-9)
        r = np.concatenate(([0.0], np.geomspace(lo, hi, grid_points)))
        if p.kind == "tabulated":
            r = np.union1d(r, np.asarray(p.table_r))
        dens = p.mayer_magnitude(r) * r ** (p.dim - 1)
        cdf = integrate.cumulative_trapezoid(dens, r, initial=0.0)
        keep = np.concatenate(([True], np.diff(cdf) > 0))
        self._r = r[keep]
        self._cdf = cdf[keep] / cdf[-1]

    def sample(self, rng: np.random.Generator, size: tuple[int, ...]) -> np.ndarray:
        p = self.potential
        d = p.dim
        if self.method == "exact":
            if p.kind == "hard_sphere":
                return _uniform_ball(rng, size, d, p.radius)
            e = rng.gamma(1.0 - d / p.exponent, size=size)
            radius = p.sigma * (p.beta * p.epsilon / e) ** (1.0 / p.exponent)
            return _uniform_ball(rng, size, d, radius)
        u = rng.random(size)
        radius = np.interp(u, self._cdf, self._r)
        x = rng.standard_normal(size + (d,))
        x /= np.linalg.norm(x, axis=-1, keepdims=True)
        return x * radius[..., None]


def _chunk_moments(p: PairPotential, sampler: RadialSampler, n: int, size: int, seed_seq) -> tuple[float, float]:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    pts = sampler.sample(rng, (size, n))
    weight = np.ones(size)
    for i in range(n):
        for j in range(i + 1, n):
            dist = np.linalg.norm(pts[:, i] - pts[:, j], axis=-1)
            weight *= p.boltzmann(dist)
    return math.fsum(weight), math.fsum(weight * weight)


def g_monte_carlo(
    p: PairPotential,
    n: int,
    samples: int,
    seed,
    workers: int = 1,
    chunk: int = 1 << 16,
    sampler: RadialSampler | str = "auto",
) -> MCEstimate:
    """Importance-sampled estimate of ``g(n)`` and its standard error.

    Samples are cut into fixed-size chunks, each with its own child of
    ``seed`` (an int or a sequence of ints).  Chunk sums are combined with
    ``math.fsum``, so the result does not depend on ``workers``.
    """
    if n < 2:
        raise ValueError("Monte Carlo is only needed for n >= 2")
    if samples < 2:
        raise ValueError("need at least two samples")
    c = c_beta(p)
    if not isinstance(sampler, RadialSampler):
        sampler = RadialSampler(p, sampler)
    sizes = [chunk] * (samples // chunk)
    if samples % chunk:
        sizes.append(samples % chunk)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(args):
        size, ss = args
        return _chunk_moments(p, sampler, n, size, ss)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            moments = list(pool.map(run, zip(sizes, seeds)))
    else:
        moments = [run(a) for a in zip(sizes, seeds)]
    s1 = math.fsum(m[0] for m in moments)
    s2 = math.fsum(m[1] for m in moments)
    mean = s1 / samples
    var = max(s2 - samples * mean * mean, 0.0) / (samples - 1)
    scale = c**n
    return MCEstimate(mean * scale, math.sqrt(var / samples) * scale, samples)


# coefficient table ----------------------------------------------------------


@dataclass(frozen=True)
class GEntry:
    """One ``g(n)``: point value, certified upper value and provenance."""

    value: float
    upper: float
    provenance: str
    std_err: float = 0.0

    @classmethod
    def exact(cls, value) -> "GEntry":
        return cls(value, value, "exact")

    @classmethod
    def monte_carlo(cls, est: MCEstimate, ceiling: float) -> "GEntry":
        upper = min(est.estimate + MC_INFLATION * est.std_err, ceiling)
        return cls(est.estimate, upper, "monte_carlo", est.std_err)

    def as_dict(self) -> dict:
        return {
            "value": float(self.value),
            "upper": float(self.upper),
            "provenance": self.provenance,
            "std_err": float(self.std_err),
        }


@dataclass(frozen=True)
class VertexCoefficients:
    """``C(beta)`` together with the known ``g(1..N)``.

    ``degree_cap`` marks a polynomial vertex sum (hard spheres): ``g(n) = 0``
    for ``n`` above it, so no exponential tail is needed.
    """

    c_beta: float
    g: Mapping[int, GEntry] = field(default_factory=dict)
    degree_cap: int | None = None

    def __post_init__(self):
        g = dict(self.g)
        if 1 not in g:
            g[1] = GEntry.exact(self.c_beta)
        elif float(g[1].value) != float(self.c_beta):
            raise ValueError("g(1) must equal C(beta)")
        object.__setattr__(self, "g", dict(sorted(g.items())))

    @classmethod
    def from_values(cls, c, values: Mapping[int, object], degree_cap: int | None = None):
        """Coefficients taken as exact values, e.g. rational test data."""
        return cls(c, {n: GEntry.exact(v) for n, v in values.items()}, degree_cap)

    @classmethod
    def from_normalized(cls, c, ghat: Mapping[int, object], degree_cap: int | None = None):
        """Exact coefficients given in units of ``C**n``."""
        return cls.from_values(c, {n: v * c**n for n, v in ghat.items()}, degree_cap)

    @property
    def order(self) -> int:
        return max(self.g)

    def with_entry(self, n: int, entry: GEntry) -> "VertexCoefficients":
        g = dict(self.g)
        g[n] = entry
        return replace(self, g=g)

    def value(self, n: int):
        if n == 0:
            return 1
        return self.g[n].value

    def upper(self, n: int):
        if n == 0:
            return 1
        return self.g[n].upper

    def normalized(self) -> dict[int, float]:
        c = float(self.c_beta)
        return {n: float(e.value) / c**n for n, e in self.g.items()} if c else {}

    def _coeff_arrays(self, mode: str) -> np.ndarray:
        c = float(self.c_beta)
        out = np.zeros(self.order + 1)
        out[0] = 1.0
        for n in range(1, self.order + 1):
            e = self.g.get(n)
            if e is None:
                out[n] = c**n if mode == "upper" else 0.0
            else:
                out[n] = float(e.upper if mode == "upper" else e.value)
            out[n] /= math.factorial(n)
        return out

    def tail(self, mu: float) -> float:
        """Bound on ``sum_{n > N} mu**n g(n) / n!`` from ``g(n) <= C**n``."""
        x = mu * float(self.c_beta)
        n = self.order
        if self.degree_cap is not None:
            return math.fsum(x**k / math.factorial(k) for k in range(n + 1, self.degree_cap + 1))
        if x == 0:
            return 0.0
        return math.exp(x) * float(special.gammainc(n + 1, x))

    def psi_function(self, mode: str = "upper") -> Callable[[float], float]:
        """``Psi`` as a float function; ``mode`` is ``"upper"`` or ``"lower"``.

        ``"lower"`` sums the point values and stops at ``N``; ``"upper"`` uses
        inflated values and adds the tail bound, so it is certified.
        """
        if mode not in ("upper", "lower"):
            raise ValueError("mode must be 'upper' or 'lower'")
        coeffs = self._coeff_arrays(mode)[::-1]
        with_tail = mode == "upper"

        def f(mu: float) -> float:
            acc = 0.0
            for a in coeffs:
                acc = acc * mu + a
            if with_tail:
                acc += self.tail(mu)
            return acc

        return f

    def entries(self) -> list[dict]:
        return [{"n": n, **e.as_dict()} for n, e in self.g.items()]


def pad_submultiplicative(vc: VertexCoefficients, up_to: int) -> VertexCoefficients:
    """Fill missing ``g(n)``, ``n <= up_to``, from ``g(n+m) <= g(n) g(m)``.

    Point values use point estimates; upper values use the certified
    (inflated) ones.  Beyond a hard-sphere degree cap entries are exact zeros.
    """
    g = dict(vc.g)
    for n in range(2, up_to + 1):
        if n in g:
            continue
        if vc.degree_cap is not None and n > vc.degree_cap:
            g[n] = GEntry.exact(0)
            continue
        splits = [(k, n - k) for k in range(1, n // 2 + 1)]
        value = min(g[a].value * g[b].value for a, b in splits)
        upper = min(g[a].upper * g[b].upper for a, b in splits)
        g[n] = GEntry(value, upper, "bound")
    return replace(vc, g=g)


@dataclass(frozen=True)
class PsiBounds:
    lower: float
    upper: float


def psi(vc: VertexCoefficients, mu: float) -> PsiBounds:
    """Point-estimate and certified values of the vertex sum at ``mu``."""
    if mu < 0:
        raise ValueError("mu must be non-negative")
    return PsiBounds(vc.psi_function("lower")(mu), vc.psi_function("upper")(mu))


# configuration --------------------------------------------------------------


def read_table_csv(path) -> tuple[list[float], list[float]]:
    """Two-column ``r, phi`` table; a non-numeric first row is a header."""
    rs, phis = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                r, ph = float(row[0]), float(row[1])
            except ValueError:
                if rs:
                    raise
                continue
            rs.append(r)
            phis.append(ph)
    return rs, phis


def potential_from_config(cfg: Mapping, base_dir: Path | None = None) -> PairPotential:
    """Build a potential from ``{kind, parameters, beta, dimension}``."""
    kind = str(cfg["kind"]).replace("-", "_")
    params = dict(cfg.get("parameters", {}))
    dim = int(cfg.get("dimension", params.pop("dimension", 3)))
    beta = float(cfg.get("beta", 1.0))
    if kind == "hard_sphere":
        return PairPotential.hard_sphere(float(params["radius"]), dim, beta)
    if kind == "power_law":
        return PairPotential.power_law(
            float(params["exponent"]),
            dim,
            epsilon=float(params.get("epsilon", 1.0)),
            sigma=float(params.get("sigma", 1.0)),
            beta=beta,
        )
    if kind == "tabulated":
        table = Path(params["table"])
        if base_dir is not None and not table.is_absolute():
            table = base_dir / table
        r, ph = read_table_csv(table)
        return PairPotential.tabulated(r, ph, dim, beta)
    if kind == "ideal":
        return PairPotential.ideal(dim, beta)
    raise ValueError(f"unknown potential kind {cfg['kind']!r}")


def load_potential(path) -> PairPotential:
    """Read a potential definition from a ``.json`` or ``.toml`` file."""
    path = Path(path)
    if path.suffix == ".json":
        cfg = json.loads(path.read_text())
    else:
        from ._compat import tomllib

        cfg = tomllib.loads(path.read_text())
    cfg = cfg.get("potential", cfg)
    return potential_from_config(cfg, path.parent)
