"""Command-line entry point: ``virial-bounds {bounds,verify-trees,grt-table}``.

Exit codes: 0 success, 1 a verification check failed, 2 bad configuration,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from ._compat import tomllib
from .cluster import cluster_report
from .errors import NotTempered, VirialBoundsError
from .potentials import (
    HARD_SPHERE_DEGREE_CAP,
    GEntry,
    PairPotential,
    VertexCoefficients,
    c_beta,
    g_exact,
    g_monte_carlo,
    pad_submultiplicative,
    potential_from_config,
)
from .verify import run_verification
from .virial import LP_CONSTANT, grt_bound, grt_table, virial_report

SCHEMA = "virial-bounds/1"
EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 1, 2, 3
DEFAULT_ORDER = 14
DEFAULT_MC_ORDER = 5


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    potential: PairPotential
    order: int
    mc_order: int
    samples: int
    seed: int | None
    workers: int
    fmt: str
    certified_only: bool

    def __post_init__(self):
        if self.order < 2:
            raise ConfigError("--order must be at least 2")
        if self.samples < 0:
            raise ConfigError("--samples must be non-negative")
        if self.fmt not in ("json", "csv", "text"):
            raise ConfigError(f"unknown format {self.fmt!r}")


# configuration ---------------------------------------------------------------


def _count(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise argparse.ArgumentTypeError(f"{text} is not a whole number")
    return int(value)


def _read_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        cfg = json.loads(text) if p.suffix == ".json" else tomllib.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    cfg["_base"] = p.parent
    return cfg


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Merge flags over the config file over built-in defaults."""
    cfg = _read_config(args.config)
    pot_cfg = dict(cfg.get("potential", {}))
    params = dict(pot_cfg.get("parameters", {}))
    run = cfg.get("run", {})

    def pick(flag, key, default, table=run):
        value = getattr(args, flag)
        return value if value is not None else table.get(key, default)

    kind = args.potential or pot_cfg.get("kind")
    if kind is None:
        raise ConfigError("no potential given (use --potential or a config file)")
    for flag, key in (("radius", "radius"), ("exp", "exponent"), ("epsilon", "epsilon"), ("sigma", "sigma"), ("table", "table")):
        if getattr(args, flag) is not None:
            params[key] = getattr(args, flag)
    spec = {
        "kind": kind,
        "dimension": pick("dim", "dimension", 3, pot_cfg),
        "beta": pick("beta", "beta", 1.0, pot_cfg),
        "parameters": params,
    }
    base = cfg.get("_base") if args.table is None else None
    try:
        pot = potential_from_config(spec, base)
    except KeyError as exc:
        raise ConfigError(f"potential {kind!r} needs parameter {exc.args[0]!r}") from exc
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(
        potential=pot,
        order=int(pick("order", "order", _default_order(pot))),
        mc_order=int(pick("mc_order", "mc_order", DEFAULT_MC_ORDER)),
        samples=int(float(pick("samples", "samples", 0))),
        seed=pick("seed", "seed", None),
        workers=int(pick("workers", "workers", 1)),
        fmt=pick("format", "format", "json"),
        certified_only=bool(args.certified_only or run.get("certified_only", False)),
    )


def _default_order(p: PairPotential) -> int:
    if p.kind == "hard_sphere" and p.dim in HARD_SPHERE_DEGREE_CAP:
        return HARD_SPHERE_DEGREE_CAP[p.dim]
    return DEFAULT_ORDER


# bounds ----------------------------------------------------------------------


def vertex_coefficients(cfg: RunConfig, c: float) -> VertexCoefficients:
    """Exact values where known, Monte Carlo up to ``mc_order``, then padding."""
    p = cfg.potential
    cap = HARD_SPHERE_DEGREE_CAP.get(p.dim) if p.kind == "hard_sphere" else None
    vc = VertexCoefficients(c, degree_cap=cap)
    for n in range(2, cfg.order + 1):
        exact = g_exact(p, n, c)
        if exact is not None:
            vc = vc.with_entry(n, GEntry.exact(exact))
        elif n <= cfg.mc_order and cfg.samples > 0:
            if cfg.seed is None:
                raise ConfigError("a --seed is required when Monte Carlo sampling is used")
            est = g_monte_carlo(p, n, cfg.samples, [int(cfg.seed), n], workers=cfg.workers)
            vc = vc.with_entry(n, GEntry.monte_carlo(est, c**n))
        else:
            break
    return pad_submultiplicative(vc, cfg.order)


def _scrub(obj):
    """JSON-safe copy: non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _scrub(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_scrub(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    return obj


def _normalize(section: dict, c: float, keys) -> None:
    for key in keys:
        if section.get(key) is not None:
            section[key + "_normalized"] = section[key] * c


def bounds_report(cfg: RunConfig) -> dict:
    p = cfg.potential
    c = c_beta(p)
    out = {
        "schema": SCHEMA,
        "potential": p.describe(),
        "c_beta": c,
        "settings": {
            "order": cfg.order,
            "mc_order": cfg.mc_order,
            "samples": cfg.samples,
            "seed": cfg.seed,
            "certified_only": cfg.certified_only,
        },
    }
    if c == 0:
        out["status"] = "infinite_radius"
        out["cluster"] = {"r_star": math.inf}
        out["virial"] = {"m_star": math.inf}
        return _scrub(out)
    est = not cfg.certified_only
    vc = vertex_coefficients(cfg, c)
    cl = cluster_report(vc, estimate=est).as_dict()
    vr = virial_report(vc, cl["r_star"], cl["mu_star"], estimate=est).as_dict()
    if not est:
        for section in (cl, vr):
            for key in [k for k in section if "estimate" in k]:
                del section[key]
    _normalize(cl, c, ("r_star", "r_star_estimate", "r_classical", "r_first_correction"))
    _normalize(vr, c, ("m_star", "m_star_estimate", "r_star_estimate", "r_star_certified", "r_grt", "r_lp_classical"))
    coeffs = []
    for n, e in vc.g.items():
        row = {"n": n, "upper": float(e.upper), "upper_normalized": float(e.upper) / c**n, "provenance": e.provenance}
        if est or e.provenance == "exact":
            row.update(value=float(e.value), value_normalized=float(e.value) / c**n, std_err=e.std_err)
        coeffs.append(row)
    out.update(status="ok", vertex_coefficients=coeffs, cluster=cl, virial=vr)
    return _scrub(out)


def _flatten(d: dict, prefix: str = "") -> list[tuple[str, object]]:
    rows = []
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            rows.extend(_flatten(v, key + "."))
        elif isinstance(v, list):
            for i, item in enumerate(v):
                rows.extend(_flatten(item, f"{key}.{i}.") if isinstance(item, dict) else [(f"{key}.{i}", item)])
        else:
            rows.append((key, v))
    return rows


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    rows = sorted(_flatten(report))
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        w.writerows(rows)
        return buf.getvalue()
    return "".join(f"{k}: {v}\n" for k, v in rows)


def cmd_bounds(args) -> int:
    try:
        cfg = build_run_config(args)
        report = bounds_report(cfg)
    except (ConfigError, NotTempered) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (VirialBoundsError, ArithmeticError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    sys.stdout.write(render(report, cfg.fmt))
    return 0


def cmd_verify(args) -> int:
    if not 1 <= args.n <= 7:
        print("config error: --n must lie in 1..7", file=sys.stderr)
        return EXIT_CONFIG
    checks = run_verification(args.n)
    ok = all(c.passed for c in checks)
    report = {"schema": SCHEMA, "n_max": args.n, "passed": ok, "checks": [c.as_dict() for c in checks]}
    sys.stdout.write(render(report, args.format or "json"))
    return 0 if ok else EXIT_VERIFY


def cmd_grt_table(args) -> int:
    rows = grt_table()
    grt = grt_bound(1.0)
    fmt = args.format or "csv"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "c1", "r_grt", "r_num"])
        for r in rows:
            w.writerow([r["n"], f"{r['c1']:.6f}", f"{r['r_grt']:.6f}", f"{r['r_num']:.4f}"])
        sys.stdout.write(buf.getvalue())
    else:
        report = {"schema": SCHEMA, "r_grt_normalized": grt.normalized, "r_lp_normalized": LP_CONSTANT, "rows": rows}
        sys.stdout.write(render(report, fmt))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="virial-bounds", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="cluster and virial radius bounds for one potential")
    b.add_argument("--config", help="TOML (or .json) file with [potential] and [run] tables")
    b.add_argument("--potential", choices=["hard-sphere", "power-law", "tabulated", "ideal"])
    b.add_argument("--dim", type=int)
    b.add_argument("--radius", type=float, help="hard-sphere radius a")
    b.add_argument("--exp", type=float, help="power-law exponent n")
    b.add_argument("--epsilon", type=float)
    b.add_argument("--sigma", type=float)
    b.add_argument("--beta", type=float)
    b.add_argument("--table", help="two-column CSV (r, phi) for tabulated potentials")
    b.add_argument("--order", type=int, help="truncation order N of Psi")
    b.add_argument("--mc-order", type=int, help="largest n estimated by Monte Carlo")
    b.add_argument("--samples", type=_count, help="Monte Carlo samples per g(n), e.g. 1e6")
    b.add_argument("--seed", type=int)
    b.add_argument("--workers", type=int)
    b.add_argument("--format", choices=["json", "csv", "text"])
    b.add_argument("--certified-only", action="store_true", help="omit every point estimate")
    b.set_defaults(func=cmd_bounds)

    v = sub.add_parser("verify-trees", help="run the combinatorial and series self-checks")
    v.add_argument("--n", type=int, default=4)
    v.add_argument("--format", choices=["json", "csv", "text"])
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("grt-table", help="GRT radii for inverse-power potentials, n = 4..8")
    g.add_argument("--format", choices=["json", "csv", "text"])
    g.set_defaults(func=cmd_grt_table)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
