"""Command-line entry point: ``trustgraph <subcommand>``.

Subcommands::

    construct  build a trust graph and write it as an edge list
    analyze    measure a stored graph and check every applicable bound
    deploy     seeded deployment trials with path-key establishment
    compromise single-node compromise sweep over key-reuse levels
    bounds     evaluate one closed-form bound
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bounds
from .constructions import ConstructionError, ConstructionSpec, build
from .experiment import (
    ConfigError,
    ExperimentConfig,
    default_output_dir,
    rows_to_csv,
    rows_to_json,
    run_deploy,
    write_deploy,
)
from .graph import (
    NO_NONADJACENT_PAIRS,
    TGraph,
    degree_stats,
    distance_summary,
    format_edge_list,
    load_edge_list,
    min_disjoint_paths,
)
from .keying import GraphShape, assign_reused, simulate_compromise
from .seeding import derive_seed

ANALYZE_COLUMNS = ("name", "direction", "value", "measured", "applicable", "holds", "reason")
# bound rows whose failure makes `analyze` exit nonzero
STRICT_CHECKS = frozenset(
    {
        "moore_storage_lower",
        "moore_reach_bound",
        "moore_storage_lower_disjoint",
        "mean_distance_lower",
        "mean_distance_upper",
    }
)
FLOAT_IDENTITY_TOL = 1e-12
COMPROMISE_COLUMNS = (
    "g",
    "trial",
    "key_seed",
    "victim",
    "keys",
    "revealed",
    "affected",
    "fraction",
    "bound",
    "holds",
)


# ---------------------------------------------------------------------------
# construct
# ---------------------------------------------------------------------------


def _spec_from_args(args) -> ConstructionSpec:
    if args.config:
        spec = ConstructionSpec.from_text(Path(args.config).read_text())
        return spec
    if args.kind is None:
        raise ConstructionError("need a construction kind or --config")
    values = {"kind": args.kind}
    for key in ("n", "q", "r", "u", "D", "f", "p", "seed"):
        v = getattr(args, key)
        if v is not None:
            values[key] = v
    values.setdefault("seed", 0)
    return ConstructionSpec.from_mapping(values)


def graph_header(spec: ConstructionSpec, g: TGraph) -> list[str]:
    lines = [f"spec: {spec.describe()}"]
    if g.n >= 1:
        theta_min, theta_max, edges = degree_stats(g)
        lines.append(f"n={g.n} edges={edges} theta_min={theta_min} theta_max={theta_max}")
    if g.n >= 2:
        s = distance_summary(g)
        lines.append(
            f"D={s.diameter} mean_distance={s.mean_distance!r} connected={str(s.connected).lower()}"
            + (" estimated=true" if s.estimated else "")
        )
    return lines


def cmd_construct(args) -> int:
    spec = _spec_from_args(args)
    g = build(spec)
    text = format_edge_list(g, graph_header(spec, g))
    _emit(text, args.out)
    return 0


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------


def analyze_graph(
    g: TGraph,
    exact_cap: int = 200,
    b: float | None = None,
    p_die: float | None = None,
    g_reuse: int | None = None,
) -> tuple[list[dict], dict]:
    """Measured quantities and bound checks for one graph.

    Returns ``(rows, summary)``; each row follows ``ANALYZE_COLUMNS``.
    """
    theta_min, theta_max, edges = degree_stats(g)
    s = distance_summary(g)
    rows: list[dict] = []

    def measured(name, value):
        rows.append({"name": name, "direction": "measured", "value": value, "applicable": True})

    measured("n", g.n)
    measured("edges", edges)
    measured("theta_min", theta_min)
    measured("theta_max", theta_max)
    measured("connected", s.connected)
    summary = {
        "n": g.n,
        "edges": edges,
        "theta_min": theta_min,
        "theta_max": theta_max,
        "connected": s.connected,
        "estimated": s.estimated,
    }
    if not s.connected:
        measured("finite_pairs", s.finite_pairs)
        measured("finite_mean", s.finite_mean)
        measured("finite_max", s.finite_max)
        rows.append(
            {
                "name": "bound_checks",
                "direction": "",
                "applicable": False,
                "reason": "graph disconnected; bound checks skipped",
            }
        )
        summary.update(diameter=None, mean_distance=None, f=None)
        return rows, summary

    D, d_bar = s.diameter, s.mean_distance
    measured("diameter", D)
    measured("mean_distance", d_bar)
    summary.update(diameter=D, mean_distance=d_bar)

    f = None
    if g.n <= exact_cap:
        f = min_disjoint_paths(g)
        measured("min_disjoint_paths", "complete" if f == NO_NONADJACENT_PAIRS else f)
    else:
        rows.append(
            {
                "name": "min_disjoint_paths",
                "direction": "measured",
                "applicable": False,
                "reason": f"skipped: n={g.n} exceeds exact cap {exact_cap}",
            }
        )
    summary["f"] = None if f == NO_NONADJACENT_PAIRS else f

    def check(report: bounds.BoundsReport, value, extra_ok=True, reason=None, rel_tol=0.0):
        row = report.as_dict()
        row.pop("inputs")
        row["measured"] = value
        if reason:
            row["reason"] = "; ".join(x for x in (row["reason"], reason) if x)
        row["holds"] = report.holds(value, rel_tol) if extra_ok else None
        rows.append(row)

    moore = bounds.moore_storage_lower(g.n, D)
    if D == 1:
        check(moore, theta_max, False, "bound precondition D=1 degenerate; not checked")
    elif theta_max <= 2:
        check(moore, theta_max, False, "theta_max <= 2; not checked")
    else:
        check(moore, theta_max)
    reach = bounds.moore_reach_bound(theta_max, D)
    check(reach, g.n)

    if f is not None and f != NO_NONADJACENT_PAIRS and f >= 1:
        cor = bounds.moore_storage_lower_disjoint(g.n, D, f)
        check(cor, theta_max, theta_max > 2 and D >= 2, None if D >= 2 else "D=1 degenerate")

    lower, upper = bounds.mean_distance_bounds(g.n, D, theta_min, theta_max)
    for rep in (lower, upper):
        check(rep, d_bar)
        if rep.applicable:
            # the sandwich is strict
            strict = d_bar > rep.value if rep.direction == "lower" else d_bar < rep.value
            rows[-1]["holds"] = strict

    if b is not None and p_die is not None:
        p_link = (1 - p_die) ** 2 * b / (g.n - 1)
        check(
            bounds.min_degree_for_connectivity(p_link, edges),
            theta_min,
            reason="connectivity design target; informational",
        )
        lo, hi = bounds.p_c_bounds(g.n, b, p_die, theta_min, theta_max)
        analytic = bounds.p_c_analytic(g.n, b, p_die, edges)
        check(lo, analytic, rel_tol=FLOAT_IDENTITY_TOL)
        check(hi, analytic, rel_tol=FLOAT_IDENTITY_TOL)
    if g_reuse is not None:
        rep = bounds.compromise_fraction_bound(g.n, D, theta_min, theta_max, g_reuse)
        check(rep, None, False, "reference value only")
    return rows, summary


def cmd_analyze(args) -> int:
    g = load_edge_list(args.graph)
    rows, summary = analyze_graph(g, args.exact_cap, args.b, args.p_die, args.g)
    if args.format == "json":
        text = json.dumps({"graph": str(args.graph), "summary": summary, "rows": rows}, indent=2, default=str)
        text += "\n"
    else:
        text = rows_to_csv(rows, ANALYZE_COLUMNS, header={"graph": str(args.graph)})
    _emit(text, args.out)
    if args.plot:
        from .plots import plot_graph_profile

        target = _plot_path(args.out, "analyze")
        plot_graph_profile(g, target)
    failed = [r for r in rows if r.get("holds") is False and r["name"] in STRICT_CHECKS]
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# deploy
# ---------------------------------------------------------------------------


def _deploy_config(args) -> ExperimentConfig:
    values: dict = {}
    if args.config:
        from .constructions import parse_key_values

        values.update(parse_key_values(Path(args.config).read_text()))
    flag_map = {
        "graph": args.graph,
        "b": args.b,
        "p_die": args.p_die,
        "keys": args.keys,
        "g": args.g,
        "compromise": args.compromise,
        "max_chain": args.max_chain,
        "iterate": args.iterate,
        "trials": args.trials,
        "seed": args.seed,
        "workers": args.workers,
        "exact_cap": args.exact_cap,
        "out": args.out,
        "format": args.format,
        "plot": args.plot,
    }
    values.update({k: v for k, v in flag_map.items() if v is not None})
    if args.construct:
        spec = ConstructionSpec.from_text(Path(args.construct).read_text())
        values.pop("graph", None)
        params = dict(spec.params)
        if "seed" in params:
            values["construction_seed"] = params.pop("seed")
        values.update(params, kind=spec.kind)
    if "g" in values and "keys" not in values and int(values["g"]) > 1:
        values["keys"] = "reused"
    return ExperimentConfig.from_mapping(values)


def cmd_deploy(args) -> int:
    cfg = _deploy_config(args)
    result = run_deploy(cfg)
    out_dir = Path(cfg.out) if cfg.out else default_output_dir()
    written = write_deploy(result, out_dir)
    if cfg.plot:
        from .plots import plot_deploy

        written.append(plot_deploy(result.rows, result.traces, out_dir / "deploy.png"))
    for path in written:
        print(path)
    for v in result.violations:
        print(f"VIOLATION {v}", file=sys.stderr)
    return 0 if result.ok else 1


# ---------------------------------------------------------------------------
# compromise
# ---------------------------------------------------------------------------


def compromise_sweep(g: TGraph, gs: list[int], trials: int, seed: int) -> list[dict]:
    """Single random victim per trial, fresh reuse assignment per trial."""
    s = distance_summary(g)
    theta_min, theta_max, _ = degree_stats(g)
    shape = GraphShape(g.n, s.diameter, theta_min, theta_max) if s.connected else None
    candidates = [v for v in range(g.n) if g.degree(v)]
    if not candidates:
        raise ValueError("graph has no edges")
    rows = []
    for reuse in gs:
        for i in range(trials):
            key_seed = derive_seed(seed, i, f"keys-g{reuse}")
            kg = assign_reused(g, reuse, key_seed)
            rng = np.random.default_rng(derive_seed(seed, i, f"victim-g{reuse}"))
            victim = candidates[int(rng.integers(len(candidates)))]
            rep = simulate_compromise(kg, [victim], shape)
            rows.append(
                {
                    "g": reuse,
                    "trial": i,
                    "key_seed": key_seed,
                    "victim": victim,
                    "keys": kg.key_count,
                    "revealed": len(rep.revealed),
                    "affected": rep.affected,
                    "fraction": rep.fraction,
                    "bound": rep.bound,
                    "holds": rep.bound_holds,
                }
            )
    return rows


def cmd_compromise(args) -> int:
    g = load_edge_list(args.graph)
    gs = [int(x) for x in str(args.g).split(",")]
    rows = compromise_sweep(g, gs, args.trials, args.seed)
    header = {"graph": str(args.graph), "g": gs, "trials": args.trials, "seed": args.seed}
    if args.format == "json":
        text = rows_to_json(rows, header=header)
    else:
        text = rows_to_csv(rows, COMPROMISE_COLUMNS, header=header)
    _emit(text, args.out)
    if args.plot:
        from .plots import plot_compromise

        plot_compromise(rows, _plot_path(args.out, "compromise"))
    return 0 if all(r["holds"] is not False for r in rows) else 1


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------


def _number(raw: str):
    try:
        return int(raw)
    except ValueError:
        return float(raw)


def cmd_bounds(args) -> int:
    if args.name not in bounds.REGISTRY:
        raise ValueError(f"unknown bound {args.name!r}; choose from {', '.join(bounds.REGISTRY)}")
    kwargs = {}
    for item in args.params:
        if "=" not in item:
            raise ValueError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        kwargs["lam" if k == "lambda" else k] = _number(v)
    result = bounds.REGISTRY[args.name](**kwargs)
    reports = list(result) if isinstance(result, tuple) else [result]
    if args.format == "json":
        text = json.dumps([r.as_dict() for r in reports], indent=2) + "\n"
    else:
        text = rows_to_csv([r.csv_row() for r in reports], bounds.CSV_FIELDS)
    _emit(text, args.out)
    return 0


# ---------------------------------------------------------------------------


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _plot_path(out: str | None, stem: str) -> Path:
    if out:
        return Path(out).with_suffix(".png")
    d = default_output_dir()
    d.mkdir(parents=True, exist_ok=True)
    return d / f"{stem}.png"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trustgraph", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build a trust graph")
    p.add_argument("kind", nargs="?", help="complete | heuristic | de-bruijn | variant | random")
    p.add_argument("--config", help="construction spec file (key = value lines)")
    for name, typ in (("n", int), ("q", int), ("r", int), ("u", int), ("D", int), ("f", int), ("p", float)):
        p.add_argument(f"--{name}", type=typ)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("analyze", help="measure a stored graph and check bounds")
    p.add_argument("graph")
    p.add_argument("--exact-cap", type=int, default=200)
    p.add_argument("--b", type=float)
    p.add_argument("--p-die", type=float)
    p.add_argument("--g", type=int)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.add_argument("--plot", action="store_true", help="also write a PNG next to --out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("deploy", help="seeded deployment trials")
    p.add_argument("--config", help="experiment config file (key = value lines)")
    p.add_argument("--graph", help="trust graph edge list")
    p.add_argument("--construct", help="construction spec file instead of --graph")
    p.add_argument("--b", type=float)
    p.add_argument("--p-die", type=float)
    p.add_argument("--keys", choices=("distinct", "reused"))
    p.add_argument("--g", type=int)
    p.add_argument("--compromise", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--max-chain", type=int)
    p.add_argument("--iterate", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--exact-cap", type=int)
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--out", help="output directory")
    p.add_argument("--plot", action="store_true", default=None)
    p.set_defaults(func=cmd_deploy)

    p = sub.add_parser("compromise", help="single-victim compromise sweep")
    p.add_argument("graph")
    p.add_argument("--g", default="3", help="comma-separated reuse levels")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_compromise)

    p = sub.add_parser("bounds", help="evaluate a closed-form bound")
    p.add_argument("name", help=", ".join(bounds.REGISTRY))
    p.add_argument("params", nargs="*", help="key=value arguments")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConstructionError, ConfigError, ValueError, OSError) as exc:
        print(f"trustgraph {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
