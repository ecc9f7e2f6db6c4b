"""Seeded construct -> deploy -> establish -> measure pipeline.

Each trial draws its randomness from streams derived from
``(master seed, trial index, purpose)``, so results do not depend on how many
worker processes run the trials.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import bounds
from .constructions import ConstructionSpec, build, parse_key_values
from .deployment import (
    PhysicalModel,
    deployed_metrics,
    establish_path_keys,
    overlay,
    physical_neighbor_distances,
    sample_physical,
)
from .graph import (
    NO_NONADJACENT_PAIRS,
    SAMPLING_THRESHOLD,
    TGraph,
    degree_stats,
    distance_summary,
    load_edge_list,
    min_disjoint_shortest_paths,
)
from .keying import GraphShape, assign_distinct, assign_reused, simulate_compromise
from .seeding import derive_seed

OUTPUT_DIR_ENV = "TRUSTGRAPH_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "trustgraph-out"

# frozen column order; append new metrics at the end only
TRIAL_COLUMNS = (
    "trial",
    "seed",
    "alive",
    "trusted",
    "virtual",
    "established",
    "unconverted",
    "p_c_trial",
    "p_c_analytic",
    "D_DT",
    "d_DT_connected",
    "d_DT_mean",
    "d_DT_neighbors",
    "W_max",
    "W_bar",
    "W_bar_conversions",
    "thm4_bound",
    "thm4_holds",
    "keys",
    "g",
    "victim",
    "p_compromise",
    "thm9_bound",
    "thm9_holds",
)


class ConfigError(ValueError):
    pass


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR))


@dataclass
class ExperimentConfig:
    graph: str | None = None
    construction: dict = field(default_factory=dict)
    b: float = 0.0
    p_die: float = 0.0
    keys: str = "distinct"
    g: int = 1
    compromise: bool = False
    max_chain: int | None = None
    iterate: bool = True
    trials: int = 1
    seed: int = 0
    workers: int = 1
    exact_cap: int = 200
    sampling_threshold: int = SAMPLING_THRESHOLD
    out: str | None = None
    format: str = "csv"
    plot: bool = False

    def validate(self) -> None:
        if (self.graph is None) == (not self.construction):
            raise ConfigError("give exactly one of a graph file or a construction")
        if self.construction:
            ConstructionSpec.from_mapping(self.construction)
        if self.b < 0:
            raise ConfigError(f"b must be >= 0, got {self.b}")
        if not 0.0 <= self.p_die < 1.0:
            raise ConfigError(f"p_die must lie in [0, 1), got {self.p_die}")
        if self.keys not in ("distinct", "reused"):
            raise ConfigError(f"keys must be 'distinct' or 'reused', got {self.keys!r}")
        if self.g < 1:
            raise ConfigError(f"g must be >= 1, got {self.g}")
        if self.keys == "distinct" and self.g != 1:
            raise ConfigError("g > 1 needs keys = reused")
        if self.max_chain is not None and self.max_chain < 1:
            raise ConfigError(f"max_chain must be >= 1, got {self.max_chain}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")

    def echo(self) -> dict:
        """Settings that determine the results; output paths and workers excluded."""
        out = asdict(self)
        for k in ("out", "workers", "plot", "format"):
            out.pop(k)
        return out

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        return cls.from_mapping(parse_key_values(text))

    @classmethod
    def from_mapping(cls, values: dict) -> "ExperimentConfig":
        known = {f.name: f for f in fields(cls)}
        cfg = cls()
        construction = {}
        for key, raw in values.items():
            key = key.replace("-", "_")
            if key in ("kind", "n", "q", "r", "u", "D", "f", "p") or (
                key == "construction_seed"
            ):
                construction["seed" if key == "construction_seed" else key] = raw
                continue
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            setattr(cfg, key, _coerce(known[key].type, raw))
        if construction:
            construction.setdefault("seed", cfg.seed)
            cfg.construction = construction
        return cfg


def _coerce(type_name, raw):
    if not isinstance(raw, str):
        return raw
    t = str(type_name)
    if raw.lower() in ("none", ""):
        return None
    if t.startswith("bool"):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"not a boolean: {raw!r}")
    if t.startswith("int"):
        return int(raw)
    if t.startswith("float"):
        return float(raw)
    return raw


@dataclass(frozen=True)
class GraphFacts:
    """Trust-graph measurements shared by every trial."""

    n: int
    edge_count: int
    theta_min: int
    theta_max: int
    D: int
    d_bar: float
    connected: bool
    f_shortest: int | None

    @property
    def thm4_f(self) -> int:
        # unmeasured or complete: fall back to the weakest hypothesis
        if self.f_shortest is None or self.f_shortest == NO_NONADJACENT_PAIRS:
            return 1
        return max(self.f_shortest, 1)


def measure_graph(t: TGraph, exact_cap: int, sampling_threshold: int) -> GraphFacts:
    theta_min, theta_max, edges = degree_stats(t)
    summary = distance_summary(t, threshold=sampling_threshold)
    f = min_disjoint_shortest_paths(t) if summary.connected and t.n <= exact_cap else None
    return GraphFacts(
        t.n,
        edges,
        theta_min,
        theta_max,
        summary.diameter,
        summary.mean_distance,
        summary.connected,
        f,
    )


def load_trust_graph(cfg: ExperimentConfig) -> TGraph:
    if cfg.graph is not None:
        return load_edge_list(cfg.graph)
    return build(ConstructionSpec.from_mapping(cfg.construction))


def moore_violation(facts: GraphFacts) -> str | None:
    """Describe a failed degree lower bound, or ``None`` if it holds or is inapplicable."""
    if not facts.connected or facts.theta_max <= 2 or facts.D < 2:
        return None
    report = bounds.moore_storage_lower(facts.n, facts.D)
    if facts.theta_max < report.value:
        return f"theta_max={facts.theta_max} < 1 + n^(1/D) = {report.value!r}"
    return None


def run_trial(t: TGraph, facts: GraphFacts, cfg: ExperimentConfig, i: int) -> tuple[dict, dict]:
    """One deployment; returns the CSV row and the JSON trace."""
    seed = derive_seed(cfg.seed, i, "physical")
    model = PhysicalModel(t.n, cfg.b, cfg.p_die, seed)
    deployed = overlay(t, sample_physical(model))

    summary = deployed_metrics(deployed)
    nbr = physical_neighbor_distances(deployed)
    max_chain = cfg.max_chain if cfg.max_chain is not None else t.n
    done, energy = establish_path_keys(deployed, max_chain, cfg.iterate)

    pairs = math.comb(t.n, 2)
    D_DT = summary.finite_max
    thm4 = bounds.deployed_mean_distance_bound(
        facts.d_bar, facts.D, D_DT, facts.theta_min, t.n, cfg.b, cfg.p_die, facts.thm4_f
    )
    thm4_holds = thm4.holds(nbr.finite_mean) if nbr.pairs else None

    row = {
        "trial": i,
        "seed": seed,
        "alive": sum(deployed.alive),
        "trusted": len(deployed.trusted),
        "virtual": len(deployed.virtual),
        "established": len(done.established),
        "unconverted": energy.unconverted,
        "p_c_trial": len(deployed.trusted) / pairs,
        "p_c_analytic": bounds.p_c_analytic(t.n, cfg.b, cfg.p_die, facts.edge_count),
        "D_DT": D_DT,
        "d_DT_connected": summary.connected,
        "d_DT_mean": summary.finite_mean,
        "d_DT_neighbors": nbr.finite_mean,
        "W_max": energy.W_max,
        "W_bar": energy.W_bar,
        "W_bar_conversions": energy.W_bar_conversions,
        "thm4_bound": thm4.value,
        "thm4_holds": thm4_holds,
        "keys": cfg.keys,
        "g": cfg.g,
        "victim": None,
        "p_compromise": None,
        "thm9_bound": None,
        "thm9_holds": None,
    }
    if cfg.compromise and facts.edge_count:
        key_seed = derive_seed(cfg.seed, i, "keys")
        kg = assign_reused(t, cfg.g, key_seed) if cfg.keys == "reused" else assign_distinct(t)
        rng = np.random.default_rng(derive_seed(cfg.seed, i, "victim"))
        candidates = [v for v in range(t.n) if t.degree(v)]
        victim = candidates[int(rng.integers(len(candidates)))]
        shape = GraphShape(t.n, facts.D, facts.theta_min, facts.theta_max)
        rep = simulate_compromise(kg, [victim], shape if facts.connected else None)
        row.update(
            victim=victim,
            p_compromise=rep.fraction,
            thm9_bound=rep.bound,
            thm9_holds=rep.bound_holds,
        )

    trace = {
        "trial": i,
        "seed": seed,
        "alive": row["alive"],
        "trusted": row["trusted"],
        "virtual": row["virtual"],
        "established": row["established"],
        "unconverted": row["unconverted"],
        "sweeps": energy.sweeps,
        "chain_histogram": {str(k): v for k, v in energy.histogram().items()},
        "W_max": energy.W_max,
        "W_bar": _json_float(energy.W_bar),
        "D_DT": D_DT,
        "d_DT": _json_float(summary.finite_mean),
        "d_DT_connected": summary.connected,
        "d_DT_neighbors": _json_float(nbr.finite_mean),
        "neighbor_pairs_unreachable": nbr.unreachable,
        "thm4": thm4.as_dict(),
        "thm4_holds": thm4_holds,
    }
    if row["victim"] is not None:
        trace["compromise"] = {
            "victim": row["victim"],
            "p_compromise": row["p_compromise"],
            "bound": row["thm9_bound"],
            "bound_holds": row["thm9_holds"],
        }
    return row, trace


def _json_float(x: float | None):
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return None
    return x


def _trial_job(args):
    return run_trial(*args)


@dataclass
class DeployResult:
    config: ExperimentConfig
    facts: GraphFacts
    rows: list[dict]
    traces: list[dict]
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def run_deploy(cfg: ExperimentConfig) -> DeployResult:
    cfg.validate()
    t = load_trust_graph(cfg)
    if cfg.b > t.n - 1:
        raise ConfigError(f"b={cfg.b} exceeds n-1={t.n - 1}")
    facts = measure_graph(t, cfg.exact_cap, cfg.sampling_threshold)
    jobs = [(t, facts, cfg, i) for i in range(cfg.trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_trial_job, jobs))
    else:
        results = [_trial_job(j) for j in jobs]
    rows = [r for r, _ in results]
    traces = [tr for _, tr in results]

    violations = []
    moore = moore_violation(facts)
    if moore:
        violations.append(f"trust graph: {moore}")
    for row in rows:
        if row["thm9_holds"] is False:
            violations.append(
                f"trial {row['trial']}: p_compromise={row['p_compromise']!r} "
                f"> bound {row['thm9_bound']!r}"
            )
    return DeployResult(cfg, facts, rows, traces, violations)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows: list[dict], columns=TRIAL_COLUMNS, header: dict | None = None) -> str:
    buf = io.StringIO()
    if header is not None:
        buf.write("# config: " + json.dumps(header, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def rows_to_json(rows: list[dict], header: dict | None = None) -> str:
    clean = [{k: _json_float(v) if isinstance(v, float) else v for k, v in r.items()} for r in rows]
    doc = {"config": header, "rows": clean}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_deploy(result: DeployResult, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    header = {"config": result.config.echo(), "graph": asdict(result.facts)}
    written = []
    if result.config.format == "csv":
        path = out_dir / "trials.csv"
        path.write_text(rows_to_csv(result.rows, header=header))
    else:
        path = out_dir / "trials.json"
        path.write_text(rows_to_json(result.rows, header=header))
    written.append(path)
    traces = out_dir / "traces.json"
    traces.write_text(
        json.dumps({"config": header, "trials": result.traces}, sort_keys=True, indent=2) + "\n"
    )
    written.append(traces)
    return written
