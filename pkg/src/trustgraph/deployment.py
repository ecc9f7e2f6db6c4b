"""Random physical deployment and path-key establishment.

A physical graph is sampled from the random model (each node dies with
probability ``p_die``; each pair of surviving nodes is linked with probability
``b/(n-1)``), overlaid on a trust graph, and the resulting virtual edges are
turned into trusted links by relaying a fresh key along chains of trusted
links.
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .bounds import p_c_analytic
from .graph import (
    UNREACHABLE,
    DistanceSummary,
    Edge,
    TGraph,
    bfs_distances,
    distance_summary,
)
from .seeding import derive_seed


@dataclass(frozen=True)
class PhysicalModel:
    n: int
    b: float
    p_die: float
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"physical model needs n >= 2, got {self.n}")
        if not 0.0 <= self.b <= self.n - 1:
            raise ValueError(f"b must lie in [0, n-1], got {self.b}")
        if not 0.0 <= self.p_die <= 1.0:
            raise ValueError(f"p_die must lie in [0, 1], got {self.p_die}")

    @property
    def pair_probability(self) -> float:
        """Link probability for a pair of surviving nodes."""
        return self.b / (self.n - 1)

    @property
    def p_link(self) -> float:
        return (1.0 - self.p_die) ** 2 * self.pair_probability


@dataclass(frozen=True)
class PhysicalGraph:
    alive: tuple[bool, ...]
    edges: tuple[Edge, ...]

    @property
    def n(self) -> int:
        return len(self.alive)

    @property
    def alive_count(self) -> int:
        return sum(self.alive)


def sample_physical(model: PhysicalModel, seed: int | None = None) -> PhysicalGraph:
    """Draw a physical graph; ``seed`` overrides ``model.seed``."""
    rng = np.random.default_rng(model.seed if seed is None else seed)
    n = model.n
    alive = rng.random(n) >= model.p_die
    iu, ju = np.triu_indices(n, k=1)
    linked = rng.random(len(iu)) < model.pair_probability
    keep = linked & alive[iu] & alive[ju]
    edges = tuple(zip(iu[keep].tolist(), ju[keep].tolist()))
    return PhysicalGraph(tuple(bool(a) for a in alive), edges)


@dataclass(frozen=True)
class DeployedTGraph:
    """Overlay of a trust graph and a physical graph.

    ``established`` maps each converted virtual edge to the chain length used.
    """

    n: int
    alive: tuple[bool, ...]
    trusted: tuple[Edge, ...]
    virtual: tuple[Edge, ...]
    established: dict[Edge, int] = field(default_factory=dict)

    @property
    def unconverted(self) -> tuple[Edge, ...]:
        return tuple(e for e in self.virtual if e not in self.established)

    def trust_graph(self, include_established: bool = True) -> TGraph:
        """Trusted (and optionally established) links over all ``n`` nodes."""
        edges = list(self.trusted)
        if include_established:
            edges += list(self.established)
        return TGraph.from_edges(self.n, edges)


def overlay(t: TGraph, p: PhysicalGraph) -> DeployedTGraph:
    if t.n != p.n:
        raise ValueError(f"trust graph has {t.n} nodes but physical graph has {p.n}")
    trusted = []
    virtual = []
    for u, v in sorted(p.edges):
        (trusted if t.has_edge(u, v) else virtual).append((u, v))
    return DeployedTGraph(t.n, p.alive, tuple(trusted), tuple(virtual))


@dataclass(frozen=True)
class EnergyReport:
    """Energy spent establishing trusted links, in one-hop transmission units.

    ``W_bar`` averages ``1 + d`` over every physical link that ended up
    trusted, counting directly trusted links with ``d = 1``.
    ``W_bar_conversions`` averages over converted virtual edges only.
    """

    W_max: int
    W_bar: float
    W_bar_conversions: float
    chain_lengths: tuple[int, ...]
    unconverted: int
    sweeps: int

    def histogram(self) -> dict[int, int]:
        return dict(sorted(Counter(self.chain_lengths).items()))


def _chain_length(adj: list[set[int]], u: int, v: int, max_chain: int) -> int | None:
    # depth-limited BFS; None when v is farther than max_chain
    dist = {u: 0}
    queue = deque([u])
    while queue:
        x = queue.popleft()
        dx = dist[x]
        if dx >= max_chain:
            continue
        for y in adj[x]:
            if y not in dist:
                if y == v:
                    return dx + 1
                dist[y] = dx + 1
                queue.append(y)
    return None


def establish_path_keys(
    d: DeployedTGraph, max_chain: int, iterate: bool = True
) -> tuple[DeployedTGraph, EnergyReport]:
    """Convert virtual edges whose endpoints are linked by a short trusted chain.

    Virtual edges are visited in ascending canonical order. Chains never use
    virtual edges. With ``iterate`` each conversion becomes usable at once and
    sweeps repeat until one converts nothing; without it a single sweep runs
    over the originally trusted links only.
    """
    if max_chain < 1:
        raise ValueError(f"max_chain must be >= 1, got {max_chain}")
    adj: list[set[int]] = [set() for _ in range(d.n)]
    for u, v in list(d.trusted) + list(d.established):
        adj[u].add(v)
        adj[v].add(u)
    established = dict(d.established)
    pending = [e for e in d.virtual if e not in established]
    sweeps = 0
    while pending:
        sweeps += 1
        remaining = []
        for u, v in pending:
            length = _chain_length(adj, u, v, max_chain)
            if length is None:
                remaining.append((u, v))
                continue
            established[(u, v)] = length
            if iterate:
                adj[u].add(v)
                adj[v].add(u)
        progressed = len(remaining) < len(pending)
        pending = remaining
        if not iterate or not progressed:
            break
    result = replace(d, established=established)
    return result, _energy(result, sweeps)


def _energy(d: DeployedTGraph, sweeps: int) -> EnergyReport:
    chains = tuple(d.established.values())
    processed = len(d.trusted) + len(chains)
    total = len(d.trusted) * 1 + sum(chains)
    W_bar = 1.0 + total / processed if processed else math.nan
    W_bar_conv = 1.0 + sum(chains) / len(chains) if chains else math.nan
    if chains:
        W_max = max(chains) + 1
    elif d.trusted:
        W_max = 2
    else:
        W_max = 0
    return EnergyReport(
        W_max=W_max,
        W_bar=W_bar,
        W_bar_conversions=W_bar_conv,
        chain_lengths=chains,
        unconverted=len(d.virtual) - len(chains),
        sweeps=sweeps,
    )


def alive_nodes(d: DeployedTGraph) -> list[int]:
    return [i for i, a in enumerate(d.alive) if a]


def deployed_metrics(d: DeployedTGraph, **kwargs) -> DistanceSummary:
    """Distance summary of trusted plus established links among alive nodes."""
    sub, _ = d.trust_graph().subgraph(alive_nodes(d))
    if sub.n < 2:
        return DistanceSummary(UNREACHABLE, math.nan, tuple([0] * sub.n), False)
    return distance_summary(sub, **kwargs)


class NeighborDistances(NamedTuple):
    mean: float
    finite_mean: float
    max_finite: int
    pairs: int
    unreachable: int


def physical_neighbor_distances(d: DeployedTGraph) -> NeighborDistances:
    """Deployed trust distance averaged over physical-neighbour pairs.

    Uses trusted plus established links. ``mean`` is ``inf`` when some
    physical neighbours cannot reach each other; ``finite_mean`` drops them.
    """
    g = d.trust_graph()
    pairs = list(d.trusted) + list(d.virtual)
    by_source: dict[int, list[int]] = {}
    for u, v in pairs:
        by_source.setdefault(u, []).append(v)
    total = 0
    finite = 0
    unreachable = 0
    longest = 0
    for u, targets in by_source.items():
        dist = bfs_distances(g, u)
        for v in targets:
            if dist[v] == UNREACHABLE:
                unreachable += 1
            else:
                total += dist[v]
                finite += 1
                longest = max(longest, dist[v])
    finite_mean = total / finite if finite else math.nan
    mean = math.inf if unreachable else finite_mean
    return NeighborDistances(mean, finite_mean, longest, len(pairs), unreachable)


class PcEstimate(NamedTuple):
    estimate: float
    analytic: float
    pairs: int
    stderr: float


def estimate_p_c(t: TGraph, model: PhysicalModel, trials: int) -> PcEstimate:
    """Monte Carlo probability that a random node pair is a deployed trusted edge.

    Each trial samples a fresh physical graph and inspects all ``C(n, 2)``
    pairs. ``stderr`` is the binomial standard error over the pooled pairs.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if t.n != model.n:
        raise ValueError(f"trust graph has {t.n} nodes but model has n={model.n}")
    hits = 0
    per_trial = math.comb(model.n, 2)
    for i in range(trials):
        phys = sample_physical(model, seed=derive_seed(model.seed, i, "p_c"))
        hits += sum(1 for u, v in phys.edges if t.has_edge(u, v))
    pairs = per_trial * trials
    analytic = p_c_analytic(model.n, model.b, model.p_die, t.edge_count)
    stderr = math.sqrt(analytic * (1 - analytic) / pairs)
    return PcEstimate(hits / pairs, analytic, pairs, stderr)
