"""Key labels on trust-graph edges and node-compromise simulation."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable

from .bounds import compromise_fraction_bound
from .graph import Edge, TGraph, canonical, degree_stats, distance_summary, format_edge_list


@dataclass(frozen=True)
class KeyGraph:
    """A trust graph whose every edge carries exactly one key id.

    ``owner`` maps each key id to the node whose key it is; every edge the key
    labels is incident to that node. ``g`` is the reuse cap used to build it.
    """

    base: TGraph
    labels: dict[Edge, int]
    owner: dict[int, int]
    g: int = 1
    owners: dict[int, tuple[Edge, ...]] = field(init=False, repr=False)

    def __post_init__(self):
        inverse: dict[int, list[Edge]] = {}
        for e in self.base.edges:
            inverse.setdefault(self.labels[e], []).append(e)
        object.__setattr__(self, "owners", {k: tuple(v) for k, v in sorted(inverse.items())})

    @property
    def key_count(self) -> int:
        return len(self.owners)


def assign_distinct(t: TGraph) -> KeyGraph:
    """One fresh key per edge, numbered in canonical edge order."""
    labels = {e: i for i, e in enumerate(t.edges)}
    return KeyGraph(t, labels, {i: e[0] for e, i in labels.items()}, g=1)


def assign_reused(t: TGraph, g: int, seed: int = 0) -> KeyGraph:
    """Let each node reuse one key on up to ``g`` of the edges it owns.

    An edge is owned by its lower-id endpoint. Each owner's edges are shuffled
    with ``seed`` and cut into consecutive groups of ``g``; every group gets
    one key. With ``g = 1`` this matches :func:`assign_distinct`.
    """
    if g <= 0:
        raise ValueError(f"key reuse g must be >= 1, got {g}")
    rng = random.Random(seed)
    labels: dict[Edge, int] = {}
    owner: dict[int, int] = {}
    next_key = 0
    for u in range(t.n):
        owned = [(u, v) for v in t.adjacency[u] if v > u]
        if g > 1:
            rng.shuffle(owned)
        for start in range(0, len(owned), g):
            for e in owned[start : start + g]:
                labels[e] = next_key
            owner[next_key] = u
            next_key += 1
    return KeyGraph(t, labels, owner, g=g)


def storage_profile(k: KeyGraph) -> tuple[list[int], int]:
    """Per-node count of distinct keys held, and the network-wide key count."""
    held: list[set[int]] = [set() for _ in range(k.base.n)]
    for (u, v), key in k.labels.items():
        held[u].add(key)
        held[v].add(key)
    return [len(s) for s in held], len(set(k.labels.values()))


@dataclass(frozen=True)
class CompromiseReport:
    victims: tuple[int, ...]
    revealed: frozenset[int]
    affected: int
    edge_count: int
    bound: float | None = None
    bound_holds: bool | None = None
    loose: bool = False

    @property
    def fraction(self) -> float:
        return self.affected / self.edge_count if self.edge_count else 0.0

    def as_dict(self) -> dict:
        return {
            "victims": list(self.victims),
            "revealed": len(self.revealed),
            "affected": self.affected,
            "fraction": self.fraction,
            "bound": self.bound,
            "bound_holds": self.bound_holds,
            "loose": self.loose,
        }


@dataclass(frozen=True)
class GraphShape:
    """The graph quantities the compromise bound needs."""

    n: int
    D: int
    theta_min: int
    theta_max: int

    @classmethod
    def of(cls, t: TGraph) -> "GraphShape":
        theta_min, theta_max, _ = degree_stats(t)
        summary = distance_summary(t)
        return cls(t.n, summary.diameter if summary.connected else -1, theta_min, theta_max)


def simulate_compromise(
    k: KeyGraph, victims: Iterable[int], shape: GraphShape | None = None
) -> CompromiseReport:
    """Reveal every key held by ``victims`` and count the edges they label.

    An edge is affected exactly when its own key is revealed. The reuse bound
    is attached when the graph is connected; for several victims it is scaled
    by their number and marked ``loose``.
    """
    victims = tuple(sorted(set(victims)))
    if not victims:
        raise ValueError("need at least one victim")
    t = k.base
    if any(not 0 <= v < t.n for v in victims):
        raise ValueError(f"victims must lie in [0, {t.n})")
    revealed = frozenset(k.labels[canonical(v, w)] for v in victims for w in t.adjacency[v])
    affected = sum(len(k.owners[key]) for key in revealed)
    edge_count = t.edge_count

    bound = holds = None
    if edge_count and t.n >= 2:
        shape = shape or GraphShape.of(t)
        if shape.D >= 1 and shape.theta_min >= 1:
            report = compromise_fraction_bound(
                shape.n, shape.D, shape.theta_min, shape.theta_max, k.g
            )
            bound = report.value * len(victims)
            holds = affected / edge_count <= bound
    return CompromiseReport(
        victims, revealed, affected, edge_count, bound, holds, loose=len(victims) > 1
    )


def format_key_graph(k: KeyGraph, header: Iterable[str] = ()) -> str:
    return format_edge_list(k.base, list(header), labels=k.labels)


def min_key_count(edge_count: int, g: int) -> int:
    return math.ceil(edge_count / g)
