"""Undirected simple graphs and exact hop-count metrics.

The :class:`TGraph` type is immutable once built. Every metric here is
read-only, so graphs can be shared freely between worker processes.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow, shortest_path

UNREACHABLE = -1
NO_NONADJACENT_PAIRS = 2**31 - 1
SAMPLING_THRESHOLD = 20_000
DEFAULT_SAMPLE = 256

Edge = tuple[int, int]


def canonical(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class TGraph:
    """Trust graph on nodes ``0..n-1`` with sorted adjacency lists."""

    __slots__ = ("n", "adjacency", "_edges")

    def __init__(self, n: int, adjacency: Sequence[Sequence[int]]):
        self.n = n
        self.adjacency = tuple(tuple(nbrs) for nbrs in adjacency)
        self._edges: tuple[Edge, ...] | None = None

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "TGraph":
        """Build a graph, merging duplicate edges.

        Raises ValueError on self-loops or node ids outside ``[0, n)``.
        """
        if n < 0:
            raise ValueError(f"node count must be non-negative, got {n}")
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) outside [0, {n})")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(n, [sorted(s) for s in nbrs])

    @property
    def edges(self) -> tuple[Edge, ...]:
        """Canonical ``(u, v)`` pairs with ``u < v``, sorted."""
        if self._edges is None:
            self._edges = tuple(
                (u, v) for u in range(self.n) for v in self.adjacency[u] if u < v
            )
        return self._edges

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def degree(self, u: int) -> int:
        return len(self.adjacency[u])

    def degrees(self) -> list[int]:
        return [len(a) for a in self.adjacency]

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.adjacency[u]
        # adjacency lists are sorted
        lo, hi = 0, len(nbrs)
        while lo < hi:
            mid = (lo + hi) // 2
            if nbrs[mid] < v:
                lo = mid + 1
            else:
                hi = mid
        return lo < len(nbrs) and nbrs[lo] == v

    def without_edge(self, u: int, v: int) -> "TGraph":
        adj = list(self.adjacency)
        adj[u] = tuple(x for x in adj[u] if x != v)
        adj[v] = tuple(x for x in adj[v] if x != u)
        return TGraph(self.n, adj)

    def subgraph(self, nodes: Sequence[int]) -> tuple["TGraph", list[int]]:
        """Induced subgraph relabelled to ``0..len(nodes)-1``.

        Returns the subgraph and the list mapping new ids to old ids.
        """
        index = {old: new for new, old in enumerate(nodes)}
        adj = [
            [index[w] for w in self.adjacency[old] if w in index] for old in nodes
        ]
        return TGraph(len(nodes), adj), list(nodes)

    def to_csr(self) -> csr_matrix:
        rows = [u for u in range(self.n) for _ in self.adjacency[u]]
        cols = [v for u in range(self.n) for v in self.adjacency[u]]
        data = np.ones(len(rows), dtype=np.int8)
        return csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TGraph):
            return NotImplemented
        return self.n == other.n and self.adjacency == other.adjacency

    def __hash__(self) -> int:
        return hash((self.n, self.adjacency))

    def __repr__(self) -> str:
        return f"TGraph(n={self.n}, edges={self.edge_count})"


def degree_stats(g: TGraph) -> tuple[int, int, int]:
    """Return ``(theta_min, theta_max, edge_count)``."""
    if g.n < 1:
        raise ValueError("degree_stats needs at least one node")
    degs = g.degrees()
    return min(degs), max(degs), sum(degs) // 2


def bfs_distances(g: TGraph, source: int) -> list[int]:
    """Single-source hop counts; unreachable nodes get ``UNREACHABLE``."""
    if not 0 <= source < g.n:
        raise ValueError(f"source {source} outside [0, {g.n})")
    dist = [UNREACHABLE] * g.n
    dist[source] = 0
    queue = deque([source])
    while queue:
        x = queue.popleft()
        dx = dist[x] + 1
        for y in g.adjacency[x]:
            if dist[y] == UNREACHABLE:
                dist[y] = dx
                queue.append(y)
    return dist


def all_pairs_distances(g: TGraph) -> np.ndarray:
    """Dense ``n x n`` hop-count matrix, ``UNREACHABLE`` where disconnected."""
    if g.n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    d = shortest_path(g.to_csr(), method="D", directed=False, unweighted=True)
    out = np.full(d.shape, UNREACHABLE, dtype=np.int64)
    finite = np.isfinite(d)
    out[finite] = d[finite].astype(np.int64)
    return out


@dataclass(frozen=True)
class DistanceSummary:
    """Diameter and mean distance of a graph.

    ``diameter`` and ``mean_distance`` are only meaningful when ``connected``;
    otherwise they hold ``UNREACHABLE`` and ``nan`` and the ``finite_*`` fields
    describe the reachable pairs. ``eccentricities`` are taken over reachable
    nodes, and hold ``UNREACHABLE`` for nodes that were not used as BFS sources
    in a sampled run.
    """

    diameter: int
    mean_distance: float
    eccentricities: tuple[int, ...]
    connected: bool
    estimated: bool = False
    finite_pairs: int = 0
    finite_mean: float = math.nan
    finite_max: int = 0
    sources: int = 0

    def as_dict(self) -> dict:
        return {
            "diameter": self.diameter,
            "mean_distance": self.mean_distance,
            "connected": self.connected,
            "estimated": self.estimated,
            "finite_pairs": self.finite_pairs,
            "finite_mean": self.finite_mean,
            "finite_max": self.finite_max,
            "sources": self.sources,
        }


def distance_summary(
    g: TGraph,
    sampling: int | None = None,
    *,
    threshold: int = SAMPLING_THRESHOLD,
    seed: int = 0,
    chunk: int = 512,
) -> DistanceSummary:
    """Diameter and mean distance over unordered pairs.

    Exact all-pairs BFS by default. With ``sampling`` set, or when ``n``
    exceeds ``threshold``, only that many uniformly chosen sources are
    searched and the result is flagged ``estimated``.
    """
    n = g.n
    if n < 2:
        raise ValueError("distance_summary needs at least two nodes")
    if sampling is None and n > threshold:
        sampling = DEFAULT_SAMPLE
    estimated = sampling is not None and sampling < n
    if estimated:
        rng = np.random.default_rng(seed)
        sources = np.sort(rng.choice(n, size=sampling, replace=False))
    else:
        sources = np.arange(n)

    csr = g.to_csr()
    ecc = [UNREACHABLE] * n
    total = 0
    finite_pairs = 0
    finite_max = 0
    connected = True
    for start in range(0, len(sources), chunk):
        idx = sources[start : start + chunk]
        d = shortest_path(csr, method="D", directed=False, unweighted=True, indices=idx)
        finite = np.isfinite(d)
        if not finite.all():
            connected = False
        fd = np.where(finite, d, 0).astype(np.int64)
        total += int(fd.sum())
        finite_pairs += int(finite.sum()) - len(idx)  # drop d(s, s)
        row_max = fd.max(axis=1)
        for s, m in zip(idx, row_max):
            ecc[int(s)] = int(m)
        finite_max = max(finite_max, int(row_max.max()))

    if estimated:
        ordered = len(sources) * (n - 1)
        mean = total / finite_pairs if finite_pairs else math.nan
        return DistanceSummary(
            diameter=finite_max if connected else UNREACHABLE,
            mean_distance=total / ordered if connected else math.nan,
            eccentricities=tuple(ecc),
            connected=connected,
            estimated=True,
            finite_pairs=finite_pairs,
            finite_mean=mean,
            finite_max=finite_max,
            sources=len(sources),
        )

    # every unordered pair was counted twice
    pair_total = total // 2
    pairs = finite_pairs // 2
    finite_mean = pair_total / pairs if pairs else math.nan
    return DistanceSummary(
        diameter=finite_max if connected else UNREACHABLE,
        mean_distance=pair_total / math.comb(n, 2) if connected else math.nan,
        eccentricities=tuple(ecc),
        connected=connected,
        estimated=False,
        finite_pairs=pairs,
        finite_mean=finite_mean,
        finite_max=finite_max,
        sources=n,
    )


def is_connected(g: TGraph) -> bool:
    if g.n == 0:
        return True
    return UNREACHABLE not in bfs_distances(g, 0)


def connected_components(g: TGraph) -> list[int]:
    """Component label per node, labels in order of first appearance."""
    label = [UNREACHABLE] * g.n
    current = 0
    for s in range(g.n):
        if label[s] != UNREACHABLE:
            continue
        label[s] = current
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in g.adjacency[x]:
                if label[y] == UNREACHABLE:
                    label[y] = current
                    queue.append(y)
        current += 1
    return label


# ---------------------------------------------------------------------------
# vertex-disjoint paths (Menger via unit-capacity max-flow on a split graph)
# ---------------------------------------------------------------------------


def _split_network(n: int, arcs: Iterable[tuple[int, int]]) -> csr_matrix:
    # node x becomes in=2x and out=2x+1 joined by a unit arc, so every node
    # carries at most one path; arc (a, b) runs from out(a) to in(b)
    heads = list(range(0, 2 * n, 2))
    tails = list(range(1, 2 * n, 2))
    for a, b in arcs:
        heads.append(2 * a + 1)
        tails.append(2 * b)
    caps = np.ones(len(heads), dtype=np.int32)
    return csr_matrix((caps, (heads, tails)), shape=(2 * n, 2 * n))


def _split_flow(network: csr_matrix, s: int, t: int) -> int:
    # leave from out(s) and arrive at in(t): the endpoints' own unit arcs
    # never limit the flow
    return int(maximum_flow(network, 2 * s + 1, 2 * t, method="dinic").flow_value)


def _undirected_arcs(g: TGraph) -> Iterable[tuple[int, int]]:
    for u in range(g.n):
        for v in g.adjacency[u]:
            yield u, v


def _check_pair(g: TGraph, u: int, v: int) -> None:
    if u == v:
        raise ValueError("endpoints must differ")
    if not (0 <= u < g.n and 0 <= v < g.n):
        raise ValueError(f"endpoints ({u}, {v}) outside [0, {g.n})")
    if g.has_edge(u, v):
        raise ValueError(
            f"nodes {u} and {v} are adjacent; disjoint-path count is only "
            "defined for non-adjacent pairs"
        )


def vertex_disjoint_paths(g: TGraph, u: int, v: int, limit: int | None = None) -> int:
    """Maximum number of internally vertex-disjoint ``u``-``v`` paths.

    ``limit`` caps the returned count.
    """
    _check_pair(g, u, v)
    flow = _split_flow(_split_network(g.n, _undirected_arcs(g)), u, v)
    return flow if limit is None else min(flow, limit)


def disjoint_shortest_paths(g: TGraph, u: int, v: int) -> int:
    """Maximum number of internally vertex-disjoint *shortest* ``u``-``v`` paths.

    Runs the same flow on the arcs of the shortest-path DAG from ``u`` to ``v``.
    """
    _check_pair(g, u, v)
    du = bfs_distances(g, u)
    dv = bfs_distances(g, v)
    if du[v] == UNREACHABLE:
        return 0
    target = du[v]
    arcs = [
        (a, b)
        for a, b in _undirected_arcs(g)
        if du[a] != UNREACHABLE and dv[b] != UNREACHABLE and du[a] + 1 + dv[b] == target
    ]
    return _split_flow(_split_network(g.n, arcs), u, v)


def _nonadjacent_pairs(g: TGraph) -> Iterable[tuple[int, int]]:
    for u, v in itertools.combinations(range(g.n), 2):
        if not g.has_edge(u, v):
            yield u, v


def min_disjoint_paths(g: TGraph, exhaustive: bool = False) -> int:
    """Minimum disjoint-path count over all non-adjacent pairs.

    Returns ``NO_NONADJACENT_PAIRS`` for complete graphs. The default search
    only tries the pairs Esfahanian and Hakimi showed are sufficient (a
    minimum-degree vertex against its non-neighbours, then non-adjacent pairs
    of its neighbours); ``exhaustive=True`` tries every pair.
    """
    if g.n < 2:
        raise ValueError("min_disjoint_paths needs at least two nodes")
    best = NO_NONADJACENT_PAIRS
    if exhaustive:
        candidates: Iterable[tuple[int, int]] = _nonadjacent_pairs(g)
    else:
        degs = g.degrees()
        x = degs.index(min(degs))
        nbrs = set(g.adjacency[x])
        first = [(x, w) for w in range(g.n) if w != x and w not in nbrs]
        second = [
            (a, b)
            for a, b in itertools.combinations(g.adjacency[x], 2)
            if not g.has_edge(a, b)
        ]
        candidates = itertools.chain(first, second)
    network = _split_network(g.n, _undirected_arcs(g))
    for a, b in candidates:
        best = min(best, _split_flow(network, a, b))
        if best == 0:
            break
    return best


def min_disjoint_shortest_paths(g: TGraph) -> int:
    """Minimum over non-adjacent pairs of :func:`disjoint_shortest_paths`."""
    if g.n < 2:
        raise ValueError("min_disjoint_shortest_paths needs at least two nodes")
    best = NO_NONADJACENT_PAIRS
    for a, b in _nonadjacent_pairs(g):
        best = min(best, disjoint_shortest_paths(g, a, b))
        if best == 0:
            break
    return best


# ---------------------------------------------------------------------------
# edge-list text format
# ---------------------------------------------------------------------------


def format_edge_list(g: TGraph, header: Sequence[str] = (), labels: dict | None = None) -> str:
    """Render ``n <count>`` followed by one ``u v`` line per canonical edge.

    ``header`` lines are emitted first as ``#`` comments. With ``labels``
    (edge -> key id) each line gains a third column.
    """
    lines = [f"# {h}" for h in header]
    lines.append(f"n {g.n}")
    for u, v in g.edges:
        if labels is None:
            lines.append(f"{u} {v}")
        else:
            lines.append(f"{u} {v} {labels[(u, v)]}")
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> tuple[TGraph, dict[Edge, int] | None, list[str]]:
    """Parse the edge-list format; returns ``(graph, labels or None, comments)``."""
    n = None
    edges: list[Edge] = []
    labels: dict[Edge, int] = {}
    comments: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            comments.append(line[1:].strip())
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "n":
                raise ValueError(f"line {lineno}: expected 'n <count>' header, got {raw!r}")
            n = int(parts[1])
            continue
        if len(parts) not in (2, 3):
            raise ValueError(f"line {lineno}: expected 'u v [key]', got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer node id in {raw!r}") from None
        e = canonical(u, v)
        edges.append(e)
        if len(parts) == 3:
            labels[e] = int(parts[2])
    if n is None:
        raise ValueError("missing 'n <count>' header")
    if labels and len(labels) != len(set(edges)):
        raise ValueError("either every edge or no edge may carry a key id")
    return TGraph.from_edges(n, edges), (labels or None), comments


def save_edge_list(g: TGraph, path: str | Path, header: Sequence[str] = ()) -> None:
    Path(path).write_text(format_edge_list(g, header))


def load_edge_list(path: str | Path) -> TGraph:
    return parse_edge_list(Path(path).read_text())[0]
