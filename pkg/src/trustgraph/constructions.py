"""Candidate trust-graph families.

All builders return simple undirected :class:`~trustgraph.graph.TGraph`
objects. Randomised builders are deterministic given their seed.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

import numpy as np

from .graph import (
    UNREACHABLE,
    TGraph,
    bfs_distances,
    distance_summary,
    min_disjoint_paths,
)

NODE_LIMIT = 1_000_000

KINDS = ("complete", "heuristic", "de_bruijn", "de_bruijn_variant", "random_gnp")


class ConstructionError(ValueError):
    """Raised when construction parameters cannot produce a graph."""


def build_complete(n: int) -> TGraph:
    if n < 2:
        raise ConstructionError(f"complete graph needs n >= 2, got {n}")
    return TGraph(n, [[v for v in range(n) if v != u] for u in range(n)])


def _satisfies(g: TGraph, d_target: int, f_target: int, a: int, b: int) -> bool:
    # cheap necessary check first: the endpoints of the removed edge
    for end in (a, b):
        dist = bfs_distances(g, end)
        if UNREACHABLE in dist or max(dist) > d_target:
            return False
    summary = distance_summary(g)
    if not summary.connected or summary.diameter > d_target:
        return False
    if f_target > 1 and min_disjoint_paths(g) < f_target:
        return False
    return True


def build_heuristic(n: int, d_target: int, f_target: int, seed: int) -> TGraph:
    """Prune ``K_n`` one edge at a time while diameter and disjointness hold.

    Every edge of ``K_n`` is offered for deletion exactly once, in a random
    order fixed by ``seed``. A deletion is kept when the remaining graph still
    has diameter at most ``d_target`` and at least ``f_target`` vertex-disjoint
    paths between every non-adjacent pair.
    """
    if n < 3:
        raise ConstructionError(f"heuristic construction needs n >= 3, got {n}")
    if d_target < 1 or f_target < 1:
        raise ConstructionError("d_target and f_target must be >= 1")
    if f_target > n - 2:
        raise ConstructionError(
            f"f_target={f_target} exceeds n-2={n - 2}: no non-adjacent pair of an "
            f"{n}-node graph can have that many disjoint paths"
        )
    order = [(u, v) for u in range(n) for v in range(u + 1, n)]
    random.Random(seed).shuffle(order)
    g = build_complete(n)
    for a, b in order:
        trial = g.without_edge(a, b)
        if _satisfies(trial, d_target, f_target, a, b):
            g = trial
    return g


def build_de_bruijn(q: int, r: int, node_limit: int = NODE_LIMIT) -> TGraph:
    """Undirected de Bruijn graph on the ``q**r`` strings of length ``r``.

    String ``a_1..a_r`` is node ``sum a_i q^(r-i)``; it is joined to every
    left shift ``a_2..a_r b``. Self-loops are dropped and parallel edges
    merged, so degrees are at most ``2q``.
    """
    if q < 2 or r < 1:
        raise ConstructionError(f"de Bruijn graph needs q >= 2 and r >= 1, got q={q}, r={r}")
    n = q**r
    if n > node_limit:
        raise ConstructionError(f"q**r = {n} exceeds node limit {node_limit}")
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for x in range(n):
        head = (x * q) % n
        for b in range(q):
            y = head + b
            if y != x:
                nbrs[x].add(y)
                nbrs[y].add(x)
    return TGraph(n, [sorted(s) for s in nbrs])


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    return all(q % d for d in range(2, int(q**0.5) + 1))


def rank_mod(vectors: list[tuple[int, ...]], q: int) -> int:
    """Rank of the given row vectors over the prime field ``Z_q``."""
    rows = [[x % q for x in v] for v in vectors]
    if not rows:
        return 0
    cols = len(rows[0])
    rank = 0
    for c in range(cols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][c]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = pow(rows[rank][c], q - 2, q)
        rows[rank] = [x * inv % q for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][c]:
                factor = rows[i][c]
                rows[i] = [(x - factor * y) % q for x, y in zip(rows[i], rows[rank])]
        rank += 1
    return rank


@dataclass(frozen=True)
class BasisFamily:
    """``u`` vectors of ``Z_q^r``, any ``r`` of which form a basis."""

    q: int
    r: int
    vectors: tuple[tuple[int, ...], ...]

    @property
    def u(self) -> int:
        return len(self.vectors)

    def verify(self) -> bool:
        return all(
            rank_mod(list(subset), self.q) == self.r
            for subset in itertools.combinations(self.vectors, self.r)
        )


def _check_family_params(q: int, r: int, u: int) -> None:
    if not is_prime(q):
        raise ConstructionError(f"q={q} is not prime")
    if r < 1:
        raise ConstructionError(f"r must be >= 1, got {r}")
    if u <= r:
        raise ConstructionError(f"need u > r, got u={u}, r={r}")


def moment_curve_basis(q: int, r: int, u: int) -> BasisFamily:
    """Vectors ``(1, a, a^2, ..., a^(r-1)) mod q`` for ``a = 0..u-1``.

    Any ``r`` of them form a Vandermonde matrix with distinct nodes, which is
    invertible over a prime field.
    """
    _check_family_params(q, r, u)
    if u > q:
        raise ConstructionError(f"u={u} exceeds q={q}: not enough distinct evaluation points")
    vectors = tuple(tuple(pow(a, k, q) for k in range(r)) for a in range(u))
    family = BasisFamily(q, r, vectors)
    if not family.verify():  # pragma: no cover - guaranteed by Vandermonde
        raise ConstructionError("moment-curve vectors failed the independence check")
    return family


def random_basis(q: int, r: int, u: int, seed: int, max_tries: int = 10_000) -> BasisFamily:
    """Sample ``u`` random vectors until every ``r``-subset is independent."""
    _check_family_params(q, r, u)
    rng = random.Random(seed)
    for _ in range(max_tries):
        vectors = tuple(tuple(rng.randrange(q) for _ in range(r)) for _ in range(u))
        family = BasisFamily(q, r, vectors)
        if family.verify():
            return family
    raise ConstructionError(f"no valid family found for q={q}, r={r}, u={u} in {max_tries} tries")


def build_de_bruijn_variant(basis: BasisFamily, node_limit: int = NODE_LIMIT) -> TGraph:
    """Cayley graph on ``Z_q^r`` generated by all nonzero multiples of the basis.

    Vertex ``a`` is joined to ``a + x*b_i`` for every ``x`` in ``1..q-1``.
    """
    q, r = basis.q, basis.r
    if not basis.verify():
        raise ConstructionError("basis family fails the independence check")
    n = q**r
    if n > node_limit:
        raise ConstructionError(f"q**r = {n} exceeds node limit {node_limit}")
    # vectors are encoded base q with the first coordinate most significant
    weights = [q ** (r - 1 - k) for k in range(r)]
    offsets = {
        tuple(x * c % q for c in b) for b in basis.vectors for x in range(1, q)
    }
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for idx in range(n):
        a = [(idx // w) % q for w in weights]
        for off in offsets:
            y = sum(((ai + oi) % q) * w for ai, oi, w in zip(a, off, weights))
            if y != idx:
                nbrs[idx].add(y)
    return TGraph(n, [sorted(s) for s in nbrs])


def variant_walk_count(u: int, r: int) -> int:
    """Ordered choices of ``r`` distinct basis directions: ``u!/(u-r)!``.

    This counts the basis walks used to reach any vertex in ``r`` steps; it is
    not a graph-theoretic path count.
    """
    out = 1
    for k in range(u - r + 1, u + 1):
        out *= k
    return out


def build_random_gnp(n: int, p: float, seed: int) -> TGraph:
    """Erdos-Renyi ``G(n, p)``; each pair drawn in canonical order."""
    if not 0.0 <= p <= 1.0:
        raise ConstructionError(f"edge probability must lie in [0, 1], got {p}")
    if n < 0:
        raise ConstructionError(f"n must be >= 0, got {n}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    return TGraph.from_edges(n, zip(iu[keep].tolist(), ju[keep].tolist()))


# ---------------------------------------------------------------------------
# construction specs
# ---------------------------------------------------------------------------

_PARAMS = {
    "complete": {"n": int},
    "heuristic": {"n": int, "D": int, "f": int, "seed": int},
    "de_bruijn": {"q": int, "r": int},
    "de_bruijn_variant": {"q": int, "r": int, "u": int},
    "random_gnp": {"n": int, "p": float, "seed": int},
}

ALIASES = {
    "de-bruijn": "de_bruijn",
    "debruijn": "de_bruijn",
    "variant": "de_bruijn_variant",
    "de-bruijn-variant": "de_bruijn_variant",
    "random": "random_gnp",
    "gnp": "random_gnp",
    "random-gnp": "random_gnp",
}


@dataclass(frozen=True)
class ConstructionSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        kind = ALIASES.get(self.kind, self.kind)
        if kind not in _PARAMS:
            raise ConstructionError(f"unknown construction kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        wanted = _PARAMS[kind]
        missing = [k for k in wanted if k not in self.params]
        if missing:
            raise ConstructionError(f"{kind} construction is missing {', '.join(missing)}")
        extra = [k for k in self.params if k not in wanted]
        if extra:
            raise ConstructionError(f"{kind} construction does not take {', '.join(extra)}")
        object.__setattr__(
            self, "params", {k: wanted[k](self.params[k]) for k in wanted}
        )

    def to_text(self) -> str:
        lines = [f"kind = {self.kind}"]
        lines += [f"{k} = {v}" for k, v in self.params.items()]
        return "\n".join(lines) + "\n"

    def describe(self) -> str:
        return " ".join([f"kind={self.kind}"] + [f"{k}={v}" for k, v in self.params.items()])

    @classmethod
    def from_text(cls, text: str) -> "ConstructionSpec":
        values = parse_key_values(text)
        kind = values.pop("kind", None)
        if kind is None:
            raise ConstructionError("construction spec lacks 'kind'")
        return cls(kind, values)

    @classmethod
    def from_mapping(cls, values: dict) -> "ConstructionSpec":
        values = dict(values)
        kind = values.pop("kind")
        kind = ALIASES.get(kind, kind)
        if kind not in _PARAMS:
            raise ConstructionError(f"unknown construction kind {kind!r}")
        return cls(kind, {k: v for k, v in values.items() if k in _PARAMS[kind]})


def parse_key_values(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    return out


def build(spec: ConstructionSpec, node_limit: int = NODE_LIMIT) -> TGraph:
    p = spec.params
    if spec.kind == "complete":
        return build_complete(p["n"])
    if spec.kind == "heuristic":
        return build_heuristic(p["n"], p["D"], p["f"], p["seed"])
    if spec.kind == "de_bruijn":
        return build_de_bruijn(p["q"], p["r"], node_limit)
    if spec.kind == "de_bruijn_variant":
        return build_de_bruijn_variant(moment_curve_basis(p["q"], p["r"], p["u"]), node_limit)
    return build_random_gnp(p["n"], p["p"], p["seed"])

