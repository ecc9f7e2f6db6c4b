import itertools
import math

import pytest

from oracles import de_bruijn_edges, det_mod
from trustgraph.constructions import (
    BasisFamily,
    ConstructionError,
    ConstructionSpec,
    build,
    build_complete,
    build_de_bruijn,
    build_de_bruijn_variant,
    build_heuristic,
    build_random_gnp,
    is_prime,
    moment_curve_basis,
    random_basis,
    rank_mod,
    variant_walk_count,
)
from trustgraph.graph import degree_stats, distance_summary, min_disjoint_paths, vertex_disjoint_paths


# --- complete ----------------------------------------------------------------------


@pytest.mark.parametrize("n,edges", [(2, 1), (3, 3), (5, 10)])
def test_complete(n, edges):
    g = build_complete(n)
    assert g.edge_count == edges
    assert distance_summary(g).diameter == 1


def test_complete_rejects_tiny():
    with pytest.raises(ConstructionError):
        build_complete(1)


# --- de Bruijn ---------------------------------------------------------------------


def test_de_bruijn_binary_three():
    # enumeration of shifts gives 13 undirected edges after dropping the two
    # self-loops (000, 111) and merging the reciprocal pairs
    g = build_de_bruijn(2, 3)
    assert g.n == 8
    assert degree_stats(g) == (2, 4, 13)
    assert distance_summary(g).diameter == 3


def test_de_bruijn_degenerate_single_edge():
    g = build_de_bruijn(2, 1)
    assert g.n == 2 and g.edges == ((0, 1),)


def test_de_bruijn_ternary_two():
    g = build_de_bruijn(3, 2)
    theta_min, theta_max, edges = degree_stats(g)
    assert g.n == 9 and distance_summary(g).diameter == 2
    assert (theta_min, theta_max, edges) == (4, 5, 21)
    assert theta_max <= 2 * 3


@pytest.mark.parametrize("q,r", [(q, r) for q in range(2, 6) for r in range(1, 4)])
def test_de_bruijn_matches_string_enumeration(q, r):
    assert set(build_de_bruijn(q, r).edges) == de_bruijn_edges(q, r)


def test_de_bruijn_node_limit():
    with pytest.raises(ConstructionError):
        build_de_bruijn(10, 4, node_limit=5000)


# --- basis families ----------------------------------------------------------------


def test_is_prime():
    assert [q for q in range(20) if is_prime(q)] == [2, 3, 5, 7, 11, 13, 17, 19]


def test_moment_curve_small_example():
    fam = moment_curve_basis(3, 2, 3)
    assert fam.vectors == ((1, 0), (1, 1), (1, 2))
    dets = [det_mod(pair, 3) for pair in itertools.combinations(fam.vectors, 2)]
    assert dets == [1, 2, 1]


@pytest.mark.parametrize("q,r,u", [(5, 2, 4), (5, 3, 5), (7, 3, 6), (11, 4, 9)])
def test_moment_curve_subsets_are_invertible(q, r, u):
    fam = moment_curve_basis(q, r, u)
    assert fam.verify()
    for subset in itertools.combinations(fam.vectors, r):
        assert det_mod(subset, q) != 0


def test_rank_mod_agrees_with_determinant():
    vecs = [(1, 2, 3), (2, 4, 6), (0, 1, 1)]
    assert rank_mod(vecs, 7) == 2
    assert det_mod(vecs, 7) == 0
    assert rank_mod([(1, 0), (0, 1)], 5) == 2


@pytest.mark.parametrize(
    "q,r,u",
    [(3, 2, 4), (4, 2, 3), (5, 2, 2), (6, 2, 3)],
)
def test_moment_curve_rejects(q, r, u):
    with pytest.raises(ConstructionError):
        moment_curve_basis(q, r, u)


def test_random_basis_is_valid_and_seeded():
    a = random_basis(7, 2, 5, seed=4)
    assert a.verify()
    assert random_basis(7, 2, 5, seed=4) == a


def test_variant_rejects_dependent_family():
    bad = BasisFamily(5, 2, ((1, 0), (2, 0), (0, 1)))
    with pytest.raises(ConstructionError):
        build_de_bruijn_variant(bad)


# --- variant graphs ----------------------------------------------------------------


@pytest.mark.parametrize("q,u,degree", [(3, 3, 6), (5, 3, 12), (5, 4, 16), (7, 4, 24)])
def test_variant_regular_with_diameter_two(q, u, degree):
    g = build_de_bruijn_variant(moment_curve_basis(q, 2, u))
    assert g.n == q * q
    assert set(g.degrees()) == {degree}
    assert distance_summary(g).diameter <= 2


def test_variant_small_has_u_disjoint_paths():
    g = build_de_bruijn_variant(moment_curve_basis(3, 2, 3))
    pairs = [(a, b) for a, b in itertools.combinations(range(g.n), 2) if not g.has_edge(a, b)]
    assert pairs
    assert all(vertex_disjoint_paths(g, a, b) >= 3 for a, b in pairs)


def test_variant_from_random_basis():
    g = build_de_bruijn_variant(random_basis(5, 2, 3, seed=1))
    assert set(g.degrees()) == {12}
    assert distance_summary(g).diameter == 2


def test_variant_walk_count():
    assert variant_walk_count(3, 2) == 6
    assert variant_walk_count(4, 2) == 12
    assert variant_walk_count(5, 3) == math.factorial(5) // math.factorial(2)


# --- heuristic -----------------------------------------------------------------------


def test_heuristic_diameter_one_keeps_complete():
    assert build_heuristic(5, 1, 1, seed=0) == build_complete(5)


def test_heuristic_six_nodes():
    g = build_heuristic(6, 2, 2, seed=1)
    s = distance_summary(g)
    assert s.connected and s.diameter <= 2
    assert degree_stats(g)[1] < 5
    assert min_disjoint_paths(g) >= 2


def test_heuristic_eight_nodes_meets_degree_floor():
    g = build_heuristic(8, 3, 1, seed=0)
    assert distance_summary(g).diameter <= 3
    assert degree_stats(g)[1] >= 3


@pytest.mark.parametrize("n,D,f,seed", [(7, 2, 1, 0), (7, 2, 2, 3), (8, 3, 2, 5)])
def test_heuristic_output_is_edge_minimal(n, D, f, seed):
    g = build_heuristic(n, D, f, seed)
    for e in g.edges:
        h = g.without_edge(*e)
        s = distance_summary(h)
        broken = not s.connected or s.diameter > D or (f > 1 and min_disjoint_paths(h) < f)
        assert broken


def test_heuristic_is_deterministic():
    assert build_heuristic(8, 2, 2, seed=9) == build_heuristic(8, 2, 2, seed=9)


@pytest.mark.parametrize("n,D,f", [(5, 2, 4), (2, 1, 1), (6, 0, 1)])
def test_heuristic_rejects_impossible_targets(n, D, f):
    with pytest.raises(ConstructionError):
        build_heuristic(n, D, f, seed=0)


# --- G(n, p) ------------------------------------------------------------------------


def test_gnp_extremes():
    assert build_random_gnp(6, 0.0, seed=0).edge_count == 0
    assert build_random_gnp(6, 1.0, seed=0) == build_complete(6)


def test_gnp_edge_count_within_four_sigma():
    n, p = 1000, 0.01
    pairs = math.comb(n, 2)
    mean, sd = pairs * p, math.sqrt(pairs * p * (1 - p))
    for seed in range(3):
        count = build_random_gnp(n, p, seed).edge_count
        assert abs(count - mean) <= 4 * sd


def test_gnp_seeded():
    assert build_random_gnp(50, 0.2, 7) == build_random_gnp(50, 0.2, 7)
    assert build_random_gnp(50, 0.2, 7) != build_random_gnp(50, 0.2, 8)


def test_gnp_rejects_bad_probability():
    with pytest.raises(ConstructionError):
        build_random_gnp(5, 1.5, 0)


# --- specs ---------------------------------------------------------------------------


def test_spec_round_trip_and_aliases():
    spec = ConstructionSpec("variant", {"q": "5", "r": 2, "u": "3"})
    assert spec.kind == "de_bruijn_variant" and spec.params == {"q": 5, "r": 2, "u": 3}
    assert ConstructionSpec.from_text(spec.to_text()) == spec
    assert build(spec) == build(ConstructionSpec.from_text(spec.to_text()))


@pytest.mark.parametrize(
    "kind,params",
    [("wheel", {}), ("de-bruijn", {"q": 2}), ("complete", {"n": 3, "q": 2})],
)
def test_spec_rejects(kind, params):
    with pytest.raises(ConstructionError):
        ConstructionSpec(kind, params)


def test_spec_from_mapping_ignores_unrelated_keys():
    spec = ConstructionSpec.from_mapping({"kind": "complete", "n": 4, "p": 0.3})
    assert spec.params == {"n": 4}


def test_build_is_deterministic_for_every_kind():
    specs = [
        ConstructionSpec("complete", {"n": 6}),
        ConstructionSpec("heuristic", {"n": 7, "D": 2, "f": 1, "seed": 2}),
        ConstructionSpec("de_bruijn", {"q": 3, "r": 3}),
        ConstructionSpec("variant", {"q": 5, "r": 2, "u": 4}),
        ConstructionSpec("gnp", {"n": 40, "p": 0.2, "seed": 3}),
    ]
    for spec in specs:
        assert build(spec).edges == build(spec).edges
