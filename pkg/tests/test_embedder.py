from __future__ import annotations

from itertools import product

import networkx as nx
import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from cliquebed import embedder, generate
from cliquebed.contraction import PairNode
from cliquebed.embedder import (
    Embedding,
    EmbeddingNotFound,
    chain_length_stats,
    find_embedding,
    format_stats,
    validate,
)


def _kinds(problems):
    return sorted(p["kind"] for p in problems)


def test_k1_gives_single_node_chain():
    emb = find_embedding(nx.complete_graph(1), nx.path_graph(5))
    assert len(emb[0]) == 1


def _k3_on_c6_feasible() -> bool:
    """Exhaustive oracle: try every assignment of cycle nodes to 3 chains or none."""
    cycle = nx.cycle_graph(6)
    k3 = nx.complete_graph(3)
    for labels in product(range(4), repeat=6):
        chains = {v: [x for x in range(6) if labels[x] == v] for v in range(3)}
        if not validate(chains, k3, cycle):
            return True
    return False


def test_k3_on_six_cycle():
    assert _k3_on_c6_feasible()
    emb = find_embedding(nx.complete_graph(3), nx.cycle_graph(6), seed=4)
    assert validate(emb, nx.complete_graph(3), nx.cycle_graph(6)) == []
    assert sum(emb.chain_sizes().values()) <= 6


def test_validate_examples():
    g = nx.petersen_graph()
    assert validate({v: [v] for v in g}, g, g) == []
    tri = nx.complete_graph(3)
    target = nx.complete_graph(4)
    shared = {0: [0], 1: [1, 3], 2: [2, 3]}
    assert _kinds(validate(shared, tri, target)) == ["overlap"]
    path = nx.path_graph(3)
    split = {0: [0, 2]}
    assert _kinds(validate(split, nx.empty_graph(1), path)) == ["disconnected"]


def test_validate_reports_missing_and_unknown():
    tri = nx.complete_graph(3)
    problems = validate({0: [0], 1: [9]}, tri, nx.path_graph(3))
    kinds = _kinds(problems)
    assert "missing_chain" in kinds and "unknown_node" in kinds and "missing_edge" in kinds


def test_chain_length_stats_examples():
    ones = Embedding({v: (v,) for v in range(5)})
    assert chain_length_stats(ones) == (2, 2.0, 0.0, 2)
    three = Embedding({0: ("a",), 1: ("b",), 2: ("c", "d")})
    lo, mean, std, hi = chain_length_stats(three)
    assert (lo, hi) == (2, 4)
    assert format_stats((lo, mean, std, hi)) == "(2, 2.667 ± 0.943, 4)"
    assert chain_length_stats(three, 1)[1] == pytest.approx(4 / 3)
    with pytest.raises(ValueError):
        chain_length_stats(three, 3)


def test_k10_chain_lengths_on_contracted_p16(cg16):
    emb = find_embedding(nx.complete_graph(10), cg16, seed=0)
    assert validate(emb, nx.complete_graph(10), cg16.to_networkx()) == []
    assert 6 <= chain_length_stats(emb)[1] <= 20
    assert emb.target_hash == cg16.source_hash


def test_deterministic_for_fixed_seed(cg4):
    a = find_embedding(nx.complete_graph(7), cg4, seed=3)
    b = find_embedding(nx.complete_graph(7), cg4, seed=3)
    assert a == b


def test_still_valid_on_supergraph():
    target = generate("chimera", 3).to_networkx()
    src = nx.complete_graph(6)
    emb = find_embedding(src, target, seed=1)
    bigger = target.copy()
    rng = np.random.default_rng(0)
    nodes = list(bigger)
    for _ in range(40):
        a, b = rng.choice(len(nodes), 2, replace=False)
        bigger.add_edge(nodes[a], nodes[b])
    bigger.add_nodes_from(range(10_000, 10_010))
    assert validate(emb, src, bigger) == []


def test_trivially_incompatible():
    with pytest.raises(EmbeddingNotFound):
        find_embedding(nx.complete_graph(5), nx.path_graph(4))
    with pytest.raises(ValueError):
        find_embedding(nx.empty_graph(0), nx.path_graph(4))
    with pytest.raises(ValueError):
        find_embedding(nx.complete_graph(2), nx.empty_graph(0))


def test_disconnected_target_fails():
    with pytest.raises(EmbeddingNotFound):
        find_embedding(nx.complete_graph(2), nx.empty_graph(3), tries=2)


def test_impossible_minor_fails():
    # K5 is not a minor of any planar graph
    with pytest.raises(EmbeddingNotFound):
        find_embedding(nx.complete_graph(5), nx.grid_2d_graph(4, 4), tries=2, max_passes=3)


@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(2, 9), st.floats(0.2, 1.0), st.integers(0, 1000))
def test_random_sources_embed_validly(n, p, seed):
    src = nx.gnp_random_graph(n, p, seed=seed)
    target = generate("chimera", 3).to_networkx()
    emb = find_embedding(src, target, seed=seed)
    assert validate(emb, src, target) == []
    assert set(emb.chains) == set(src)


def test_json_round_trip_with_pair_nodes(tmp_path, cg4):
    emb = find_embedding(nx.complete_graph(5), cg4, seed=2)
    path = tmp_path / "emb.json"
    embedder.save(emb, path)
    back = embedder.load(path, node_type=PairNode)
    assert back.chains == emb.chains
    assert back.target_hash == emb.target_hash
    assert all(isinstance(x, PairNode) for c in back.chains.values() for x in c)
