from __future__ import annotations

import networkx as nx
import pytest

from cliquebed import generate
from cliquebed.contraction import contract_4_cliques, largest_component
from cliquebed.hwgraph import from_edges


@pytest.fixture(scope="session")
def p16():
    return generate("pegasus", 16)


@pytest.fixture(scope="session")
def cg16(p16):
    return largest_component(contract_4_cliques(p16, 0))


@pytest.fixture(scope="session")
def p4():
    return generate("pegasus", 4)


@pytest.fixture(scope="session")
def cg4(p4):
    return largest_component(contract_4_cliques(p4, 0))


@pytest.fixture
def k4_graph():
    return from_edges(nx.complete_graph(4).edges)


def two_var_instance():
    """Two logical variables, each a 2-qubit chain, joined by 4 couplers."""
    from cliquebed.chains import expand
    from cliquebed.contraction import ContractedGraph, PairNode
    from cliquebed.embedder import Embedding

    g = from_edges([(0, 1), (2, 3), (0, 2), (0, 3), (1, 2), (1, 3)])
    A, B = PairNode(0, 1), PairNode(2, 3)
    cg = ContractedGraph((A, B), {(A, B): 4}, g.content_hash)
    return g, expand(Embedding({0: (A,), 1: (B,)}), cg, g, nx.complete_graph(2))


@pytest.fixture(scope="session")
def k8_pair(p16, cg16):
    """K8 four-clique embedding on P16 and its linear counterpart."""
    from cliquebed.chains import derive_linear, expand
    from cliquebed.embedder import find_embedding

    src = nx.complete_graph(8)
    pe = expand(find_embedding(src, cg16, seed=0), cg16, p16, src)
    return pe, derive_linear(pe, p16)
