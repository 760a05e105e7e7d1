"""Contract a hardware graph into a network of 4-clique pair-nodes.

Every usable 4-clique ``{a, b, c, d}`` is split into two adjacent qubit pairs,
each pair becomes one node of the contracted graph, and the two pairs of a
clique are joined by the 4 couplers crossing between them. Qubits that never
land in a pair are dropped, as are couplers that do not join two pairs.

Between pairs that come from *different* cliques the hardware may offer
anywhere from 1 to 4 couplers. Each contracted edge records that count as its
multiplicity; ``min_multiplicity`` decides which of them survive.
"""
from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, NamedTuple

import networkx as nx

from cliquebed.hwgraph import HardwareGraph

ORDERS = ("random", "lexicographic")
PAIRINGS = ("shared", "random")


class PairNode(NamedTuple):
    q_lo: int
    q_hi: int

    @classmethod
    def of(cls, a: int, b: int) -> "PairNode":
        return cls(a, b) if a < b else cls(b, a)


class SourceMismatch(ValueError):
    """A contracted graph was paired with a hardware graph it was not built from."""


PairEdge = tuple[PairNode, PairNode]


@dataclass(frozen=True)
class ContractedGraph:
    pairs: tuple[PairNode, ...]
    multiplicity: dict[PairEdge, int]
    source_hash: str

    def __post_init__(self):
        pairs = tuple(sorted(PairNode(*p) for p in self.pairs))
        seen: set[int] = set()
        for p in pairs:
            if p.q_lo >= p.q_hi:
                raise ValueError(f"pair {p} is not ordered")
            if p.q_lo in seen or p.q_hi in seen:
                raise ValueError(f"qubit of {p} appears in two pairs")
            seen.update(p)
        members = set(pairs)
        mult = {}
        for (a, b), k in self.multiplicity.items():
            a, b = PairNode(*a), PairNode(*b)
            if a == b:
                raise ValueError("self-loop in contracted graph")
            if a not in members or b not in members:
                raise ValueError(f"edge ({a}, {b}) references an unknown pair")
            if not 1 <= k <= 4:
                raise ValueError(f"multiplicity {k} outside [1, 4]")
            mult[(a, b) if a < b else (b, a)] = int(k)
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "multiplicity", dict(sorted(mult.items())))

    @property
    def nodes(self) -> tuple[PairNode, ...]:
        return self.pairs

    @property
    def edges(self) -> list[PairEdge]:
        return list(self.multiplicity)

    def __len__(self) -> int:
        return len(self.pairs)

    @cached_property
    def adjacency(self) -> dict[PairNode, frozenset[PairNode]]:
        adj: dict[PairNode, set[PairNode]] = {p: set() for p in self.pairs}
        for a, b in self.multiplicity:
            adj[a].add(b)
            adj[b].add(a)
        return {p: frozenset(n) for p, n in adj.items()}

    @cached_property
    def qubit_owner(self) -> dict[int, PairNode]:
        return {q: p for p in self.pairs for q in p}

    def has_edge(self, a: PairNode, b: PairNode) -> bool:
        return ((a, b) if a < b else (b, a)) in self.multiplicity

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.pairs)
        g.add_edges_from((a, b, {"multiplicity": k}) for (a, b), k in self.multiplicity.items())
        return g

    def subgraph(self, pairs: Iterable[PairNode]) -> "ContractedGraph":
        keep = set(pairs)
        return ContractedGraph(
            tuple(keep),
            {e: k for e, k in self.multiplicity.items() if e[0] in keep and e[1] in keep},
            self.source_hash,
        )


def enumerate_4_cliques(g: HardwareGraph) -> list[tuple[int, int, int, int]]:
    """All 4-cliques of ``g`` as sorted tuples, in lexicographic order."""
    adj = g.adjacency
    up = {q: sorted(v for v in adj[q] if v > q) for q in g.nodes}
    out = []
    for a in g.nodes:
        na = up[a]
        for i, b in enumerate(na):
            adj_b = adj[b]
            common = [x for x in na[i + 1:] if x in adj_b]
            for j, c in enumerate(common):
                adj_c = adj[c]
                out.extend((a, b, c, d) for d in common[j + 1:] if d in adj_c)
    return out


def _pairings(k: tuple[int, int, int, int]) -> list[tuple[PairNode, PairNode]]:
    a, b, c, d = k
    return [
        (PairNode(a, b), PairNode(c, d)),
        (PairNode(a, c), PairNode(b, d)),
        (PairNode(a, d), PairNode(b, c)),
    ]


def contract_4_cliques(g: HardwareGraph, seed: int = 0, *, order: str = "random",
                       pairing: str = "shared", min_multiplicity: int = 4) -> ContractedGraph:
    """Greedy 4-clique contraction of ``g``.

    Cliques are visited in ``order``: ``"lexicographic"`` (sorted member ids)
    or ``"random"`` (a seeded permutation of that list). A clique touching an
    already-contracted qubit is skipped. The split into two pairs is either
    drawn uniformly from the three options (``pairing="random"``) or taken as
    the split whose pairs share the most hardware neighbours, with ties drawn
    at random (``pairing="shared"``). On Pegasus and Zephyr the shared rule
    always pairs odd-coupled qubits, which is the split that lets distinct
    cliques link through full 4-coupler edges.

    All randomness comes from one ``random.Random(seed)`` stream, so a fixed
    seed reproduces the output exactly.
    """
    if order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}")
    if pairing not in PAIRINGS:
        raise ValueError(f"pairing must be one of {PAIRINGS}")
    if not 1 <= min_multiplicity <= 4:
        raise ValueError("min_multiplicity must be in [1, 4]")
    rng = random.Random(seed)
    cliques = enumerate_4_cliques(g)
    if order == "random":
        rng.shuffle(cliques)
    adj = g.adjacency
    used: set[int] = set()
    pairs: list[PairNode] = []
    for k in cliques:
        if any(q in used for q in k):
            continue
        options = _pairings(k)
        if pairing == "shared":
            scores = [len(adj[p.q_lo] & adj[p.q_hi]) + len(adj[r.q_lo] & adj[r.q_hi]) for p, r in options]
            best = max(scores)
            options = [o for o, s in zip(options, scores) if s == best]
        first, second = options[rng.randrange(len(options))] if len(options) > 1 else options[0]
        pairs.extend((first, second))
        used.update(k)

    owner = {q: p for p in pairs for q in p}
    counts: Counter[PairEdge] = Counter()
    for u, v in g.edges:
        pu, pv = owner.get(u), owner.get(v)
        if pu is None or pv is None or pu == pv:
            continue
        counts[(pu, pv) if pu < pv else (pv, pu)] += 1
    mult = {e: k for e, k in counts.items() if k >= min_multiplicity}
    return ContractedGraph(tuple(pairs), mult, g.content_hash)


def components(cg: ContractedGraph) -> list[ContractedGraph]:
    """Connected components, largest first; equal sizes ordered by smallest pair."""
    comps = [sorted(c) for c in nx.connected_components(cg.to_networkx())]
    comps.sort(key=lambda c: (-len(c), c[0]))
    return [cg.subgraph(c) for c in comps]


def largest_component(cg: ContractedGraph) -> ContractedGraph:
    comps = components(cg)
    return comps[0] if comps else cg


def coverage(cg: ContractedGraph, g: HardwareGraph, *, include_intra_pair: bool = True) -> tuple[float, float]:
    """Fractions of ``g``'s qubits and couplers used by ``cg``.

    Couplers are counted as the sum of contracted-edge multiplicities plus the
    coupler inside each pair; ``include_intra_pair=False`` drops the latter.
    """
    if cg.source_hash != g.content_hash:
        raise SourceMismatch("contracted graph was not built from this hardware graph")
    qubits = 2 * len(cg.pairs) / len(g.nodes) if g.nodes else 0.0
    used = sum(cg.multiplicity.values())
    if include_intra_pair:
        used += len(cg.pairs)
    couplers = used / len(g.edges) if g.edges else 0.0
    return qubits, couplers


def to_json_dict(cg: ContractedGraph) -> dict:
    index = {p: i for i, p in enumerate(cg.pairs)}
    return {
        "pairs": [list(p) for p in cg.pairs],
        "edges": [[index[a], index[b], k] for (a, b), k in cg.multiplicity.items()],
        "source_hash": cg.source_hash,
    }


def from_json_dict(data: dict) -> ContractedGraph:
    pairs = [PairNode(int(a), int(b)) for a, b in data["pairs"]]
    mult = {(pairs[i], pairs[j]): int(k) for i, j, k in data["edges"]}
    return ContractedGraph(tuple(pairs), mult, data["source_hash"])


def save(cg: ContractedGraph, path: str | Path) -> None:
    Path(path).write_text(json.dumps(to_json_dict(cg), separators=(",", ":")) + "\n")


def load(path: str | Path) -> ContractedGraph:
    return from_json_dict(json.loads(Path(path).read_text()))
