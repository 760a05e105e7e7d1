"""Physical 4-clique chains and the equivalent linear-path chains.

A contracted embedding assigns each logical variable a connected set of
pair-nodes. Expanding it puts both qubits of every pair into the chain, which
turns a path of pair-nodes into a ladder of 4-cliques. Keeping one qubit per
pair gives the linear-path embedding that uses exactly half the qubits.
"""
from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Iterable

import networkx as nx

from cliquebed.contraction import ContractedGraph, PairNode, SourceMismatch
from cliquebed.embedder import Embedding, as_networkx, validate
from cliquebed.hwgraph import HardwareGraph

Edge = tuple[int, int]
KINDS = ("four_clique", "linear")
SEARCH_LIMIT = 10_000


class DanglingReference(ValueError):
    """An embedding mentions a pair-node the contracted graph does not have."""


class NoValidSelection(RuntimeError):
    """No one-qubit-per-pair choice keeps every chain and logical edge intact."""


def _edge(a: int, b: int) -> Edge:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class PhysicalEmbedding:
    kind: str
    chains: dict[Hashable, tuple[int, ...]]
    intra_couplers: dict[Hashable, tuple[Edge, ...]]
    logical_edge_couplers: dict[tuple, tuple[Edge, ...]]
    pairs: dict[Hashable, tuple[PairNode, ...]] | None = None
    source_hash: str | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")

    @property
    def variables(self) -> list:
        return list(self.chains)

    @property
    def qubits(self) -> list[int]:
        return sorted(q for c in self.chains.values() for q in c)

    def chain_sizes(self) -> dict[Hashable, int]:
        return {v: len(c) for v, c in self.chains.items()}

    def num_chain_couplers(self) -> int:
        return sum(len(c) for c in self.intra_couplers.values())

    def logical_edges(self) -> list[tuple]:
        return list(self.logical_edge_couplers)


def _logical_key(u, v) -> tuple:
    try:
        return (u, v) if u < v else (v, u)
    except TypeError:
        return (u, v) if repr(u) < repr(v) else (v, u)


def _induced(chain: Iterable[int], g: HardwareGraph) -> tuple[Edge, ...]:
    members = set(chain)
    adj = g.adjacency
    return tuple(sorted({_edge(a, b) for a in members for b in adj[a] if b in members}))


def expand(cemb: Embedding, cg: ContractedGraph, g: HardwareGraph, source: nx.Graph | None = None) -> PhysicalEmbedding:
    """Turn a contracted embedding into a physical 4-clique embedding.

    Logical edges come from ``source`` when given; otherwise every pair of
    chains joined by at least one contracted edge is treated as one. The
    couplers of a logical edge are the hardware edges behind the contracted
    edges that connect the two chains.
    """
    if cg.source_hash != g.content_hash:
        raise SourceMismatch("contracted graph was not built from this hardware graph")
    members = set(cg.pairs)
    pairs: dict = {}
    for v, chain in cemb.chains.items():
        nodes = tuple(sorted(PairNode(*p) for p in chain))
        for p in nodes:
            if p not in members:
                raise DanglingReference(f"chain {v!r} uses {p}, which is not in the contracted graph")
        pairs[v] = nodes
    owner = {p: v for v, nodes in pairs.items() for p in nodes}
    chains = {v: tuple(sorted(q for p in nodes for q in p)) for v, nodes in pairs.items()}
    intra = {v: _induced(c, g) for v, c in chains.items()}

    between: dict[tuple, set[Edge]] = {}
    for a, b in cg.multiplicity:
        u, v = owner.get(a), owner.get(b)
        if u is None or v is None or u == v:
            continue
        found = {_edge(x, y) for x in a for y in b if g.has_edge(x, y)}
        between.setdefault(_logical_key(u, v), set()).update(found)
    if source is not None:
        src = as_networkx(source)
        wanted = [_logical_key(u, v) for u, v in src.edges]
        missing = [e for e in wanted if e not in between]
        if missing:
            raise ValueError(f"logical edges without couplers: {missing[:5]}")
        between = {e: between[e] for e in wanted}
    logical = {e: tuple(sorted(between[e])) for e in sorted(between, key=repr)}
    return PhysicalEmbedding("four_clique", chains, intra, logical, pairs, g.content_hash)


def _selection_ok(chosen: dict, pe: PhysicalEmbedding, g: HardwareGraph, vars_: Iterable) -> bool:
    adj = g.adjacency
    for v in vars_:
        qs = chosen[v]
        if len(qs) > 1:
            seen = {qs[0]}
            stack = [qs[0]]
            members = set(qs)
            while stack:
                x = stack.pop()
                for y in adj[x]:
                    if y in members and y not in seen:
                        seen.add(y)
                        stack.append(y)
            if len(seen) != len(members):
                return False
    return True


def _restrict(pe: PhysicalEmbedding, chosen: dict[Hashable, tuple[int, ...]]):
    keep = {q for qs in chosen.values() for q in qs}
    intra = {v: tuple(e for e in pe.intra_couplers[v] if e[0] in keep and e[1] in keep) for v in chosen}
    logical = {k: tuple(e for e in es if e[0] in keep and e[1] in keep)
               for k, es in pe.logical_edge_couplers.items()}
    return intra, logical


def derive_linear(pe: PhysicalEmbedding, g: HardwareGraph, seed: int = 0) -> PhysicalEmbedding:
    """Keep one qubit of every pair-node, preserving chains and logical edges.

    The lower qubit of each pair is tried first. If that breaks a chain or
    drops a logical edge, a seeded backtracking search over per-pair choices
    runs, capped at ``SEARCH_LIMIT`` partial states.
    """
    if pe.kind != "four_clique" or pe.pairs is None:
        raise ValueError("derive_linear needs a four_clique embedding with its pair-nodes")
    if pe.source_hash is not None and pe.source_hash != g.content_hash:
        raise SourceMismatch("embedding was not expanded on this hardware graph")

    def build(choice: dict[PairNode, int]) -> dict:
        return {v: tuple(sorted(choice[p] for p in ps)) for v, ps in pe.pairs.items()}

    def edges_ok(intra_logical) -> bool:
        return all(intra_logical[1].values())

    choice = {p: p.q_lo for ps in pe.pairs.values() for p in ps}
    chosen = build(choice)
    if _selection_ok(chosen, pe, g, chosen) and edges_ok(_restrict(pe, chosen)):
        return _linear(pe, chosen)

    rng = random.Random(seed)
    order = [(v, p) for v, ps in pe.pairs.items() for p in ps]
    last_of = {v: i for i, (v, _) in enumerate(order)}
    done_after: dict[int, list] = {}
    for v, i in last_of.items():
        done_after.setdefault(i, []).append(v)
    nbrs: dict = {}
    for u, v in pe.logical_edge_couplers:
        nbrs.setdefault(u, []).append((u, v))
        nbrs.setdefault(v, []).append((u, v))
    states = 0
    partial: dict[PairNode, int] = {}
    finished: set = set()

    def chain_of(v) -> tuple[int, ...]:
        return tuple(sorted(partial[p] for p in pe.pairs[v]))

    def consistent(i: int) -> bool:
        for v in done_after.get(i, ()):
            if not _selection_ok({v: chain_of(v)}, pe, g, [v]):
                return False
            finished.add(v)
            for u, w in nbrs.get(v, ()):
                if u in finished and w in finished:
                    a, b = set(chain_of(u)), set(chain_of(w))
                    if not any((x in a and y in b) or (x in b and y in a)
                               for x, y in pe.logical_edge_couplers[(u, w)]):
                        return False
        return True

    def search(i: int) -> bool:
        nonlocal states
        if i == len(order):
            return True
        states += 1
        if states > SEARCH_LIMIT:
            raise NoValidSelection(f"no valid linear selection within {SEARCH_LIMIT} states")
        _, p = order[i]
        options = list(p)
        rng.shuffle(options)
        for q in options:
            partial[p] = q
            snapshot = set(finished)
            if consistent(i) and search(i + 1):
                return True
            finished.clear()
            finished.update(snapshot)
        del partial[p]
        return False

    if not search(0):
        raise NoValidSelection("no one-qubit-per-pair selection keeps every chain and logical edge")
    return _linear(pe, build(partial))


def _linear(pe: PhysicalEmbedding, chosen: dict) -> PhysicalEmbedding:
    intra, logical = _restrict(pe, chosen)
    return PhysicalEmbedding("linear", chosen, intra, logical, pe.pairs, pe.source_hash)


def degree_profile(pe: PhysicalEmbedding, var) -> tuple[int, ...]:
    """Sorted within-chain degrees of ``var``'s qubits."""
    if var not in pe.chains:
        raise KeyError(f"unknown variable {var!r}")
    deg = Counter({q: 0 for q in pe.chains[var]})
    for a, b in pe.intra_couplers[var]:
        deg[a] += 1
        deg[b] += 1
    return tuple(sorted(deg.values()))


def validate_physical(pe: PhysicalEmbedding, g: HardwareGraph, source: nx.Graph | None = None) -> list[dict]:
    """Minor-embedding checks plus coupler bookkeeping checks against ``g``."""
    if source is None:
        source = nx.Graph()
        source.add_nodes_from(pe.chains)
        source.add_edges_from(pe.logical_edge_couplers)
    out = validate(pe.chains, source, g.to_networkx())
    for v, es in pe.intra_couplers.items():
        members = set(pe.chains[v])
        for a, b in es:
            if not g.has_edge(a, b) or a not in members or b not in members:
                out.append({"kind": "bad_intra_coupler", "var": v, "edge": [a, b]})
    for (u, v), es in pe.logical_edge_couplers.items():
        if not es:
            out.append({"kind": "missing_edge", "edge": [u, v]})
        cu, cv = set(pe.chains[u]), set(pe.chains[v])
        for a, b in es:
            if not g.has_edge(a, b) or not ((a in cu and b in cv) or (a in cv and b in cu)):
                out.append({"kind": "bad_logical_coupler", "edge": [u, v], "coupler": [a, b]})
    if pe.pairs is not None:
        factor = 2 if pe.kind == "four_clique" else 1
        for v, ps in pe.pairs.items():
            if len(pe.chains[v]) != factor * len(ps):
                out.append({"kind": "chain_size", "var": v})
    return out


# -- IO ---------------------------------------------------------------------

def _key(v) -> str:
    return str(v)


def _unkey(k: str):
    return int(k) if k.lstrip("-").isdigit() else k


def to_json_dict(pe: PhysicalEmbedding) -> dict:
    data = {
        "kind": pe.kind,
        "chains": {_key(v): list(c) for v, c in pe.chains.items()},
        "intra_couplers": {_key(v): [list(e) for e in es] for v, es in pe.intra_couplers.items()},
        "logical_edge_couplers": [[u, v, [list(e) for e in es]]
                                  for (u, v), es in pe.logical_edge_couplers.items()],
        "target_hash": pe.source_hash,
    }
    if pe.pairs is not None:
        data["pairs"] = {_key(v): [list(p) for p in ps] for v, ps in pe.pairs.items()}
    return data


def from_json_dict(data: dict) -> PhysicalEmbedding:
    pairs = None
    if "pairs" in data:
        pairs = {_unkey(k): tuple(PairNode(*p) for p in ps) for k, ps in data["pairs"].items()}
    return PhysicalEmbedding(
        data["kind"],
        {_unkey(k): tuple(c) for k, c in data["chains"].items()},
        {_unkey(k): tuple(tuple(e) for e in es) for k, es in data["intra_couplers"].items()},
        {(u, v): tuple(tuple(e) for e in es) for u, v, es in data["logical_edge_couplers"]},
        pairs,
        data.get("target_hash"),
    )


def save(pe: PhysicalEmbedding, path: str | Path) -> None:
    Path(path).write_text(json.dumps(to_json_dict(pe), separators=(",", ":")) + "\n")


def load(path: str | Path) -> PhysicalEmbedding:
    return from_json_dict(json.loads(Path(path).read_text()))
