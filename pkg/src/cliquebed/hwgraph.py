"""Annealer hardware graphs: ideal Chimera/Pegasus/Zephyr lattices, file IO, defects.

Node ids are the canonical linear indices of each family's coordinate scheme:

* chimera ``(row, col, u, k)``, ``0 <= u < 2``, ``0 <= k < t``::

      q = ((row * m + col) * 2 + u) * t + k

* pegasus ``(u, w, k, z)``, ``0 <= w < m``, ``0 <= k < 12``, ``0 <= z < m - 1``::

      q = ((u * m + w) * 12 + k) * (m - 1) + z

* zephyr ``(u, w, k, j, z)``, ``0 <= w < 2m + 1``, ``0 <= k < t``, ``0 <= z < m``::

      q = ((((u * (2m + 1) + w) * t + k) * 2 + j) * m + z

These agree with the integer labels used by D-Wave's published topology
generators, so graphs exported from real devices can be cross-checked against
:func:`generate` output by id.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from pathlib import Path
from typing import Iterable

import networkx as nx

FAMILIES = ("chimera", "pegasus", "zephyr", "custom")

# Default Pegasus offsets (vertical, horizontal), index 0 of the reference generator.
PEGASUS_OFFSETS = (
    (2, 2, 2, 2, 10, 10, 10, 10, 6, 6, 6, 6),
    (6, 6, 6, 6, 2, 2, 2, 2, 10, 10, 10, 10),
)

MAX_DEGREE = {"chimera": 6, "pegasus": 15, "zephyr": 20}


class GraphError(ValueError):
    """Raised for malformed hardware graphs or unsupported lattice parameters."""


Edge = tuple[int, int]


def _norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class HardwareGraph:
    """Immutable qubit/coupler graph.

    ``nodes`` is sorted, ``edges`` holds sorted ``(lo, hi)`` pairs in sorted
    order. ``defect_nodes``/``defect_edges`` record what :func:`apply_defects`
    removed; they never overlap the live node and edge sets.
    """

    family: str
    m: int
    nodes: tuple[int, ...]
    edges: tuple[Edge, ...]
    defect_nodes: tuple[int, ...] = ()
    defect_edges: tuple[Edge, ...] = ()
    metadata: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise GraphError(f"unknown family {self.family!r}")
        nodes = tuple(sorted(int(q) for q in self.nodes))
        if any(q < 0 for q in nodes):
            raise GraphError("qubit ids must be non-negative")
        if len(set(nodes)) != len(nodes):
            raise GraphError("duplicate node")
        node_set = set(nodes)
        edges = []
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop on qubit {u}")
            if u not in node_set or v not in node_set:
                raise GraphError(f"edge ({u}, {v}) has an endpoint outside the node set")
            edges.append(_norm_edge(u, v))
        edges.sort()
        for a, b in zip(edges, edges[1:]):
            if a == b:
                raise GraphError(f"duplicate edge {a}")
        dead_nodes = tuple(sorted(int(q) for q in self.defect_nodes))
        dead_edges = tuple(sorted(_norm_edge(int(u), int(v)) for u, v in self.defect_edges))
        if node_set.intersection(dead_nodes):
            raise GraphError("defect nodes overlap live nodes")
        if set(edges).intersection(dead_edges):
            raise GraphError("defect edges overlap live edges")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "defect_nodes", dead_nodes)
        object.__setattr__(self, "defect_edges", dead_edges)

    @cached_property
    def adjacency(self) -> dict[int, frozenset[int]]:
        adj: dict[int, set[int]] = {q: set() for q in self.nodes}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return {q: frozenset(nbrs) for q, nbrs in adj.items()}

    @cached_property
    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    @cached_property
    def content_hash(self) -> str:
        """sha256 over the canonical node and edge lists."""
        payload = json.dumps([list(self.nodes), [list(e) for e in self.edges]], separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()

    def has_edge(self, u: int, v: int) -> bool:
        return _norm_edge(u, v) in self.edge_set

    def degree(self, q: int) -> int:
        return len(self.adjacency[q])

    def max_degree(self) -> int:
        return max((len(n) for n in self.adjacency.values()), default=0)

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from(self.edges)
        return g

    def stats(self) -> dict:
        degrees = [len(n) for n in self.adjacency.values()]
        return {
            "family": self.family,
            "m": self.m,
            "nodes": len(self.nodes),
            "edges": len(self.edges),
            "max_degree": max(degrees, default=0),
            "mean_degree": (sum(degrees) / len(degrees)) if degrees else 0.0,
            "defect_nodes": len(self.defect_nodes),
            "defect_edges": len(self.defect_edges),
        }


# -- coordinates ------------------------------------------------------------

def chimera_index(m: int, row: int, col: int, u: int, k: int, t: int = 4) -> int:
    return ((row * m + col) * 2 + u) * t + k


def pegasus_index(m: int, u: int, w: int, k: int, z: int) -> int:
    return ((u * m + w) * 12 + k) * (m - 1) + z


def pegasus_coordinates(m: int, q: int) -> tuple[int, int, int, int]:
    q, z = divmod(q, m - 1)
    q, k = divmod(q, 12)
    u, w = divmod(q, m)
    return u, w, k, z


def zephyr_index(m: int, u: int, w: int, k: int, j: int, z: int, t: int = 4) -> int:
    return (((u * (2 * m + 1) + w) * t + k) * 2 + j) * m + z


def zephyr_coordinates(m: int, q: int, t: int = 4) -> tuple[int, int, int, int, int]:
    q, z = divmod(q, m)
    q, j = divmod(q, 2)
    q, k = divmod(q, t)
    u, w = divmod(q, 2 * m + 1)
    return u, w, k, j, z


# -- lattice generators -----------------------------------------------------

def _chimera(m: int, t: int = 4) -> tuple[list[int], list[Edge]]:
    idx = lambda r, c, u, k: chimera_index(m, r, c, u, k, t)  # noqa: E731
    nodes = [idx(r, c, u, k) for r, c, u, k in product(range(m), range(m), (0, 1), range(t))]
    edges = [(idx(r, c, 0, k), idx(r, c, 1, kk))
             for r, c, k, kk in product(range(m), range(m), range(t), range(t))]
    edges += [(idx(r, c, 0, k), idx(r + 1, c, 0, k))
              for r, c, k in product(range(m - 1), range(m), range(t))]
    edges += [(idx(r, c, 1, k), idx(r, c + 1, 1, k))
              for r, c, k in product(range(m), range(m - 1), range(t))]
    return nodes, edges


def _pegasus(m: int, fabric_only: bool) -> tuple[list[int], list[Edge]]:
    m1 = m - 1
    off0, off1 = PEGASUS_OFFSETS
    idx = lambda u, w, k, z: pegasus_index(m, u, w, k, z)  # noqa: E731
    if fabric_only:
        start = (min(off1), min(off0))
        end = (12 - max(off1), 12 - max(off0))
    else:
        start = end = (0, 0)

    def k_range(u, w, step=1):
        return range(start[u] if w == 0 else 0, 12 - (end[u] if w == m1 else 0), step)

    def keep(u, w, k):
        if w == 0 and k < start[u]:
            return False
        if w == m1 and k >= 12 - end[u]:
            return False
        return True

    nodes = [idx(u, w, k, z) for u, w, k, z in product((0, 1), range(m), range(12), range(m1))
             if keep(u, w, k)]
    # external couplers: along a qubit line
    edges = [(idx(u, w, k, z), idx(u, w, k, z + 1))
             for u in (0, 1) for w in range(m) for k in k_range(u, w) for z in range(m1 - 1)]
    # odd couplers: parallel neighbours sharing a line segment
    edges += [(idx(u, w, k, z), idx(u, w, k + 1, z))
              for u in (0, 1) for w in range(m) for k in k_range(u, w, 2) for z in range(m1)]
    # internal couplers: vertical x horizontal, shifted by the offsets
    for w, kk, z in product(range(m), range(12), range(m1)):
        for k in range(0 if w else off1[kk], 12 if w < m1 else off1[kk]):
            a = (0, w, k, z)
            b = (1, z + (kk < off0[k]), kk, w - (k < off1[kk]))
            if keep(a[0], a[1], a[2]) and keep(b[0], b[1], b[2]):
                edges.append((idx(*a), idx(*b)))
    return nodes, edges


def _zephyr(m: int, t: int = 4) -> tuple[list[int], list[Edge]]:
    M = 2 * m + 1
    idx = lambda u, w, k, j, z: zephyr_index(m, u, w, k, j, z, t)  # noqa: E731
    nodes = [idx(*c) for c in product((0, 1), range(M), range(t), (0, 1), range(m))]
    edges = [(idx(u, w, k, j, z), idx(u, w, k, j, z + 1))
             for u, w, k, j, z in product((0, 1), range(M), range(t), (0, 1), range(m - 1))]
    edges += [(idx(u, w, k, 0, z), idx(u, w, k, 1, z - a))
              for u, w, k, a in product((0, 1), range(M), range(t), (0, 1)) for z in range(a, m)]
    edges += [(idx(0, 2 * w + 1 + a * (2 * i - 1), k, j, z), idx(1, 2 * z + 1 + b * (2 * j - 1), h, i, w))
              for w, z, h, k, i, j, a, b in product(range(m), range(m), range(t), range(t),
                                                    (0, 1), (0, 1), (0, 1), (0, 1))]
    return nodes, edges


def generate(family: str, m: int, *, fabric_only: bool = False, t: int = 4) -> HardwareGraph:
    """Build the ideal, defect-free lattice of the given family.

    Pegasus defaults to the full ``24 m (m - 1)`` coordinate set; pass
    ``fabric_only=True`` to drop the boundary qubits that real devices do not
    fabricate. ``t`` is the tile parameter for Chimera and Zephyr.
    """
    if family == "chimera":
        if m < 1:
            raise GraphError("chimera requires m >= 1")
        nodes, edges = _chimera(m, t)
    elif family == "pegasus":
        if m < 2:
            raise GraphError("pegasus requires m >= 2")
        nodes, edges = _pegasus(m, fabric_only)
    elif family == "zephyr":
        if m < 1:
            raise GraphError("zephyr requires m >= 1")
        nodes, edges = _zephyr(m, t)
    else:
        raise GraphError(f"cannot generate family {family!r}")
    meta = {"t": t} if family != "pegasus" else {"fabric_only": fabric_only}
    return HardwareGraph(family, m, tuple(nodes), tuple(edges), metadata=meta)


def from_edges(edges: Iterable[Edge], nodes: Iterable[int] = ()) -> HardwareGraph:
    """Custom graph from an edge iterable (endpoints are added as nodes)."""
    edges = [(int(u), int(v)) for u, v in edges]
    node_set = set(int(q) for q in nodes)
    for u, v in edges:
        node_set.update((u, v))
    return HardwareGraph("custom", 0, tuple(node_set), tuple(edges))


def apply_defects(g: HardwareGraph, dead_nodes: Iterable[int] = (),
                  dead_edges: Iterable[Edge] = ()) -> HardwareGraph:
    """Remove dead qubits (with their couplers) and dead couplers from ``g``."""
    dead_nodes = sorted(set(int(q) for q in dead_nodes))
    dead_edges = sorted(set(_norm_edge(int(u), int(v)) for u, v in dead_edges))
    missing = [q for q in dead_nodes if q not in g.adjacency]
    if missing:
        raise GraphError(f"defect list names nonexistent qubits {missing[:5]}")
    bad = [e for e in dead_edges if e not in g.edge_set]
    if bad:
        raise GraphError(f"defect list names nonexistent couplers {bad[:5]}")
    if not dead_nodes and not dead_edges:
        return g
    gone = set(dead_nodes)
    removed_edges = set(dead_edges)
    removed_edges.update(e for e in g.edges if e[0] in gone or e[1] in gone)
    nodes = tuple(q for q in g.nodes if q not in gone)
    edges = tuple(e for e in g.edges if e not in removed_edges)
    return HardwareGraph(
        g.family, g.m, nodes, edges,
        defect_nodes=tuple(sorted(set(g.defect_nodes).union(dead_nodes))),
        defect_edges=tuple(sorted(set(g.defect_edges).union(removed_edges))),
        metadata=dict(g.metadata),
    )


# -- IO ---------------------------------------------------------------------

def to_json_dict(g: HardwareGraph) -> dict:
    return {
        "family": g.family,
        "m": g.m,
        "nodes": list(g.nodes),
        "edges": [list(e) for e in g.edges],
        "defect_nodes": list(g.defect_nodes),
        "defect_edges": [list(e) for e in g.defect_edges],
    }


def from_json_dict(data: dict) -> HardwareGraph:
    try:
        family = data.get("family", "custom")
        m = int(data.get("m", 0))
        edges = [tuple(e) for e in data["edges"]]
        nodes = data.get("nodes")
        if nodes is None:
            nodes = sorted({q for e in edges for q in e})
        for e in edges:
            if len(e) != 2:
                raise GraphError(f"malformed edge {list(e)}")
    except (KeyError, TypeError, AttributeError) as exc:
        raise GraphError(f"malformed graph JSON: {exc}") from exc
    return HardwareGraph(
        family, m if family != "custom" else 0, tuple(nodes), tuple(edges),
        defect_nodes=tuple(data.get("defect_nodes", ())),
        defect_edges=tuple(tuple(e) for e in data.get("defect_edges", ())),
    )


def _parse_edgelist(text: str) -> HardwareGraph:
    nodes: list[int] = []
    edges: list[Edge] = []
    meta: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        if raw.startswith("#") and "family=" in raw:
            meta.update(kv.split("=", 1) for kv in raw[1:].split() if "=" in kv)
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            ids = [int(p) for p in parts]
        except ValueError as exc:
            raise GraphError(f"line {lineno}: expected integers, got {raw!r}") from exc
        if len(ids) == 1:
            nodes.append(ids[0])
        elif len(ids) == 2:
            edges.append((ids[0], ids[1]))
        else:
            raise GraphError(f"line {lineno}: expected 'u v', got {raw!r}")
    node_set = set(nodes)
    for u, v in edges:
        node_set.update((u, v))
    family = meta.get("family", "custom")
    m = int(meta.get("m", 0)) if family != "custom" else 0
    return HardwareGraph(family, m, tuple(node_set), tuple(edges))


def load(path: str | Path, format: str | None = None) -> HardwareGraph:
    """Read a graph from ``json`` or ``edgelist`` (guessed from the suffix if omitted)."""
    path = Path(path)
    if format is None:
        format = "json" if path.suffix.lower() == ".json" else "edgelist"
    text = path.read_text()
    if format == "json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GraphError(f"{path}: {exc}") from exc
        return from_json_dict(data)
    if format == "edgelist":
        return _parse_edgelist(text)
    raise GraphError(f"unknown graph format {format!r}")


def save(g: HardwareGraph, path: str | Path, format: str | None = None) -> None:
    path = Path(path)
    if format is None:
        format = "json" if path.suffix.lower() == ".json" else "edgelist"
    if format == "json":
        path.write_text(json.dumps(to_json_dict(g), separators=(",", ":")) + "\n")
    elif format == "edgelist":
        lines = [f"# family={g.family} m={g.m}"]
        edge_nodes = {q for e in g.edges for q in e}
        lines += [str(q) for q in g.nodes if q not in edge_nodes]
        lines += [f"{u} {v}" for u, v in g.edges]
        path.write_text("\n".join(lines) + "\n")
    else:
        raise GraphError(f"unknown graph format {format!r}")
