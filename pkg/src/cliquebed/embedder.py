"""Heuristic minor embedding onto an arbitrary target graph, plus validation.

The search follows the Cai, Macready and Roy scheme. Variables are placed one
at a time; a variable's chain is grown from the target node that minimises the
summed weighted distance to every already-placed neighbour chain, and is the
union of the shortest paths from that root to each of those chains. Node
weights grow exponentially with how many other chains already use a node, so
overlaps are tolerated early and squeezed out by later rip-up-and-reroute
passes. Once no node is shared, chains are re-routed through free nodes only
and then trimmed of removable leaves.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Hashable, Iterable

import networkx as nx
import numpy as np
from numba import njit


class EmbeddingNotFound(RuntimeError):
    pass


@dataclass(frozen=True)
class Embedding:
    """Map from logical variable to a chain of target nodes."""

    chains: dict[Hashable, tuple]
    target_hash: str | None = None

    def __getitem__(self, v):
        return self.chains[v]

    def __len__(self) -> int:
        return len(self.chains)

    def chain_sizes(self) -> dict[Hashable, int]:
        return {v: len(c) for v, c in self.chains.items()}


def as_networkx(graph: Any) -> nx.Graph:
    """Accept a networkx graph, an edge iterable, or any object with ``to_networkx``."""
    if isinstance(graph, nx.Graph):
        return graph
    if hasattr(graph, "to_networkx"):
        return graph.to_networkx()
    g = nx.Graph()
    g.add_edges_from(graph)
    return g


def _target_hash(target: Any) -> str | None:
    return getattr(target, "source_hash", None) or getattr(target, "content_hash", None)


def _sorted_nodes(g: nx.Graph) -> list:
    try:
        return sorted(g.nodes)
    except TypeError:
        return sorted(g.nodes, key=repr)


DEFAULT_TRIES = 10
DEFAULT_MAX_PASSES = 50
HISTORY_STEP = 0.05


class _Search:
    """One embedding attempt over an integer-indexed target."""

    def __init__(self, src_adj: dict, indptr: np.ndarray, indices: np.ndarray,
                 n_target: int, rng: np.random.Generator, penalty_base: float):
        self.src_adj = src_adj
        self.indptr = indptr
        self.indices = indices
        self.n = n_target
        self.rng = rng
        self.base = penalty_base
        self.chains: dict[Hashable, np.ndarray] = {}
        self.usage = np.zeros(n_target, dtype=np.int64)
        self.history = np.ones(n_target)

    def weights(self, bound: int | None = None) -> np.ndarray:
        """Node weights ``b ** usage * history``, with nodes at or above ``bound`` made impassable.

        ``b`` is at least ``penalty_base`` and is raised while the worst
        overlap is small, so one extra use outweighs any detour; the largest
        weight stays near ``2 ** 40``. ``history`` starts at 1 and grows on
        nodes that stay over-used from pass to pass.
        """
        worst = max(int(self.usage.max(initial=0)), 1)
        b = max(self.base, 2.0 ** (40.0 / worst))
        w = b ** np.minimum(self.usage, worst).astype(float) * self.history
        if bound is not None:
            w[self.usage >= bound] = np.inf
        return w

    def place(self, v, weights: np.ndarray, donate: bool = True, roots: int = 1):
        """Cheapest chain for ``v`` given everyone else, or None if unreachable.

        A root's cost is the sum over placed neighbours of the weighted path
        length from that neighbour's chain, counting the root itself once per
        neighbour, so sitting on top of another chain is charged repeatedly.
        Each path starts from whichever node already in the new chain is
        closest to the neighbour. With ``donate`` the stretch of a path that
        serves only one neighbour is handed to that neighbour's chain.

        Returns ``(chain, {neighbour: extra nodes})``.
        """
        placed = [u for u in self.src_adj[v] if u in self.chains]
        if not placed:
            total = weights.copy()
        else:
            sources = [self.chains[u] for u in placed]
            offsets = np.zeros(len(placed) + 1, dtype=np.int64)
            offsets[1:] = np.cumsum([len(c) for c in sources])
            finite = weights[np.isfinite(weights)]
            unit = bool(finite.size == 0 or (finite.min() == 1.0 and finite.max() == 1.0))
            dists, preds = _chain_distances(self.indptr, self.indices, weights,
                                            np.concatenate(sources), offsets, unit)
            total = np.zeros(self.n)
            routes = []
            for i, u in enumerate(placed):
                dist = dists[i]
                inside = np.zeros(self.n, dtype=bool)
                inside[sources[i]] = True
                dist[inside] = weights[inside]
                total += dist
                routes.append((u, dist, preds[i], inside))
        best = total.min()
        if not np.isfinite(best):
            return None
        ties = np.flatnonzero(total <= best * (1 + 1e-12))
        if roots > 1 and placed:
            # several cheap roots; keep the one giving the fewest nodes
            k = min(roots, int(np.isfinite(total).sum()))
            pool = np.argpartition(total, k - 1)[:k]
            pool = pool[np.isfinite(total[pool])]
            pool = pool[np.lexsort((pool, total[pool]))]
            candidates = [self._grow(int(r), routes) for r in pool]
            refs, paths = min(candidates, key=lambda c: len(c[0]))
        elif not placed:
            # nothing to be near yet: any cheapest node will do, so spread tries out
            refs, paths = self._grow(int(self.rng.choice(ties)), [])
        else:
            refs, paths = self._grow(int(ties[0]), routes)
        donations: dict = {}
        if donate:
            for u, path in paths:
                # only the tail touching u's chain can move without splitting anything
                cut = len(path)
                while cut > 0 and refs[path[cut - 1]] == 1:
                    cut -= 1
                if cut < len(path):
                    donations[u] = path[cut:]
            given = {y for nodes in donations.values() for y in nodes}
            keep = [y for y in refs if y not in given]
        else:
            keep = list(refs)
        return np.array(sorted(keep)), donations

    @staticmethod
    def _grow(root: int, routes: list) -> tuple[dict, list]:
        """Union of shortest paths from ``root`` to each neighbour chain."""
        refs = {root: len(routes) + 1}
        paths = []
        for u, dist, pred, inside in routes:
            members = np.fromiter(refs, dtype=np.int64)
            x = int(members[np.argmin(dist[members])])
            start = x
            path = []
            while not inside[x]:
                if x != start:
                    path.append(x)
                x = int(pred[x])
            refs[start] = refs.get(start, 0) + 1
            for y in path:
                refs[y] = refs.get(y, 0) + 1
            paths.append((u, path))
        return refs, paths

    def put(self, v, plan) -> None:
        chain, donations = plan
        self.chains[v] = chain
        self.usage[chain] += 1
        for u, nodes in donations.items():
            self.chains[u] = np.union1d(self.chains[u], nodes)
            self.usage[nodes] += 1

    def remove(self, v) -> np.ndarray:
        chain = self.chains.pop(v)
        self.usage[chain] -= 1
        return chain

    def overlapped(self) -> bool:
        return bool(self.usage.max(initial=0) > 1)

    def fill_profile(self) -> tuple[int, int]:
        worst = int(self.usage.max(initial=0))
        return worst, int(np.count_nonzero(self.usage == worst))

    def _snapshot(self, v) -> dict:
        return {u: self.chains[u] for u in [v, *self.src_adj[v]] if u in self.chains}

    def _restore(self, snap: dict) -> None:
        for u, chain in snap.items():
            if u in self.chains:
                self.usage[self.chains[u]] -= 1
            self.chains[u] = chain
            self.usage[chain] += 1

    def _rebuild(self, v, weights_for, roots: int = 1) -> bool:
        """Tear out ``v``, let neighbours drop their links to it, and re-place it."""
        snap = self._snapshot(v)
        old = self.remove(v)
        weights = weights_for(old)
        for u in self.src_adj[v]:
            if u in self.chains:
                self.trim(u, ignore=v)
        plan = self.place(v, weights, roots=roots)
        if plan is None:
            self._restore(snap)
            return False
        self.put(v, plan)
        return True

    def pushdown(self, v) -> bool:
        """Re-route ``v`` without touching nodes as full as its own fullest node.

        A clashing chain first tries a route through unused nodes only.
        """
        if np.any(self.usage[self.chains[v]] > 1):
            if self._rebuild(v, lambda old: np.where(self.usage > 0, np.inf, 1.0), roots=4):
                return True

        def bounded(old):
            return self.weights(int(self.usage[old].max(initial=0)) + 1)
        return self._rebuild(v, bounded, roots=4)

    def reroute(self, v) -> None:
        if not self._rebuild(v, lambda old: self.weights()):
            raise EmbeddingNotFound("target graph is disconnected from a neighbour chain")

    def trim(self, v, ignore=None) -> None:
        """Peel leaves off ``v``'s chain while it still touches every neighbour.

        Neighbour ``ignore`` is not protected.
        """
        chain = self.chains[v]
        if len(chain) < 2:
            return
        need = [u for u in self.src_adj[v] if u != ignore and u in self.chains]
        member = np.zeros((len(need), self.n), dtype=np.bool_)
        for i, u in enumerate(need):
            member[i, self.chains[u]] = True
        keep = _trim_kernel(chain, self.indptr, self.indices, member)
        self.usage[chain[~keep]] -= 1
        self.chains[v] = chain[keep]

    def shorten(self, v) -> bool:
        """Rebuild ``v`` through free nodes after neighbours release their links to it.

        The new layout is kept when the total size of ``v`` and its neighbours
        does not grow and their longest chain does not get longer.
        """
        snap = self._snapshot(v)
        size0 = sum(len(c) for c in snap.values())
        long0 = max(len(c) for c in snap.values())
        if not self._rebuild(v, lambda old: np.where(self.usage > 0, np.inf, 1.0), roots=8):
            return False
        after = [len(self.chains[u]) for u in snap]
        if sum(after) < size0:
            return True
        if sum(after) > size0 or max(after) > long0:
            self._restore(snap)
        return False

    def strip_leaves(self, v) -> None:
        self.trim(v)


@njit(cache=True)
def _chain_distances(indptr, indices, weights, sources, offsets, unit):
    """Node-weighted multi-source Dijkstra, one search per source group.

    Entering a node costs its weight; group ``i`` starts at distance 0 from
    ``sources[offsets[i]:offsets[i + 1]]``. Returns distances (inf when
    unreachable) and predecessors (-1 at sources and unreached nodes).
    """
    n = indptr.shape[0] - 1
    k = offsets.shape[0] - 1
    dist = np.full((k, n), np.inf)
    pred = np.full((k, n), -1, dtype=np.int64)
    for g in range(k):
        d = dist[g]
        p = pred[g]
        done = np.zeros(n, dtype=np.bool_)
        for j in range(offsets[g], offsets[g + 1]):
            d[sources[j]] = 0.0
        if unit:
            # every passable node costs 1: breadth-first order is exact
            queue = np.empty(n, dtype=np.int64)
            head = 0
            tail = 0
            for j in range(offsets[g], offsets[g + 1]):
                queue[tail] = sources[j]
                tail += 1
            while head < tail:
                x = queue[head]
                head += 1
                for e in range(indptr[x], indptr[x + 1]):
                    y = indices[e]
                    if d[y] == np.inf and weights[y] != np.inf:
                        d[y] = d[x] + 1.0
                        p[y] = x
                        queue[tail] = y
                        tail += 1
            continue
        # lazy-deletion binary heap on parallel arrays
        cap = offsets[g + 1] - offsets[g] + indices.shape[0] + 1
        hkey = np.empty(cap)
        hval = np.empty(cap, dtype=np.int64)
        size = 0
        for j in range(offsets[g], offsets[g + 1]):
            hkey[size] = 0.0
            hval[size] = sources[j]
            size += 1
        while size > 0:
            dx = hkey[0]
            x = hval[0]
            size -= 1
            if size > 0:
                # sift the last entry down from the top
                kk = hkey[size]
                vv = hval[size]
                i = 0
                while True:
                    c = 2 * i + 1
                    if c >= size:
                        break
                    if c + 1 < size and hkey[c + 1] < hkey[c]:
                        c += 1
                    if hkey[c] >= kk:
                        break
                    hkey[i] = hkey[c]
                    hval[i] = hval[c]
                    i = c
                hkey[i] = kk
                hval[i] = vv
            if done[x]:
                continue
            done[x] = True
            for e in range(indptr[x], indptr[x + 1]):
                y = indices[e]
                if weights[y] == np.inf:
                    continue
                nd = dx + weights[y]
                if nd < d[y]:
                    d[y] = nd
                    p[y] = x
                    i = size
                    size += 1
                    while i > 0:
                        par = (i - 1) // 2
                        if hkey[par] <= nd:
                            break
                        hkey[i] = hkey[par]
                        hval[i] = hval[par]
                        i = par
                    hkey[i] = nd
                    hval[i] = y
    return dist, pred


@njit(cache=True)
def _trim_kernel(chain, indptr, indices, member):
    """Mask of ``chain`` entries kept after repeatedly dropping safe leaves.

    A node may go if it has at most one neighbour left in the chain and every
    neighbour chain (rows of ``member``) stays adjacent without it. Candidates
    are tried in ascending order, restarting after each removal.
    """
    n_chain = chain.shape[0]
    k = member.shape[0]
    alive = np.ones(n_chain, dtype=np.bool_)
    pos = {}
    for i in range(n_chain):
        pos[chain[i]] = i
    hits = np.zeros((n_chain, k), dtype=np.int64)
    inner = np.zeros(n_chain, dtype=np.int64)
    support = np.zeros(k, dtype=np.int64)
    for i in range(n_chain):
        x = chain[i]
        for e in range(indptr[x], indptr[x + 1]):
            y = indices[e]
            if y in pos:
                inner[i] += 1
            for o in range(k):
                if member[o, y]:
                    hits[i, o] += 1
        for o in range(k):
            support[o] += hits[i, o]
    left = n_chain
    changed = True
    while changed and left > 1:
        changed = False
        for i in range(n_chain):
            if not alive[i] or inner[i] > 1:
                continue
            ok = True
            for o in range(k):
                if hits[i, o] > 0 and support[o] - hits[i, o] <= 0:
                    ok = False
                    break
            if ok:
                alive[i] = False
                left -= 1
                for o in range(k):
                    support[o] -= hits[i, o]
                x = chain[i]
                for e in range(indptr[x], indptr[x + 1]):
                    y = indices[e]
                    if y in pos and alive[pos[y]]:
                        inner[pos[y]] -= 1
                changed = True
                break
    return alive


def find_embedding(source: Any, target: Any, *, tries: int = DEFAULT_TRIES,
                   max_passes: int = DEFAULT_MAX_PASSES,
                   seed: int = 0, penalty_base: float = 10.0, shrink_passes: int = 3) -> Embedding:
    """Embed ``source`` into ``target`` or raise :class:`EmbeddingNotFound`.

    Each try uses its own generator seeded from ``(seed, try_index)`` and gets
    ``max_passes`` rounds without progress before it is abandoned; the first
    try (in index order) that removes every overlap wins.
    """
    src = as_networkx(source)
    tgt = as_networkx(target)
    if src.number_of_nodes() == 0:
        raise ValueError("source graph is empty")
    if tgt.number_of_nodes() == 0:
        raise ValueError("target graph is empty")
    if src.number_of_nodes() > tgt.number_of_nodes():
        raise EmbeddingNotFound(
            f"source has {src.number_of_nodes()} nodes but target only {tgt.number_of_nodes()}")

    t_nodes = _sorted_nodes(tgt)
    t_index = {x: i for i, x in enumerate(t_nodes)}
    rows = [[t_index[y] for y in sorted(tgt[x], key=t_index.__getitem__)] for x in t_nodes]
    indptr = np.zeros(len(t_nodes) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(r) for r in rows])
    indices = np.fromiter((i for r in rows for i in r), dtype=np.int32, count=int(indptr[-1]))

    variables = _sorted_nodes(src)
    position = {v: i for i, v in enumerate(variables)}
    src_adj = {v: sorted(src[v], key=position.__getitem__) for v in variables}

    for attempt in range(tries):
        rng = np.random.default_rng([seed, attempt])
        s = _Search(src_adj, indptr, indices, len(t_nodes), rng, penalty_base)
        try:
            for i in rng.permutation(len(variables)):
                var = variables[i]
                plan = s.place(var, s.weights())
                if plan is None:
                    raise EmbeddingNotFound("target graph is disconnected")
                s.put(var, plan)
            best = s.fill_profile()
            stale = 0
            while s.overlapped() and stale < max_passes:
                for i in rng.permutation(len(variables)):
                    s.pushdown(variables[i])
                # tighten chains that are already clear to make room
                for i in rng.permutation(len(variables)):
                    var = variables[i]
                    if not np.any(s.usage[s.chains[var]] > 1):
                        s.shorten(var)
                # nodes that stay contested get dearer, so chains stop cycling over them
                s.history += HISTORY_STEP * np.maximum(s.usage - 1, 0)
                now = s.fill_profile()
                stale = 0 if now < best else stale + 1
                best = min(best, now)
        except EmbeddingNotFound:
            if nx.is_connected(tgt):
                raise
            continue
        if s.overlapped():
            continue
        for _ in range(shrink_passes):
            if not any([s.shorten(variables[i]) for i in rng.permutation(len(variables))]):
                break
        for var in variables:
            s.strip_leaves(var)
        emb = Embedding(
            {var: tuple(t_nodes[i] for i in s.chains[var]) for var in variables},
            _target_hash(target),
        )
        problems = validate(emb, src, tgt)
        if problems:
            raise AssertionError(f"embedder produced an invalid embedding: {problems[:3]}")
        return emb
    raise EmbeddingNotFound(f"no embedding found after {tries} tries")


def validate(emb: Embedding | dict, source: Any, target: Any) -> list[dict]:
    """List every way ``emb`` fails to be a minor embedding (empty list if valid)."""
    chains = emb.chains if isinstance(emb, Embedding) else dict(emb)
    src = as_networkx(source)
    tgt = as_networkx(target)
    out: list[dict] = []
    for v in _sorted_nodes(src):
        if v not in chains or len(chains[v]) == 0:
            out.append({"kind": "missing_chain", "var": v})
    owner: dict = {}
    for v, chain in chains.items():
        for x in chain:
            if x not in tgt:
                out.append({"kind": "unknown_node", "var": v, "node": x})
            elif x in owner and owner[x] != v:
                out.append({"kind": "overlap", "node": x, "vars": [owner[x], v]})
            else:
                owner[x] = v
    for v, chain in chains.items():
        nodes = [x for x in chain if x in tgt]
        if nodes and not nx.is_connected(tgt.subgraph(nodes)):
            out.append({"kind": "disconnected", "var": v})
    for u, v in src.edges:
        if u not in chains or v not in chains:
            continue
        cv = set(chains[v])
        if not any(y in cv for x in chains[u] if x in tgt for y in tgt[x]):
            out.append({"kind": "missing_edge", "edge": [u, v]})
    return out


def chain_length_stats(emb: Embedding | dict, qubits_per_node: int = 2) -> tuple[int, float, float, int]:
    """(min, mean, population std, max) of physical chain lengths."""
    if qubits_per_node not in (1, 2):
        raise ValueError("qubits_per_node must be 1 or 2")
    chains = emb.chains if isinstance(emb, Embedding) else emb
    lengths = np.array([len(c) * qubits_per_node for c in chains.values()], dtype=float)
    return int(lengths.min()), float(lengths.mean()), float(lengths.std()), int(lengths.max())


def format_stats(stats: Iterable) -> str:
    lo, mean, std, hi = stats
    return f"({lo}, {mean:.3f} ± {std:.3f}, {hi})"


# -- IO ---------------------------------------------------------------------

def _node_to_json(x):
    return list(x) if isinstance(x, tuple) else x


def _node_from_json(x):
    return tuple(x) if isinstance(x, list) else x


def to_json_dict(emb: Embedding) -> dict:
    return {
        "chains": {str(v): [_node_to_json(x) for x in c] for v, c in emb.chains.items()},
        "target_hash": emb.target_hash,
    }


def from_json_dict(data: dict, node_type=None) -> Embedding:
    chains = {}
    for k, c in data["chains"].items():
        key = int(k) if k.lstrip("-").isdigit() else k
        nodes = tuple(_node_from_json(x) for x in c)
        if node_type is not None:
            nodes = tuple(node_type(*x) if isinstance(x, tuple) else x for x in nodes)
        chains[key] = nodes
    return Embedding(chains, data.get("target_hash"))


def save(emb: Embedding, path: str | Path) -> None:
    Path(path).write_text(json.dumps(to_json_dict(emb), separators=(",", ":")) + "\n")


def load(path: str | Path, node_type=None) -> Embedding:
    return from_json_dict(json.loads(Path(path).read_text()), node_type)
