"""Logical Ising instances and their embedded physical counterparts.

Logical variables are ``0..n-1``. The cost of a spin vector ``z`` is
``sum(h[i] z[i]) + sum(J[i, j] z[i] z[j])``. Embedding spreads each linear
term evenly over a chain's qubits and each quadratic term evenly over the
couplers that realise the logical edge, then ties every chain together with
ferromagnetic couplers of strength ``-chain_strength``.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from cliquebed.chains import PhysicalEmbedding, to_json_dict

DEFAULT_H_RANGE = 2.0
DEFAULT_J_RANGE = 1.0

Edge = tuple[int, int]


@dataclass(frozen=True)
class IsingModel:
    n: int
    h: tuple[float, ...]
    J: dict[Edge, float]
    seed: int | None = None

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")
        h = tuple(float(x) for x in self.h)
        if len(h) != self.n:
            raise ValueError(f"expected {self.n} linear terms, got {len(h)}")
        J: dict[Edge, float] = {}
        for (i, j), w in self.J.items():
            i, j = int(i), int(j)
            if i == j or not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"bad coupling key ({i}, {j})")
            key = (i, j) if i < j else (j, i)
            if key in J:
                raise ValueError(f"duplicate coupling {key}")
            J[key] = float(w)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "J", dict(sorted(J.items())))

    def matrix(self) -> np.ndarray:
        """Upper-triangular coupling matrix."""
        out = np.zeros((self.n, self.n))
        for (i, j), w in self.J.items():
            out[i, j] = w
        return out


def random_sk(n: int, seed: int) -> IsingModel:
    """All-to-all instance with every coefficient drawn uniformly from {-1, +1}."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    h = rng.choice([-1.0, 1.0], size=n)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    w = rng.choice([-1.0, 1.0], size=len(pairs))
    return IsingModel(n, tuple(h), dict(zip(pairs, w)), seed)


def _spins(z: Sequence[int], n: int) -> np.ndarray:
    arr = np.asarray(z)
    if arr.shape != (n,):
        raise ValueError(f"expected {n} spins, got shape {arr.shape}")
    if not np.all((arr == 1) | (arr == -1)):
        raise ValueError("spins must be +1 or -1")
    return arr.astype(np.float64)


def energy(m: IsingModel, z: Sequence[int]) -> float:
    s = _spins(z, m.n)
    total = float(np.dot(m.h, s)) if m.n else 0.0
    for (i, j), w in m.J.items():
        total += w * s[i] * s[j]
    return total


def energies(m: IsingModel, Z: np.ndarray) -> np.ndarray:
    """Row-wise energies of a ``(k, n)`` array of spins."""
    Z = np.asarray(Z, dtype=np.float64)
    return Z @ np.asarray(m.h) + ((Z @ m.matrix()) * Z).sum(axis=1)


@dataclass(frozen=True)
class EmbeddedIsing:
    h: dict[int, float]
    J: dict[Edge, float]
    chain_couplers: frozenset[Edge]
    chain_strength: float
    scale_factor: float = 1.0
    embedding_ref: str = ""

    @property
    def qubits(self) -> list[int]:
        return sorted(self.h)

    @property
    def problem_couplers(self) -> list[Edge]:
        return [e for e in self.J if e not in self.chain_couplers]


def embedding_ref(pe: PhysicalEmbedding) -> str:
    blob = json.dumps(to_json_dict(pe), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def embed_parameters(m: IsingModel, pe: PhysicalEmbedding, chain_strength: float) -> EmbeddedIsing:
    """Spread ``m`` over ``pe`` and add ``-chain_strength`` on every chain coupler."""
    if chain_strength <= 0:
        raise ValueError("chain_strength must be positive")
    if set(pe.chains) != set(range(m.n)):
        raise ValueError("model variables do not match the embedding's chains")
    h: dict[int, float] = {}
    for v, chain in pe.chains.items():
        if not chain:
            raise ValueError(f"variable {v} has an empty chain")
        share = m.h[v] / len(chain)
        for q in chain:
            h[q] = share
    J: dict[Edge, float] = {}
    for (i, j), w in m.J.items():
        couplers = pe.logical_edge_couplers.get((i, j))
        if not couplers:
            raise ValueError(f"no couplers realise logical edge ({i}, {j})")
        share = w / len(couplers)
        for e in couplers:
            J[e] = J.get(e, 0.0) + share
    chain = set()
    for es in pe.intra_couplers.values():
        for e in es:
            J[e] = -float(chain_strength)
            chain.add(e)
    return EmbeddedIsing(dict(sorted(h.items())), dict(sorted(J.items())), frozenset(chain),
                         float(chain_strength), 1.0, embedding_ref(pe))


def autoscale(e: EmbeddedIsing, h_range: float = DEFAULT_H_RANGE, j_range: float = DEFAULT_J_RANGE) -> EmbeddedIsing:
    """Scale every coefficient, chain couplers included, to fill the ranges."""
    if h_range <= 0 or j_range <= 0:
        raise ValueError("ranges must be positive")
    limits = []
    hmax = max((abs(x) for x in e.h.values()), default=0.0)
    jmax = max((abs(x) for x in e.J.values()), default=0.0)
    if hmax > 0:
        limits.append(h_range / hmax)
    if jmax > 0:
        limits.append(j_range / jmax)
    s = min(limits) if limits else 1.0
    return replace(
        e,
        h={q: x * s for q, x in e.h.items()},
        J={c: x * s for c, x in e.J.items()},
        scale_factor=e.scale_factor * s,
    )


def physical_energy(e: EmbeddedIsing, x: Mapping[int, int] | Sequence[int]) -> float:
    """Energy of physical spins ``x``, given as a mapping or indexed by qubit id."""
    try:
        total = sum(w * x[q] for q, w in e.h.items())
        total += sum(w * x[a] * x[b] for (a, b), w in e.J.items())
    except (KeyError, IndexError) as exc:
        raise ValueError(f"missing spin for qubit {exc}") from None
    return float(total)


# -- IO ---------------------------------------------------------------------

def model_to_json_dict(m: IsingModel) -> dict:
    return {"n": m.n, "h": list(m.h), "j": [[i, j, w] for (i, j), w in m.J.items()], "seed": m.seed}


def model_from_json_dict(data: dict) -> IsingModel:
    return IsingModel(int(data["n"]), tuple(data["h"]),
                      {(int(i), int(j)): float(w) for i, j, w in data["j"]}, data.get("seed"))


def save_model(m: IsingModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_json_dict(m)) + "\n")


def load_model(path: str | Path) -> IsingModel:
    return model_from_json_dict(json.loads(Path(path).read_text()))


def embedded_to_json_dict(e: EmbeddedIsing) -> dict:
    return {
        "h": [[q, w] for q, w in e.h.items()],
        "j": [[a, b, w] for (a, b), w in e.J.items()],
        "chain_couplers": sorted([a, b] for a, b in e.chain_couplers),
        "chain_strength": e.chain_strength,
        "scale_factor": e.scale_factor,
        "embedding_ref": e.embedding_ref,
    }


def embedded_from_json_dict(data: dict) -> EmbeddedIsing:
    return EmbeddedIsing(
        {int(q): float(w) for q, w in data["h"]},
        {(int(a), int(b)): float(w) for a, b, w in data["j"]},
        frozenset((int(a), int(b)) for a, b in data["chain_couplers"]),
        float(data["chain_strength"]),
        float(data["scale_factor"]),
        data.get("embedding_ref", ""),
    )


def save_embedded(e: EmbeddedIsing, path: str | Path) -> None:
    Path(path).write_text(json.dumps(embedded_to_json_dict(e)) + "\n")


def load_embedded(path: str | Path) -> EmbeddedIsing:
    return embedded_from_json_dict(json.loads(Path(path).read_text()))
