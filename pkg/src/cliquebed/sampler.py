"""Simulated-annealing sampler, exhaustive ground-state oracle and unembedding.

Each read starts from uniformly random spins and performs Metropolis sweeps
over a geometric inverse-temperature ladder. Reads have their own RNG stream
derived from ``(seed, read)``, so results do not depend on how reads are
batched.
"""
from __future__ import annotations

import base64
import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np
from numba import njit

from cliquebed.chains import PhysicalEmbedding
from cliquebed.ising import EmbeddedIsing, IsingModel, energies

BRUTE_FORCE_CAP = 26
DEFAULT_BETA = (0.1, 3.0)
MODES = ("discard_zero", "majority")


def brute_force_min(m: IsingModel, cap: int = BRUTE_FORCE_CAP) -> tuple[float, np.ndarray]:
    """Exact ground state by enumeration.

    States are visited in lexicographic order with -1 before +1, and the first
    minimiser found is kept, so ties resolve to the smallest spin vector.
    """
    n = m.n
    if n > cap:
        raise ValueError(f"n={n} exceeds the brute-force cap of {cap}")
    if n == 0:
        return 0.0, np.zeros(0, dtype=np.int8)
    h = np.asarray(m.h)
    W = m.matrix()
    chunk_bits = min(n, 16)
    low = ((np.arange(1 << chunk_bits)[:, None] >> np.arange(chunk_bits - 1, -1, -1)) & 1) * 2 - 1
    best, arg = np.inf, None
    for hi in range(1 << (n - chunk_bits)):
        top = ((hi >> np.arange(n - chunk_bits - 1, -1, -1)) & 1) * 2 - 1
        Z = np.hstack([np.broadcast_to(top, (len(low), n - chunk_bits)), low]).astype(np.float64)
        E = Z @ h + ((Z @ W) * Z).sum(axis=1)
        k = int(np.argmin(E))
        if E[k] < best:
            best, arg = float(E[k]), Z[k].astype(np.int8)
    return best, arg


def beta_ladder(sweeps: int, beta: tuple[float, float] = DEFAULT_BETA) -> np.ndarray:
    lo, hi = beta
    if sweeps == 1:
        return np.array([hi], dtype=np.float64)
    return np.geomspace(lo, hi, sweeps)


@dataclass
class RawSamples:
    qubits: np.ndarray
    spins: np.ndarray
    energies: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.spins)


def _csr(e: EmbeddedIsing):
    qubits = np.array(e.qubits, dtype=np.int64)
    index = {int(q): i for i, q in enumerate(qubits)}
    for a, b in e.J:
        if a not in index or b not in index:
            raise ValueError(f"coupler ({a}, {b}) touches a qubit without a field entry")
    n = len(qubits)
    rows = [[] for _ in range(n)]
    for (a, b), w in e.J.items():
        i, j = index[a], index[b]
        rows[i].append((j, w))
        rows[j].append((i, w))
    indptr = np.zeros(n + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(r) for r in rows])
    cols = np.array([j for r in rows for j, _ in r], dtype=np.int64)
    vals = np.array([w for r in rows for _, w in r], dtype=np.float64)
    h = np.array([e.h[int(q)] for q in qubits], dtype=np.float64)
    return qubits, h, indptr, cols, vals


@njit(cache=True)
def _anneal(h, indptr, cols, vals, betas, quench, seeds, out):
    n = h.shape[0]
    for r in range(seeds.shape[0]):
        np.random.seed(seeds[r])
        s = out[r]
        for i in range(n):
            s[i] = 1 if np.random.random() < 0.5 else -1
        for beta in betas:
            for i in range(n):
                field = h[i]
                for k in range(indptr[i], indptr[i + 1]):
                    field += vals[k] * s[cols[k]]
                dE = -2.0 * s[i] * field
                if dE <= 0.0 or np.random.random() < np.exp(-beta * dE):
                    s[i] = -s[i]
        for _ in range(quench):
            for i in range(n):
                field = h[i]
                for k in range(indptr[i], indptr[i + 1]):
                    field += vals[k] * s[cols[k]]
                if s[i] * field > 0.0:
                    s[i] = -s[i]


def _energy_rows(S: np.ndarray, qubits: np.ndarray, e: EmbeddedIsing) -> np.ndarray:
    index = {int(q): i for i, q in enumerate(qubits)}
    h = np.array([e.h[int(q)] for q in qubits])
    out = S @ h
    if e.J:
        a = np.array([index[x] for x, _ in e.J])
        b = np.array([index[y] for _, y in e.J])
        w = np.fromiter(e.J.values(), dtype=np.float64, count=len(e.J))
        out = out + (S[:, a] * S[:, b]) @ w
    return out


def read_seeds(seed: int, reads: int) -> np.ndarray:
    """One 32-bit seed per read, derived from ``(seed, read)``."""
    return np.array([np.random.SeedSequence([seed, r]).generate_state(1)[0] for r in range(reads)],
                    dtype=np.int64)


def sample(e: EmbeddedIsing, reads: int, sweeps: int, beta: tuple[float, float] = DEFAULT_BETA,
           seed: int = 0, quench: int = 0) -> RawSamples:
    """Anneal ``reads`` independent replicas of ``e``.

    ``quench`` adds that many zero-temperature sweeps after the ladder; they
    only accept strictly downhill flips.
    """
    if reads < 1 or sweeps < 1:
        raise ValueError("reads and sweeps must be at least 1")
    if not 0 < beta[0] <= beta[1]:
        raise ValueError("need 0 < beta_min <= beta_max")
    if quench < 0:
        raise ValueError("quench must be non-negative")
    qubits, h, indptr, cols, vals = _csr(e)
    betas = beta_ladder(sweeps, beta)
    out = np.zeros((reads, len(qubits)), dtype=np.int8)
    _anneal(h, indptr, cols, vals, betas, quench, read_seeds(seed, reads), out)
    meta = {"reads": reads, "sweeps": sweeps, "beta": [float(beta[0]), float(beta[1])],
            "seed": seed, "quench": quench, "schedule": "geometric"}
    return RawSamples(qubits, out, _energy_rows(out.astype(np.float64), qubits, e), meta)


@dataclass(frozen=True)
class Read:
    index: int
    physical_spins: np.ndarray
    physical_energy: float
    logical_spins: np.ndarray | None
    broken: bool
    logical_energy: float


@dataclass
class SampleSet:
    """Per-read physical and logical results.

    ``logical`` holds 0 for variables whose value is absent, which only
    happens for broken reads in ``discard_zero`` mode.
    """
    qubits: np.ndarray
    physical: np.ndarray
    physical_energy: np.ndarray
    logical: np.ndarray
    broken: np.ndarray
    logical_energy: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.broken)

    def __iter__(self) -> Iterator[Read]:
        for r in range(len(self)):
            absent = self.metadata.get("mode") == "discard_zero" and self.broken[r]
            yield Read(r, self.physical[r], float(self.physical_energy[r]),
                       None if absent else self.logical[r], bool(self.broken[r]),
                       float(self.logical_energy[r]))

    @property
    def reads(self) -> list[Read]:
        return list(self)


def unembed(raw: RawSamples, pe: PhysicalEmbedding, m: IsingModel, mode: str = "discard_zero",
            seed: int = 0) -> SampleSet:
    """Map physical reads back to logical spins.

    A read is broken when any chain disagrees internally. ``discard_zero``
    gives broken reads logical energy 0 and no logical spins. ``majority``
    takes each chain's majority and flips a seeded coin on exact ties.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if set(pe.chains) != set(range(m.n)):
        raise ValueError("model variables do not match the embedding's chains")
    index = {int(q): i for i, q in enumerate(raw.qubits)}
    reads = len(raw)
    sums = np.zeros((reads, m.n), dtype=np.int64)
    broken = np.zeros(reads, dtype=bool)
    for v in range(m.n):
        try:
            cols = [index[q] for q in pe.chains[v]]
        except KeyError as exc:
            raise ValueError(f"samples do not cover qubit {exc}") from None
        block = raw.spins[:, cols].astype(np.int64)
        sums[:, v] = block.sum(axis=1)
        broken |= np.abs(sums[:, v]) != len(cols)
    logical = np.sign(sums).astype(np.int8)
    if mode == "majority":
        coins = np.random.default_rng(seed).integers(0, 2, size=logical.shape, dtype=np.int8) * 2 - 1
        logical = np.where(logical == 0, coins, logical).astype(np.int8)
        lenergy = energies(m, logical) if m.n else np.zeros(reads)
    else:
        logical[broken] = 0
        lenergy = np.zeros(reads)
        ok = ~broken
        if ok.any() and m.n:
            lenergy[ok] = energies(m, logical[ok])
    meta = dict(raw.metadata, mode=mode, unembed_seed=seed)
    return SampleSet(raw.qubits, raw.spins, raw.energies, logical, broken, lenergy, meta)


def break_rate(s: SampleSet) -> float:
    return float(np.mean(s.broken)) if len(s) else 0.0


def pack_spins(z: np.ndarray | None) -> str:
    """Base64 of the bit-packed ``z > 0`` mask; empty when spins are absent."""
    if z is None:
        return ""
    return base64.b64encode(np.packbits(np.asarray(z) > 0).tobytes()).decode("ascii")


def unpack_spins(text: str, n: int) -> np.ndarray | None:
    if not text:
        return None
    bits = np.unpackbits(np.frombuffer(base64.b64decode(text), dtype=np.uint8))[:n]
    return bits.astype(np.int8) * 2 - 1


CSV_FIELDS = ("read", "broken", "logical_energy", "physical_energy", "logical_spins")


def write_csv(s: SampleSet, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for rec in s:
            w.writerow([rec.index, int(rec.broken), repr(rec.logical_energy),
                        repr(rec.physical_energy), pack_spins(rec.logical_spins)])


def read_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r["read"] = int(r["read"])
        r["broken"] = bool(int(r["broken"]))
        r["logical_energy"] = float(r["logical_energy"])
        r["physical_energy"] = float(r["physical_energy"])
    return rows
