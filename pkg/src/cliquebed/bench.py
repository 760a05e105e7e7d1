"""Experiment harness: embed, sample and summarise across a grid of settings.

A run is described by a TOML file. Every key is optional except
``sampling.sizes``; defaults are shown::

    [hardware]
    family = "pegasus"        # chimera | pegasus | zephyr
    m = 16
    fabric_only = false
    # file = "graph.json"     # overrides family/m; .json or edge list

    [contraction]
    seed = 0

    [embedding]
    seed = 0
    tries = 10
    max_passes = 50

    [instance]
    seed = 1                  # random_sk(N, seed) for every N

    [sampling]
    sizes = [8]
    chain_strengths = [1.01]
    sweeps = [1000]
    reads = 1000
    kinds = ["four_clique", "linear"]
    mode = "discard_zero"     # or "majority"
    beta = [0.1, 3.0]
    quench = 0
    seed = 0                  # annealer stream
    tie_seed = 0              # majority-vote coin flips

    [scaling]
    h_range = 2.0
    j_range = 1.0

    [output]
    dir = "bench_out"
    gnuplot = false

Relative ``output.dir`` and ``hardware.file`` paths are resolved against the
config file's directory.
"""
from __future__ import annotations

import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable

import networkx as nx
import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from cliquebed import chains as chains_mod
from cliquebed import contraction, embedder, hwgraph
from cliquebed.chains import NoValidSelection, PhysicalEmbedding
from cliquebed.embedder import Embedding, EmbeddingNotFound
from cliquebed.ising import autoscale, embed_parameters, random_sk, save_model
from cliquebed.sampler import BRUTE_FORCE_CAP, brute_force_min, sample, unembed, write_csv

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2
KINDS = ("four_clique", "linear")


@dataclass
class ExperimentConfig:
    sizes: list[int]
    chain_strengths: list[float] = field(default_factory=lambda: [1.01])
    sweeps: list[int] = field(default_factory=lambda: [1000])
    reads: int = 1000
    kinds: list[str] = field(default_factory=lambda: list(KINDS))
    family: str = "pegasus"
    m: int = 16
    fabric_only: bool = False
    hardware_file: str | None = None
    contraction_seed: int = 0
    embed_seed: int = 0
    embed_tries: int = embedder.DEFAULT_TRIES
    embed_max_passes: int = embedder.DEFAULT_MAX_PASSES
    instance_seed: int = 1
    sampler_seed: int = 0
    tie_seed: int = 0
    mode: str = "discard_zero"
    beta: tuple[float, float] = (0.1, 3.0)
    quench: int = 0
    h_range: float = 2.0
    j_range: float = 1.0
    output_dir: str = "bench_out"
    gnuplot: bool = False

    def __post_init__(self):
        for name in ("sizes", "chain_strengths", "sweeps", "kinds"):
            if not getattr(self, name):
                raise ValueError(f"{name} must not be empty")
        if self.reads < 1:
            raise ValueError("reads must be at least 1")
        bad = set(self.kinds) - set(KINDS)
        if bad:
            raise ValueError(f"unknown kinds {sorted(bad)}")
        self.beta = (float(self.beta[0]), float(self.beta[1]))

    @classmethod
    def from_toml(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        return cls.from_dict(data, base=path.parent)

    @classmethod
    def from_dict(cls, data: dict, base: Path | None = None) -> "ExperimentConfig":
        hw = data.get("hardware", {})
        ct = data.get("contraction", {})
        em = data.get("embedding", {})
        inst = data.get("instance", {})
        sm = data.get("sampling", {})
        sc = data.get("scaling", {})
        out = data.get("output", {})
        kw: dict = {}

        def take(section: dict, key: str, name: str | None = None):
            if key in section:
                kw[name or key] = section[key]

        take(hw, "family")
        take(hw, "m")
        take(hw, "fabric_only")
        take(hw, "file", "hardware_file")
        take(ct, "seed", "contraction_seed")
        take(em, "seed", "embed_seed")
        take(em, "tries", "embed_tries")
        take(em, "max_passes", "embed_max_passes")
        take(inst, "seed", "instance_seed")
        for key in ("sizes", "chain_strengths", "sweeps", "reads", "kinds", "mode", "beta", "quench"):
            take(sm, key)
        take(sm, "seed", "sampler_seed")
        take(sm, "tie_seed")
        take(sc, "h_range")
        take(sc, "j_range")
        take(out, "dir", "output_dir")
        take(out, "gnuplot")
        if "sizes" not in kw:
            raise ValueError("sampling.sizes is required")
        if base is not None:
            for key in ("hardware_file", "output_dir"):
                if kw.get(key) and not Path(kw[key]).is_absolute():
                    kw[key] = str(base / kw[key])
        return cls(**kw)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["beta"] = list(self.beta)
        return data


def setting_key(n: int, kind: str, chain_strength: float, sweeps: int) -> str:
    return f"N{n}/{kind}/cs{chain_strength!r}/sw{sweeps}"


@dataclass
class Report:
    config: dict
    records: list[dict]
    failures: list[dict]
    chain_stats: dict

    @property
    def status(self) -> int:
        return EXIT_PARTIAL if self.failures else EXIT_OK

    def by_key(self, ignore_kind: bool = False) -> dict:
        out = {}
        for r in self.records:
            key = (r["N"], r["chain_strength"], r["sweeps"]) if ignore_kind else r["key"]
            if key in out:
                raise ValueError(f"duplicate setting {key}; compare one kind per report")
            out[key] = r
        return out

    def to_json_dict(self) -> dict:
        return {"config": self.config, "records": self.records,
                "failures": self.failures, "chain_stats": self.chain_stats}

    @classmethod
    def from_json_dict(cls, data: dict) -> "Report":
        return cls(data["config"], data["records"], data.get("failures", []), data.get("chain_stats", {}))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Report":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def energy_summary(values: np.ndarray) -> dict:
    q1, med, q3 = np.percentile(values, [25, 50, 75])
    return {"min": float(values.min()), "q1": float(q1), "median": float(med), "q3": float(q3),
            "max": float(values.max()), "mean": float(values.mean())}


def _hardware(cfg: ExperimentConfig) -> hwgraph.HardwareGraph:
    if cfg.hardware_file:
        return hwgraph.load(cfg.hardware_file)
    return hwgraph.generate(cfg.family, cfg.m, fabric_only=cfg.fabric_only)


def _stats(pe: PhysicalEmbedding) -> dict:
    lo, mean, std, hi = embedder.chain_length_stats(pe.chains, 1)
    return {"min": lo, "mean": mean, "std": std, "max": hi}


def run_experiment(cfg: ExperimentConfig) -> Report:
    """Run every configured setting and write artifacts under ``cfg.output_dir``.

    Failed embeddings are recorded and skipped; the returned report's
    ``status`` is then ``EXIT_PARTIAL``.
    """
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    g = _hardware(cfg)
    cg = contraction.largest_component(contraction.contract_4_cliques(g, cfg.contraction_seed))
    contraction.save(cg, out / "contracted.json")

    records: list[dict] = []
    failures: list[dict] = []
    chain_stats: dict = {}
    for n in cfg.sizes:
        sub = out / f"N{n}"
        sub.mkdir(exist_ok=True)
        source = nx.complete_graph(n)
        model = random_sk(n, cfg.instance_seed)
        save_model(model, sub / "instance.json")
        ground = brute_force_min(model)[0] if n <= BRUTE_FORCE_CAP else None
        try:
            cemb = embedder.find_embedding(source, cg, tries=cfg.embed_tries,
                                           max_passes=cfg.embed_max_passes, seed=cfg.embed_seed)
        except EmbeddingNotFound as exc:
            failures.append({"N": n, "stage": "embed", "error": str(exc)})
            continue
        embedder.save(cemb, sub / "contracted_embedding.json")
        phys = {"four_clique": chains_mod.expand(cemb, cg, g, source)}
        if "linear" in cfg.kinds:
            try:
                phys["linear"] = chains_mod.derive_linear(phys["four_clique"], g, cfg.embed_seed)
            except NoValidSelection as exc:
                failures.append({"N": n, "stage": "derive_linear", "error": str(exc)})
        for kind, pe in phys.items():
            chains_mod.save(pe, sub / f"{kind}.json")
            chain_stats[f"N{n}/{kind}"] = _stats(pe)

        for kind in cfg.kinds:
            if kind not in phys:
                continue
            pe = phys[kind]
            for cs in cfg.chain_strengths:
                scaled = autoscale(embed_parameters(model, pe, cs), cfg.h_range, cfg.j_range)
                for sw in cfg.sweeps:
                    raw = sample(scaled, cfg.reads, sw, cfg.beta, cfg.sampler_seed, cfg.quench)
                    ss = unembed(raw, pe, model, cfg.mode, cfg.tie_seed)
                    key = setting_key(n, kind, cs, sw)
                    csv_name = f"N{n}/{kind}_cs{cs!r}_sw{sw}.csv"
                    write_csv(ss, out / csv_name)
                    ok = ~ss.broken
                    records.append({
                        "key": key, "N": n, "kind": kind, "chain_strength": cs, "sweeps": sw,
                        "reads": cfg.reads,
                        "break_rate": float(ss.broken.mean()),
                        "energy": energy_summary(ss.logical_energy),
                        "best_logical_energy": float(ss.logical_energy[ok].min()) if ok.any() else None,
                        "ground_energy": ground,
                        "scale_factor": scaled.scale_factor,
                        "chain_stats": chain_stats[f"N{n}/{kind}"],
                        "csv": csv_name,
                    })
    report = Report(cfg.to_dict(), records, failures, chain_stats)
    report.save(out / "report.json")
    if cfg.gnuplot:
        write_gnuplot(report, out)
    return report


def compare(a: Report, b: Report, *, ignore_kind: bool = False) -> dict:
    """Per shared setting, ``a`` minus ``b`` for break rate, median and best energy.

    With ``ignore_kind`` settings match on (N, chain strength, sweeps), which
    lets a four-clique report be set against a linear one.
    """
    ka, kb = a.by_key(ignore_kind), b.by_key(ignore_kind)
    shared = [k for k in ka if k in kb]
    if not shared:
        raise ValueError("reports share no settings")
    rows = []
    for k in shared:
        ra, rb = ka[k], kb[k]
        best = None
        if ra["best_logical_energy"] is not None and rb["best_logical_energy"] is not None:
            best = ra["best_logical_energy"] - rb["best_logical_energy"]
        rows.append({
            "key": k if isinstance(k, str) else f"N{k[0]}/cs{k[1]!r}/sw{k[2]}",
            "break_rate_delta": ra["break_rate"] - rb["break_rate"],
            "median_energy_delta": ra["energy"]["median"] - rb["energy"]["median"],
            "best_energy_delta": best,
        })
    signs = {"break_rate": _signs(r["break_rate_delta"] for r in rows),
             "median_energy": _signs(r["median_energy_delta"] for r in rows)}
    return {"rows": rows, "signs": signs}


def _signs(values: Iterable[float]) -> dict:
    vals = list(values)
    return {"negative": sum(v < 0 for v in vals), "zero": sum(v == 0 for v in vals),
            "positive": sum(v > 0 for v in vals)}


def export_table2(embeddings: dict[int, Embedding | PhysicalEmbedding]) -> str:
    """CSV rows ``N,min,mean,std,max,summary`` of physical chain lengths."""
    lines = ["N,min,mean,std,max,summary"]
    for n in sorted(embeddings):
        emb = embeddings[n]
        if isinstance(emb, PhysicalEmbedding):
            stats = embedder.chain_length_stats(emb.chains, 1)
        else:
            stats = embedder.chain_length_stats(emb, 2)
        lo, mean, std, hi = stats
        lines.append(f'{n},{lo},{mean:.3f},{std:.3f},{hi},"{embedder.format_stats(stats)}"')
    return "\n".join(lines) + "\n"


def load_embeddings(directory: str | Path) -> dict[int, Embedding | PhysicalEmbedding]:
    """Every embedding JSON under ``directory``, keyed by variable count."""
    found: dict = {}
    for path in sorted(Path(directory).rglob("*.json")):
        data = json.loads(path.read_text())
        if not isinstance(data, dict) or "chains" not in data:
            continue
        emb = chains_mod.from_json_dict(data) if "kind" in data else embedder.from_json_dict(data)
        n = len(emb.chains)
        if n in found and isinstance(emb, PhysicalEmbedding):
            continue
        found[n] = emb
    return found


def write_gnuplot(report: Report, out: Path) -> list[Path]:
    """One whitespace-separated file per N for ``candlesticks`` boxplots.

    Columns: index, kind, chain strength, sweeps, min, q1, median, q3, max,
    mean, break rate.
    """
    written = []
    sizes = sorted({r["N"] for r in report.records})
    for n in sizes:
        path = out / f"N{n}" / "boxplot.dat"
        lines = ["# idx kind chain_strength sweeps min q1 median q3 max mean break_rate"]
        for i, r in enumerate(x for x in report.records if x["N"] == n):
            e = r["energy"]
            lines.append(f'{i} {r["kind"]} {r["chain_strength"]!r} {r["sweeps"]} {e["min"]!r} {e["q1"]!r} '
                         f'{e["median"]!r} {e["q3"]!r} {e["max"]!r} {e["mean"]!r} {r["break_rate"]!r}')
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    return written
