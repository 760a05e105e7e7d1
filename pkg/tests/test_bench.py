from __future__ import annotations

import csv
import json

import numpy as np
import pytest

from cliquebed import bench
from cliquebed.bench import ExperimentConfig, Report, compare, export_table2, run_experiment
from cliquebed.contraction import PairNode
from cliquebed.embedder import Embedding
from cliquebed.sampler import read_csv

SMALL = dict(family="pegasus", m=6, reads=25, embed_tries=3)


@pytest.fixture(scope="module")
def product_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    cfg = ExperimentConfig(sizes=[8], chain_strengths=[1.01, 1.1], sweeps=[1, 2, 5, 10, 20, 50],
                           output_dir=str(out), gnuplot=True, **SMALL)
    return cfg, run_experiment(cfg)


def test_one_record_per_setting(product_run):
    cfg, report = product_run
    assert len(report.records) == 24
    assert len({r["key"] for r in report.records}) == 24
    assert report.status == bench.EXIT_OK
    assert report.config["sampler_seed"] == cfg.sampler_seed
    assert {r["ground_energy"] for r in report.records} == {-12.0}


def test_records_recompute_from_csv(product_run):
    cfg, report = product_run
    for r in report.records:
        rows = read_csv(f"{cfg.output_dir}/{r['csv']}")
        assert len(rows) == cfg.reads
        energies = np.array([x["logical_energy"] for x in rows])
        broken = np.array([x["broken"] for x in rows])
        assert r["energy"] == bench.energy_summary(energies)
        assert r["break_rate"] == broken.mean()
        if broken.any():
            assert r["energy"]["min"] <= 0
        ok = energies[~broken]
        assert r["best_logical_energy"] == (ok.min() if len(ok) else None)


def test_artifacts_written(product_run):
    cfg, _ = product_run
    sub = f"{cfg.output_dir}/N8"
    for name in ("instance.json", "contracted_embedding.json", "four_clique.json", "linear.json", "boxplot.dat"):
        with open(f"{sub}/{name}") as fh:
            assert fh.read()
    with open(f"{sub}/boxplot.dat") as fh:
        lines = fh.read().splitlines()
    assert lines[0].startswith("#") and len(lines) == 25
    assert len(lines[1].split()) == 11


def test_rerun_is_byte_identical(tmp_path):
    cfg = ExperimentConfig(sizes=[3, 5], sweeps=[10], output_dir=str(tmp_path), **SMALL)

    def snapshot():
        run_experiment(cfg)
        return {p.relative_to(tmp_path): p.read_bytes() for p in sorted(tmp_path.rglob("*")) if p.is_file()}

    first = snapshot()
    assert any(k.suffix == ".csv" for k in first)
    assert snapshot() == first


def test_compare_with_itself(product_run):
    _, report = product_run
    result = compare(report, report)
    assert len(result["rows"]) == 24
    assert all(r["break_rate_delta"] == 0 and r["median_energy_delta"] == 0 for r in result["rows"])
    assert result["signs"]["break_rate"] == {"negative": 0, "zero": 24, "positive": 0}


def test_compare_disjoint_raises(product_run):
    _, report = product_run
    other = Report(report.config, [dict(r, key="x" + r["key"]) for r in report.records], [], {})
    with pytest.raises(ValueError):
        compare(report, other)


def test_compare_across_kinds(product_run):
    _, report = product_run
    four = Report(report.config, [r for r in report.records if r["kind"] == "four_clique"], [], {})
    lin = Report(report.config, [r for r in report.records if r["kind"] == "linear"], [], {})
    with pytest.raises(ValueError):
        compare(four, lin)
    result = compare(four, lin, ignore_kind=True)
    assert len(result["rows"]) == 12


def test_failed_embedding_is_partial(tmp_path):
    cfg = ExperimentConfig(sizes=[3, 40], sweeps=[5], reads=5, family="pegasus", m=4,
                           embed_tries=1, embed_max_passes=2, output_dir=str(tmp_path))
    report = run_experiment(cfg)
    assert report.status == bench.EXIT_PARTIAL
    assert [f["N"] for f in report.failures] == [40]
    assert {r["N"] for r in report.records} == {3}


def test_table2_examples():
    a, b, c = PairNode(0, 1), PairNode(2, 3), PairNode(4, 5)
    singles = Embedding({0: (a,), 1: (b,), 2: (c,)})
    assert export_table2({3: singles}).splitlines()[1].endswith('"(2, 2.000 ± 0.000, 2)"')
    mixed = Embedding({0: (a,), 1: (b,), 2: (c, PairNode(6, 7))})
    rows = list(csv.DictReader(export_table2({3: mixed, 1: singles}).splitlines()))
    assert [r["N"] for r in rows] == ["1", "3"]
    assert rows[1]["summary"] == "(2, 2.667 ± 0.943, 4)"
    assert rows[1]["mean"] == "2.667"


def test_load_embeddings_prefers_contracted(product_run):
    cfg, _ = product_run
    found = bench.load_embeddings(cfg.output_dir)
    assert list(found) == [8]
    assert isinstance(found[8], Embedding)


def test_config_from_toml(tmp_path):
    (tmp_path / "exp.toml").write_text(
        '[hardware]\nfamily = "zephyr"\nm = 3\n'
        '[embedding]\nseed = 4\n'
        '[sampling]\nsizes = [5, 6]\nchain_strengths = [2.0]\nreads = 7\nbeta = [0.5, 4]\nseed = 3\n'
        '[output]\ndir = "out"\n')
    cfg = ExperimentConfig.from_toml(tmp_path / "exp.toml")
    assert (cfg.family, cfg.m, cfg.sizes, cfg.reads) == ("zephyr", 3, [5, 6], 7)
    assert cfg.embed_seed == 4 and cfg.sampler_seed == 3 and cfg.beta == (0.5, 4.0)
    assert cfg.output_dir == str(tmp_path / "out")
    assert cfg.sweeps == [1000] and cfg.kinds == ["four_clique", "linear"]


@pytest.mark.parametrize("data", [
    {"sampling": {}},
    {"sampling": {"sizes": []}},
    {"sampling": {"sizes": [4], "reads": 0}},
    {"sampling": {"sizes": [4], "kinds": ["chain"]}},
])
def test_config_errors(data):
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict(data)
