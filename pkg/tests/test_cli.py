from __future__ import annotations

import csv
import json

import pytest

from cliquebed import chains, contraction, embedder, hwgraph, ising
from cliquebed.cli import main


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    paths = {k: d / f"{k}.json" for k in ("graph", "cg", "emb", "four", "lin", "inst", "emb_ising")}
    paths["csv"] = d / "samples.csv"
    steps = [
        ["graph", "gen", "--family", "pegasus", "--m", "6", "-o", paths["graph"]],
        ["contract", "--in", paths["graph"], "--largest-component", "-o", paths["cg"]],
        ["embed", "--source", "k6", "--target", paths["cg"], "-o", paths["emb"]],
        ["expand", "--embedding", paths["emb"], "--contracted", paths["cg"], "--graph", paths["graph"],
         "--source", "k6", "-o", paths["four"]],
        ["derive-linear", "--embedding", paths["four"], "--graph", paths["graph"], "-o", paths["lin"]],
        ["instance", "gen", "--n", "6", "--seed", "2", "-o", paths["inst"]],
        ["instance", "embed", "--instance", paths["inst"], "--embedding", paths["four"],
         "--chain-strength", "2", "-o", paths["emb_ising"]],
        ["sample", "--embedded", paths["emb_ising"], "--embedding", paths["four"], "--instance", paths["inst"],
         "--reads", "40", "--sweeps", "50", "-o", paths["csv"]],
    ]
    for argv in steps:
        assert main([str(a) for a in argv]) == 0, argv
    return paths


def test_pipeline_artifacts_load(pipeline):
    g = hwgraph.load(pipeline["graph"])
    assert len(g.nodes) == 24 * 6 * 5
    cg = contraction.load(pipeline["cg"])
    assert cg.source_hash == g.content_hash
    emb = embedder.load(pipeline["emb"])
    assert len(emb.chains) == 6
    four, lin = chains.load(pipeline["four"]), chains.load(pipeline["lin"])
    assert chains.validate_physical(four, g) == [] and chains.validate_physical(lin, g) == []
    assert ising.load_model(pipeline["inst"]) == ising.random_sk(6, 2)
    assert ising.load_embedded(pipeline["emb_ising"]).chain_strength == 2.0
    with open(pipeline["csv"]) as fh:
        assert len(list(csv.DictReader(fh))) == 40


def test_graph_stats_and_load(pipeline, capsys, tmp_path):
    assert main(["graph", "stats", str(pipeline["graph"])]) == 0
    assert json.loads(capsys.readouterr().out)
    out = tmp_path / "g.edgelist"
    assert main(["graph", "load", str(pipeline["graph"]), "-o", str(out)]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["content_hash"] == hwgraph.load(pipeline["graph"]).content_hash


def test_instance_gen_to_stdout(capsys):
    assert main(["instance", "gen", "--n", "3", "--seed", "0"]) == 0
    assert ising.model_from_json_dict(json.loads(capsys.readouterr().out)) == ising.random_sk(3, 0)


def test_bench_commands(tmp_path, capsys):
    cfg = tmp_path / "exp.toml"
    cfg.write_text('[hardware]\nm = 6\n[sampling]\nsizes = [4]\nsweeps = [5]\nreads = 10\n'
                   '[output]\ndir = "out"\n')
    assert main(["bench", "run", "--config", str(cfg), "--gnuplot"]) == 0
    assert "2 records" in capsys.readouterr().out
    report = tmp_path / "out" / "report.json"
    assert main(["bench", "compare", str(report), str(report)]) == 0
    assert json.loads(capsys.readouterr().out)["signs"]
    assert main(["bench", "table2", "--embeddings", str(tmp_path / "out")]) == 0
    assert capsys.readouterr().out.startswith("N,min,mean,std,max,summary\n4,")
    assert (tmp_path / "out" / "N4" / "boxplot.dat").exists()


def test_bench_partial_exit_code(tmp_path):
    cfg = tmp_path / "exp.toml"
    cfg.write_text('[hardware]\nm = 4\n[embedding]\ntries = 1\nmax_passes = 2\n'
                   '[sampling]\nsizes = [40]\nsweeps = [5]\nreads = 5\n[output]\ndir = "out"\n')
    assert main(["bench", "run", "--config", str(cfg)]) == 2


def test_errors_exit_one(tmp_path, capsys):
    assert main(["graph", "stats", str(tmp_path / "missing.json")]) == 1
    assert "error" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        main(["graph", "gen", "--family", "square", "--m", "2", "-o", "x"])
    assert exc.value.code == 2
