"""Command-line entry point: ``cliquebed <command> ...``."""
from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import networkx as nx

from cliquebed import __version__, bench, chains, contraction, embedder, hwgraph, ising, sampler


def _source_graph(spec: str) -> nx.Graph:
    """``kN`` for a complete graph, otherwise a JSON or edge-list file."""
    m = re.fullmatch(r"[kK](\d+)", spec)
    if m:
        return nx.complete_graph(int(m.group(1)))
    path = Path(spec)
    if path.suffix == ".json":
        data = json.loads(path.read_text())
        g = nx.Graph()
        g.add_nodes_from(data.get("nodes", []))
        g.add_edges_from(tuple(e) for e in data["edges"])
        return g
    return nx.read_edgelist(path, nodetype=int, comments="#")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_graph_gen(args) -> int:
    g = hwgraph.generate(args.family, args.m, fabric_only=args.fabric_only)
    hwgraph.save(g, args.output)
    print(f"{args.family}({args.m}): {len(g.nodes)} qubits, {len(g.edges)} couplers -> {args.output}")
    return 0


def cmd_graph_load(args) -> int:
    g = hwgraph.load(args.input)
    if args.output:
        hwgraph.save(g, args.output)
    print(json.dumps({"nodes": len(g.nodes), "edges": len(g.edges), "content_hash": g.content_hash}))
    return 0


def cmd_graph_stats(args) -> int:
    print(json.dumps(hwgraph.load(args.input).stats(), indent=1))
    return 0


def cmd_contract(args) -> int:
    g = hwgraph.load(args.input)
    cg = contraction.contract_4_cliques(g, args.seed, min_multiplicity=args.min_multiplicity)
    comps = contraction.components(cg)
    if args.largest_component and comps:
        cg = comps[0]
    contraction.save(cg, args.output)
    qf, cf = contraction.coverage(cg, g)
    print(f"{len(cg.pairs)} pair-nodes, {len(cg.multiplicity)} edges, {len(comps)} components, "
          f"coverage qubits={qf:.4f} couplers={cf:.4f}")
    return 0


def cmd_embed(args) -> int:
    src = _source_graph(args.source)
    cg = contraction.load(args.target)
    emb = embedder.find_embedding(src, cg, tries=args.tries, max_passes=args.max_passes, seed=args.seed)
    embedder.save(emb, args.output)
    print(embedder.format_stats(embedder.chain_length_stats(emb)))
    return 0


def cmd_expand(args) -> int:
    g = hwgraph.load(args.graph)
    cg = contraction.load(args.contracted)
    emb = embedder.load(args.embedding)
    src = _source_graph(args.source) if args.source else None
    pe = chains.expand(emb, cg, g, src)
    chains.save(pe, args.output)
    print(embedder.format_stats(embedder.chain_length_stats(pe.chains, 1)))
    return 0


def cmd_derive_linear(args) -> int:
    g = hwgraph.load(args.graph)
    pe = chains.derive_linear(chains.load(args.embedding), g, args.seed)
    chains.save(pe, args.output)
    print(embedder.format_stats(embedder.chain_length_stats(pe.chains, 1)))
    return 0


def cmd_instance_gen(args) -> int:
    m = ising.random_sk(args.n, args.seed)
    _emit(json.dumps(ising.model_to_json_dict(m)) + "\n", args.output)
    return 0


def cmd_instance_embed(args) -> int:
    m = ising.load_model(args.instance)
    pe = chains.load(args.embedding)
    e = ising.embed_parameters(m, pe, args.chain_strength)
    if not args.no_autoscale:
        e = ising.autoscale(e, args.h_range, args.j_range)
    ising.save_embedded(e, args.output)
    print(f"scale_factor={e.scale_factor!r}")
    return 0


def cmd_sample(args) -> int:
    e = ising.load_embedded(args.embedded)
    raw = sampler.sample(e, args.reads, args.sweeps, (args.beta_min, args.beta_max), args.seed, args.quench)
    ss = sampler.unembed(raw, chains.load(args.embedding), ising.load_model(args.instance),
                         args.mode, args.tie_seed)
    sampler.write_csv(ss, args.output)
    print(f"break_rate={sampler.break_rate(ss):.4f}")
    return 0


def cmd_bench_run(args) -> int:
    cfg = bench.ExperimentConfig.from_toml(args.config)
    if args.gnuplot:
        cfg.gnuplot = True
    report = bench.run_experiment(cfg)
    for f in report.failures:
        print(f"failed N={f['N']} at {f['stage']}: {f['error']}", file=sys.stderr)
    print(f"{len(report.records)} records -> {Path(cfg.output_dir) / 'report.json'}")
    return report.status


def cmd_bench_compare(args) -> int:
    result = bench.compare(bench.Report.load(args.a), bench.Report.load(args.b), ignore_kind=args.ignore_kind)
    print(json.dumps(result, indent=1))
    return 0


def cmd_bench_table2(args) -> int:
    _emit(bench.export_table2(bench.load_embeddings(args.embeddings)), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cliquebed", description="4-clique minor embedding toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    graph = sub.add_parser("graph", help="hardware graphs").add_subparsers(dest="graph_command", required=True)
    q = graph.add_parser("gen", help="generate an ideal lattice")
    q.add_argument("--family", required=True, choices=[f for f in hwgraph.FAMILIES if f != "custom"])
    q.add_argument("--m", type=int, required=True)
    q.add_argument("--fabric-only", action="store_true")
    q.add_argument("-o", "--output", required=True)
    q.set_defaults(func=cmd_graph_gen)
    q = graph.add_parser("load", help="read a graph, optionally converting it")
    q.add_argument("input")
    q.add_argument("-o", "--output")
    q.set_defaults(func=cmd_graph_load)
    q = graph.add_parser("stats", help="print graph statistics")
    q.add_argument("input")
    q.set_defaults(func=cmd_graph_stats)

    q = sub.add_parser("contract", help="4-clique contraction")
    q.add_argument("--in", dest="input", required=True)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--min-multiplicity", type=int, default=4)
    q.add_argument("--largest-component", action="store_true")
    q.add_argument("-o", "--output", required=True)
    q.set_defaults(func=cmd_contract)

    q = sub.add_parser("embed", help="minor-embed a source graph into a contracted graph")
    q.add_argument("--source", required=True, help="kN or a graph file")
    q.add_argument("--target", required=True)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--tries", type=int, default=embedder.DEFAULT_TRIES)
    q.add_argument("--max-passes", type=int, default=embedder.DEFAULT_MAX_PASSES)
    q.add_argument("-o", "--output", required=True)
    q.set_defaults(func=cmd_embed)

    q = sub.add_parser("expand", help="contracted embedding to physical 4-clique chains")
    q.add_argument("--embedding", required=True)
    q.add_argument("--contracted", required=True)
    q.add_argument("--graph", required=True)
    q.add_argument("--source", help="kN or a graph file; defaults to edges realised by the chains")
    q.add_argument("-o", "--output", required=True)
    q.set_defaults(func=cmd_expand)

    q = sub.add_parser("derive-linear", help="one qubit per pair-node")
    q.add_argument("--embedding", required=True)
    q.add_argument("--graph", required=True)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("-o", "--output", required=True)
    q.set_defaults(func=cmd_derive_linear)

    inst = sub.add_parser("instance", help="spin-glass instances").add_subparsers(dest="instance_command",
                                                                                 required=True)
    q = inst.add_parser("gen", help="random +-1 all-to-all instance")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("-o", "--output")
    q.set_defaults(func=cmd_instance_gen)
    q = inst.add_parser("embed", help="map an instance onto a physical embedding")
    q.add_argument("--instance", required=True)
    q.add_argument("--embedding", required=True)
    q.add_argument("--chain-strength", type=float, required=True)
    q.add_argument("--h-range", type=float, default=ising.DEFAULT_H_RANGE)
    q.add_argument("--j-range", type=float, default=ising.DEFAULT_J_RANGE)
    q.add_argument("--no-autoscale", action="store_true")
    q.add_argument("-o", "--output", required=True)
    q.set_defaults(func=cmd_instance_embed)

    q = sub.add_parser("sample", help="simulated annealing plus unembedding")
    q.add_argument("--embedded", required=True)
    q.add_argument("--embedding", required=True)
    q.add_argument("--instance", required=True)
    q.add_argument("--reads", type=int, default=1000)
    q.add_argument("--sweeps", type=int, default=1000)
    q.add_argument("--beta-min", type=float, default=sampler.DEFAULT_BETA[0])
    q.add_argument("--beta-max", type=float, default=sampler.DEFAULT_BETA[1])
    q.add_argument("--quench", type=int, default=0, help="zero-temperature sweeps appended")
    q.add_argument("--mode", choices=sampler.MODES, default="discard_zero")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--tie-seed", type=int, default=0)
    q.add_argument("-o", "--output", required=True)
    q.set_defaults(func=cmd_sample)

    b = sub.add_parser("bench", help="experiment harness").add_subparsers(dest="bench_command", required=True)
    q = b.add_parser("run")
    q.add_argument("--config", required=True)
    q.add_argument("--gnuplot", action="store_true")
    q.set_defaults(func=cmd_bench_run)
    q = b.add_parser("compare")
    q.add_argument("a")
    q.add_argument("b")
    q.add_argument("--ignore-kind", action="store_true")
    q.set_defaults(func=cmd_bench_compare)
    q = b.add_parser("table2")
    q.add_argument("--embeddings", required=True)
    q.add_argument("-o", "--output")
    q.set_defaults(func=cmd_bench_table2)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"cliquebed: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
