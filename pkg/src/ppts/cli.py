"""Command-line entry point: ``ppts <verb> ...``."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

from . import bench
from .attack import empirical_adversary
from .errors import PPTSError
from .graph import example_graph, generate_partitioned_graph, read_graph, write_graph
from .metrics import RunMetrics, verify_cost_model
from .protocol import ProtocolConfig, run_ppts
from .transcript import ProtocolTranscript


def _add_graph_args(p: argparse.ArgumentParser):
    src = p.add_argument_group("graph (file, built-in example, or generated)")
    src.add_argument("--graph", help="graph file in the 'p dgc' format")
    src.add_argument("--example", action="store_true", help="use the built-in 7-vertex example")
    src.add_argument("-n", "--vertices", type=int, default=100)
    src.add_argument("--density", type=float, default=0.1)
    src.add_argument("-m", "--parties", type=int, default=10)
    src.add_argument("--graph-seed", type=int, default=0)


def _load_graph(args):
    if args.graph:
        return read_graph(args.graph)
    if args.example:
        return example_graph()
    return generate_partitioned_graph(args.vertices, args.density, args.parties, seed=args.graph_seed)


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text == "on"


def _ppts_options(args) -> dict:
    return {"key_bits": args.key_bits, "sync_move": args.defense}


def cmd_gen(args):
    g = generate_partitioned_graph(args.vertices, args.density, args.parties, seed=args.graph_seed)
    comment = (f"n={args.vertices} density={args.density} parties={args.parties} "
               f"seed={args.graph_seed}")
    if args.out:
        with open(args.out, "w") as fh:
            write_graph(g, fh, comment)
    else:
        write_graph(g, sys.stdout, comment)


def cmd_solve(args):
    g = _load_graph(args)
    if args.solver == "tabucol":
        out = bench.solve(g, "tabucol", args.k, args.max_iter, args.seed)
        result = {"solver": "tabucol", "k": args.k, "status": out.status.value,
                  "iterations": out.iterations, "wall_time": out.metrics["wall_time"]}
    else:
        cfg = ProtocolConfig(k=args.k, max_iterations=args.max_iter, seed=args.seed,
                             keep_events=bool(args.transcript), **_ppts_options(args))
        out, transcript = run_ppts(g, cfg)
        if args.transcript:
            transcript.write_jsonl(args.transcript)
        if args.metrics_out:
            with open(args.metrics_out, "w") as fh:
                json.dump(asdict(out.metrics), fh)
        result = {"solver": "ppts", "k": args.k, "status": out.status.value,
                  "iterations": out.iterations, "digest": transcript.digest(),
                  **out.metrics.summary(), "cost_check": str(verify_cost_model(out.metrics))}
    if out.coloring is not None and args.show_coloring:
        result["coloring"] = list(out.coloring.colors)
    print(json.dumps(result, sort_keys=True))
    return 0 if out.colorable else 1


def cmd_chromatic(args):
    g = _load_graph(args)
    opts = _ppts_options(args) if args.solver == "ppts" else {}
    res = bench.chromatic_search(g, args.solver, range(args.k_min, args.k_max + 1), args.budget,
                                 args.seed, **opts)
    print(json.dumps({"solver": res.solver, "min_k": res.min_k, "iterations": res.iterations,
                      "wall_time": round(res.wall_time, 3),
                      "levels": [asdict(lv) for lv in res.levels]}, sort_keys=True))


def cmd_sweep(args):
    spec = bench.load_spec(args.config) if args.config else bench.ExperimentSpec()
    rows = bench.run_sweep(spec, workers=args.workers)
    csv_text = bench.rows_to_csv(rows)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    if args.jsonl:
        with open(args.jsonl, "w") as fh:
            fh.write(bench.rows_to_jsonl(rows))


def cmd_attack(args):
    transcript = ProtocolTranscript.read_jsonl(args.transcript)
    report = empirical_adversary(transcript, args.party, args.companion_bound)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(report.to_csv())
    print(report.to_json() if args.full else json.dumps(report.summary(), sort_keys=True))


def cmd_verify_cost(args):
    if args.metrics:
        with open(args.metrics) as fh:
            metrics = RunMetrics.from_dict(json.load(fh))
    else:
        if args.k is None:
            raise PPTSError("--k is required unless --metrics is given")
        g = _load_graph(args)
        cfg = ProtocolConfig(k=args.k, max_iterations=args.max_iter, seed=args.seed,
                             keep_events=False, **_ppts_options(args))
        metrics = run_ppts(g, cfg)[0].metrics
    check = verify_cost_model(metrics)
    print(check)
    return 0 if check.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ppts", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("gen", help="generate a partitioned random graph")
    for a, kw in (("-n", dict(dest="vertices", type=int, default=100)),
                  ("--density", dict(type=float, default=0.1)),
                  ("-m", dict(dest="parties", type=int, default=10)),
                  ("--graph-seed", dict(type=int, default=0)),
                  ("-o", dict(dest="out"))):
        p.add_argument(a, **kw)
    p.set_defaults(func=cmd_gen)

    def solver_args(p, with_k=True, with_solver=True):
        if with_solver:
            p.add_argument("--solver", choices=bench.SOLVERS, default="ppts")
        if with_k:
            p.add_argument("--k", type=int, required=with_solver)
            p.add_argument("--max-iter", type=int, default=100_000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--defense", type=_on_off, default=True, metavar="{on,off}",
                       help="hidden companion move (default on)")
        p.add_argument("--key-bits", type=int, default=256)
        _add_graph_args(p)

    p = sub.add_parser("solve", help="decide k-colorability with one solver")
    solver_args(p)
    p.add_argument("--transcript", help="write the PPTS transcript as JSON lines")
    p.add_argument("--metrics-out", help="write PPTS run counters as JSON")
    p.add_argument("--show-coloring", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("chromatic", help="descending k scan")
    solver_args(p, with_k=False)
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=10)
    p.add_argument("--budget", type=int, default=10_000, help="iterations per k")
    p.set_defaults(func=cmd_chromatic)

    p = sub.add_parser("sweep", help="run an experiment grid from a key-value config")
    p.add_argument("--config")
    p.add_argument("--csv", help="CSV output (default stdout)")
    p.add_argument("--jsonl", help="JSON-lines output")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("attack", help="replay one party's view and guess foreign colors")
    p.add_argument("transcript")
    p.add_argument("--party", type=int, required=True)
    p.add_argument("--companion-bound", type=int)
    p.add_argument("--csv", help="per-guess CSV output")
    p.add_argument("--full", action="store_true", help="print every guess")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("verify-cost", help="reconcile message counters with the cost model")
    p.add_argument("--metrics", help="metrics JSON written by 'solve --metrics-out'")
    solver_args(p, with_solver=False)
    p.set_defaults(func=cmd_verify_cost)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args) or 0
    except (PPTSError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
