"""Command line entry point: ``signrank generate|analyze|train|sweep``.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness
from .errors import InvalidArgument, ParseError
from .graphs import chain_of_cycles, grid_graph, save_graph, star_graph, to_dot
from .lowrank import SweepConfig, sweep_generate
from .rank import (
    BOUND_ONLY, WITNESS, complex_star_embedding, dimension_lower_bound, largest_induced_star,
    matrix_rank, rank2_realizability_oracle, star_bound_notes, star_rank_lower_bound,
    verify_embedding,
)
from .train import TrainConfig

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _emit(doc) -> None:
    json.dump(doc, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


# -- generate ----------------------------------------------------------------

def cmd_generate(args) -> int:
    out = Path(args.output)
    if args.kind == "grid":
        dims = harness.parse_int_list(args.dims)
        g, stem = grid_graph(dims), "grid" + "x".join(map(str, dims))
    elif args.kind == "chain":
        sizes = harness.parse_cycles(args.cycles)
        g, stem = chain_of_cycles(sizes), "chain_" + args.cycles.replace(",", "_")
    elif args.kind == "star":
        g, stem = star_graph(args.leaves), f"star{args.leaves}"
    else:
        return _generate_lowrank(args, out)
    edges, dot = harness.write_graph_files(g, out, stem)
    print(edges)
    print(dot)
    return EXIT_OK


def _generate_lowrank(args, out: Path) -> int:
    cfg = SweepConfig(n=args.n, a=args.a, b=args.b, m=args.m, rank=args.rank, k_rule=args.k_rule)
    result = sweep_generate(cfg)
    stem = f"lowrank_n{args.n}_a{args.a:g}_b{args.b:g}_m{args.m}_r{args.rank}"
    folder = out / stem
    folder.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, hit in enumerate(result):
        g = hit.pattern.to_graph()
        name = f"pattern_{i:05d}"
        save_graph(g, folder / f"{name}.edges")
        (folder / f"{name}.dot").write_text(to_dot(g), encoding="utf-8")
        rows.append([i, repr(hit.x), g.num_edges, hit.key_hash, f"{name}.edges"])
    with open(folder / "index.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "x", "edges", "key_hash", "file"])
        w.writerows(rows)
    meta = {"n": args.n, "a": args.a, "b": args.b, "m": args.m, "rank": args.rank,
            "k_rule": args.k_rule, "patterns": len(result),
            "dropped_disconnected": result.dropped_disconnected, "evaluated": result.evaluated}
    with open(folder / "meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(folder / "index.csv")
    return EXIT_OK


# -- analyze -----------------------------------------------------------------

def _bound_report(g, args) -> dict:
    center, leaves = largest_induced_star(g, cap=args.cap, heuristic=args.heuristic)
    n_h = len(leaves) + 1
    doc = {
        "kind": BOUND_ONLY,
        "bound": dimension_lower_bound(g, cap=args.cap, heuristic=args.heuristic),
        "largest_star": {"center": center, "leaves": leaves, "nodes": n_h},
        "heuristic": bool(args.heuristic),
    }
    if n_h >= 2:
        doc["star_bound"] = str(star_rank_lower_bound(n_h))
        doc["notes"] = star_bound_notes(n_h)
    return doc


def cmd_analyze(args) -> int:
    if args.what == "star-embed":
        z = complex_star_embedding(args.leaves)
        ok = verify_embedding(star_graph(args.leaves), z)
        _emit({
            "kind": WITNESS if ok else "Failed",
            "leaves": args.leaves,
            "witness": {"real": z.real.tolist(), "imag": z.imag.tolist()},
            "verified": ok,
            "real_star_bound": str(star_rank_lower_bound(args.leaves + 1)),
        })
        return EXIT_OK if ok else EXIT_RUNTIME
    g = harness.graph_from_source(args.graph)
    if args.what == "bound":
        _emit(_bound_report(g, args))
    elif args.what == "rank2":
        _emit(rank2_realizability_oracle(g, args.resolution).to_json())
    elif args.what == "rank":
        _emit({"matrix_rank": matrix_rank(g.to_float(), args.tol), "tol": args.tol, "n": g.n})
    else:  # summary
        bound = _bound_report(g, args)
        doc = {
            "n": g.n,
            "edges": g.num_edges,
            "matrix_rank": matrix_rank(g.to_float(), args.tol),
            "dimension_lower_bound": bound["bound"],
            "largest_star": bound["largest_star"],
        }
        if g.n <= 7:
            cert = rank2_realizability_oracle(g, args.resolution)
            doc["rank2"] = cert.kind
            doc["rank2_resolution"] = args.resolution
        _emit(doc)
    return EXIT_OK


# -- train / sweep -----------------------------------------------------------

def _train_overrides(args) -> dict:
    return {
        "train_lr": args.lr, "train_lam": args.lam, "train_epochs": args.epochs,
        "train_optimizer": args.optimizer, "train_log_every": args.log_every,
    }


def _experiment(args) -> harness.ExperimentConfig:
    if args.config:
        cfg = harness.ExperimentConfig.load(args.config)
    else:
        if not args.graph:
            raise UsageError("either --config or --graph is required")
        cfg = harness.ExperimentConfig(graph=args.graph)
    over = _train_overrides(args)
    over["graph"] = args.graph
    over["output"] = args.output
    if args.normalize:
        over["normalize_adjacency"] = True
    if args.h1 is not None:
        over["h1"] = args.h1 if args.h1 == "2h2" else int(args.h1)
    return cfg, over


def cmd_train(args) -> int:
    cfg, over = _experiment(args)
    if args.arch:
        over["architectures"] = [args.arch]
    if args.h2 is not None:
        over["h2"] = [args.h2]
    if args.seed is not None:
        over["seeds"] = [args.seed]
    cfg = cfg.with_overrides(**over)
    g = harness.graph_from_source(cfg.graph)
    arch, h2, seed = cfg.architectures[0], cfg.h2[0], cfg.seed_list()[0]
    tcfg = TrainConfig(**{**cfg.train.to_json(), "seed": seed})
    summary = harness.run_single(g, arch, harness.resolve_h1(cfg.h1, h2), h2, tcfg,
                                 out_dir=cfg.output, normalize_adjacency=cfg.normalize_adjacency)
    _emit(summary)
    return EXIT_OK if summary["status"] == "ok" else EXIT_RUNTIME


def cmd_sweep(args) -> int:
    cfg, over = _experiment(args)
    if args.arch:
        over["architectures"] = [a for a in args.arch.split(",") if a]
    if args.h2 is not None:
        over["h2"] = harness.parse_int_list(args.h2)
    if args.seeds is not None:
        over["seeds"] = harness.parse_int_list(args.seeds)
    cfg = cfg.with_overrides(**over)
    rows = harness.sweep(cfg, jobs=args.jobs)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sweep.csv"
    path.write_text(harness.sweep_csv(rows), encoding="utf-8")
    print(path)
    return EXIT_OK if all(r["status"] == "ok" for r in rows) else EXIT_RUNTIME


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="signrank", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("generate", help="write generator graphs as edge lists + DOT")
    gsub = gen.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    for kind in ("grid", "chain", "star", "lowrank"):
        sp = gsub.add_parser(kind)
        sp.add_argument("-o", "--output", default=".")
        if kind == "grid":
            sp.add_argument("--dims", required=True, help="comma-separated, e.g. 3,3,3,3")
        elif kind == "chain":
            sp.add_argument("--cycles", required=True, help="e.g. 6x10 or 4x45,6x80,12x45")
        elif kind == "star":
            sp.add_argument("--leaves", type=int, required=True)
        else:
            sp.add_argument("--n", type=int, required=True)
            sp.add_argument("--a", type=float, required=True)
            sp.add_argument("--b", type=float, required=True)
            sp.add_argument("--m", type=int, required=True)
            sp.add_argument("--rank", type=int, choices=(2, 3), default=2)
            sp.add_argument("--k-rule", dest="k_rule", default="default",
                            choices=("default", "sqrt_prime"))
    gen.set_defaults(func=cmd_generate)

    ana = sub.add_parser("analyze", help="rank bounds, rank-2 oracle, complex star embedding")
    asub = ana.add_subparsers(dest="what", required=True, parser_class=_Parser)
    for what in ("bound", "rank2", "rank", "summary"):
        sp = asub.add_parser(what)
        sp.add_argument("graph", help="edge-list file or generator spec (grid:3,3 / chain:6x10 / star:3)")
        sp.add_argument("--resolution", type=int, default=32)
        sp.add_argument("--tol", type=float, default=1e-8)
        sp.add_argument("--cap", type=int, default=64)
        sp.add_argument("--heuristic", action="store_true", help="greedy induced-star search")
    se = asub.add_parser("star-embed")
    se.add_argument("--leaves", type=int, required=True)
    ana.set_defaults(func=cmd_analyze)

    for name, func in (("train", cmd_train), ("sweep", cmd_sweep)):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="experiment JSON; flags override its fields")
        sp.add_argument("--graph", help="edge-list file or generator spec")
        sp.add_argument("--h1", help="hidden width or '2h2'")
        sp.add_argument("--epochs", type=int)
        sp.add_argument("--lr", type=float)
        sp.add_argument("--lam", type=float)
        sp.add_argument("--optimizer", choices=("adam", "gd"))
        sp.add_argument("--log-every", dest="log_every", type=int)
        sp.add_argument("--normalize", action="store_true", help="use D^-1/2 A D^-1/2 in the encoder")
        sp.add_argument("-o", "--output")
        if name == "train":
            sp.add_argument("--arch")
            sp.add_argument("--h2", type=int)
            sp.add_argument("--seed", type=int)
        else:
            sp.add_argument("--arch", help="comma-separated architectures")
            sp.add_argument("--h2", help="comma-separated latent sizes")
            sp.add_argument("--seeds", help="comma-separated seeds")
            sp.add_argument("--jobs", type=int, default=1)
        sp.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"signrank: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"signrank: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidArgument, ParseError, OSError, KeyError, ValueError) as exc:
        print(f"signrank: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
