"""Experiment configuration, single runs, sweeps, and on-disk artifacts."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import InvalidArgument, TrainingDiverged
from .graphs import Graph, chain_of_cycles, grid_graph, load_graph, save_graph, star_graph, to_dot
from .model import Model, architecture, prob_decode, sign_decode
from .train import TrainConfig, save_checkpoint, train

log = logging.getLogger(__name__)

SWEEP_COLUMNS = [
    "architecture", "h1", "h2", "seed", "status",
    "log_norm_distance", "sign_errors", "computed_rank", "faithful",
]


def parse_int_list(text: str) -> list[int]:
    return [int(t) for t in str(text).replace(" ", "").split(",") if t]


def parse_cycles(text: str) -> list[int]:
    """``"6,6,6"``, ``"6x10"`` (ten 6-cycles) or mixes such as ``"4x45,6x80,12x45"``."""
    sizes: list[int] = []
    for tok in str(text).replace(" ", "").split(","):
        if not tok:
            continue
        m = re.fullmatch(r"(\d+)(?:x(\d+))?", tok)
        if not m:
            raise InvalidArgument(f"bad cycle spec {tok!r}")
        sizes += [int(m.group(1))] * int(m.group(2) or 1)
    return sizes


def graph_from_source(source) -> Graph:
    """Build a graph from ``"grid:3,3"``, ``"chain:6x10"``, ``"star:3"``, a dict, or a file path."""
    if isinstance(source, Graph):
        return source
    if isinstance(source, dict):
        kind = source.get("generator")
        if kind is None and "path" in source:
            return load_graph(source["path"])
        if kind == "grid":
            return grid_graph(source["dims"])
        if kind == "chain":
            sizes = source["cycle_sizes"]
            return chain_of_cycles(parse_cycles(sizes) if isinstance(sizes, str) else sizes)
        if kind == "star":
            return star_graph(int(source["leaves"]))
        raise InvalidArgument(f"unknown graph source {source!r}")
    text = str(source)
    kind, sep, arg = text.partition(":")
    if sep and kind in ("grid", "chain", "star"):
        if kind == "grid":
            return grid_graph(parse_int_list(arg))
        if kind == "chain":
            return chain_of_cycles(parse_cycles(arg))
        return star_graph(int(arg))
    return load_graph(text)


def resolve_h1(rule, h2: int) -> int:
    if isinstance(rule, str):
        if rule.replace(" ", "") in ("2h2", "2*h2"):
            return 2 * h2
        return int(rule)
    return int(rule)


@dataclass
class ExperimentConfig:
    graph: Union[str, dict]
    architectures: list = field(default_factory=lambda: ["GAE", "DGAE"])
    h2: list = field(default_factory=lambda: [8])
    h1: Union[int, str] = 120
    train: TrainConfig = field(default_factory=TrainConfig)
    output: str = "runs"
    seeds: Optional[list] = None
    repetitions: int = 1
    base_seed: int = 0
    normalize_adjacency: bool = False

    def __post_init__(self):
        if not self.architectures:
            raise InvalidArgument("architecture list must be non-empty")
        if not self.h2:
            raise InvalidArgument("h2 list must be non-empty")
        if isinstance(self.train, dict):
            self.train = TrainConfig(**self.train)

    def seed_list(self) -> list[int]:
        if self.seeds is not None:
            return [int(s) for s in self.seeds]
        return [self.base_seed + i for i in range(self.repetitions)]

    @classmethod
    def from_json(cls, doc: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise InvalidArgument(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InvalidArgument(f"config is not valid JSON: {exc}") from None
        return cls.from_json(doc)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        train_kw = {k[len("train_"):]: kw.pop(k) for k in list(kw) if k.startswith("train_")}
        cfg = replace(self, **kw)
        if train_kw:
            cfg.train = replace(cfg.train, **train_kw)
        return cfg


def _dump_json(path, doc) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_text(path, text) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def run_single(g: Graph, arch: str, h1: int, h2: int, cfg: TrainConfig,
               out_dir=None, normalize_adjacency: bool = False) -> dict:
    """Train one model; optionally write its artifacts. Returns the summary dict.

    A diverged run still produces a summary (``status == "diverged"``) from the last finite
    parameters.
    """
    spec = architecture(arch, h1, h2, normalize_adjacency=normalize_adjacency)
    model = Model(spec, g)
    try:
        params, record = train(g, spec, cfg)
        epoch = cfg.epochs
    except TrainingDiverged as exc:
        params, record, epoch = exc.params, exc.record, exc.epoch
    S = model.scores(params)
    decode_seed = cfg.seed
    summary = {
        "architecture": spec.name,
        "h1": h1,
        "h2": h2,
        "seed": cfg.seed,
        "status": record.status,
        "epoch": epoch,
        "decode_seed": decode_seed,
        "log_base": "e",
        **record.final,
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        save_checkpoint(out / "checkpoint.json", params, cfg, epoch)
        _write_text(out / "metrics.csv", record.metrics_csv())
        _dump_json(out / "summary.json", summary)
        save_graph(sign_decode(S), out / "recon_sign.edges")
        save_graph(prob_decode(S, np.random.default_rng(decode_seed)), out / "recon_prob.edges")
    return summary


def _sweep_row(task) -> dict:
    source, arch, h1, h2, cfg, normalize = task
    row = {"architecture": arch, "h1": h1, "h2": h2, "seed": cfg.seed}
    try:
        g = graph_from_source(source)
        s = run_single(g, arch, h1, h2, cfg, normalize_adjacency=normalize)
        row.update({k: s[k] for k in SWEEP_COLUMNS if k in s})
        row["architecture"] = arch
    except Exception as exc:  # one bad row must not sink the sweep
        row.update(status=f"error: {type(exc).__name__}: {exc}", log_norm_distance="",
                   sign_errors="", computed_rank="", faithful="")
    return row


def sweep(cfg: ExperimentConfig, jobs: int = 1) -> list[dict]:
    """Cross product of architectures x h2 x seeds, sorted by (architecture order, h2, seed)."""
    source = cfg.graph
    tasks = []
    for arch in cfg.architectures:
        for h2 in cfg.h2:
            for seed in cfg.seed_list():
                tcfg = replace(cfg.train, seed=seed)
                tasks.append((source, arch, resolve_h1(cfg.h1, h2), h2, tcfg, cfg.normalize_adjacency))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_row, tasks))
    else:
        rows = [_sweep_row(t) for t in tasks]
    order = {a: i for i, a in enumerate(cfg.architectures)}
    rows.sort(key=lambda r: (order[r["architecture"]], r["h2"], r["seed"]))
    return rows


def sweep_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        r = dict(r)
        if isinstance(r.get("log_norm_distance"), float):
            r["log_norm_distance"] = repr(r["log_norm_distance"])
        w.writerow(r)
    return buf.getvalue()


def write_graph_files(g: Graph, out_dir, stem: str) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    edges, dot = out / f"{stem}.edges", out / f"{stem}.dot"
    save_graph(g, edges)
    _write_text(dot, to_dot(g))
    return edges, dot


def default_jobs() -> int:
    return max(1, (os.cpu_count() or 1))
