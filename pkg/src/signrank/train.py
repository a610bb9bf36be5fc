"""Full-batch training, optimizers, finite-difference gradient checks and checkpoints."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from .errors import InvalidArgument, TrainingDiverged
from .graphs import Graph
from .metrics import RunRecord, log_norm_distance, summarize
from .model import ArchitectureSpec, Model, ModelParams

log = logging.getLogger(__name__)

CHECKPOINT_FORMAT = 1


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-4
    lam: float = 1e-7
    epochs: int = 30000
    seed: int = 0
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    log_every: int = 100
    offdiag_loss: bool = False

    def __post_init__(self):
        if not self.lr > 0:
            raise InvalidArgument("learning rate must be positive")
        if self.lam < 0:
            raise InvalidArgument("regularization weight must be non-negative")
        if self.epochs < 0:
            raise InvalidArgument("epochs must be non-negative")
        if self.optimizer not in ("adam", "gd"):
            raise InvalidArgument(f"unknown optimizer {self.optimizer!r}")
        if self.log_every < 1:
            raise InvalidArgument("log_every must be >= 1")

    def to_json(self) -> dict:
        return asdict(self)


def _real_view(a: np.ndarray) -> np.ndarray:
    # complex128 -> interleaved float64 (re, im); gradients follow the same layout
    return a.view(np.float64) if np.iscomplexobj(a) else a


class Adam:
    def __init__(self, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m, self.v, self.t = {}, {}, 0

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for k in sorted(params):
            p, g = _real_view(params[k]), _real_view(grads[k])
            if k not in self.m:
                self.m[k] = np.zeros_like(p)
                self.v[k] = np.zeros_like(p)
            m, v = self.m[k], self.v[k]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= (self.lr / bc1) * m / (np.sqrt(v / bc2) + self.eps)


class PlainGD:
    def __init__(self, lr):
        self.lr = lr

    def step(self, params: dict, grads: dict) -> None:
        for k in sorted(params):
            _real_view(params[k])[...] -= self.lr * _real_view(grads[k])


def make_optimizer(cfg: TrainConfig):
    if cfg.optimizer == "adam":
        return Adam(cfg.lr, cfg.beta1, cfg.beta2, cfg.eps)
    return PlainGD(cfg.lr)


def train(g: Graph, spec: ArchitectureSpec, cfg: TrainConfig, X=None,
          callback: Optional[Callable[[int, float], None]] = None):
    """Optimize ``spec`` on graph ``g`` for ``cfg.epochs`` full-batch steps.

    Returns ``(params, record)``. Deterministic for a given seed. Raises
    :class:`TrainingDiverged` (carrying the last finite parameters) if the loss blows up.
    """
    model = Model(spec, g, X)
    params = model.init(cfg.seed)
    opt = make_optimizer(cfg)
    record = RunRecord(
        config={"spec": spec.to_json(), "train": cfg.to_json(), "n": g.n, "edges": g.num_edges},
        seed=cfg.seed,
    )
    A = model.A
    last_good = params.copy()
    value, grads, S = model.loss_and_grad(params, cfg.lam, cfg.offdiag_loss)
    for epoch in range(cfg.epochs + 1):
        if not math.isfinite(value) or not np.all(np.isfinite(S)):
            record.status = "diverged"
            record.final = summarize(A, model.scores(last_good))
            raise TrainingDiverged(f"non-finite loss at epoch {epoch}", params=last_good,
                                   record=record, epoch=epoch)
        if epoch % cfg.log_every == 0 or epoch == cfg.epochs:
            record.log(epoch, value, log_norm_distance(A, S))
            if callback is not None:
                callback(epoch, value)
        if epoch == cfg.epochs:
            break
        last_good = params.copy() if epoch % cfg.log_every == 0 else last_good
        opt.step(params.arrays, grads)
        value, grads, S = model.loss_and_grad(params, cfg.lam, cfg.offdiag_loss)
    record.final = summarize(A, S)
    record.final["epochs"] = cfg.epochs
    return params, record


# -- gradient checking -------------------------------------------------------

def grad_check(f: Callable[[dict], float], point: dict, grads: dict, h: float = 1e-5,
               atol: float = 1e-6) -> float:
    """Largest relative error between ``grads`` and central differences of ``f`` at ``point``.

    Per array the error is ``||g - fd|| / max(||g||, ||fd||, atol)``; ``atol`` keeps arrays
    whose gradient is numerically zero from reporting pure finite-difference noise. Complex
    arrays are perturbed in their real and imaginary parts separately.
    """
    worst = 0.0
    for name in sorted(point):
        flat = _real_view(point[name]).reshape(-1)
        fd = np.zeros_like(flat)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + h
            fp = f(point)
            flat[i] = old - h
            fm = f(point)
            flat[i] = old
            fd[i] = (fp - fm) / (2 * h)
        an = _real_view(np.asarray(grads[name])).reshape(-1)
        scale = max(np.linalg.norm(an), np.linalg.norm(fd), atol)
        worst = max(worst, float(np.linalg.norm(an - fd) / scale))
    return worst


def model_grad_check(model: Model, params: ModelParams, lam: float, h: float = 1e-5) -> float:
    _, grads, _ = model.loss_and_grad(params, lam)
    work = params.copy()
    return grad_check(lambda arrays: model.loss(work, lam), work.arrays, grads, h)


# -- checkpoints -------------------------------------------------------------

def _encode_array(a: np.ndarray):
    if np.iscomplexobj(a):
        return {"real": a.real.tolist(), "imag": a.imag.tolist()}
    return a.tolist()


def _decode_array(obj):
    if isinstance(obj, dict):
        return np.array(obj["real"], dtype=float) + 1j * np.array(obj["imag"], dtype=float)
    return np.array(obj, dtype=float)


def checkpoint_json(params: ModelParams, cfg: TrainConfig, epoch: int) -> dict:
    return {
        "format": CHECKPOINT_FORMAT,
        "spec": params.spec.to_json(),
        "config": cfg.to_json(),
        "epoch": epoch,
        "matrices": {k: _encode_array(params.arrays[k]) for k in sorted(params.arrays)},
    }


def save_checkpoint(path, params: ModelParams, cfg: TrainConfig, epoch: int) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(checkpoint_json(params, cfg, epoch), fh, indent=1)
        fh.write("\n")


def load_checkpoint(path):
    """Returns ``(params, cfg, epoch)``."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise InvalidArgument(f"unsupported checkpoint format {doc.get('format')!r}")
    spec = ArchitectureSpec.from_json(doc["spec"])
    params = ModelParams(spec, {k: _decode_array(v) for k, v in doc["matrices"].items()})
    return params, TrainConfig(**doc["config"]), doc["epoch"]
