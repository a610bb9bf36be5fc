"""Reconstruction metrics and the per-run record."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .graphs import Graph
from .rank import ZERO_SNAP

PROB_CLAMP = 1e-12


def sigmoid(x):
    # tanh form avoids overflow warnings for large |x|
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=float)))


def _as_matrix(A) -> np.ndarray:
    if isinstance(A, Graph):
        return A.to_float()
    return np.asarray(A, dtype=float)


def log_norm_distance(A, S) -> float:
    """``log(||A - sigmoid(S)||_F^2 / N^2)``, natural log, diagonal included.

    ``sigmoid(S)`` is clamped to ``[1e-12, 1 - 1e-12]`` so saturated runs stay finite.
    """
    A = _as_matrix(A)
    p = np.clip(sigmoid(S), PROB_CLAMP, 1.0 - PROB_CLAMP)
    n = A.shape[0]
    return math.log(float(np.sum((A - p) ** 2)) / (n * n))


def frob_error(A, A_hat) -> float:
    """Squared Frobenius distance of two adjacencies; each wrong unordered pair counts twice."""
    return float(np.sum((_as_matrix(A) - _as_matrix(A_hat)) ** 2))


def sign_errors(A, S) -> int:
    """Off-diagonal ordered pairs where ``S_ij > 0`` disagrees with ``A_ij``."""
    A = _as_matrix(A) > 0.5
    S = np.asarray(S)
    off = ~np.eye(A.shape[0], dtype=bool)
    return int(np.sum(((S > ZERO_SNAP) != A) & off))


def faithful(A, S) -> bool:
    return sign_errors(A, S) == 0


@dataclass
class RunRecord:
    config: dict
    seed: int
    series: list = field(default_factory=list)  # (epoch, loss, log_norm_distance)
    final: dict = field(default_factory=dict)
    status: str = "ok"

    def log(self, epoch: int, loss: float, lnd: float):
        if self.series and epoch <= self.series[-1][0]:
            raise ValueError("series epochs must increase")
        self.series.append((int(epoch), float(loss), float(lnd)))

    def metrics_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epoch", "loss", "log_norm_distance"])
        for epoch, loss, lnd in self.series:
            w.writerow([epoch, repr(loss), repr(lnd)])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "config": self.config,
            "seed": self.seed,
            "status": self.status,
            "log_base": "e",
            "final": self.final,
            "series": [list(row) for row in self.series],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "RunRecord":
        rec = cls(config=doc["config"], seed=doc["seed"], final=doc.get("final", {}),
                  status=doc.get("status", "ok"))
        rec.series = [tuple(row) for row in doc.get("series", [])]
        return rec


def summarize(A, S, tol: float = 1e-8) -> dict:
    """Final reconstruction statistics for a decoded score matrix ``S``."""
    from .rank import matrix_rank

    A = _as_matrix(A)
    S = np.asarray(S, dtype=float)
    A_hat = np.triu(S > ZERO_SNAP, 1)
    A_hat = (A_hat | A_hat.T).astype(float)
    errs = sign_errors(A, S)
    return {
        "sign_errors": errs,
        "frob_error": frob_error(A, A_hat),
        "computed_rank": matrix_rank(S, tol) if np.all(np.isfinite(S)) else -1,
        "faithful": errs == 0,
        "log_norm_distance": log_norm_distance(A, S) if np.all(np.isfinite(S)) else float("nan"),
    }
