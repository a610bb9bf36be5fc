"""Rank-2 and rank-3 graph generation from trigonometric embeddings.

Sweeping ``x`` through the embeddings below and taking signs of ``Z Z^T`` visits
sign patterns of rank at most 2 (circle) or 3 (sphere).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .errors import InvalidArgument
from .graphs import SignPattern, is_connected
from .rank import sign_of


def trig_embedding_rank2(k, x: float) -> np.ndarray:
    """Rows ``(cos(k_i x), sin(k_i x))``."""
    k = np.asarray(k, dtype=float)
    return np.stack([np.cos(k * x), np.sin(k * x)], axis=1)


def trig_embedding_rank3(k, k_prime, x: float) -> np.ndarray:
    """Rows ``(cos(k_i x) sin(k'_i x), cos(k_i x) cos(k'_i x), sin(k_i x))``, unit points on S^2."""
    k = np.asarray(k, dtype=float)
    kp = np.asarray(k_prime, dtype=float)
    if k.shape != kp.shape:
        raise InvalidArgument("k and k_prime must have the same length")
    c = np.cos(k * x)
    return np.stack([c * np.sin(kp * x), c * np.cos(kp * x), np.sin(k * x)], axis=1)


def default_k(n: int) -> tuple[np.ndarray, np.ndarray]:
    k = np.arange(1, n + 1) / n
    return k, k / 2


def first_primes(count: int) -> list[int]:
    primes: list[int] = []
    cand = 2
    while len(primes) < count:
        if all(cand % p for p in primes if p * p <= cand):
            primes.append(cand)
        cand += 1
    return primes


def sqrt_prime_k(n: int) -> tuple[np.ndarray, np.ndarray]:
    k = np.sqrt(np.array(first_primes(n), dtype=float))
    return k, k / 2


K_RULES: dict[str, Callable[[int], tuple[np.ndarray, np.ndarray]]] = {
    "default": default_k,
    "sqrt_prime": sqrt_prime_k,
}


@dataclass(frozen=True)
class SweepConfig:
    n: int
    a: float
    b: float
    m: int
    rank: int = 2
    k_rule: str = "default"

    def validate(self):
        if self.n < 2:
            raise InvalidArgument("n must be >= 2")
        if self.m < 2:
            raise InvalidArgument("m must be >= 2")
        if not self.a < self.b:
            raise InvalidArgument("need a < b")
        if self.rank not in (2, 3):
            raise InvalidArgument("rank must be 2 or 3")
        if self.k_rule not in K_RULES:
            raise InvalidArgument(f"unknown k_rule {self.k_rule!r}")

    def embedding(self, x: float) -> np.ndarray:
        k, kp = K_RULES[self.k_rule](self.n)
        if self.rank == 2:
            return trig_embedding_rank2(k, x)
        return trig_embedding_rank3(k, kp, x)


@dataclass(frozen=True)
class SweepHit:
    pattern: SignPattern
    witness: np.ndarray
    x: float

    @property
    def key(self) -> str:
        return self.pattern.key()

    @property
    def key_hash(self) -> str:
        return hashlib.sha1(self.key.encode("ascii")).hexdigest()[:16]


@dataclass
class SweepResult:
    config: SweepConfig
    hits: list = field(default_factory=list)
    dropped_disconnected: int = 0
    evaluated: int = 0

    def __iter__(self):
        return iter(self.hits)

    def __len__(self):
        return len(self.hits)

    def __getitem__(self, i):
        return self.hits[i]


def sweep_generate(cfg: SweepConfig) -> SweepResult:
    """Distinct connected sign patterns along ``x`` in ``linspace(a, b, m)``.

    Each pattern is kept at its first (smallest) ``x``, with the embedding at that ``x`` as
    witness. Distinct disconnected patterns are counted and dropped.
    """
    cfg.validate()
    result = SweepResult(config=cfg)
    seen: set[str] = set()
    for x in np.linspace(cfg.a, cfg.b, cfg.m):
        Z = cfg.embedding(float(x))
        pattern = sign_of(Z @ Z.T)
        result.evaluated += 1
        key = pattern.key()
        if key in seen:
            continue
        seen.add(key)
        if not is_connected(pattern.to_graph()):
            result.dropped_disconnected += 1
            continue
        result.hits.append(SweepHit(pattern=pattern, witness=Z, x=float(x)))
    return result


# -- periodicity helpers -------------------------------------------------------

def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, math.isqrt(p) + 1))


def prime_pair_period(p_i: int, p_j: int) -> float:
    """Period ``2*pi/|sqrt(p_i) - sqrt(p_j)|`` of ``cos((k_i - k_j) x)`` with ``k = sqrt(p)``."""
    if p_i == p_j:
        raise InvalidArgument("primes must differ")
    if not (_is_prime(int(p_i)) and _is_prime(int(p_j))) or int(p_i) != p_i or int(p_j) != p_j:
        raise InvalidArgument(f"both inputs must be primes, got {p_i}, {p_j}")
    return 2 * math.pi / abs(math.sqrt(p_i) - math.sqrt(p_j))


def common_near_multiple(t1: float, t2: float, eps: float, max_steps: Optional[int] = None) -> tuple[int, int]:
    """Positive ``(n1, n2)`` with ``|n1*t1 - n2*t2| < eps``, by pigeonhole over residues.

    Multiples of the longer period are reduced modulo the shorter one; residues are binned into
    ``ceil(t_short/eps) + 1`` cells and the first collision yields the pair.
    """
    if not (t1 > 0 and t2 > 0 and eps > 0):
        raise InvalidArgument("t1, t2 and eps must be positive")
    swapped = t1 > t2
    short, long_ = (t2, t1) if swapped else (t1, t2)
    fs, fl = Fraction(short), Fraction(long_)
    cells = math.ceil(short / eps) + 1
    width = fs / cells
    limit = cells + 1 if max_steps is None else max_steps
    bins: dict[int, tuple[int, int, Fraction]] = {}
    answer = None
    for n_long in range(1, limit + 1):
        total = n_long * fl
        n_short = int(total // fs)
        resid = total - n_short * fs
        if resid < eps and n_short > 0:
            answer = (n_short, n_long)
            break
        if fs - resid < eps:
            answer = (n_short + 1, n_long)
            break
        cell = int(resid // width)
        if cell in bins:
            ps, pl, _ = bins[cell]
            answer = (n_short - ps, n_long - pl)
            break
        bins[cell] = (n_short, n_long, resid)
    if answer is None:  # pragma: no cover - pigeonhole makes this unreachable
        raise RuntimeError("pigeonhole scan exhausted")
    n_short, n_long = answer
    return (n_long, n_short) if swapped else (n_short, n_long)
