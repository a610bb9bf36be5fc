"""Sign patterns of Gram matrices, sign-rank lower bounds and realizability checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import InvalidArgument, SizeLimitError
from .graphs import Graph, SignPattern

# Gram entries in (-ZERO_SNAP, ZERO_SNAP] count as zero, and zero maps to Minus.
ZERO_SNAP = 1e-12

WITNESS = "Witness"
BOUND_ONLY = "BoundOnly"
NOT_FOUND = "NotFoundAtResolution"


@dataclass
class RankCertificate:
    kind: str
    witness: Optional[np.ndarray] = None
    bound: Optional[Fraction] = None
    resolution: Optional[int] = None
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.bound is not None:
            out["bound"] = str(self.bound)
        if self.resolution is not None:
            out["resolution"] = self.resolution
        if self.witness is not None:
            w = np.asarray(self.witness)
            if np.iscomplexobj(w):
                out["witness"] = {"real": w.real.tolist(), "imag": w.imag.tolist()}
            else:
                out["witness"] = w.tolist()
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def sign_of(M) -> SignPattern:
    """Plus where ``M_ij > ZERO_SNAP``, Minus otherwise (so zero is Minus)."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidArgument(f"sign_of needs a square matrix, got shape {M.shape}")
    if np.iscomplexobj(M):
        raise InvalidArgument("sign_of needs a real matrix; take the real part first")
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    if np.max(np.abs(M - M.T), initial=0.0) > 1e-9 * scale:
        raise InvalidArgument("sign_of needs a symmetric matrix")
    plus = M > ZERO_SNAP
    upper = np.triu(plus, 1)
    plus = upper | upper.T | np.diag(np.diag(plus))
    return SignPattern(plus)


def gram_real(Z) -> np.ndarray:
    """``Re(Z Z^T)`` with a plain (not conjugate) transpose."""
    Z = np.asarray(Z)
    if Z.ndim == 1:
        Z = Z[:, None]
    return np.real(Z @ Z.T)


def verify_embedding(g: Graph, Z) -> bool:
    """True iff the off-diagonal sign pattern of ``Re(Z Z^T)`` is exactly ``g``."""
    Z = np.asarray(Z)
    if Z.ndim == 1:
        Z = Z[:, None]
    if Z.shape[0] != g.n:
        raise InvalidArgument(f"embedding has {Z.shape[0]} rows, graph has {g.n} nodes")
    return sign_of(gram_real(Z)) == g.pattern()


def matrix_rank(M, tol: float = 1e-8) -> int:
    """Number of singular values above ``tol * sigma_max``."""
    M = np.asarray(M)
    if tol <= 0:
        raise InvalidArgument("tol must be positive")
    if not np.all(np.isfinite(M)):
        raise InvalidArgument("matrix has non-finite entries")
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


# -- star bounds -------------------------------------------------------------

def star_rank_lower_bound(total_nodes: int) -> Fraction:
    """Real sign-rank lower bound ``(N+1)/2`` for the star on ``N`` nodes."""
    if total_nodes < 2:
        raise InvalidArgument("a star has at least 2 nodes")
    return Fraction(total_nodes + 1, 2)


def star_bound_notes(total_nodes: int) -> list[str]:
    notes = []
    if total_nodes == 2:
        notes.append("single edge: the star bound is not tight here, the true sign rank is 1")
    notes.append(
        "stated bound (N+1)/2; the non-representability argument rules out dimension (N+1)/2 itself"
    )
    return notes


def _max_independent_set(adj: np.ndarray) -> list[int]:
    """Exact maximum independent set; among maximum sets, the lexicographically smallest."""
    k = adj.shape[0]
    if k == 0:
        return []
    nbr = [0] * k
    for i in range(k):
        for j in np.flatnonzero(adj[i]):
            nbr[i] |= 1 << int(j)
    best: list[int] = []

    def popcount(x):
        return bin(x).count("1")

    def search(cand: int, chosen: list[int]):
        nonlocal best
        if cand == 0:
            if len(chosen) > len(best):
                best = list(chosen)
            return
        if len(chosen) + popcount(cand) <= len(best):
            return
        v = (cand & -cand).bit_length() - 1
        chosen.append(v)
        search(cand & ~(1 << v) & ~nbr[v], chosen)
        chosen.pop()
        search(cand & ~(1 << v), chosen)

    search((1 << k) - 1, [])
    return best


def _greedy_independent_set(adj: np.ndarray) -> list[int]:
    remaining = set(range(adj.shape[0]))
    chosen = []
    while remaining:
        v = min(remaining, key=lambda u: (int(adj[u, list(remaining)].sum()), u))
        chosen.append(v)
        remaining -= {v} | set(np.flatnonzero(adj[v]).tolist())
    return sorted(chosen)


def largest_induced_star(g: Graph, cap: int = 64, heuristic: bool = False) -> tuple[int, list[int]]:
    """Center and leaves of a largest induced star.

    Leaves are a maximum independent set inside the center's neighborhood. Ties go to the
    lowest center, then the lexicographically smallest leaf set.
    """
    if g.n > cap and not heuristic:
        raise SizeLimitError(
            f"exact induced-star search is capped at {cap} nodes (graph has {g.n}); "
            "use the heuristic flag for a greedy lower estimate"
        )
    pick = _greedy_independent_set if heuristic else _max_independent_set
    best_center, best_leaves = 0, []
    for c in range(g.n):
        nb = np.flatnonzero(g.adj[c])
        if len(nb) <= len(best_leaves):
            continue
        local = pick(g.adj[np.ix_(nb, nb)])
        leaves = sorted(int(nb[i]) for i in local)
        if len(leaves) > len(best_leaves):
            best_center, best_leaves = c, leaves
    return best_center, best_leaves


def dimension_lower_bound(g: Graph, cap: int = 64, heuristic: bool = False) -> int:
    """``ceil((N_H + 1) / 2)`` where ``N_H`` is the node count of the largest induced star."""
    _, leaves = largest_induced_star(g, cap=cap, heuristic=heuristic)
    n_h = len(leaves) + 1
    return math.ceil(Fraction(n_h + 1, 2))


# -- complex star ------------------------------------------------------------

def complex_star_embedding(leaves: int) -> np.ndarray:
    """Rank-1 complex embedding of the star with ``leaves`` leaves (center first).

    Center sits at angle -pi/4, leaf ``j`` at ``pi/4 + j*(pi/4)/(leaves+1)``. Center-leaf
    angle sums fall in (0, pi/4) and leaf-leaf sums in (pi/2, pi).
    """
    if leaves < 1:
        raise InvalidArgument("a star needs at least one leaf")
    j = np.arange(1, leaves + 1)
    theta = np.concatenate([[-np.pi / 4], np.pi / 4 + j * (np.pi / 4) / (leaves + 1)])
    return np.exp(1j * theta)


# -- rank-2 oracle -----------------------------------------------------------

def rank2_realizability_oracle(g: Graph, resolution: int = 32, cap: int = 7) -> RankCertificate:
    """Search unit-circle angles on a ``resolution``-point grid for a rank-2 witness.

    Node 0 is pinned at angle 0. A witness found here is exact; a miss only means no witness
    exists on this grid. Angle tuples are explored in lexicographic order, so the returned
    witness is the smallest one.
    """
    if resolution < 8:
        raise InvalidArgument("resolution must be >= 8")
    if g.n > cap:
        raise SizeLimitError(f"rank-2 oracle is capped at {cap} nodes (graph has {g.n})")
    steps = np.arange(resolution)
    angles = 2 * np.pi * steps / resolution
    # cos of the grid angle difference, evaluated the same way the witness check will see it
    unit = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    pos = (unit @ unit[0]) > ZERO_SNAP
    adj = g.adj
    n = g.n
    assign = [0] * n

    def allowed(k):
        ok = np.ones(resolution, dtype=bool)
        for j in range(k):
            ok &= pos[(steps - assign[j]) % resolution] == adj[k, j]
        return np.flatnonzero(ok)

    def search(k):
        if k == n:
            Z = unit[assign]
            return Z if verify_embedding(g, Z) else None
        for t in allowed(k):
            assign[k] = int(t)
            found = search(k + 1)
            if found is not None:
                return found
        return None

    witness = search(1)
    if witness is None:
        return RankCertificate(kind=NOT_FOUND, resolution=resolution)
    return RankCertificate(kind=WITNESS, witness=witness, resolution=resolution)
