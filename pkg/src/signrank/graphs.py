"""Graph and sign-pattern types, pedagogical generators, and edge-list / DOT I/O."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgument, ParseError


def _frozen_bool(a) -> np.ndarray:
    arr = np.array(a, dtype=bool, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph on nodes ``0..n-1`` stored as a boolean adjacency."""

    adj: np.ndarray

    def __post_init__(self):
        adj = _frozen_bool(self.adj)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1] or adj.shape[0] < 1:
            raise InvalidArgument(f"adjacency must be a non-empty square matrix, got shape {adj.shape}")
        if not np.array_equal(adj, adj.T):
            raise InvalidArgument("adjacency must be symmetric")
        if adj.diagonal().any():
            raise InvalidArgument("adjacency diagonal must be empty (no self-loops)")
        object.__setattr__(self, "adj", adj)

    @property
    def n(self) -> int:
        return self.adj.shape[0]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        if n < 1:
            raise InvalidArgument("node count must be positive")
        adj = np.zeros((n, n), dtype=bool)
        for u, v in edges:
            if u == v:
                raise InvalidArgument(f"self-loop at node {u}")
            adj[u, v] = adj[v, u] = True
        return cls(adj)

    def edges(self) -> list[tuple[int, int]]:
        """Unordered edges as ``(u, v)`` with ``u < v``, in row-major order."""
        iu, ju = np.nonzero(np.triu(self.adj, 1))
        return list(zip(iu.tolist(), ju.tolist()))

    @property
    def num_edges(self) -> int:
        return int(np.triu(self.adj, 1).sum())

    def degrees(self) -> np.ndarray:
        return self.adj.sum(axis=1)

    def to_float(self) -> np.ndarray:
        return self.adj.astype(float)

    def pattern(self) -> "SignPattern":
        return SignPattern(self.adj)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.adj.shape == other.adj.shape and bool(np.array_equal(self.adj, other.adj))

    def __hash__(self):
        return hash((self.n, self.adj.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.num_edges})"


@dataclass(frozen=True, eq=False)
class SignPattern:
    """Symmetric +/- pattern; ``plus[i, j]`` is True for ``+``.

    The diagonal is stored but never compared.
    """

    plus: np.ndarray

    def __post_init__(self):
        plus = _frozen_bool(self.plus)
        if plus.ndim != 2 or plus.shape[0] != plus.shape[1]:
            raise InvalidArgument(f"sign pattern must be square, got shape {plus.shape}")
        off = ~np.eye(plus.shape[0], dtype=bool)
        if not np.array_equal(plus[off], plus.T[off]):
            raise InvalidArgument("sign pattern must be symmetric")
        object.__setattr__(self, "plus", plus)

    @property
    def n(self) -> int:
        return self.plus.shape[0]

    def key(self) -> str:
        """Upper-triangle bits (row-major) as a ``0``/``1`` string."""
        iu = np.triu_indices(self.n, 1)
        return "".join("1" if b else "0" for b in self.plus[iu])

    def to_graph(self) -> Graph:
        adj = self.plus.copy()
        np.fill_diagonal(adj, False)
        return Graph(adj)

    def __eq__(self, other):
        if not isinstance(other, SignPattern):
            return NotImplemented
        if self.n != other.n:
            return False
        off = ~np.eye(self.n, dtype=bool)
        return bool(np.array_equal(self.plus[off], other.plus[off]))

    def __hash__(self):
        return hash((self.n, self.key()))


# -- generators --------------------------------------------------------------

def grid_graph(dims: Sequence[int]) -> Graph:
    """Cartesian grid; nodes are indexed row-major over ``dims``."""
    dims = [int(d) for d in dims]
    if not dims:
        raise InvalidArgument("dims must be non-empty")
    if any(d < 2 for d in dims):
        raise InvalidArgument(f"every grid dimension must be >= 2, got {dims}")
    n = int(np.prod(dims))
    adj = np.zeros((n, n), dtype=bool)
    for coord in product(*(range(d) for d in dims)):
        u = int(np.ravel_multi_index(coord, dims))
        for axis, d in enumerate(dims):
            if coord[axis] + 1 < d:
                nxt = list(coord)
                nxt[axis] += 1
                v = int(np.ravel_multi_index(nxt, dims))
                adj[u, v] = adj[v, u] = True
    return Graph(adj)


def chain_of_cycles(cycle_sizes: Sequence[int]) -> Graph:
    """Disjoint cycles joined in sequence by single bridge edges.

    Cycle ``i+1`` is attached through its node 0 to node ``size_i // 2`` of cycle ``i``.
    """
    sizes = [int(s) for s in cycle_sizes]
    if not sizes:
        raise InvalidArgument("cycle_sizes must be non-empty")
    if any(s < 3 for s in sizes):
        raise InvalidArgument(f"every cycle needs at least 3 nodes, got {sizes}")
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    edges = []
    for i, s in enumerate(sizes):
        base = int(offsets[i])
        edges.extend((base + k, base + (k + 1) % s) for k in range(s))
        if i + 1 < len(sizes):
            edges.append((base + s // 2, int(offsets[i + 1])))
    return Graph.from_edges(int(offsets[-1]), edges)


def star_graph(leaves: int) -> Graph:
    """Node 0 is the center; nodes ``1..leaves`` are leaves."""
    if leaves < 1:
        raise InvalidArgument("a star needs at least one leaf")
    return Graph.from_edges(leaves + 1, [(0, j) for j in range(1, leaves + 1)])


def cycle_graph(n: int) -> Graph:
    return chain_of_cycles([n])


def induced_subgraph(g: Graph, nodes: Sequence[int]) -> Graph:
    """Subgraph on ``nodes``; node ``k`` of the result is ``nodes[k]``."""
    idx = [int(v) for v in nodes]
    if not idx:
        raise InvalidArgument("node list must be non-empty")
    if len(set(idx)) != len(idx):
        raise InvalidArgument("duplicate node index")
    bad = [v for v in idx if not 0 <= v < g.n]
    if bad:
        raise InvalidArgument(f"node index out of range: {bad}")
    return Graph(g.adj[np.ix_(idx, idx)])


def is_connected(g: Graph) -> bool:
    seen = np.zeros(g.n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in np.flatnonzero(g.adj[u] & ~seen):
            seen[v] = True
            queue.append(int(v))
    return bool(seen.all())


# -- serialization -----------------------------------------------------------

def read_edge_list(text: str) -> Graph:
    """Parse ``N <n>`` followed by ``u v`` lines (0-based). Blank lines and ``#`` comments are skipped."""
    n = None
    edges = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "N":
                raise ParseError(f"expected header 'N <n>', got {raw!r}", lineno)
            try:
                n = int(parts[1])
            except ValueError:
                raise ParseError(f"bad node count {parts[1]!r}", lineno) from None
            if n < 1:
                raise ParseError("node count must be positive", lineno)
            continue
        if len(parts) != 2:
            raise ParseError(f"expected 'u v', got {raw!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer node index in {raw!r}", lineno) from None
        if u == v:
            raise ParseError(f"self-loop at node {u}", lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"node index out of range for N={n}: {raw!r}", lineno)
        edges.add((min(u, v), max(u, v)))
    if n is None:
        raise ParseError("missing 'N <n>' header", 1)
    return Graph.from_edges(n, sorted(edges))


def write_edge_list(g: Graph) -> str:
    lines = [f"N {g.n}"] + [f"{u} {v}" for u, v in g.edges()]
    return "\n".join(lines) + "\n"


def to_dot(g: Graph, name: str = "G") -> str:
    lines = [f"graph {name} {{"]
    lines += [f"  {i};" for i in range(g.n)]
    lines += [f"  {u} -- {v};" for u, v in g.edges()]
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_graph(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return read_edge_list(fh.read())


def save_graph(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(write_edge_list(g))
