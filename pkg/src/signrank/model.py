"""GCN encoders, cutoff decoders, loss, and their hand-written reverse-mode gradients.

Complex arrays carry gradients as ``dL/dRe + 1j * dL/dIm``. With that convention the
backward of ``Y = X @ W`` is ``X^H @ gY`` and ``gY @ W^H`` for real and complex alike.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidArgument
from .graphs import Graph
from .metrics import sigmoid

VARIANTS = ("GAE", "DGAE", "MGAE", "CGAE")


# "alternating" starts the diagonal at (+1, -1, +1, ...). With all-positive entries a
# diagonal cutoff is only a column rescaling of Z, so DGAE would share GAE's stationary points.
CUTOFF_INITS = ("ones", "alternating")


@dataclass(frozen=True)
class ArchitectureSpec:
    """Which encoder/decoder to build.

    For ``MGAE`` there are ``m`` encoders, each with ``h1 // m`` hidden and ``h2 // m`` latent
    units; ``active_mask[n]`` flags which of ``C_{4n} .. C_{4n+3}`` are learnable (the rest
    are identity). ``CGAE`` uses ``h1 / 2`` and ``h2 / 2`` complex units.
    """

    variant: str
    h1: int
    h2: int
    m: int = 1
    active_mask: Optional[tuple] = None
    normalize_adjacency: bool = False
    band: str = "diagonal"
    cutoff_init: str = "ones"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidArgument(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.h1 < 1 or self.h2 < 1:
            raise InvalidArgument("h1 and h2 must be positive")
        if self.cutoff_init not in CUTOFF_INITS:
            raise InvalidArgument(f"cutoff_init must be one of {CUTOFF_INITS}")
        if self.band != "diagonal":
            raise InvalidArgument(f"cutoff band structure {self.band!r} is not supported (diagonal only)")
        if self.variant == "CGAE" and (self.h1 % 2 or self.h2 % 2):
            raise InvalidArgument("CGAE needs even h1 and h2")
        if self.variant == "MGAE":
            if self.m < 1:
                raise InvalidArgument("MGAE needs m >= 1")
            if self.h1 % self.m or self.h2 % self.m:
                raise InvalidArgument(f"MGAE with m={self.m} needs h1 and h2 divisible by m")
            mask = self.active_mask
            if mask is None:
                mask = tuple((False, False, False, False) for _ in range(self.m))
            mask = tuple(tuple(bool(b) for b in row) for row in mask)
            if len(mask) != self.m or any(len(row) != 4 for row in mask):
                raise InvalidArgument("active_mask needs one 4-flag row per encoder")
            object.__setattr__(self, "active_mask", mask)
        elif self.m != 1 or self.active_mask is not None:
            raise InvalidArgument("m and active_mask only apply to MGAE")

    @property
    def is_complex(self) -> bool:
        return self.variant == "CGAE"

    @property
    def n_encoders(self) -> int:
        return self.m if self.variant == "MGAE" else 1

    def encoder_dims(self) -> tuple[int, int]:
        if self.variant == "CGAE":
            return self.h1 // 2, self.h2 // 2
        if self.variant == "MGAE":
            return self.h1 // self.m, self.h2 // self.m
        return self.h1, self.h2

    @property
    def name(self) -> str:
        if self.variant != "MGAE":
            return self.variant
        return f"{self.m}GAE"

    def to_json(self) -> dict:
        d = asdict(self)
        d["active_mask"] = [list(r) for r in self.active_mask] if self.active_mask else None
        return d

    @classmethod
    def from_json(cls, d: dict) -> "ArchitectureSpec":
        d = dict(d)
        if d.get("active_mask") is not None:
            d["active_mask"] = tuple(tuple(r) for r in d["active_mask"])
        return cls(**d)


def architecture(name: str, h1: int, h2: int, normalize_adjacency: bool = False) -> ArchitectureSpec:
    """Named presets: GAE, DGAE, CGAE, 2GAE (two plain terms) and 4GAE (``C_{4n+1}`` learnable)."""
    key = name.upper()
    if key in ("GAE", "CGAE"):
        return ArchitectureSpec(key, h1, h2, normalize_adjacency=normalize_adjacency)
    if key == "DGAE":
        return ArchitectureSpec(key, h1, h2, normalize_adjacency=normalize_adjacency,
                                cutoff_init="alternating")
    if key == "2GAE":
        return ArchitectureSpec("MGAE", h1, h2, m=2, normalize_adjacency=normalize_adjacency)
    if key == "4GAE":
        mask = tuple((False, True, False, False) for _ in range(4))
        return ArchitectureSpec("MGAE", h1, h2, m=4, active_mask=mask,
                                normalize_adjacency=normalize_adjacency)
    raise InvalidArgument(f"unknown architecture {name!r}")


@dataclass
class ModelParams:
    """Learnable arrays keyed by name: ``W0.n``/``W1.n`` per encoder, ``C0`` (DGAE) or ``C{i}`` (MGAE)."""

    spec: ArchitectureSpec
    arrays: dict = field(default_factory=dict)

    @property
    def W0(self):
        return self.arrays["W0.0"]

    @property
    def W1(self):
        return self.arrays["W1.0"]

    @property
    def cutoffs(self) -> dict:
        return {k: v for k, v in self.arrays.items() if k.startswith("C")}

    def copy(self) -> "ModelParams":
        return ModelParams(self.spec, {k: v.copy() for k, v in self.arrays.items()})


def glorot_uniform(rng, fan_in, fan_out, complex_=False):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    if not complex_:
        return rng.uniform(-limit, limit, size=(fan_in, fan_out))
    # split the variance between real and imaginary parts
    re = rng.uniform(-limit, limit, size=(fan_in, fan_out))
    im = rng.uniform(-limit, limit, size=(fan_in, fan_out))
    return (re + 1j * im) / np.sqrt(2.0)


def init_params(spec: ArchitectureSpec, n: int, d: int, seed: int) -> ModelParams:
    """Glorot-uniform weights; cutoffs start at 1 or, for ``cutoff_init="alternating"``, at +-1."""
    rng = np.random.default_rng(seed)
    h1, h2 = spec.encoder_dims()
    arrays = {}
    for e in range(spec.n_encoders):
        arrays[f"W0.{e}"] = glorot_uniform(rng, d, h1, spec.is_complex)
        arrays[f"W1.{e}"] = glorot_uniform(rng, h1, h2, spec.is_complex)
    if spec.variant == "DGAE":
        arrays["C0"] = np.ones(h2)
        if spec.cutoff_init == "alternating":
            arrays["C0"][1::2] = -1.0
    elif spec.variant == "MGAE":
        for e, row in enumerate(spec.active_mask):
            for q, active in enumerate(row):
                if active:
                    arrays[f"C{4 * e + q}"] = np.ones(n if q in (0, 3) else h2)
    return ModelParams(spec, arrays)


def propagation_matrix(A, normalize: bool) -> np.ndarray:
    """Message-passing matrix: raw ``A`` or ``D^{-1/2} A D^{-1/2}``."""
    A = A.to_float() if isinstance(A, Graph) else np.asarray(A, dtype=float)
    if not normalize:
        return A
    deg = A.sum(axis=1)
    inv = np.zeros_like(deg)
    inv[deg > 0] = deg[deg > 0] ** -0.5
    return inv[:, None] * A * inv[None, :]


# -- kernels -----------------------------------------------------------------

def relu(x):
    """Real ReLU, or ReLU applied separately to real and imaginary parts."""
    if np.iscomplexobj(x):
        return np.maximum(x.real, 0.0) + 1j * np.maximum(x.imag, 0.0)
    return np.maximum(x, 0.0)


def relu_backward(g, x):
    if np.iscomplexobj(x):
        return g.real * (x.real > 0) + 1j * (g.imag * (x.imag > 0))
    return g * (x > 0)


def gcn_encode(A, X, W0, W1, normalize_adjacency: bool = False):
    """``Z = A relu(A X W0) W1`` (with ``A`` optionally symmetrically normalized)."""
    P = propagation_matrix(A, normalize_adjacency)
    X = np.asarray(X)
    if P.shape[0] != X.shape[0] or X.shape[1] != W0.shape[0] or W0.shape[1] != W1.shape[0]:
        raise InvalidArgument(
            f"shape mismatch: A {P.shape}, X {X.shape}, W0 {np.shape(W0)}, W1 {np.shape(W1)}"
        )
    return P @ relu(P @ X @ W0) @ W1


def decode_inner(Z) -> np.ndarray:
    """``Re(Z Z^T)`` (plain transpose)."""
    Z = np.asarray(Z)
    return np.real(Z @ Z.T)


def decode_scalar_cutoff(Z, c: float) -> np.ndarray:
    return decode_inner(Z) - c


def decode_diag(Z1, C1, Z2, C2) -> np.ndarray:
    """``Z1 diag(C1) Z1^T - Z2 diag(C2) Z2^T``."""
    Z1, Z2 = np.asarray(Z1), np.asarray(Z2)
    C1, C2 = np.asarray(C1), np.asarray(C2)
    if Z1.shape[1] != C1.shape[0] or Z2.shape[1] != C2.shape[0] or Z1.shape[0] != Z2.shape[0]:
        raise InvalidArgument("decode_diag shape mismatch")
    return np.real((Z1 * C1) @ Z1.T) - np.real((Z2 * C2) @ Z2.T)


def _diag_of(C, size, what):
    if C is None:
        return None
    C = np.asarray(C)
    if C.ndim == 2:
        if C.shape != (size, size):
            raise InvalidArgument(f"{what}: expected {size}x{size}, got {C.shape}")
        if np.any(C - np.diag(np.diag(C))):
            raise InvalidArgument(f"{what}: only diagonal cutoffs are supported")
        C = np.diag(C)
    if C.shape != (size,):
        raise InvalidArgument(f"{what}: expected length {size}, got shape {C.shape}")
    return C


def decode_m(Zs: Sequence, Cs: Sequence, mask=None) -> np.ndarray:
    """``sum_n (-1)^n C_{4n} Z_n C_{4n+1} C_{4n+2} Z_n^T C_{4n+3}`` for diagonal ``C``.

    ``Cs[n]`` is a 4-sequence (entries may be vectors, diagonal matrices, or None for
    identity). Where ``mask[n][q]`` is False the matching ``C`` is taken as identity.
    """
    if len(Cs) != len(Zs):
        raise InvalidArgument("need one group of four cutoffs per latent block")
    N = np.asarray(Zs[0]).shape[0]
    S = np.zeros((N, N))
    for n, (Z, group) in enumerate(zip(Zs, Cs)):
        Z = np.asarray(Z)
        if Z.shape[0] != N:
            raise InvalidArgument("latent blocks must share the node count")
        if len(group) != 4:
            raise InvalidArgument("each cutoff group has four entries")
        f = Z.shape[1]
        sizes = (N, f, f, N)
        c = []
        for q in range(4):
            on = True if mask is None else bool(mask[n][q])
            c.append(_diag_of(group[q], sizes[q], f"C{4 * n + q}") if on else None)
        mid = np.ones(f)
        for v in (c[1], c[2]):
            if v is not None:
                mid = mid * v
        P = np.real((Z * mid) @ Z.T)
        if c[0] is not None:
            P = c[0][:, None] * P
        if c[3] is not None:
            P = P * c[3][None, :]
        S += (-1) ** n * P
    return S


def sign_decode(S) -> Graph:
    """Edge iff ``S_ij > 0`` (zero-snapped), read from the upper triangle."""
    from .rank import ZERO_SNAP

    S = np.asarray(S)
    up = np.triu(S > ZERO_SNAP, 1)
    return Graph(up | up.T)


def prob_decode(S, rng, symmetrize: bool = True) -> Graph:
    """Sample edges from ``Bernoulli(sigmoid(S))``.

    With ``symmetrize`` every ordered pair is sampled and an edge is kept if either direction
    fired. Without it one draw per unordered pair (upper triangle) is mirrored.
    """
    S = np.asarray(S, dtype=float)
    n = S.shape[0]
    draws = rng.random((n, n)) < sigmoid(S)
    if symmetrize:
        adj = draws | draws.T
    else:
        up = np.triu(draws, 1)
        adj = up | up.T
    np.fill_diagonal(adj, False)
    return Graph(adj)


# -- loss --------------------------------------------------------------------

def loss(A, S, lam: float, offdiag: bool = False) -> float:
    """Summed BCE of ``A`` against ``sigmoid(S)`` plus ``lam * ||A - S||_F`` (not squared)."""
    return loss_and_grad(A, S, lam, offdiag)[0]


def loss_and_grad(A, S, lam: float, offdiag: bool = False):
    """Loss value and ``dL/dS``.

    BCE is evaluated as ``softplus(S) - A*S``, which equals the clamped-log form wherever
    ``sigmoid(S)`` lies inside ``[1e-12, 1 - 1e-12]`` and never takes ``log(0)`` outside it.
    """
    A = A.to_float() if isinstance(A, Graph) else np.asarray(A, dtype=float)
    S = np.asarray(S, dtype=float)
    bce = np.logaddexp(0.0, S) - A * S
    R = S - A
    g = sigmoid(S) - A
    if offdiag:
        keep = ~np.eye(A.shape[0], dtype=bool)
        bce = bce * keep
        R = R * keep
        g = g * keep
    fro = float(np.sqrt(np.sum(R * R)))
    value = float(np.sum(bce)) + lam * fro
    if lam and fro > 0:
        g = g + lam * R / fro
    return value, g


# -- full model --------------------------------------------------------------

class Model:
    """Forward/backward through encode -> decode -> loss for one graph and feature matrix."""

    def __init__(self, spec: ArchitectureSpec, A, X=None):
        self.spec = spec
        self.A = A.to_float() if isinstance(A, Graph) else np.asarray(A, dtype=float)
        n = self.A.shape[0]
        self.X = np.eye(n) if X is None else np.asarray(X, dtype=float)
        if self.X.shape[0] != n:
            raise InvalidArgument("feature matrix needs one row per node")
        self.P = propagation_matrix(self.A, spec.normalize_adjacency)
        self.PX = self.P @ self.X

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def init(self, seed: int) -> ModelParams:
        return init_params(self.spec, self.n, self.X.shape[1], seed)

    def _cutoff_groups(self, params: ModelParams):
        groups = []
        for e in range(self.spec.n_encoders):
            groups.append([params.arrays.get(f"C{4 * e + q}") for q in range(4)])
        return groups

    def encode(self, params: ModelParams):
        Zs, caches = [], []
        for e in range(self.spec.n_encoders):
            W0, W1 = params.arrays[f"W0.{e}"], params.arrays[f"W1.{e}"]
            pre = self.PX @ W0
            Q = self.P @ relu(pre)
            Zs.append(Q @ W1)
            caches.append((pre, Q))
        return Zs, caches

    def decode(self, params: ModelParams, Zs) -> np.ndarray:
        v = self.spec.variant
        if v in ("GAE", "CGAE"):
            return decode_inner(Zs[0])
        if v == "DGAE":
            return np.real((Zs[0] * params.arrays["C0"]) @ Zs[0].T)
        return decode_m(Zs, self._cutoff_groups(params))

    def scores(self, params: ModelParams) -> np.ndarray:
        Zs, _ = self.encode(params)
        return self.decode(params, Zs)

    def loss(self, params: ModelParams, lam: float, offdiag: bool = False) -> float:
        return loss_and_grad(self.A, self.scores(params), lam, offdiag)[0]

    def loss_and_grad(self, params: ModelParams, lam: float, offdiag: bool = False):
        """Returns ``(loss, grads, S)`` with ``grads`` keyed like ``params.arrays``."""
        Zs, caches = self.encode(params)
        S = self.decode(params, Zs)
        value, gS = loss_and_grad(self.A, S, lam, offdiag)
        grads = {}
        gZs = self._decode_backward(params, Zs, gS, grads)
        for e, (gZ, (pre, Q)) in enumerate(zip(gZs, caches)):
            W1 = params.arrays[f"W1.{e}"]
            grads[f"W1.{e}"] = Q.conj().T @ gZ
            gQ = gZ @ W1.conj().T
            gpre = relu_backward(self.P.T @ gQ, pre)
            grads[f"W0.{e}"] = self.PX.T @ gpre
        return value, grads, S

    def _decode_backward(self, params, Zs, gS, grads):
        v = self.spec.variant
        gsym = gS + gS.T
        if v in ("GAE", "CGAE"):
            return [np.conj(gsym @ Zs[0])]
        if v == "DGAE":
            Z, c = Zs[0], params.arrays["C0"]
            grads["C0"] = np.real(np.einsum("ik,ij,jk->k", Z, gS, Z))
            return [np.conj(gsym @ (Z * c))]
        out = []
        for e, (Z, group) in enumerate(zip(Zs, self._cutoff_groups(params))):
            sgn = (-1) ** e
            c0, c1, c2, c3 = group
            f = Z.shape[1]
            mid = np.ones(f)
            for vec in (c1, c2):
                if vec is not None:
                    mid = mid * vec
            P = np.real((Z * mid) @ Z.T)
            gP = sgn * gS
            if c0 is not None:
                right = P if c3 is None else P * c3[None, :]
                grads[f"C{4 * e}"] = np.sum(gP * right, axis=1)
                gP = c0[:, None] * gP
            if c3 is not None:
                left = P if c0 is None else c0[:, None] * P
                grads[f"C{4 * e + 3}"] = np.sum(sgn * gS * left, axis=0)
                gP = gP * c3[None, :]
            gmid = np.real(np.einsum("ik,ij,jk->k", Z, gP, Z))
            if c1 is not None:
                grads[f"C{4 * e + 1}"] = gmid * (c2 if c2 is not None else 1.0)
            if c2 is not None:
                grads[f"C{4 * e + 2}"] = gmid * (c1 if c1 is not None else 1.0)
            out.append(np.conj((gP + gP.T) @ (Z * mid)))
        return out
