import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from signrank.errors import InvalidArgument
from signrank.graphs import Graph, star_graph
from signrank.metrics import PROB_CLAMP
from signrank.model import (
    ArchitectureSpec, Model, architecture, decode_diag, decode_inner, decode_m,
    decode_scalar_cutoff, gcn_encode, loss, prob_decode, relu, sign_decode,
)
from signrank.rank import matrix_rank
from signrank.train import model_grad_check

from conftest import ARCHITECTURES, elementwise_gram, gradient_instances, identity_instance


class TestEncoder:
    def test_zero_weights(self, rng):
        A = star_graph(3).to_float()
        Z = gcn_encode(A, np.eye(4), np.zeros((4, 5)), rng.normal(size=(5, 2)))
        assert np.array_equal(Z, np.zeros((4, 2)))

    def test_identity_everything(self):
        I = np.eye(3)
        assert np.array_equal(gcn_encode(I, I, I, I), I)

    def test_matches_two_step_oracle(self, rng):
        A = rng.integers(0, 2, size=(5, 5)).astype(float)
        X, W0, W1 = rng.normal(size=(5, 3)), rng.normal(size=(3, 6)), rng.normal(size=(6, 2))
        hidden = np.zeros((5, 6))
        for i in range(5):
            for h in range(6):
                hidden[i, h] = max(0.0, sum(A[i, j] * X[j, d] * W0[d, h]
                                            for j in range(5) for d in range(3)))
        expect = A @ (hidden @ W1)
        assert np.allclose(gcn_encode(A, X, W0, W1), expect, atol=1e-10)

    def test_shape_mismatch(self):
        with pytest.raises(InvalidArgument):
            gcn_encode(np.eye(3), np.eye(3), np.eye(4), np.eye(4))

    def test_split_relu(self):
        z = np.array([1 - 2j, -1 + 3j])
        assert np.array_equal(relu(z), np.array([1 + 0j, 3j]))


class TestDecoders:
    def test_inner_complex_is_difference_of_grams(self, rng):
        a, b, *_ = identity_instance(rng)
        assert np.allclose(decode_inner(a + 1j * b), a @ a.T - b @ b.T, atol=1e-12)

    def test_inner_orthonormal(self):
        assert np.allclose(decode_inner(np.eye(3)), np.eye(3))

    def test_inner_elementwise(self, rng):
        Z = rng.normal(size=(5, 3))
        f = Z.shape[1]
        assert np.allclose(decode_inner(Z), elementwise_gram(Z, np.ones(f), Z, np.zeros(f)))

    def test_scalar_cutoff(self):
        Z = np.array([[1.0, 0.0], [math.cos(math.pi / 3), math.sin(math.pi / 3)]])
        assert np.array_equal(decode_scalar_cutoff(Z, 0.0), decode_inner(Z))
        S = decode_scalar_cutoff(Z, 0.6)
        assert S[0, 1] == pytest.approx(-0.1)
        assert sign_decode(S).num_edges == 0
        assert sign_decode(decode_scalar_cutoff(Z, 10.0)).num_edges == 0

    def test_diag_reduces_to_inner(self, rng):
        Z1, Z2 = rng.normal(size=(4, 3)), rng.normal(size=(4, 2))
        assert np.allclose(decode_diag(Z1, np.ones(3), Z2, np.zeros(2)), decode_inner(Z1))

    def test_diag_elementwise(self, rng):
        _, _, Z1, C1, Z2, C2 = identity_instance(rng)
        assert np.allclose(decode_diag(Z1, C1, Z2, C2), elementwise_gram(Z1, C1, Z2, C2),
                           atol=1e-10)

    def test_diag_shape_mismatch(self):
        with pytest.raises(InvalidArgument):
            decode_diag(np.ones((3, 2)), np.ones(3), np.ones((3, 2)), np.ones(2))

    def test_m_single_identity_term(self, rng):
        Z = rng.normal(size=(4, 3))
        assert np.allclose(decode_m([Z], [[None] * 4]), decode_inner(Z))

    def test_m_unit_cutoffs_equal_two_term(self, rng):
        Zs = [rng.normal(size=(5, 2)) for _ in range(4)]
        mask = [(False, True, False, False)] * 4
        ones = [[None, np.ones(2), None, None] for _ in range(4)]
        plain = decode_m(Zs, [[None] * 4 for _ in range(4)])
        assert np.allclose(decode_m(Zs, ones, mask), plain)

    def test_m_two_terms_brute_force(self, rng):
        n = 4
        Zs = [rng.normal(size=(n, 3)) for _ in range(2)]
        Cs = [[rng.normal(size=n), rng.normal(size=3), rng.normal(size=3), rng.normal(size=n)]
              for _ in range(2)]
        expect = np.zeros((n, n))
        for t, (Z, (c0, c1, c2, c3)) in enumerate(zip(Zs, Cs)):
            for i in range(n):
                for j in range(n):
                    expect[i, j] += (-1) ** t * c0[i] * c3[j] * sum(
                        Z[i, k] * c1[k] * c2[k] * Z[j, k] for k in range(3))
        assert np.allclose(decode_m(Zs, Cs), expect, atol=1e-10)

    def test_m_accepts_diagonal_matrices(self, rng):
        Z = rng.normal(size=(3, 2))
        c = rng.normal(size=2)
        assert np.allclose(decode_m([Z], [[None, np.diag(c), None, None]]),
                           decode_m([Z], [[None, c, None, None]]))

    def test_m_rejects_banded(self, rng):
        Z = rng.normal(size=(3, 2))
        band = np.array([[1.0, 0.5], [0.0, 1.0]])
        with pytest.raises(InvalidArgument):
            decode_m([Z], [[None, band, None, None]])

    @given(st.integers(0, 2 ** 16))
    def test_ensemble_equals_stacked_diagonal(self, seed):
        _, _, Z1, C1, Z2, C2 = identity_instance(np.random.default_rng(seed))
        stacked = np.hstack([Z1, Z2])
        S = decode_diag(Z1, C1, Z2, C2)
        assert np.allclose(S, (stacked * np.concatenate([C1, -C2])) @ stacked.T, atol=1e-12)
        assert matrix_rank(S) <= Z1.shape[1] + Z2.shape[1]


class TestSignAndProbDecode:
    def test_zero_is_empty(self):
        assert sign_decode(np.zeros((3, 3))).num_edges == 0

    def test_saturated_prob_equals_sign(self, rng):
        B = rng.choice([-1.0, 1.0], size=(6, 6))
        S = 1e3 * np.triu(B, 1) + 1e3 * np.triu(B, 1).T
        want = sign_decode(S)
        for sym in (True, False):
            assert all(prob_decode(S, rng, sym) == want for _ in range(200))

    def test_fair_coin_upper_triangle(self):
        rng = np.random.default_rng(42)
        S = np.zeros((3, 3))
        counts = np.zeros((3, 3))
        for _ in range(100_000):
            counts += prob_decode(S, rng, symmetrize=False).adj
        freq = counts / 100_000
        for i, j in [(0, 1), (0, 2), (1, 2)]:
            assert abs(freq[i, j] - 0.5) < 0.01

    def test_symmetrized_is_or_of_directions(self):
        rng = np.random.default_rng(42)
        counts = sum(prob_decode(np.zeros((3, 3)), rng).adj.astype(int) for _ in range(20_000))
        assert abs(counts[0, 1] / 20_000 - 0.75) < 0.015

    def test_deterministic_for_seed(self, rng):
        S = rng.normal(size=(5, 5))
        S = S + S.T
        a = prob_decode(S, np.random.default_rng(3))
        assert a == prob_decode(S, np.random.default_rng(3))


def loop_loss(A, S, lam):
    """Clamped-log BCE summed over every entry, plus lam * unsquared Frobenius residual."""
    n = len(A)
    total, sq = 0.0, 0.0
    for i in range(n):
        for j in range(n):
            p = 1.0 / (1.0 + math.exp(-S[i][j]))
            p = min(max(p, PROB_CLAMP), 1 - PROB_CLAMP)
            total -= A[i][j] * math.log(p) + (1 - A[i][j]) * math.log(1 - p)
            sq += (A[i][j] - S[i][j]) ** 2
    return total + lam * math.sqrt(sq)


class TestLoss:
    def test_zero_scores(self):
        A = np.zeros((4, 4))
        assert loss(A, np.zeros((4, 4)), 0.0) == pytest.approx(16 * math.log(2))
        assert loss(A, np.zeros((4, 4)), 5.0) == pytest.approx(16 * math.log(2))

    def test_saturated_limit(self):
        A = star_graph(3).to_float()
        S = np.where(A > 0, 60.0, -60.0)
        assert loss(A, S, 0.0) < 1e-20

    def test_matches_loop_oracle(self, rng):
        A = star_graph(3).to_float()
        S = rng.normal(scale=3, size=(4, 4))
        assert loss(A, S, 0.37) == pytest.approx(loop_loss(A, S, 0.37), abs=1e-10)

    def test_stays_finite_when_saturated(self):
        A = np.eye(2)
        assert math.isfinite(loss(A, np.array([[-1e5, 0], [0, 1e5]]), 1e-7))


class TestArchitecture:
    def test_presets(self):
        assert architecture("4GAE", 120, 8).encoder_dims() == (30, 2)
        assert architecture("2GAE", 120, 8).encoder_dims() == (60, 4)
        assert architecture("CGAE", 120, 8).encoder_dims() == (60, 4)
        assert architecture("dgae", 120, 8).cutoff_init == "alternating"

    @pytest.mark.parametrize("kw", [
        dict(variant="XGAE", h1=4, h2=2), dict(variant="GAE", h1=0, h2=2),
        dict(variant="CGAE", h1=4, h2=3), dict(variant="MGAE", h1=6, h2=4, m=4),
        dict(variant="GAE", h1=4, h2=2, band="tridiagonal"),
        dict(variant="GAE", h1=4, h2=2, m=2),
        dict(variant="DGAE", h1=4, h2=2, cutoff_init="random"),
    ])
    def test_invalid_specs(self, kw):
        with pytest.raises(InvalidArgument):
            ArchitectureSpec(**kw)

    def test_unknown_name(self):
        with pytest.raises(InvalidArgument):
            architecture("8GAE", 8, 8)

    def test_json_round_trip(self):
        spec = architecture("4GAE", 16, 8, normalize_adjacency=True)
        assert ArchitectureSpec.from_json(spec.to_json()) == spec

    def test_dgae_initial_cutoffs(self):
        m = Model(architecture("DGAE", 8, 4), star_graph(3))
        assert m.init(0).arrays["C0"].tolist() == [1.0, -1.0, 1.0, -1.0]
        plain = Model(ArchitectureSpec("DGAE", 8, 4), star_graph(3))
        assert plain.init(0).arrays["C0"].tolist() == [1.0] * 4

    def test_complex_weights(self):
        p = Model(architecture("CGAE", 8, 4), star_graph(3)).init(0)
        assert np.iscomplexobj(p.arrays["W0.0"]) and p.arrays["W0.0"].shape == (4, 4)

    @pytest.mark.parametrize("name", ARCHITECTURES)
    def test_rank_bounded_by_latent_width(self, name):
        g = Graph(np.ones((10, 10), bool) ^ np.eye(10, dtype=bool))
        m = Model(architecture(name, 16, 4), g)
        assert matrix_rank(m.scores(m.init(1))) <= 4


class TestGradients:
    def test_gae_six_nodes(self):
        g = Graph.from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)])
        m = Model(architecture("GAE", 12, 4), g)
        assert model_grad_check(m, m.init(0), lam=0.1) < 1e-4

    def test_dgae_cutoffs_on_star(self):
        m = Model(architecture("DGAE", 12, 4), star_graph(3))
        p = m.init(2)
        p.arrays["C0"] = np.array([0.7, -1.2, 1.4, -0.6])
        assert model_grad_check(m, p, lam=0.1) < 1e-4

    @pytest.mark.parametrize("name", ARCHITECTURES)
    def test_random_instances(self, name):
        worst = max(model_grad_check(m, p, lam=0.1) for m, p in gradient_instances(name, 5, 11))
        assert worst < 1e-4

    def test_every_cutoff_slot(self, rng):
        spec = ArchitectureSpec("MGAE", 8, 4, m=2,
                                active_mask=((True, True, True, True), (True, False, True, True)))
        m = Model(spec, star_graph(4))
        p = m.init(3)
        for k in p.arrays:
            if k.startswith("C"):
                p.arrays[k] = rng.normal(size=p.arrays[k].shape)
        assert model_grad_check(m, p, lam=0.3) < 1e-4

    def test_normalized_adjacency(self):
        m = Model(architecture("CGAE", 8, 4, normalize_adjacency=True), star_graph(4))
        assert model_grad_check(m, m.init(5), lam=0.2) < 1e-4
