import json

import numpy as np
import pytest

from signrank.errors import InvalidArgument, TrainingDiverged
from signrank.graphs import cycle_graph, star_graph
from signrank.model import Model, architecture, sign_decode
from signrank.train import (
    Adam, PlainGD, TrainConfig, grad_check, load_checkpoint, save_checkpoint, train,
)


def small(**kw):
    base = dict(epochs=50, lr=1e-2, log_every=10, seed=3)
    base.update(kw)
    return TrainConfig(**base)


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(lr=0), dict(lam=-1), dict(epochs=-1),
                                    dict(optimizer="sgd"), dict(log_every=0)])
    def test_invalid(self, kw):
        with pytest.raises(InvalidArgument):
            TrainConfig(**kw)

    def test_defaults(self):
        cfg = TrainConfig()
        assert (cfg.lr, cfg.lam, cfg.epochs) == (1e-4, 1e-7, 30000)


class TestOptimizers:
    def test_adam_first_step_is_lr_times_sign(self):
        p = {"w": np.array([1.0, -2.0, 3.0])}
        Adam(0.1).step(p, {"w": np.array([5.0, -0.01, 0.0])})
        assert np.allclose(p["w"], [0.9, -1.9, 3.0], atol=1e-6)

    def test_adam_complex_view(self):
        p = {"w": np.array([1 + 1j])}
        Adam(0.1).step(p, {"w": np.array([2 - 3j])})
        assert np.allclose(p["w"], [0.9 + 1.1j], atol=1e-6)

    def test_adam_minimises_quadratic(self):
        p = {"w": np.array([4.0, -3.0])}
        opt = Adam(0.05)
        for _ in range(2000):
            opt.step(p, {"w": 2 * p["w"]})
        assert np.allclose(p["w"], 0, atol=1e-3)

    def test_plain_gd(self):
        p = {"w": np.array([1.0])}
        PlainGD(0.5).step(p, {"w": np.array([1.0])})
        assert p["w"][0] == 0.5


class TestGradCheck:
    def test_quadratic(self):
        point = {"x": np.array([1.0, 2.0])}
        f = lambda a: float(np.sum(a["x"] ** 3))
        assert grad_check(f, point, {"x": 3 * point["x"] ** 2}) < 1e-8

    def test_detects_wrong_gradient(self):
        point = {"x": np.array([1.0, 2.0])}
        f = lambda a: float(np.sum(a["x"] ** 2))
        assert grad_check(f, point, {"x": point["x"]}) > 0.3


class TestTrain:
    def test_zero_epochs_is_initialisation(self):
        g = star_graph(3)
        spec = architecture("DGAE", 8, 2)
        params, record = train(g, spec, small(epochs=0))
        init = Model(spec, g).init(3)
        for k in init.arrays:
            assert np.array_equal(params.arrays[k], init.arrays[k])
        assert [row[0] for row in record.series] == [0]

    def test_bit_identical_reruns(self):
        g = cycle_graph(5)
        spec = architecture("CGAE", 8, 4)
        a = train(g, spec, small())
        b = train(g, spec, small())
        assert a[1].to_json() == b[1].to_json()
        for k in a[0].arrays:
            assert np.array_equal(a[0].arrays[k], b[0].arrays[k])

    def test_loss_decreases_and_logging(self):
        _, rec = train(cycle_graph(6), architecture("GAE", 8, 4), small(epochs=55))
        epochs = [row[0] for row in rec.series]
        assert epochs == [0, 10, 20, 30, 40, 50, 55]
        assert rec.series[-1][1] < rec.series[0][1]
        assert rec.final["epochs"] == 55

    def test_callback(self):
        seen = []
        train(star_graph(2), architecture("GAE", 4, 2), small(epochs=20),
              callback=lambda e, v: seen.append(e))
        assert seen == [0, 10, 20]

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_divergence_raises_with_last_good(self):
        with pytest.raises(TrainingDiverged) as exc:
            # features this large overflow the decoded scores to inf on the first forward pass
            train(cycle_graph(5), architecture("DGAE", 8, 4), small(), X=1e200 * np.eye(5))
        err = exc.value
        assert err.epoch == 0
        assert err.record.status == "diverged"
        assert all(np.all(np.isfinite(a)) for a in err.params.arrays.values())

    def test_three_star_in_two_dimensions(self):
        g = star_graph(3)
        cfg = TrainConfig(seed=0, log_every=30000)
        params, _ = train(g, architecture("DGAE", 120, 2), cfg)
        assert sign_decode(Model(architecture("DGAE", 120, 2), g).scores(params)) == g
        _, rec = train(g, architecture("GAE", 120, 2), cfg)
        assert rec.final["sign_errors"] > 0


class TestCheckpoint:
    @pytest.mark.parametrize("name", ["DGAE", "CGAE", "4GAE"])
    def test_round_trip(self, tmp_path, name):
        params, _ = train(star_graph(3), architecture(name, 8, 4), small(epochs=5))
        save_checkpoint(tmp_path / "c.json", params, small(epochs=5), 5)
        loaded, cfg, epoch = load_checkpoint(tmp_path / "c.json")
        assert epoch == 5 and cfg == small(epochs=5) and loaded.spec == params.spec
        for k in params.arrays:
            assert np.array_equal(loaded.arrays[k], params.arrays[k])

    def test_format_guard(self, tmp_path):
        (tmp_path / "c.json").write_text(json.dumps({"format": 99}))
        with pytest.raises(InvalidArgument):
            load_checkpoint(tmp_path / "c.json")
