import numpy as np
import pytest

from adhcn.data import SynthConfig, gen_planted_partition, make_splits
from adhcn.model import GraphOperators, NumericalError, init_params
from adhcn.training import AdamState, TrainConfig, adam_step, draw_masks, fit_params, train


@pytest.fixture(scope="module")
def smoke():
    ds = gen_planted_partition(SynthConfig(num_nodes=120, num_edges=60, seed=42))
    return ds.with_splits(make_splits(ds.labels, 10, 20, seed=42))


def scalar_params(value):
    params = init_params(1, 1, 2, "hg-only", np.random.default_rng(0))
    for a in params.named_arrays().values():
        a[...] = value
    return params


class TestAdam:
    def test_first_step(self):
        params = scalar_params(0.0)
        grads = {k: np.ones_like(a) for k, a in params.named_arrays().items()}
        adam_step(params, grads, AdamState.zeros_like(params), lr=0.001)
        for a in params.named_arrays().values():
            np.testing.assert_allclose(a, -0.001, rtol=1e-7)

    def test_zero_gradient_keeps_parameters(self):
        params = scalar_params(0.25)
        state = AdamState.zeros_like(params)
        grads = {k: np.zeros_like(a) for k, a in params.named_arrays().items()}
        for _ in range(10):
            adam_step(params, grads, state, lr=0.01)
        for a in params.named_arrays().values():
            np.testing.assert_array_equal(a, 0.25)
        assert state.t == 10

    def test_first_step_sign(self):
        rng = np.random.default_rng(1)
        params = init_params(3, 4, 2, "attention", rng)
        before = {k: a.copy() for k, a in params.named_arrays().items()}
        grads = {k: rng.normal(size=a.shape) for k, a in params.named_arrays().items()}
        adam_step(params, grads, AdamState.zeros_like(params), lr=0.001)
        for k, a in params.named_arrays().items():
            np.testing.assert_array_equal(np.sign(a - before[k]), -np.sign(grads[k]))

    def test_matches_reference_recurrence(self):
        rng = np.random.default_rng(2)
        params = scalar_params(0.5)
        state = AdamState.zeros_like(params)
        p, m, v = 0.5, 0.0, 0.0
        for t in range(1, 6):
            g = float(rng.normal())
            adam_step(params, {k: np.full_like(a, g) for k, a in params.named_arrays().items()}, state, lr=0.01)
            m = 0.9 * m + 0.1 * g
            v = 0.999 * v + 0.001 * g * g
            p -= 0.01 * (m / (1 - 0.9**t)) / (np.sqrt(v / (1 - 0.999**t)) + 1e-8)
        np.testing.assert_allclose(params.classifier_bias, p, rtol=1e-12)


class TestConfig:
    @pytest.mark.parametrize("kw", [{"learning_rate": 0}, {"dropout": 1.0}, {"hidden": 0},
                                    {"fusion_strategy": "fixed:2"}, {"max_epochs": -1}])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            TrainConfig(**kw)

    def test_defaults(self):
        cfg = TrainConfig()
        assert (cfg.learning_rate, cfg.weight_decay, cfg.dropout, cfg.hidden) == (0.001, 0.0005, 0.5, 64)
        assert (cfg.max_epochs, cfg.patience) == (200, 50)


class TestTrain:
    def test_deterministic(self, smoke):
        cfg = TrainConfig(seed=3, max_epochs=15)
        _, a = train(smoke, cfg)
        _, b = train(smoke, cfg)
        assert a.train_loss == b.train_loss
        assert a.train_acc == b.train_acc and a.val_acc == b.val_acc

    def test_zero_epochs(self, smoke):
        params, report = train(smoke, TrainConfig(max_epochs=0))
        assert report.train_loss == [] and report.val_acc == []
        assert report.epochs_run == 0 and report.best_epoch == 0
        assert set(report.metrics) == {"train", "val", "test"}
        assert 0.0 <= report.metrics["test"]["acc"] <= 1.0

    def test_curves_have_epochs_run_entries(self, smoke):
        _, report = train(smoke, TrainConfig(max_epochs=12, patience=3))
        assert len(report.train_loss) == len(report.train_acc) == len(report.val_acc) == report.epochs_run
        assert 1 <= report.best_epoch <= report.epochs_run

    def test_early_stopping(self, smoke):
        _, report = train(smoke, TrainConfig(max_epochs=500, patience=5, learning_rate=0.05))
        assert report.epochs_run < 500
        assert report.epochs_run - report.best_epoch == 5

    @pytest.mark.parametrize("strategy", ["attention", "attention-nocommon", "commconv", "fixed:0.5", "le-only", "hg-only"])
    def test_loss_non_increasing_first_epochs(self, smoke, strategy):
        # dropout off: with masks resampled each epoch the objective itself moves
        _, report = train(smoke, TrainConfig(seed=42, max_epochs=5, dropout=0.0, fusion_strategy=strategy))
        assert all(b <= a for a, b in zip(report.train_loss, report.train_loss[1:]))

    def test_divergence_reports_epoch(self, smoke):
        with pytest.raises(NumericalError, match="epoch 1"):
            train(smoke, TrainConfig(max_epochs=3, learning_rate=1e308))

    def test_requires_splits(self):
        ds = gen_planted_partition(SynthConfig(num_nodes=40, num_edges=20))
        with pytest.raises(ValueError, match="splits"):
            train(ds, TrainConfig(max_epochs=1))

    def test_no_validation_keeps_last_epoch(self, smoke):
        ops = GraphOperators.from_hypergraph(smoke.hypergraph)
        _, report = fit_params(ops, smoke.features, smoke.labels, smoke.splits.train, [], 4, TrainConfig(max_epochs=7))
        assert report.best_epoch == 7 and report.val_acc == []


def test_masks_use_separate_streams():
    a = draw_masks(10, 20, 3, 0.5, seed=1, epoch=4)
    b = draw_masks(10, 20, 3, 0.5, seed=1, epoch=4)
    c = draw_masks(10, 20, 3, 0.5, seed=1, epoch=5)
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])
    assert not np.array_equal(a[0], c[0])
    assert draw_masks(10, 20, 3, 0.0, seed=1, epoch=1) is None
