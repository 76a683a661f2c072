import hashlib
import math
import os

import numpy as np
import pytest

from recipekit.errors import NumericError
from recipekit.harness.data import (
    HEADER,
    Split,
    SyntheticDatasetSpec,
    generate_dataset,
    read_split,
    write_dataset,
    write_split,
)
from recipekit.harness.evaluate import evaluate, top1
from recipekit.harness.model import ToyNet, load_weights, save_weights
from recipekit.harness.sweep import Aggregate, SeedRun, SeedSweepReport, fig3_windows
from recipekit.harness.train import train
from recipekit.recipes import apply_config, preset

TINY = SyntheticDatasetSpec(num_classes=4, train=64, val=32, test=32, resolution=16)


def test_file_size_arithmetic(tmp_path):
    spec = SyntheticDatasetSpec(num_classes=2, train=4, val=0, test=0, resolution=8, channels=3)
    ds = generate_dataset(spec)
    path = tmp_path / "x.train"
    write_split(path, ds.train)
    assert os.path.getsize(path) == 14 + 4 * 8 * 8 * 3 + 4 * 2
    assert HEADER.size == 14
    back = read_split(path)
    assert np.array_equal(back.images, ds.train.images) and np.array_equal(back.labels, ds.train.labels)


def _digest(stem):
    h = hashlib.sha256()
    for s in ("train", "val", "test"):
        with open(f"{stem}.{s}", "rb") as fh:
            h.update(fh.read())
    return h.hexdigest()


def test_regeneration_is_byte_identical(tmp_path):
    write_dataset(str(tmp_path / "a"), generate_dataset(TINY))
    write_dataset(str(tmp_path / "b"), generate_dataset(TINY))
    assert _digest(tmp_path / "a") == _digest(tmp_path / "b")


def test_splits_balanced_and_distinct():
    ds = generate_dataset(TINY)
    for part in (ds.train, ds.val, ds.test):
        assert np.all(np.bincount(part.labels, minlength=4) == len(part) // 4)
    # same index in different splits draws different noise
    assert not np.array_equal(ds.train.images[0], ds.val.images[0])


def test_truncated_file_rejected(tmp_path):
    path = tmp_path / "bad.train"
    write_split(path, generate_dataset(TINY).train)
    with open(path, "r+b") as fh:
        fh.truncate(100)
    with pytest.raises(ValueError):
        read_split(path)


def test_weights_roundtrip(tmp_path):
    net = ToyNet(4, width=8, depth=2, patch=4, seed=3)
    path = tmp_path / "w.bin"
    save_weights(path, net.state())
    back = load_weights(path)
    assert list(back) == net.names
    assert all(np.array_equal(back[k], v) for k, v in net.state().items())
    x = np.random.default_rng(0).normal(size=(3, 16, 16, 3))
    assert np.array_equal(ToyNet.from_state(back).predict(x), net.predict(x))


def test_toynet_accepts_other_resolutions():
    net = ToyNet(4, width=8, depth=1, patch=4)
    assert net.predict(np.zeros((2, 12, 12, 3))).shape == (2, 4)
    assert net.predict(np.zeros((2, 24, 24, 3))).shape == (2, 4)


def test_eval_mode_is_deterministic():
    net = ToyNet(4, width=8, depth=2, patch=4)
    x = np.random.default_rng(1).normal(size=(5, 8, 8, 3))
    a = net.forward(x, training=False, drop_path_rate=0.5, dropout_rate=0.5).data
    b = net.forward(x, training=False, drop_path_rate=0.5, dropout_rate=0.5).data
    assert np.array_equal(a, b)


def test_constant_classifier_top1_is_class_frequency():
    labels = np.array([0, 1, 1, 2, 1])
    logits = np.tile([0.0, 1.0, 0.0], (5, 1))
    assert top1(logits, labels) == 3 / 5


def test_zero_epochs_gives_chance_level():
    spec = SyntheticDatasetSpec(num_classes=10, train=100, val=200, test=1000, resolution=16)
    ds = generate_dataset(spec)
    r = apply_config(preset("a3"), "epochs = 0\nbatch_size = 10\ntrain_res = 16\ntest_res = 16\nschedule.warmup_epochs = 0")
    rep = train(r, ds)
    assert rep.epochs == []
    p, n = 0.1, len(ds.test)
    assert abs(rep.test_top1 - p) <= 3 * math.sqrt(p * (1 - p) / n)


def _tiny_recipe(extra=""):
    base = ("epochs = 2\nbatch_size = 16\ntrain_res = 16\ntest_res = 16\nschedule.warmup_epochs = 1\n"
            "model.width = 16\nmodel.depth = 2\nmodel.patch = 4\n")
    return apply_config(preset("a2"), base + extra)


def test_train_report_shape_and_determinism():
    ds = generate_dataset(TINY)
    a = train(_tiny_recipe(), ds, seed=1)
    b = train(_tiny_recipe(), ds, seed=1, workers=3)
    assert len(a.epochs) == 2
    assert all(math.isfinite(r.train_loss) and math.isfinite(r.val_top1) for r in a.epochs)
    assert a.deterministic_view() == b.deterministic_view()
    c = train(_tiny_recipe(), ds, seed=2)
    assert a.deterministic_view() != c.deterministic_view()


def test_ema_metrics_reported():
    ds = generate_dataset(TINY)
    rep = train(_tiny_recipe("ema_decay = 0.9"), ds)
    assert all(r.ema_val_top1 is not None for r in rep.epochs)
    assert rep.ema_test_top1 is not None


def test_divergence_reports_epoch_and_step():
    ds = generate_dataset(TINY)
    r = apply_config(_tiny_recipe(), "optimizer.kind = sgd\noptimizer.lr = 1e30\nschedule.warmup_epochs = 0")
    with pytest.raises(NumericError, match=r"epoch \d+, step \d+"):
        train(r, ds)


def test_evaluate_weights_dict():
    ds = generate_dataset(TINY)
    net = ToyNet(4, width=8, depth=1, patch=4)
    acc = evaluate(net.state(), ds.val, 16, 0.875, (0.5,) * 3, (0.25,) * 3)
    assert 0.0 <= acc <= 1.0


def test_sweep_aggregates_and_failures():
    runs = [SeedRun(0, 0.8, 0.7, (0.1, 0.8)), SeedRun(1, 0.9, 0.75, (0.3, 0.9)),
            SeedRun(2, float("nan"), float("nan"), (), "NumericError: boom")]
    rep = SeedSweepReport("x", runs)
    assert len(rep.failures) == 1
    agg = rep.aggregate("val")
    assert agg.mean == pytest.approx(0.85) and agg.reference == 0.8
    assert agg.std == pytest.approx(np.std([0.8, 0.9], ddof=1))
    band = rep.epoch_band()
    assert band[0][3:] == (0.1, 0.3)


def test_duplicate_seeds_give_zero_std():
    agg = Aggregate.of([0.5, 0.5, 0.5], 0.5)
    assert agg.std == 0.0


def test_fig3_windows():
    assert fig3_windows(10) == (3, [9])
    assert fig3_windows(100) == (25, list(range(90, 100)))
