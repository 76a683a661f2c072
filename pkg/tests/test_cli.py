import os

import pytest

from conftest import GOLDEN
from recipekit.cli import EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC, main
from recipekit.harness.data import read_split
from recipekit.recipes import MAIN_PRESETS

TINY_SPEC = "num_classes = 4\ntrain = 48\nval = 16\ntest = 16\nresolution = 16\n"
TINY_CFG = ("epochs = 2\nbatch_size = 16\ntrain_res = 16\ntest_res = 16\nschedule.warmup_epochs = 1\n"
            "model.width = 16\nmodel.depth = 1\nmodel.patch = 4\n")


@pytest.fixture
def tiny(tmp_path):
    spec = tmp_path / "tiny.spec"
    spec.write_text(TINY_SPEC)
    cfg = tmp_path / "tiny.cfg"
    cfg.write_text(TINY_CFG)
    stem = str(tmp_path / "tiny")
    assert main(["gen-data", "--spec", str(spec), "--out", stem]) == 0
    return tmp_path, stem, str(cfg)


def read_tsv(path):
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    header = lines[0].lstrip("#").split("\t")
    rows = [line.split("\t") for line in lines[1:] if not line.startswith("#")]
    return header, rows


@pytest.mark.parametrize("name", MAIN_PRESETS)
def test_lr_curve_matches_golden(name, tmp_path):
    out = tmp_path / "lr.tsv"
    assert main(["lr-curve", "--recipe", name, "--out", str(out)]) == 0
    with open(os.path.join(GOLDEN, f"lr_{name}.tsv"), encoding="utf-8") as fh:
        assert out.read_text(encoding="utf-8") == fh.read()


def test_train_eval_augment_roundtrip(tiny):
    tmp, stem, cfg = tiny
    report, weights = tmp / "r.tsv", tmp / "w.bin"
    assert main(["train", "--recipe", "a2", "--data", stem, "--config", cfg,
                 "--out", str(report), "--weights", str(weights)]) == 0
    header, rows = read_tsv(report)
    assert header == ["epoch", "train_loss", "val_top1", "lr", "ema_val_top1", "wall_time"]
    assert len(rows) == 2
    assert "#test_top1" in report.read_text()
    assert (tmp / "r.png").exists()

    ev = tmp / "e.tsv"
    assert main(["eval", "--weights", str(weights), "--data", stem, "--res", "12", "16", "20",
                 "--crop-ratio", "0.875", "0.9", "0.95", "1.0", "--out", str(ev)]) == 0
    header, rows = read_tsv(ev)
    assert header == ["test_res", "crop_ratio", "resize_to", "top1"]
    assert len(rows) == 12
    assert ["16", "0.95", "17"] == rows[6][:3]
    assert (tmp / "e.png").exists()

    stats, dump = tmp / "s.tsv", tmp / "aug.train"
    assert main(["augment", "--data", stem, "--recipe", "b", "--config", cfg, "--stats", str(stats),
                 "--count", "10", "--dump", str(dump)]) == 0
    header, rows = read_tsv(stats)
    assert [r[0] for r in rows] == ["source", "rrc", "flip", "randaugment", "normalize", "erasing"]
    assert len(read_split(dump)) == 10
    assert (tmp / "s.png").exists()


def test_seed_sweep_outputs(tiny):
    tmp, stem, cfg = tiny
    out = tmp / "sw.tsv"
    assert main(["seed-sweep", "--recipe", "a3", "--data", stem, "--config", cfg,
                 "--seeds", "2", "--out", str(out)]) == 0
    for suffix in (".agg.tsv", ".band.tsv", ".scatter.tsv", ".band.png", ".scatter.png"):
        assert (tmp / f"sw{suffix}").exists(), suffix
    header, rows = read_tsv(tmp / "sw.agg.tsv")
    assert header == ["split", "mean", "std", "min", "max", "reference_seed"]


def test_exit_codes(tiny, tmp_path, capsys):
    tmp, stem, cfg = tiny
    bad = tmp_path / "bad.cfg"
    bad.write_text("epochs = 2\nbogus = 1\n")
    assert main(["train", "--recipe", "a2", "--data", stem, "--config", str(bad)]) == EXIT_CONFIG
    assert "line 2" in capsys.readouterr().err
    assert main(["lr-curve", "--recipe", "zz"]) == EXIT_CONFIG
    assert main(["train", "--recipe", "a2", "--data", str(tmp_path / "missing"), "--config", cfg]) == EXIT_IO
    boom = tmp_path / "boom.cfg"
    boom.write_text(TINY_CFG + "optimizer.kind = sgd\noptimizer.lr = 1e30\nschedule.warmup_epochs = 0\n")
    assert main(["train", "--recipe", "a2", "--data", stem, "--config", str(boom)]) == EXIT_NUMERIC
    with pytest.raises(SystemExit) as err:
        main(["train"])
    assert err.value.code == 2
