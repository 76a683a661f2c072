"""Command-line entry point: ``recipekit <subcommand> ...``.

Exit codes: 0 success, 2 configuration or parse error, 3 numeric failure,
4 I/O error.  Reports are UTF-8 TSV with a ``#``-prefixed header line.
"""

import argparse
import dataclasses
import os
import sys

import numpy as np

from . import recipes
from .errors import ConfigError, NumericError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


class DataFileError(Exception):
    pass


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".10g")
    return str(v)


def write_tsv(path, columns, rows, footer=()):
    lines = ["#" + "\t".join(columns)]
    lines += ["\t".join(_fmt(v) for v in row) for row in rows]
    lines += ["#" + "\t".join(_fmt(v) for v in row) for row in footer]
    text = "\n".join(lines) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text


def _sibling(path, suffix):
    """``report.tsv`` -> ``report<suffix>``; None for stdout."""
    if path is None or path == "-":
        return None
    return os.path.splitext(path)[0] + suffix


def load_recipe(name, config=None, seed=None):
    recipe = recipes.preset(name)
    if config:
        with open(config, encoding="utf-8") as fh:
            recipe = recipes.apply_config(recipe, fh.read())
    if seed is not None:
        recipe = dataclasses.replace(recipe, seed=seed)
    return recipes.check(recipe)


def load_data(stem):
    from .harness.data import read_dataset

    try:
        return read_dataset(stem)
    except (OSError, ValueError) as exc:
        raise DataFileError(str(exc)) from exc


# -- subcommands ---------------------------------------------------------------

def cmd_gen_data(args):
    from .harness.data import SyntheticDatasetSpec, generate_dataset, write_dataset

    spec = SyntheticDatasetSpec()
    if args.spec:
        with open(args.spec, encoding="utf-8") as fh:
            spec = SyntheticDatasetSpec.from_text(fh.read())
    ds = generate_dataset(spec)
    write_dataset(args.out, ds)
    print(f"wrote {args.out}.{{train,val,test}}: {spec.train}/{spec.val}/{spec.test} samples, "
          f"{spec.resolution}x{spec.resolution}x{spec.channels}, K={spec.num_classes}")


def cmd_train(args):
    from . import plotting
    from .harness.model import save_weights
    from .harness.train import train

    recipe = load_recipe(args.recipe, args.config, args.seed)
    ds = load_data(args.data)

    def progress(rec):
        if args.verbose:
            print(f"epoch {rec.epoch}: loss {rec.train_loss:.4f} val {rec.val_top1:.4f} "
                  f"lr {rec.lr:.3g}", file=sys.stderr)

    rep = train(recipe, ds, workers=args.workers, progress=progress)
    cols = ["epoch", "train_loss", "val_top1", "lr", "ema_val_top1", "wall_time"]
    rows = [(r.epoch, r.train_loss, r.val_top1, r.lr, r.ema_val_top1, r.wall_time) for r in rep.epochs]
    footer = [("final_val_top1", rep.final_val_top1), ("test_top1", rep.test_top1)]
    if rep.ema_test_top1 is not None:
        footer.append(("ema_test_top1", rep.ema_test_top1))
    write_tsv(args.out, cols, rows, footer)
    if args.weights:
        save_weights(args.weights, rep.weights)
    fig = args.figure or _sibling(args.out, ".png")
    if fig and rep.epochs:
        plotting.training_curves(rep, fig)


def cmd_eval(args):
    from . import plotting
    from .augment import eval_resize_size
    from .harness.evaluate import sweep
    from .harness.model import load_weights

    try:
        state = load_weights(args.weights)
    except (OSError, ValueError) as exc:
        raise DataFileError(str(exc)) from exc
    for r in args.crop_ratio:
        eval_resize_size(args.res[0], r)  # validates the ratio before any work
    ds = load_data(args.data)
    rows = sweep(state, ds, args.res, args.crop_ratio, split=args.split)
    write_tsv(args.out, ["test_res", "crop_ratio", "resize_to", "top1"], rows)
    fig = args.figure or _sibling(args.out, ".png")
    if fig:
        plotting.resolution_sweep(rows, fig)


def cmd_seed_sweep(args):
    from . import plotting
    from .harness.sweep import seed_sweep

    recipe = load_recipe(args.recipe, args.config)
    ds = load_data(args.data)
    seeds = list(range(args.first_seed, args.first_seed + args.seeds))
    rep = seed_sweep(recipe, ds, seeds, jobs=args.jobs)
    rows = [(r.seed, r.val_top1, r.test_top1, "ok" if r.ok else "FAILED " + r.error) for r in rep.runs]
    write_tsv(args.out, ["seed", "val_top1", "test_top1", "status"], rows)
    base = args.out if args.out not in (None, "-") else None
    agg_rows = []
    for split in ("val", "test"):
        a = rep.aggregate(split)
        if a is not None:
            agg_rows.append((split, a.mean, a.std, a.min, a.max, a.reference))
    write_tsv(_sibling(base, ".agg.tsv") or "-", ["split", "mean", "std", "min", "max", "reference_seed"], agg_rows)
    band = rep.epoch_band()
    if base:
        write_tsv(_sibling(base, ".band.tsv"), ["epoch", "mean", "std", "min", "max"], band)
        write_tsv(_sibling(base, ".scatter.tsv"), ["seed", "val_top1", "test_top1"], rep.scatter())
        if band:
            plotting.seed_band(band, _sibling(base, ".band.png"))
        if rep.completed:
            plotting.val_test_scatter(rep.scatter(), _sibling(base, ".scatter.png"))
    if rep.failures:
        print(f"{len(rep.failures)} of {len(rep.runs)} runs failed", file=sys.stderr)
        if not rep.completed:
            return EXIT_NUMERIC
    return EXIT_OK


def lr_curve_rows(recipe):
    from .harness.train import schedule_config
    from .schedule import scheduled_lr

    if recipe.epochs == 0:
        return []
    cfg = schedule_config(recipe)
    return [(e, scheduled_lr(cfg, e)) for e in range(recipe.epochs + 1)]


def cmd_lr_curve(args):
    from . import plotting

    recipe = load_recipe(args.recipe, args.config)
    rows = lr_curve_rows(recipe)
    write_tsv(args.out, ["epoch", "lr"], rows)
    if args.figure and rows:
        plotting.lr_curve([r[0] for r in rows], [r[1] for r in rows], args.figure, recipe.name)


def cmd_augment(args):
    from . import plotting
    from .augment import ImageBuffer, augment_stages, denormalize
    from .harness.data import Split, channel_stats, write_split
    from .harness.train import augment_config

    recipe = load_recipe(args.recipe, args.config)
    ds = load_data(args.data)
    mean, std = channel_stats(ds.train)
    cfg = augment_config(recipe, mean, std)
    split = ds.split(args.split)
    n = min(args.count, len(split))
    per_stage = {}
    finals = []
    shown = {}
    for i in range(n):
        src = ImageBuffer.from_uint8(split.images[i])
        for stage, img in augment_stages(src, cfg, recipe.seed, args.epoch, i):
            per_stage.setdefault(stage, []).append(img.pixels)
            if i < args.grid:
                unit = denormalize(img, mean, std) if img.normalized else img
                shown.setdefault(stage, []).append(unit.pixels)
            if stage == "erasing":
                finals.append(img)
    rows = []
    for stage, arrs in per_stage.items():
        flat = np.concatenate([a.reshape(-1) for a in arrs])
        space = "normalized" if stage in ("normalize", "erasing") else "unit"
        rows.append((stage, space, float(flat.mean()), float(flat.std()), float(flat.min()), float(flat.max())))
    write_tsv(args.stats, ["stage", "space", "mean", "std", "min", "max"], rows)
    if args.dump:
        # erasing noise leaves the unit range, so clamp before quantizing
        px = np.stack([ImageBuffer(np.clip(denormalize(f, mean, std).pixels, 0.0, 1.0)).to_uint8()
                       for f in finals])
        write_split(args.dump, Split(px, split.labels[:n].copy()))
    fig = args.figure or _sibling(args.stats, ".png")
    if fig and shown:
        plotting.stage_grid(shown, fig)


# -- parser ----------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="recipekit", description="Training-recipe toolkit (desk scale).")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="write a synthetic dataset")
    g.add_argument("--spec", help="dataset spec file (key = value)")
    g.add_argument("--out", required=True, help="output stem; writes <stem>.train/.val/.test")
    g.set_defaults(func=cmd_gen_data)

    t = sub.add_parser("train", help="train one recipe and write a per-epoch report")
    t.add_argument("--recipe", required=True)
    t.add_argument("--data", required=True)
    t.add_argument("--config", help="override file")
    t.add_argument("--seed", type=int)
    t.add_argument("--out", default="-")
    t.add_argument("--weights", help="write final weights here")
    t.add_argument("--workers", type=int, default=1, help="augmentation threads")
    t.add_argument("--figure", help="training-curve PNG (default: next to --out)")
    t.add_argument("-v", "--verbose", action="store_true")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="top-1 over test resolutions and crop ratios")
    e.add_argument("--weights", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--res", type=int, nargs="+", required=True)
    e.add_argument("--crop-ratio", type=float, nargs="+", required=True)
    e.add_argument("--split", default="test", choices=("train", "val", "test"))
    e.add_argument("--out", default="-")
    e.add_argument("--figure")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("seed-sweep", help="train once per seed and aggregate")
    s.add_argument("--recipe", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--config")
    s.add_argument("--seeds", type=int, required=True, help="number of seeds")
    s.add_argument("--first-seed", type=int, default=0)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_seed_sweep)

    lr = sub.add_parser("lr-curve", help="per-epoch learning rate of a recipe")
    lr.add_argument("--recipe", required=True)
    lr.add_argument("--config")
    lr.add_argument("--out", default="-")
    lr.add_argument("--figure")
    lr.set_defaults(func=cmd_lr_curve)

    a = sub.add_parser("augment", help="per-stage augmentation statistics")
    a.add_argument("--data", required=True)
    a.add_argument("--recipe", required=True)
    a.add_argument("--stats", required=True)
    a.add_argument("--config")
    a.add_argument("--split", default="train", choices=("train", "val", "test"))
    a.add_argument("--count", type=int, default=256)
    a.add_argument("--epoch", type=int, default=0)
    a.add_argument("--dump", help="write augmented images as a dataset split file")
    a.add_argument("--grid", type=int, default=6, help="samples shown in the figure")
    a.add_argument("--figure")
    a.set_defaults(func=cmd_augment)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        code = args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataFileError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
