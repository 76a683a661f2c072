"""Seed sweeps: train once per seed, then aggregate final and per-epoch accuracy."""

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..errors import ConfigError, RecipeKitError
from .train import train


@dataclass(frozen=True)
class SeedRun:
    seed: int
    val_top1: float
    test_top1: float
    curve: tuple = ()  # per-epoch val top-1
    error: Optional[str] = None

    @property
    def ok(self):
        return self.error is None


@dataclass(frozen=True)
class Aggregate:
    mean: float
    std: float
    min: float
    max: float
    reference: float

    @classmethod
    def of(cls, values, reference):
        v = np.asarray(values, dtype=np.float64)
        std = float(np.std(v, ddof=1)) if len(v) > 1 else float("nan")
        return cls(float(np.mean(v)), std, float(v.min()), float(v.max()), reference)


@dataclass
class SeedSweepReport:
    recipe: str
    runs: List[SeedRun] = field(default_factory=list)

    @property
    def completed(self):
        return [r for r in self.runs if r.ok]

    @property
    def failures(self):
        return [r for r in self.runs if not r.ok]

    def reference_run(self):
        """Seed 0 when it was swept, otherwise the first completed seed."""
        done = self.completed
        for r in done:
            if r.seed == 0:
                return r
        return done[0] if done else None

    def aggregate(self, split):
        done = self.completed
        if not done:
            return None
        key = "val_top1" if split == "val" else "test_top1"
        return Aggregate.of([getattr(r, key) for r in done], getattr(self.reference_run(), key))

    def epoch_band(self):
        """Rows ``(epoch, mean, std, min, max)`` of val top-1 across completed seeds."""
        curves = [r.curve for r in self.completed if r.curve]
        if not curves:
            return []
        arr = np.asarray(curves, dtype=np.float64)
        rows = []
        for e in range(arr.shape[1]):
            col = arr[:, e]
            std = float(np.std(col, ddof=1)) if len(col) > 1 else float("nan")
            rows.append((e, float(col.mean()), std, float(col.min()), float(col.max())))
        return rows

    def scatter(self):
        return [(r.seed, r.val_top1, r.test_top1) for r in self.completed]


def _one(args):
    recipe, dataset, seed = args
    try:
        rep = train(recipe, dataset, seed=seed)
    except (RecipeKitError, FloatingPointError) as exc:
        return SeedRun(seed, float("nan"), float("nan"), (), f"{type(exc).__name__}: {exc}")
    curve = tuple(r.val_top1 for r in rep.epochs)
    return SeedRun(seed, rep.final_val_top1, rep.test_top1, curve)


def seed_sweep(recipe, dataset, seeds, jobs=1):
    """Train ``recipe`` once per seed; failed runs are kept as markers, not raised."""
    seeds = [int(s) for s in seeds]
    if len(seeds) < 2:
        raise ConfigError("a seed sweep needs at least two seeds")
    if len(set(seeds)) != len(seeds):
        warnings.warn("duplicate seeds in sweep; their runs will be identical", stacklevel=2)
    work = [(recipe, dataset, s) for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_one, work))
    else:
        runs = [_one(w) for w in work]
    return SeedSweepReport(recipe.name, runs)


def band_width(band_rows, epochs):
    """max - min of the band rows at ``epochs`` (averaged when several)."""
    widths = [band_rows[e][4] - band_rows[e][3] for e in epochs]
    return float(np.mean(widths))


def fig3_windows(total_epochs):
    """Epoch index at 25% of training and the epochs making up the final 10%."""
    early = min(total_epochs - 1, math.ceil(0.25 * total_epochs))
    tail = max(1, math.ceil(0.1 * total_epochs))
    return early, list(range(total_epochs - tail, total_epochs))
