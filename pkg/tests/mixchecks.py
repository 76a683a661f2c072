"""Mixing invariant checks over many random events (shared by tests)."""

import numpy as np

from recipekit.mixing import CUTMIX, MixConfig, apply_mix, build_targets, plan_mix
from recipekit.rng import stream

H, W, K = 12, 10, 7


def cutmix_fraction_mismatches(events=10_000, seed=0):
    """Events whose reported lam differs from the counted kept-pixel fraction."""
    bad = 0
    batch = 2
    cfg = MixConfig(0.0, 1.0, mode="pair")
    images = np.stack([np.zeros((H, W, 1)), np.ones((H, W, 1))])
    for e in range(events):
        out = plan_mix(batch, H, W, cfg, stream(seed, e, purpose="mix"))
        mixed = apply_mix(images, out)
        kept = int(np.sum(mixed[0] == 0.0))
        if out.method[0] != CUTMIX or out.lam[0] != kept / (H * W):
            bad += 1
    return bad


def target_checks(events=10_000, seed=1, eps=0.1):
    """(max |row sum - 1| over distribution targets, set of multilabel values)."""
    worst = 0.0
    values = set()
    g = np.random.default_rng(seed)
    modes = ("batch", "pair", "elem", "half")
    for e in range(events // 8):
        cfg = MixConfig(0.2, 1.0, mode=modes[e % 4], apply_prob=0.8)
        labels = g.integers(0, K, 8)
        out = plan_mix(8, H, W, cfg, stream(seed, e, purpose="mix"))
        for loss, style in (("ce", "multilabel"), ("bce", "normalized")):
            t = build_targets(labels, out, K, loss, eps if loss == "ce" else 0.0, style)
            worst = max(worst, float(np.max(np.abs(t.values.sum(axis=1) - 1.0))))
        t = build_targets(labels, out, K, "bce", eps, "multilabel")
        values.update(np.unique(t.values).tolist())
    return worst, values


def cutmix_frequency(batches=10_000, seed=2, switch_prob=0.5):
    cfg = MixConfig(0.2, 1.0, switch_prob=switch_prob, mode="batch")
    hits = 0
    for b in range(batches):
        out = plan_mix(4, H, W, cfg, stream(seed, b, purpose="mix"))
        hits += out.method[0] == CUTMIX
    return hits / batches
