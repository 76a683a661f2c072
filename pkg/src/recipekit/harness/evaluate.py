"""Top-1 evaluation with test-time resize / centre-crop settings."""

import numpy as np

from ..augment import eval_batch, eval_resize_size
from .data import channel_stats
from .model import ToyNet


def top1(logits, labels):
    """Fraction of rows whose first arg-max equals the label."""
    labels = np.asarray(labels)
    if len(labels) == 0:
        return float("nan")
    return float(np.mean(np.argmax(logits, axis=1) == labels))


def prepare_split(split, test_res, crop_ratio, mean, std):
    return eval_batch(split.images, test_res, crop_ratio, mean, std)


def evaluate(model, split, test_res, crop_ratio, mean, std):
    """Top-1 of ``model`` (a ToyNet or a weights dict) on ``split``."""
    if isinstance(model, dict):
        model = ToyNet.from_state(model, channels=split.images.shape[-1])
    x = prepare_split(split, test_res, crop_ratio, mean, std)
    return top1(model.predict(x), split.labels)


def sweep(model, dataset, resolutions, crop_ratios, split="test"):
    """Rows ``(test_res, crop_ratio, resize_to, top1)`` over the full grid.

    Normalization statistics come from the training split.
    """
    mean, std = channel_stats(dataset.train)
    if isinstance(model, dict):
        model = ToyNet.from_state(model, channels=dataset.train.images.shape[-1])
    part = dataset.split(split)
    rows = []
    for res in resolutions:
        for ratio in crop_ratios:
            acc = evaluate(model, part, res, ratio, mean, std)
            rows.append((int(res), float(ratio), eval_resize_size(res, ratio), acc))
    return rows
