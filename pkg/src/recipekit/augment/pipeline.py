"""The per-sample training pipeline and its deterministic batch driver.

Stage order: RRC -> flip -> RandAugment -> normalize -> Random Erasing.
Each stage draws from its own stream keyed by
``(seed, epoch, sample, repeat, purpose)``, so results do not depend on how
samples are spread over workers.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..rng import stream
from .erasing import RandomErasingConfig, random_erasing
from .image import ImageBuffer, eval_transform, normalize
from .randaugment import RandAugmentConfig, rand_augment
from .transforms import RrcConfig, horizontal_flip, random_resized_crop

STAGES = ("source", "rrc", "flip", "randaugment", "normalize", "erasing")


@dataclass(frozen=True)
class TrainAugmentConfig:
    rrc: Optional[RrcConfig]
    flip_prob: float
    randaugment: Optional[RandAugmentConfig]
    mean: tuple
    std: tuple
    erasing: Optional[RandomErasingConfig]


def augment_stages(img, cfg, seed, epoch, index, repeat=0):
    """Yield ``(stage, ImageBuffer)`` for every pipeline stage, source first."""
    key = (seed, epoch, index, repeat)
    yield "source", img
    if cfg.rrc is not None:
        img = random_resized_crop(img, cfg.rrc, stream(*key, purpose="rrc"))
    yield "rrc", img
    if cfg.flip_prob > 0:
        img = horizontal_flip(img, stream(*key, purpose="flip"), cfg.flip_prob)
    yield "flip", img
    if cfg.randaugment is not None:
        img = rand_augment(img, cfg.randaugment, stream(*key, purpose="randaugment"))
    yield "randaugment", img
    img = normalize(img, cfg.mean, cfg.std)
    yield "normalize", img
    if cfg.erasing is not None and cfg.erasing.probability > 0:
        img = random_erasing(img, cfg.erasing, stream(*key, purpose="erasing"))
    yield "erasing", img


def augment_sample(img, cfg, seed, epoch, index, repeat=0):
    """Run the whole pipeline and return normalized H x W x C pixels."""
    out = None
    for _, out in augment_stages(img, cfg, seed, epoch, index, repeat):
        pass
    return out.pixels


def _source(images, i):
    return ImageBuffer(images[i] / 255.0 if images.dtype == np.uint8 else images[i])


def augment_batch(images, indices, cfg, seed, epoch, repeats=None, workers=1):
    """Augment ``images[indices]`` into a B x H x W x C float64 array.

    ``repeats`` gives the repeat ordinal of each slot (repeated augmentation);
    ``workers`` > 1 fans samples out over a thread pool with identical results.
    """
    indices = np.asarray(indices, dtype=np.int64)
    repeats = np.zeros_like(indices) if repeats is None else np.asarray(repeats, dtype=np.int64)

    def one(j):
        i = int(indices[j])
        return augment_sample(_source(images, i), cfg, seed, epoch, i, int(repeats[j]))

    if workers <= 1:
        outs = [one(j) for j in range(len(indices))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(one, range(len(indices))))
    return np.stack(outs) if outs else np.empty((0,))


def eval_batch(images, test_res, crop_ratio, mean, std):
    """Deterministic eval preprocessing: resize, centre crop, normalize."""
    outs = []
    for i in range(len(images)):
        img = eval_transform(_source(images, i), test_res, crop_ratio)
        outs.append(normalize(img, mean, std).pixels)
    return np.stack(outs)
