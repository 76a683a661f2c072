"""Random Resized Crop and horizontal flip."""

import math
from dataclasses import dataclass

from ..errors import ConfigError
from ..rng import as_generator
from .image import _require_unit, resize_box


@dataclass(frozen=True)
class RrcConfig:
    target_size: tuple = (32, 32)
    scale_range: tuple = (0.08, 1.0)
    ratio_range: tuple = (3.0 / 4.0, 4.0 / 3.0)
    max_attempts: int = 10

    def __post_init__(self):
        th, tw = self.target_size
        if th <= 0 or tw <= 0:
            raise ConfigError(f"RRC target size must be positive, got {self.target_size}")
        lo, hi = self.scale_range
        if not 0 < lo <= hi <= 1:
            raise ConfigError(f"RRC scale range must satisfy 0 < min <= max <= 1, got {self.scale_range}")
        rlo, rhi = self.ratio_range
        if not 0 < rlo <= rhi:
            raise ConfigError(f"RRC ratio range must be ordered and positive, got {self.ratio_range}")


def sample_rrc_box(height, width, cfg, rng):
    """Return ``(top, left, box_h, box_w)`` in integer pixels.

    Area is drawn uniformly from ``scale_range`` and the aspect ratio
    log-uniformly from ``ratio_range``; after ``max_attempts`` misses the
    largest centred box with an in-range aspect is used.
    """
    g = as_generator(rng)
    area = height * width
    log_lo, log_hi = math.log(cfg.ratio_range[0]), math.log(cfg.ratio_range[1])
    for _ in range(cfg.max_attempts):
        target_area = area * g.uniform(cfg.scale_range[0], cfg.scale_range[1])
        aspect = math.exp(g.uniform(log_lo, log_hi))
        w = int(round(math.sqrt(target_area * aspect)))
        h = int(round(math.sqrt(target_area / aspect)))
        if 0 < w <= width and 0 < h <= height:
            top = int(g.integers(0, height - h + 1))
            left = int(g.integers(0, width - w + 1))
            return top, left, h, w
    in_ratio = width / height
    if in_ratio < cfg.ratio_range[0]:
        w = width
        h = int(round(w / cfg.ratio_range[0]))
    elif in_ratio > cfg.ratio_range[1]:
        h = height
        w = int(round(h * cfg.ratio_range[1]))
    else:
        w, h = width, height
    return (height - h) // 2, (width - w) // 2, h, w


def random_resized_crop(img, cfg, rng):
    _require_unit(img, "random_resized_crop")
    top, left, h, w = sample_rrc_box(img.height, img.width, cfg, rng)
    th, tw = cfg.target_size
    if (top, left, h, w) == (0, 0, img.height, img.width) and (th, tw) == (h, w):
        return img.copy()
    return img.replace(resize_box(img.pixels, top, left, h, w, th, tw))


def horizontal_flip(img, rng, p=0.5):
    """Mirror along the width axis with probability ``p`` (one uniform draw)."""
    if as_generator(rng).random() < p:
        return img.replace(img.pixels[:, ::-1].copy())
    return img.copy()
