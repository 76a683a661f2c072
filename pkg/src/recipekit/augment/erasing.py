"""Random Erasing with per-pixel Gaussian noise, applied to normalized images."""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, ContractError
from ..rng import as_generator


@dataclass(frozen=True)
class RandomErasingConfig:
    probability: float = 0.25
    count: int = 1
    area_range: tuple = (0.02, 1.0 / 3.0)
    aspect_range: tuple = (0.3, 1.0 / 0.3)
    mode: str = "pixel"  # "pixel" noise or "const" zeros
    max_attempts: int = 10

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ConfigError(f"erasing probability must be in [0, 1], got {self.probability}")
        if self.count < 1:
            raise ConfigError(f"erasing count must be >= 1, got {self.count}")
        lo, hi = self.area_range
        if not 0 < lo <= hi < 1:
            raise ConfigError(f"erasing area range must satisfy 0 < min <= max < 1, got {self.area_range}")
        if not 0 < self.aspect_range[0] <= self.aspect_range[1]:
            raise ConfigError(f"bad erasing aspect range {self.aspect_range}")
        if self.mode not in ("pixel", "const"):
            raise ConfigError(f"unknown erasing mode {self.mode!r}")


def sample_erase_box(height, width, cfg, g):
    """One rejection-sampled box ``(top, left, h, w)`` or None after max_attempts."""
    area = height * width
    log_lo, log_hi = math.log(cfg.aspect_range[0]), math.log(cfg.aspect_range[1])
    for _ in range(cfg.max_attempts):
        target = g.uniform(cfg.area_range[0], cfg.area_range[1]) * area
        aspect = math.exp(g.uniform(log_lo, log_hi))
        h = int(round(math.sqrt(target * aspect)))
        w = int(round(math.sqrt(target / aspect)))
        if 0 < h < height and 0 < w < width:
            top = int(g.integers(0, height - h + 1))
            left = int(g.integers(0, width - w + 1))
            return top, left, h, w
    return None


def random_erasing(img, cfg, rng, boxes=None):
    """Erase ``cfg.count`` boxes with probability ``cfg.probability``.

    Region pixels are replaced by independent Normal(0, 1) draws per pixel and
    channel.  Each region consumes its own box draw (``boxes``, when a list,
    collects them; a box can be None if rejection sampling failed).
    """
    if not img.normalized:
        raise ContractError("random erasing must run after normalization")
    g = as_generator(rng)
    if g.random() >= cfg.probability:
        return img.copy()
    px = img.pixels.copy()
    for _ in range(cfg.count):
        box = sample_erase_box(img.height, img.width, cfg, g)
        if boxes is not None:
            boxes.append(box)
        if box is None:
            continue
        top, left, h, w = box
        if cfg.mode == "pixel":
            px[top:top + h, left:left + w] = g.standard_normal((h, w, img.channels))
        else:
            px[top:top + h, left:left + w] = 0.0
    return img.replace(px)
