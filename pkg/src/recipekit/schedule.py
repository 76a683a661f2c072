"""Learning-rate schedules: linear warmup followed by cosine, step or waterfall decay,
with optional multiplicative per-epoch noise late in training.
"""

import math
from dataclasses import dataclass, field

from .errors import ConfigError, ContractError
from .rng import stream

KINDS = ("cosine", "step", "waterfall")


@dataclass(frozen=True)
class NoiseConfig:
    active_range: tuple = (0.45, 1.0)
    std: float = 0.5
    seed: int = 42


@dataclass(frozen=True)
class ScheduleConfig:
    base_lr: float
    total_epochs: int
    kind: str = "cosine"
    warmup_epochs: float = 0.0
    min_lr: float = None
    step_decay_rate: float = 0.988
    step_interval_epochs: float = 1.0
    waterfall_factor: float = 0.1
    waterfall_milestones: tuple = field(default=())
    noise: NoiseConfig = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown schedule kind {self.kind!r}")
        if not 0 <= self.warmup_epochs <= self.total_epochs:
            raise ConfigError("warmup_epochs must lie in [0, total_epochs]")
        if self.min_lr is None:
            object.__setattr__(self, "min_lr", 1e-6 * self.base_lr)
        for name in ("step_decay_rate", "waterfall_factor"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ConfigError(f"{name} must lie in (0, 1], got {v}")
        if self.step_interval_epochs <= 0:
            raise ConfigError("step_interval_epochs must be > 0")
        if self.noise is not None:
            lo, hi = self.noise.active_range
            if not 0 <= lo <= hi <= 1:
                raise ConfigError(f"noise range must lie within [0, 1], got {self.noise.active_range}")
            if self.noise.std < 0:
                raise ConfigError("noise std must be >= 0")


def lr_at(cfg, epoch):
    """Noise-free learning rate at real-valued training progress ``epoch``."""
    if not 0 <= epoch <= cfg.total_epochs:
        raise ContractError(f"epoch {epoch} outside [0, {cfg.total_epochs}]")
    warm = cfg.warmup_epochs
    if epoch < warm:
        return cfg.base_lr * epoch / warm
    if cfg.kind == "cosine":
        span = cfg.total_epochs - warm
        tau = (epoch - warm) / span if span > 0 else 1.0
        return cfg.min_lr + (cfg.base_lr - cfg.min_lr) * (1.0 + math.cos(math.pi * tau)) / 2.0
    if cfg.kind == "step":
        n = math.floor((epoch - warm) / cfg.step_interval_epochs)
        return cfg.base_lr * cfg.step_decay_rate ** n
    passed = sum(1 for m in cfg.waterfall_milestones if epoch >= m)
    return cfg.base_lr * cfg.waterfall_factor ** passed


def noise_factor(cfg, epoch):
    """Multiplier applied by :func:`apply_noise`; 1.0 outside the active range."""
    noise = cfg.noise
    if noise is None or noise.std == 0:
        return 1.0
    lo, hi = noise.active_range
    whole = int(math.floor(epoch))
    frac = whole / cfg.total_epochs if cfg.total_epochs else 0.0
    if not lo <= frac <= hi:
        return 1.0
    # one draw per integer epoch, keyed so that call order never matters
    draw = stream(noise.seed, whole, purpose="lr_noise").normal(0.0, noise.std)
    return 1.0 + min(max(draw, -0.9), 10.0)


def apply_noise(cfg, epoch, lr):
    return lr * noise_factor(cfg, epoch)


def scheduled_lr(cfg, epoch):
    """Learning rate including noise."""
    return apply_noise(cfg, epoch, lr_at(cfg, epoch))
