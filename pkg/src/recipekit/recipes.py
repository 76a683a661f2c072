"""Training recipes: typed records, the named presets, validation and the config format.

Presets reproduce the hyper-parameter columns for procedures A1, A2, A3
(LAMB + BCE), B (RMSProp), C1/C2 (SGD + AGC), D (AdamP) and the classic
torchvision baseline, all at their reference batch sizes.  Desk-scale runs
shrink epochs, batch and resolution through override files; presets are never
rescaled implicitly.
"""

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

from . import configfmt
from .augment.randaugment import ALL_OPS, UNIFORM
from .errors import ConfigError
from .mixing import MODES
from .optim import OPTIMIZERS
from .schedule import KINDS


@dataclass(frozen=True)
class OptimizerSpec:
    kind: str = "lamb"
    lr: float = 5e-3
    weight_decay: float = 0.01
    betas: Tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-6
    momentum: float = 0.9
    nesterov: bool = True
    rho: float = 0.9
    delta: float = 0.1
    wd_ratio: float = 0.1
    trust_clip: Optional[float] = None


@dataclass(frozen=True)
class ScheduleSpec:
    kind: str = "cosine"
    warmup_epochs: float = 5.0
    min_lr_ratio: float = 1e-6
    decay_rate: float = 0.988
    decay_interval: float = 1.0
    waterfall_factor: float = 0.1
    milestones: Tuple[int, ...] = ()
    noise_range: Optional[Tuple[float, float]] = None
    noise_std: float = 0.5
    noise_seed: int = 42


@dataclass(frozen=True)
class AugmentSpec:
    rrc: bool = True
    rrc_scale: Tuple[float, float] = (0.08, 1.0)
    rrc_ratio: Tuple[float, float] = (0.75, 4.0 / 3.0)
    hflip: float = 0.5
    randaugment: bool = True
    randaugment_m: float = 7.0
    randaugment_n: int = 2
    randaugment_mstd: float = 0.5
    mixup_alpha: float = 0.0
    cutmix_alpha: float = 0.0
    mix_switch_prob: float = 0.5
    mix_prob: float = 1.0
    mix_mode: str = "batch"
    erase_prob: float = 0.0
    erase_count: int = 1


@dataclass(frozen=True)
class ModelSpec:
    width: int = 128
    depth: int = 4
    patch: int = 8


@dataclass(frozen=True)
class Recipe:
    name: str = "custom"
    seed: int = 0
    epochs: int = 100
    batch_size: int = 2048
    reference_batch: int = 2048
    scale_lr_for_batch: bool = False
    train_res: int = 224
    test_res: int = 224
    test_crop_ratio: float = 0.95
    loss: str = "bce"
    bce_style: str = "multilabel"
    smoothing: float = 0.0
    dropout: float = 0.0
    drop_path: float = 0.0
    repeated_aug: int = 0
    grad_clip: Optional[float] = None
    ema_decay: Optional[float] = None
    optimizer: OptimizerSpec = field(default_factory=OptimizerSpec)
    schedule: ScheduleSpec = field(default_factory=ScheduleSpec)
    augment: AugmentSpec = field(default_factory=AugmentSpec)
    model: ModelSpec = field(default_factory=ModelSpec)

    def effective_lr(self):
        """Learning rate after optional batch-size scaling (sqrt for AdamP, else linear)."""
        lr = self.optimizer.lr
        if not self.scale_lr_for_batch or self.batch_size == self.reference_batch:
            return lr
        ratio = self.batch_size / self.reference_batch
        if self.optimizer.kind == "adamp":
            return lr * math.sqrt(ratio)
        return lr * ratio


def _r(name, **kw):
    sections = {k: kw.pop(k) for k in ("optimizer", "schedule", "augment") if k in kw}
    rec = Recipe(name=name, **kw)
    return dataclasses.replace(
        rec,
        optimizer=OptimizerSpec(**sections.get("optimizer", {})),
        schedule=ScheduleSpec(**sections.get("schedule", {})),
        augment=AugmentSpec(**sections.get("augment", {})),
    )


def _lamb(lr, wd):
    return dict(kind="lamb", lr=lr, weight_decay=wd, betas=(0.9, 0.999), eps=1e-6)


_PRESETS = {
    "a1": lambda: _r(
        "a1", epochs=600, batch_size=2048, reference_batch=2048, train_res=224, test_res=224,
        test_crop_ratio=0.95, loss="bce", smoothing=0.1, drop_path=0.05, repeated_aug=2,
        optimizer=_lamb(5e-3, 0.01),
        schedule=dict(kind="cosine", warmup_epochs=5.0),
        augment=dict(randaugment_m=7.0, randaugment_n=2, randaugment_mstd=0.5,
                     mixup_alpha=0.2, cutmix_alpha=1.0),
    ),
    "a2": lambda: _r(
        "a2", epochs=300, batch_size=2048, reference_batch=2048, train_res=224, test_res=224,
        test_crop_ratio=0.95, loss="bce", smoothing=0.0, drop_path=0.05, repeated_aug=2,
        optimizer=_lamb(5e-3, 0.02),
        schedule=dict(kind="cosine", warmup_epochs=5.0),
        augment=dict(randaugment_m=7.0, randaugment_n=2, randaugment_mstd=0.5,
                     mixup_alpha=0.1, cutmix_alpha=1.0),
    ),
    "a3": lambda: _r(
        "a3", epochs=100, batch_size=2048, reference_batch=2048, train_res=160, test_res=224,
        test_crop_ratio=0.95, loss="bce", smoothing=0.0, drop_path=0.0, repeated_aug=0,
        optimizer=_lamb(8e-3, 0.02),
        schedule=dict(kind="cosine", warmup_epochs=5.0),
        augment=dict(randaugment_m=6.0, randaugment_n=2, randaugment_mstd=0.5,
                     mixup_alpha=0.1, cutmix_alpha=1.0),
    ),
    "b": lambda: _r(
        "b", epochs=600, batch_size=2048, reference_batch=2048, train_res=224, test_res=224,
        test_crop_ratio=0.95, loss="ce", smoothing=0.1, dropout=0.2, drop_path=0.1,
        repeated_aug=0, ema_decay=0.9999,
        optimizer=dict(kind="rmsprop_tf", lr=0.18, weight_decay=7e-6, rho=0.9, momentum=0.9, eps=1e-3),
        schedule=dict(kind="step", warmup_epochs=5.0, decay_rate=0.988, decay_interval=1.0,
                      noise_range=(0.45, 1.0)),
        augment=dict(randaugment_m=8.0, randaugment_n=2, randaugment_mstd=1.0,
                     mixup_alpha=0.2, cutmix_alpha=0.0, erase_prob=0.35, erase_count=3),
    ),
    "c1": lambda: _r(
        "c1", epochs=800, batch_size=2048, reference_batch=2048, train_res=224, test_res=224,
        test_crop_ratio=0.95, loss="ce", smoothing=0.1, dropout=0.25, drop_path=0.1,
        repeated_aug=0, grad_clip=0.025,
        optimizer=dict(kind="sgd", lr=0.88, weight_decay=1e-5, momentum=0.9, nesterov=True),
        schedule=dict(kind="cosine", warmup_epochs=5.0),
        augment=dict(randaugment_m=7.0, randaugment_n=3, randaugment_mstd=1.0,
                     mixup_alpha=0.2, cutmix_alpha=1.0, erase_prob=0.4, erase_count=1),
    ),
    "c2": lambda: _r(
        "c2", epochs=800, batch_size=2048, reference_batch=2048, train_res=224, test_res=224,
        test_crop_ratio=0.95, loss="ce", smoothing=0.1, dropout=0.25, drop_path=0.1,
        repeated_aug=2, grad_clip=0.05,
        optimizer=dict(kind="sgd", lr=0.88, weight_decay=1e-5, momentum=0.9, nesterov=True),
        schedule=dict(kind="cosine", warmup_epochs=5.0),
        augment=dict(randaugment_m=7.0, randaugment_n=3, randaugment_mstd=1.0,
                     mixup_alpha=0.2, cutmix_alpha=1.0, erase_prob=0.4, erase_count=1),
    ),
    "d": lambda: _r(
        "d", epochs=600, batch_size=384, reference_batch=384, train_res=224, test_res=224,
        test_crop_ratio=0.95, loss="bce", smoothing=0.1, dropout=0.1, drop_path=0.05,
        repeated_aug=0,
        optimizer=dict(kind="adamp", lr=0.0033, weight_decay=0.01, betas=(0.9, 0.999), eps=1e-8,
                       delta=0.1, wd_ratio=0.1),
        schedule=dict(kind="cosine", warmup_epochs=5.0),
        augment=dict(randaugment_m=7.0, randaugment_n=3, randaugment_mstd=1.0,
                     mixup_alpha=0.2, cutmix_alpha=1.0, erase_prob=0.35, erase_count=1),
    ),
    "pytorch-baseline": lambda: _r(
        "pytorch-baseline", epochs=90, batch_size=256, reference_batch=256, train_res=224,
        test_res=224, test_crop_ratio=0.875, loss="ce",
        optimizer=dict(kind="sgd", lr=0.1, weight_decay=1e-4, momentum=0.9, nesterov=False),
        schedule=dict(kind="waterfall", warmup_epochs=0.0, waterfall_factor=0.1, milestones=(30, 60)),
        augment=dict(randaugment=False),
    ),
}

PRESET_NAMES = tuple(_PRESETS)
MAIN_PRESETS = ("a1", "a2", "a3", "b", "c1", "c2", "d")


def preset(name):
    try:
        return _PRESETS[name.lower()]()
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; expected one of {', '.join(PRESET_NAMES)}") from None


def parse_config(text):
    """Parse override text into ``{dotted_key: value}``; raises ConfigParseError."""
    return configfmt.parse_overrides(text, Recipe)


def apply_config(recipe, text):
    return configfmt.apply_overrides(recipe, parse_config(text))


def serialize(recipe):
    return configfmt.serialize(recipe)


def deserialize(text):
    """Rebuild a full Recipe from its canonical serialization."""
    return configfmt.deserialize(text, Recipe, Recipe())


def _in01(v, closed_hi=True):
    return 0.0 <= v <= 1.0 if closed_hi else 0.0 <= v < 1.0


def validate(recipe):
    """Every violated recipe invariant, as human-readable strings (empty when valid)."""
    r = recipe
    v = []
    if r.epochs < 0:
        v.append("epochs must be >= 0")
    if r.batch_size < 1 or r.reference_batch < 1:
        v.append("batch sizes must be >= 1")
    for name in ("train_res", "test_res"):
        if getattr(r, name) < 1:
            v.append(f"{name} must be >= 1")
    if not 0 < r.test_crop_ratio <= 1:
        v.append("test_crop_ratio must be in (0, 1]")
    if r.loss not in ("ce", "bce"):
        v.append(f"unknown loss {r.loss!r}")
    if r.bce_style not in ("multilabel", "normalized"):
        v.append(f"unknown bce_style {r.bce_style!r}")
    if not 0 <= r.smoothing < 0.5:
        v.append("smoothing must be in [0, 0.5)")
    if r.loss == "bce" and r.bce_style == "normalized" and r.smoothing > 0:
        v.append("bce_style normalized cannot be combined with label smoothing")
    if not _in01(r.dropout, closed_hi=False):
        v.append("dropout must be in [0, 1)")
    if not _in01(r.drop_path, closed_hi=False):
        v.append("drop_path must be in [0, 1)")
    if r.repeated_aug < 0:
        v.append("repeated_aug must be >= 0")
    elif r.repeated_aug > 1 and r.batch_size % r.repeated_aug:
        v.append("batch not divisible by repeats")
    if r.grad_clip is not None and not r.grad_clip > 0:
        v.append("AGC clip factor must be > 0")
    if r.ema_decay is not None and not _in01(r.ema_decay, closed_hi=False):
        v.append("ema_decay must be in [0, 1)")

    o = r.optimizer
    if o.kind not in OPTIMIZERS:
        v.append(f"unknown optimizer {o.kind!r}")
    if not o.lr > 0:
        v.append("optimizer.lr must be > 0")
    if o.weight_decay < 0:
        v.append("optimizer.weight_decay must be >= 0")
    if not all(0 <= b < 1 for b in o.betas):
        v.append("optimizer.betas must lie in [0, 1)")
    if not 0 <= o.momentum < 1:
        v.append("optimizer.momentum must lie in [0, 1)")
    if not 0 <= o.rho < 1:
        v.append("optimizer.rho must lie in [0, 1)")
    if o.eps < 0:
        v.append("optimizer.eps must be >= 0")

    s = r.schedule
    if s.kind not in KINDS:
        v.append(f"unknown schedule kind {s.kind!r}")
    if not 0 <= s.warmup_epochs <= max(r.epochs, 0):
        v.append("schedule.warmup_epochs must lie in [0, epochs]")
    if not 0 < s.decay_rate <= 1:
        v.append("schedule.decay_rate must lie in (0, 1]")
    if not 0 < s.waterfall_factor <= 1:
        v.append("schedule.waterfall_factor must lie in (0, 1]")
    if s.decay_interval <= 0:
        v.append("schedule.decay_interval must be > 0")
    if s.noise_range is not None and not 0 <= s.noise_range[0] <= s.noise_range[1] <= 1:
        v.append("schedule.noise_range must lie within [0, 1]")
    if s.noise_std < 0:
        v.append("schedule.noise_std must be >= 0")

    a = r.augment
    if not 0 < a.rrc_scale[0] <= a.rrc_scale[1] <= 1:
        v.append("augment.rrc_scale must satisfy 0 < min <= max <= 1")
    if not 0 < a.rrc_ratio[0] <= a.rrc_ratio[1]:
        v.append("augment.rrc_ratio must be ordered and positive")
    if not _in01(a.hflip):
        v.append("augment.hflip must be in [0, 1]")
    if a.randaugment:
        if not 0 <= a.randaugment_m <= 10:
            v.append("augment.randaugment_m must be in [0, 10]")
        if a.randaugment_n < 1:
            v.append("augment.randaugment_n must be >= 1")
        if not (a.randaugment_mstd == UNIFORM or a.randaugment_mstd >= 0):
            v.append("augment.randaugment_mstd must be >= 0 or -inf")
    if a.mixup_alpha < 0 or a.cutmix_alpha < 0:
        v.append("mix alphas must be >= 0")
    if not (_in01(a.mix_switch_prob) and _in01(a.mix_prob)):
        v.append("augment.mix_switch_prob / mix_prob must be in [0, 1]")
    if a.mix_mode not in MODES:
        v.append(f"unknown mix_mode {a.mix_mode!r}")
    elif a.mix_mode != "elem" and (a.mixup_alpha > 0 or a.cutmix_alpha > 0) and r.batch_size % 2:
        v.append(f"mix_mode {a.mix_mode} needs an even batch")
    if not _in01(a.erase_prob):
        v.append("augment.erase_prob must be in [0, 1]")
    if a.erase_count < 1:
        v.append("augment.erase_count must be >= 1")

    m = r.model
    if m.width < 1 or m.depth < 0 or m.patch < 1:
        v.append("model width/patch must be >= 1 and depth >= 0")
    elif r.train_res % m.patch or r.test_res % m.patch:
        v.append("model.patch must divide train_res and test_res")
    return v


def check(recipe):
    """Raise ConfigError listing every violation."""
    problems = validate(recipe)
    if problems:
        raise ConfigError("invalid recipe: " + "; ".join(problems))
    return recipe


__all__ = [
    "ALL_OPS", "AugmentSpec", "ModelSpec", "OptimizerSpec", "MAIN_PRESETS", "PRESET_NAMES",
    "Recipe", "ScheduleSpec", "apply_config", "check", "deserialize", "parse_config",
    "preset", "serialize", "validate",
]
