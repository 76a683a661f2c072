"""Integrated Mixup / CutMix with batchwise, pairwise, elementwise and half modes,
plus target construction for CE and multi-label BCE.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .rng import as_generator

MODES = ("batch", "pair", "elem", "half")
NONE, MIXUP, CUTMIX = "none", "mixup", "cutmix"


@dataclass(frozen=True)
class MixConfig:
    mixup_alpha: float = 0.0
    cutmix_alpha: float = 0.0
    switch_prob: float = 0.5
    mode: str = "batch"
    apply_prob: float = 1.0

    def __post_init__(self):
        if self.mixup_alpha < 0 or self.cutmix_alpha < 0:
            raise ConfigError("mix alphas must be >= 0")
        for name in ("switch_prob", "apply_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {v}")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mix mode {self.mode!r}; expected one of {MODES}")

    @property
    def enabled(self):
        return self.apply_prob > 0 and (self.mixup_alpha > 0 or self.cutmix_alpha > 0)


@dataclass
class MixOutcome:
    """Per-sample mixing record.  ``boxes`` rows are (row0, col0, row1, col1), -1 if unused."""

    partner: np.ndarray
    lam: np.ndarray
    method: np.ndarray
    boxes: np.ndarray

    @classmethod
    def identity(cls, batch):
        return cls(
            partner=np.arange(batch),
            lam=np.ones(batch),
            method=np.array([NONE] * batch, dtype=object),
            boxes=np.full((batch, 4), -1, dtype=np.int64),
        )


@dataclass
class TargetMatrix:
    values: np.ndarray
    semantics: str  # "distribution" or "multilabel"


def sample_lambda(alpha, rng):
    """Beta(alpha, alpha) draw built from two Gamma(alpha, 1) draws."""
    if not alpha > 0:
        raise ConfigError(f"mix alpha must be > 0, got {alpha}")
    g = as_generator(rng)
    x = g.standard_gamma(alpha)
    y = g.standard_gamma(alpha)
    if x + y == 0.0:
        return 0.5
    return float(min(max(x / (x + y), 0.0), 1.0))


def cutmix_box(lam, height, width, rng):
    """Box of side ``sqrt(1-lam)`` times each extent around a uniform centre, clipped.

    Returns ``((row0, col0, row1, col1), lam_adj)`` where ``lam_adj`` is the
    exact fraction of pixels left untouched.
    """
    g = as_generator(rng)
    cut = math.sqrt(1.0 - lam)
    cut_h, cut_w = int(height * cut), int(width * cut)
    cy = int(g.integers(0, height))
    cx = int(g.integers(0, width))
    r0 = int(np.clip(cy - cut_h // 2, 0, height))
    r1 = int(np.clip(cy + cut_h // 2, 0, height))
    c0 = int(np.clip(cx - cut_w // 2, 0, width))
    c1 = int(np.clip(cx + cut_w // 2, 0, width))
    total = height * width
    # integer numerator keeps this the correctly rounded kept-pixel fraction
    lam_adj = (total - (r1 - r0) * (c1 - c0)) / total
    return (r0, c0, r1, c1), lam_adj


def _derangement(batch, g):
    # Sattolo's algorithm: a uniform random cyclic permutation, never i -> i
    perm = np.arange(batch)
    for i in range(batch - 1, 0, -1):
        j = int(g.integers(0, i))
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def _draw_event(cfg, height, width, g):
    """One mixing decision: (method, lam, box)."""
    if g.random() >= cfg.apply_prob:
        return NONE, 1.0, None
    if cfg.mixup_alpha > 0 and cfg.cutmix_alpha > 0:
        use_cutmix = g.random() < cfg.switch_prob
    else:
        use_cutmix = cfg.cutmix_alpha > 0
    if use_cutmix:
        lam = sample_lambda(cfg.cutmix_alpha, g)
        box, lam = cutmix_box(lam, height, width, g)
        return CUTMIX, lam, box
    return MIXUP, sample_lambda(cfg.mixup_alpha, g), None


def plan_mix(batch, height, width, cfg, rng):
    """Draw the MixOutcome for a batch without touching pixels."""
    out = MixOutcome.identity(batch)
    if not cfg.enabled:
        return out
    g = as_generator(rng)

    def record(i, partner, event):
        method, lam, box = event
        out.method[i] = method
        if method == NONE:
            return
        out.partner[i] = partner
        out.lam[i] = lam
        if box is not None:
            out.boxes[i] = box

    if cfg.mode in ("batch", "pair", "half") and batch % 2:
        raise ConfigError(f"mix mode {cfg.mode!r} needs an even batch, got {batch}")
    if cfg.mode == "batch":
        event = _draw_event(cfg, height, width, g)
        for i in range(batch):
            record(i, batch - 1 - i, event)
    elif cfg.mode == "elem":
        if batch < 2:
            return out
        perm = _derangement(batch, g)
        for i in range(batch):
            record(i, int(perm[i]), _draw_event(cfg, height, width, g))
    else:
        order = g.permutation(batch)
        for k in range(0, batch, 2):
            a, b = int(order[k]), int(order[k + 1])
            event = _draw_event(cfg, height, width, g)
            if cfg.mode == "pair":
                record(a, b, event)
                record(b, a, event)
            else:
                # half: only one member of the pair carries the mixed image
                if g.random() < 0.5:
                    a, b = b, a
                record(a, b, event)
    return out


def apply_mix(images, outcome):
    """Mix ``images`` (B x H x W x C) according to ``outcome``; sources are not modified."""
    src = np.asarray(images, dtype=np.float64)
    mixed = src.copy()
    for i, method in enumerate(outcome.method):
        p = int(outcome.partner[i])
        if method == MIXUP:
            lam = outcome.lam[i]
            mixed[i] = lam * src[i] + (1.0 - lam) * src[p]
        elif method == CUTMIX:
            r0, c0, r1, c1 = (int(v) for v in outcome.boxes[i])
            mixed[i, r0:r1, c0:c1] = src[p, r0:r1, c0:c1]
    return mixed


def mix_batch(images, labels, cfg, rng):
    """Plan and apply mixing for one batch; returns ``(mixed, outcome)``."""
    images = np.asarray(images)
    b, h, w = images.shape[:3]
    if len(labels) != b:
        raise ConfigError(f"{len(labels)} labels for a batch of {b}")
    outcome = plan_mix(b, h, w, cfg, rng)
    return apply_mix(images, outcome), outcome


def build_targets(labels, outcome, num_classes, loss="bce", smoothing=0.0, style="multilabel"):
    """Target rows for a mixed batch.

    CE, and BCE with ``style="normalized"``, get rows ``lam*onehot(y) +
    (1-lam)*onehot(y_partner)`` blended with the uniform distribution by
    ``smoothing``.  BCE multi-label rows put ``1 - smoothing`` on every class
    picked by the mix and ``smoothing / K`` everywhere else.
    """
    labels = np.asarray(labels, dtype=np.int64)
    k = int(num_classes)
    if np.any(labels < 0) or np.any(labels >= k):
        raise ConfigError("labels must lie in [0, num_classes)")
    if not 0.0 <= smoothing < 0.5:
        raise ConfigError(f"smoothing must be in [0, 0.5), got {smoothing}")
    b = len(labels)
    rows = np.arange(b)
    partners = labels[outcome.partner]
    mixed = np.array([m != NONE for m in outcome.method], dtype=bool)
    if loss == "bce" and style == "multilabel":
        t = np.full((b, k), smoothing / k)
        t[rows, labels] = 1.0 - smoothing
        t[rows[mixed], partners[mixed]] = 1.0 - smoothing
        return TargetMatrix(t, "multilabel")
    if loss not in ("ce", "bce") or style not in ("multilabel", "normalized"):
        raise ConfigError(f"unknown loss/style {loss!r}/{style!r}")
    lam = np.where(mixed, outcome.lam, 1.0)
    t = np.zeros((b, k))
    np.add.at(t, (rows, labels), lam)
    np.add.at(t, (rows, partners), 1.0 - lam)
    if smoothing > 0:
        t = (1.0 - smoothing) * t + smoothing / k
    return TargetMatrix(t, "distribution")
