"""RandAugment with the "increasing" magnitude mode and per-application magnitude noise.

Thirteen ops are available.  In increasing mode every op's distortion grows
with the magnitude M (0..10): blend ops pick interpolation or extrapolation
with a random sign, solarize lowers its threshold and posterize drops bits as
M rises.  ``mstd`` adds Normal(0, mstd) noise to M per application, and the
sentinel :data:`UNIFORM` draws M uniformly from [0, M] instead.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..rng import as_generator
from .image import _require_unit, sample_bilinear

UNIFORM = float("-inf")
MAX_MAGNITUDE = 10.0

BLEND_OPS = ("color", "contrast", "brightness", "sharpness")
GEOMETRIC_OPS = ("rotate", "shear_x", "shear_y", "translate_x", "translate_y")
ALL_OPS = (
    "auto_contrast", "equalize", "rotate", "posterize", "solarize",
    "color", "contrast", "brightness", "sharpness",
    "shear_x", "shear_y", "translate_x", "translate_y",
)

ROTATE_MAX_DEG = 30.0
SHEAR_MAX = 0.3
TRANSLATE_MAX = 0.45
BLEND_SPAN = 0.9
POSTERIZE_MIN_BITS = 4

_LUMA = np.array([0.299, 0.587, 0.114])
_SMOOTH = np.array([[1.0, 1.0, 1.0], [1.0, 5.0, 1.0], [1.0, 1.0, 1.0]]) / 13.0


@dataclass(frozen=True)
class RandAugmentConfig:
    magnitude: float = 9.0
    num_ops: int = 2
    mstd: float = 0.5
    increasing: bool = True
    fill: tuple = (0.5, 0.5, 0.5)
    ops: tuple = field(default=ALL_OPS)

    def __post_init__(self):
        if not 0.0 <= self.magnitude <= MAX_MAGNITUDE:
            raise ConfigError(f"RandAugment magnitude must be in [0, 10], got {self.magnitude}")
        if self.num_ops < 1:
            raise ConfigError(f"RandAugment num_ops must be >= 1, got {self.num_ops}")
        if not (self.mstd == UNIFORM or self.mstd >= 0):
            raise ConfigError(f"mstd must be >= 0 or UNIFORM, got {self.mstd}")
        unknown = set(self.ops) - set(ALL_OPS)
        if unknown or not self.ops:
            raise ConfigError(f"unknown RandAugment ops: {sorted(unknown)}")


def round_half_away(x):
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def sample_magnitude(cfg, rng):
    """Draw the effective magnitude for one op application, clamped to [0, 10]."""
    g = as_generator(rng)
    if cfg.mstd == UNIFORM:
        m = g.uniform(0.0, cfg.magnitude)
    elif cfg.mstd > 0:
        m = cfg.magnitude + g.normal(0.0, cfg.mstd)
    else:
        m = cfg.magnitude
    return float(min(max(m, 0.0), MAX_MAGNITUDE))


def map_magnitude(op, magnitude, increasing=True, rng=None):
    """Concrete parameter for ``op`` at effective magnitude ``magnitude``.

    Returns None for parameter-free ops (auto_contrast, equalize).  Blend and
    geometric ops consume one sign draw from ``rng``.
    """
    if op not in ALL_OPS:
        raise ConfigError(f"unknown RandAugment op {op!r}")
    frac = magnitude / MAX_MAGNITUDE
    if op in ("auto_contrast", "equalize"):
        return None
    if op == "posterize":
        if increasing:
            return 8 - round_half_away((8 - POSTERIZE_MIN_BITS) * frac)
        return POSTERIZE_MIN_BITS + round_half_away((8 - POSTERIZE_MIN_BITS) * frac)
    if op == "solarize":
        return 1.0 - frac if increasing else frac
    sign = 1.0 if as_generator(rng).random() < 0.5 else -1.0
    if op in BLEND_OPS:
        if increasing:
            factor = 1.0 + sign * BLEND_SPAN * frac
        else:
            factor = 0.1 + 1.8 * frac
        return min(max(factor, 0.1), 1.9)
    if op == "rotate":
        return sign * ROTATE_MAX_DEG * frac
    if op in ("shear_x", "shear_y"):
        return sign * SHEAR_MAX * frac
    return sign * TRANSLATE_MAX * frac


def op_strength(op, param):
    """Distance of ``param`` from the op's identity setting."""
    if param is None:
        return 0.0
    if op in BLEND_OPS:
        return abs(param - 1.0)
    if op == "posterize":
        return float(8 - param)
    if op == "solarize":
        return 1.0 - param
    return abs(param)


# -- pixel ops ----------------------------------------------------------------

def _grayscale(px):
    if px.shape[2] == 3:
        return px @ _LUMA
    return px.mean(axis=2)


def _blend(px, degenerate, factor):
    if factor == 1.0:
        return px.copy()
    return np.clip(degenerate + factor * (px - degenerate), 0.0, 1.0)


def _auto_contrast(px):
    out = px.copy()
    for c in range(px.shape[2]):
        lo, hi = px[:, :, c].min(), px[:, :, c].max()
        if hi > lo:
            out[:, :, c] = (px[:, :, c] - lo) / (hi - lo)
    return out


def _equalize(px):
    q = np.clip(np.floor(px * 255.0 + 0.5), 0, 255).astype(np.intp)
    out = px.copy()
    for c in range(px.shape[2]):
        hist = np.bincount(q[:, :, c].ravel(), minlength=256)
        nonzero = hist[hist > 0]
        if nonzero.size <= 1:
            continue
        step = (int(hist.sum()) - int(nonzero[-1])) // 255
        if step == 0:
            continue
        lut = (np.concatenate(([0], np.cumsum(hist)[:-1])) + step // 2) // step
        out[:, :, c] = np.minimum(lut, 255)[q[:, :, c]] / 255.0
    return out


def _posterize(px, bits):
    if bits >= 8:
        return px.copy()
    q = np.clip(np.floor(px * 255.0 + 0.5), 0, 255).astype(np.uint8)
    mask = np.uint8((0xFF << (8 - bits)) & 0xFF)
    return (q & mask) / 255.0


def _solarize(px, threshold):
    # strict comparison: threshold 1.0 leaves every unit-interval pixel alone
    return np.where(px > threshold, 1.0 - px, px)


def _smooth(px):
    out = px.copy()
    h, w, _ = px.shape
    if h < 3 or w < 3:
        return out
    acc = np.zeros((h - 2, w - 2, px.shape[2]))
    for dy in range(3):
        for dx in range(3):
            acc += _SMOOTH[dy, dx] * px[dy:dy + h - 2, dx:dx + w - 2]
    out[1:-1, 1:-1] = acc
    return out


def _affine(px, matrix, fill):
    """Inverse-map output pixels through ``matrix`` (2x3, centred coords)."""
    h, w, _ = px.shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    yy, xx = np.meshgrid(np.arange(h) - cy, np.arange(w) - cx, indexing="ij")
    (a, b, tx), (c, d, ty) = matrix
    xs = a * xx + b * yy + tx + cx
    ys = c * xx + d * yy + ty + cy
    # snap float noise so e.g. a 360 degree rotation lands on the grid exactly
    xs = np.round(xs, 9)
    ys = np.round(ys, 9)
    return np.clip(sample_bilinear(px, ys, xs, fill), 0.0, 1.0)


def apply_op(img, op, param, fill=(0.5, 0.5, 0.5)):
    """Apply one RandAugment op with an already-mapped parameter."""
    _require_unit(img, "apply_op")
    px = img.pixels
    fill = np.asarray(fill, dtype=np.float64)
    if fill.size != img.channels:
        raise ConfigError(f"fill needs {img.channels} entries, got {fill.size}")
    if op == "auto_contrast":
        out = _auto_contrast(px)
    elif op == "equalize":
        out = _equalize(px)
    elif op == "posterize":
        out = _posterize(px, int(param))
    elif op == "solarize":
        out = _solarize(px, param)
    elif op == "color":
        gray = _grayscale(px)[:, :, None]
        out = _blend(px, np.broadcast_to(gray, px.shape), param)
    elif op == "contrast":
        out = _blend(px, np.full_like(px, _grayscale(px).mean()), param)
    elif op == "brightness":
        out = _blend(px, np.zeros_like(px), param)
    elif op == "sharpness":
        out = _blend(px, _smooth(px), param)
    elif op == "rotate":
        if param == 0:
            out = px.copy()
        else:
            t = math.radians(param)
            out = _affine(px, ((math.cos(t), math.sin(t), 0.0), (-math.sin(t), math.cos(t), 0.0)), fill)
    elif op in ("shear_x", "shear_y"):
        if param == 0:
            out = px.copy()
        elif op == "shear_x":
            out = _affine(px, ((1.0, param, 0.0), (0.0, 1.0, 0.0)), fill)
        else:
            out = _affine(px, ((1.0, 0.0, 0.0), (param, 1.0, 0.0)), fill)
    elif op in ("translate_x", "translate_y"):
        if param == 0:
            out = px.copy()
        elif op == "translate_x":
            out = _affine(px, ((1.0, 0.0, -param * img.width), (0.0, 1.0, 0.0)), fill)
        else:
            out = _affine(px, ((1.0, 0.0, 0.0), (0.0, 1.0, -param * img.height)), fill)
    else:
        raise ConfigError(f"unknown RandAugment op {op!r}")
    return img.replace(out)


def rand_augment(img, cfg, rng, trace=None):
    """Apply ``cfg.num_ops`` ops drawn uniformly with replacement, in draw order.

    When ``trace`` is a list, ``(op, magnitude, param)`` tuples are appended.
    """
    g = as_generator(rng)
    for _ in range(cfg.num_ops):
        op = cfg.ops[int(g.integers(0, len(cfg.ops)))]
        m = sample_magnitude(cfg, g)
        param = map_magnitude(op, m, cfg.increasing, g)
        img = apply_op(img, op, param, cfg.fill)
        if trace is not None:
            trace.append((op, m, param))
    return img
