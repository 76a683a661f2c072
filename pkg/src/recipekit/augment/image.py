"""Channel-last float image buffers and the resampling helpers shared by all ops."""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, ContractError


@dataclass(eq=False)
class ImageBuffer:
    """H x W x C pixels.  Unit-interval until :func:`normalize` sets the flag."""

    pixels: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim == 2:
            px = px[:, :, None]
        if px.ndim != 3:
            raise ValueError(f"ImageBuffer needs H x W x C pixels, got shape {px.shape}")
        self.pixels = px

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def channels(self):
        return self.pixels.shape[2]

    def copy(self):
        return ImageBuffer(self.pixels.copy(), self.normalized)

    def replace(self, pixels):
        return ImageBuffer(pixels, self.normalized)

    @classmethod
    def from_uint8(cls, arr):
        return cls(np.asarray(arr, dtype=np.float64) / 255.0)

    def to_uint8(self):
        if self.normalized:
            raise ContractError("cannot quantize a normalized image")
        return np.clip(np.floor(self.pixels * 255.0 + 0.5), 0, 255).astype(np.uint8)


def _require_unit(img, op):
    if img.normalized:
        raise ContractError(f"{op} expects an un-normalized image")


def sample_bilinear(pixels, ys, xs, fill=None):
    """Bilinearly sample ``pixels`` at source coordinates ``(ys, xs)``.

    Pixel centres sit on integer coordinates.  With ``fill`` given, coordinates
    outside the image blend towards that per-channel value over a one-pixel
    border; without it, coordinates are clamped to the edge.
    """
    h, w, c = pixels.shape
    if fill is not None:
        padded = np.empty((h + 2, w + 2, c))
        padded[...] = np.asarray(fill, dtype=np.float64).reshape(1, 1, c)
        padded[1:-1, 1:-1] = pixels
        src = padded
        ys = np.clip(ys + 1.0, 0.0, h + 1.0)
        xs = np.clip(xs + 1.0, 0.0, w + 1.0)
        hh, ww = h + 2, w + 2
    else:
        src = pixels
        ys = np.clip(ys, 0.0, h - 1.0)
        xs = np.clip(xs, 0.0, w - 1.0)
        hh, ww = h, w
    shape = ys.shape
    ys = ys.reshape(-1)
    xs = xs.reshape(-1)
    y0 = ys.astype(np.intp)  # coordinates are non-negative, so this floors
    x0 = xs.astype(np.intp)
    dy = y0 < hh - 1
    dx = x0 < ww - 1
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[:, None]
    flat = src.reshape(hh * ww, c)
    i00 = y0 * ww + x0
    i01 = i00 + dx
    i10 = i00 + dy * ww
    i11 = i10 + dx
    take = np.take
    top = take(flat, i00, axis=0)
    top += fx * (take(flat, i01, axis=0) - top)
    bot = take(flat, i10, axis=0)
    bot += fx * (take(flat, i11, axis=0) - bot)
    top += fy * (bot - top)
    return top.reshape(*shape, c)


def _interp_matrix(start, length, size, out):
    """Rows of linear-interpolation weights mapping ``size`` samples to ``out``."""
    pos = start + (np.arange(out) + 0.5) * (length / out) - 0.5
    pos = np.clip(pos, 0.0, size - 1.0)
    i0 = pos.astype(np.intp)
    i1 = np.minimum(i0 + 1, size - 1)
    frac = pos - i0
    mat = np.zeros((out, size))
    rows = np.arange(out)
    mat[rows, i0] += 1.0 - frac
    mat[rows, i1] += frac
    return mat


def resize_box(pixels, top, left, box_h, box_w, out_h, out_w):
    """Resample the box ``[top, top+box_h) x [left, left+box_w)`` to ``out_h x out_w``.

    Bilinear (half-pixel centres), computed separably; an integer-aligned
    identity mapping reproduces the input exactly.
    """
    if out_h <= 0 or out_w <= 0:
        raise ConfigError(f"target size must be positive, got {(out_h, out_w)}")
    h, w, _ = pixels.shape
    ry = _interp_matrix(top, box_h, h, out_h)
    rx = _interp_matrix(left, box_w, w, out_w)
    rows = np.tensordot(ry, pixels, axes=(1, 0))
    return np.ascontiguousarray(np.tensordot(rx, rows, axes=(1, 1)).transpose(1, 0, 2))


def resize(img, out_h, out_w):
    if (out_h, out_w) == (img.height, img.width):
        return img.copy()
    return img.replace(resize_box(img.pixels, 0, 0, img.height, img.width, out_h, out_w))


def eval_resize_size(test_res, crop_ratio):
    """Shorter side used before the centre crop: ``round(test_res / crop_ratio)``."""
    if not 0 < crop_ratio <= 1:
        raise ConfigError(f"crop ratio must be in (0, 1], got {crop_ratio}")
    # half-up rounding, independent of Python's banker's rounding
    return int(np.floor(test_res / crop_ratio + 0.5))


def center_crop(img, size):
    if size > img.height or size > img.width:
        raise ConfigError(f"crop {size} larger than image {img.height}x{img.width}")
    top = (img.height - size) // 2
    left = (img.width - size) // 2
    return img.replace(img.pixels[top:top + size, left:left + size].copy())


def eval_transform(img, test_res, crop_ratio):
    """Resize the shorter side to ``round(test_res / crop_ratio)``, then centre-crop."""
    short = eval_resize_size(test_res, crop_ratio)
    h, w = img.height, img.width
    if h <= w:
        nh, nw = short, max(short, int(np.floor(w * short / h + 0.5)))
    else:
        nh, nw = max(short, int(np.floor(h * short / w + 0.5))), short
    return center_crop(resize(img, nh, nw), test_res)


def normalize(img, mean, std):
    """Standardize per channel and set the ``normalized`` flag."""
    if img.normalized:
        raise ContractError("image is already normalized")
    mean = np.asarray(mean, dtype=np.float64).reshape(-1)
    std = np.asarray(std, dtype=np.float64).reshape(-1)
    if mean.size != img.channels or std.size != img.channels:
        raise ConfigError(f"need {img.channels} mean/std entries")
    if np.any(std == 0):
        raise ConfigError("zero std in normalization stats")
    return ImageBuffer((img.pixels - mean) / std, normalized=True)


def denormalize(img, mean, std):
    if not img.normalized:
        raise ContractError("image is not normalized")
    mean = np.asarray(mean, dtype=np.float64).reshape(-1)
    std = np.asarray(std, dtype=np.float64).reshape(-1)
    return ImageBuffer(img.pixels * std + mean, normalized=False)
