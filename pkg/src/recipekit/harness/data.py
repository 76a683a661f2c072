"""Synthetic oriented-grating dataset and the ``RSB1`` binary split format.

Class ``k`` of ``K`` is a sinusoidal grating at angle ``k*pi/K`` with
``2 + (k mod 5)`` cycles across the image, amplitude 0.5 around mid-grey,
a per-sample random phase, and Normal(0, noise_std) pixel noise, clamped to
[0, 1].  Every sample is a pure function of ``(seed, split, index)``.

File layout (little-endian)::

    b"RSB1" | u32 count | u16 height | u16 width | u8 channels | u8 reserved
    count * H*W*C pixel bytes (u8, row-major, channel-last)
    count * u16 labels
"""

import math
import os
import struct
from dataclasses import dataclass

import numpy as np

from .. import configfmt
from ..errors import ConfigError
from ..rng import stream

MAGIC = b"RSB1"
HEADER = struct.Struct("<4sIHHBB")
SPLITS = ("train", "val", "test")
_SPLIT_IDS = {"train": 0, "val": 1, "test": 2}


@dataclass(frozen=True)
class SyntheticDatasetSpec:
    num_classes: int = 10
    train: int = 5000
    val: int = 1000
    test: int = 1000
    resolution: int = 32
    channels: int = 3
    seed: int = 0
    amplitude: float = 0.5
    noise_std: float = 0.1
    phase_jitter: float = 0.7

    def __post_init__(self):
        if self.num_classes < 2 or self.num_classes > 65535:
            raise ConfigError("num_classes must be in [2, 65535]")
        if min(self.train, self.val, self.test) < 0:
            raise ConfigError("split sizes must be >= 0")
        if self.resolution < 1 or self.channels < 1:
            raise ConfigError("resolution and channels must be >= 1")
        if not 0 <= self.phase_jitter <= 1:
            raise ConfigError("phase_jitter must be in [0, 1]")

    def size(self, split):
        return getattr(self, split)

    @classmethod
    def from_text(cls, text):
        return configfmt.deserialize(text, cls, cls())


@dataclass
class Split:
    images: np.ndarray  # N x H x W x C, uint8
    labels: np.ndarray  # N, int64

    def __len__(self):
        return len(self.labels)

    @property
    def resolution(self):
        return self.images.shape[1]


@dataclass
class Dataset:
    train: Split
    val: Split
    test: Split

    @property
    def num_classes(self):
        return int(max(s.labels.max() for s in (self.train, self.val, self.test) if len(s)) + 1)

    def split(self, name):
        return getattr(self, name)


def class_pattern(k, spec):
    """Angle (radians) and cycles-per-image of class ``k``."""
    return k * math.pi / spec.num_classes, 2 + (k % 5)


def render_sample(spec, split, index):
    """Return ``(pixels uint8 HxWxC, label)`` for one sample."""
    label = index % spec.num_classes
    g = stream(spec.seed, _SPLIT_IDS[split], index, purpose="data")
    theta, freq = class_pattern(label, spec)
    phase = g.uniform(0.0, 2.0 * math.pi * spec.phase_jitter) if spec.phase_jitter else 0.0
    s = spec.resolution
    yy, xx = np.meshgrid(np.arange(s), np.arange(s), indexing="ij")
    arg = 2.0 * math.pi * freq * (xx * math.cos(theta) + yy * math.sin(theta)) / s + phase
    base = 0.5 + spec.amplitude * np.sin(arg)
    px = base[:, :, None] + g.normal(0.0, spec.noise_std, (s, s, spec.channels))
    px = np.clip(px, 0.0, 1.0)
    return np.floor(px * 255.0 + 0.5).astype(np.uint8), label


def generate_split(spec, split):
    n = spec.size(split)
    s, c = spec.resolution, spec.channels
    images = np.empty((n, s, s, c), dtype=np.uint8)
    labels = np.empty(n, dtype=np.int64)
    for i in range(n):
        images[i], labels[i] = render_sample(spec, split, i)
    return Split(images, labels)


def generate_dataset(spec):
    return Dataset(*(generate_split(spec, name) for name in SPLITS))


def write_split(path, split):
    n, h, w, c = split.images.shape
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, n, h, w, c, 0))
        fh.write(np.ascontiguousarray(split.images, dtype=np.uint8).tobytes())
        fh.write(split.labels.astype("<u2").tobytes())


def read_split(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, n, h, w, c, _ = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    npx = n * h * w * c
    expected = HEADER.size + npx + 2 * n
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(raw)}")
    images = np.frombuffer(raw, dtype=np.uint8, count=npx, offset=HEADER.size).reshape(n, h, w, c)
    labels = np.frombuffer(raw, dtype="<u2", count=n, offset=HEADER.size + npx).astype(np.int64)
    return Split(images.copy(), labels)


def split_path(stem, split):
    return f"{stem}.{split}"


def write_dataset(stem, dataset):
    parent = os.path.dirname(os.path.abspath(stem))
    os.makedirs(parent, exist_ok=True)
    for name in SPLITS:
        write_split(split_path(stem, name), dataset.split(name))


def read_dataset(stem):
    return Dataset(*(read_split(split_path(stem, name)) for name in SPLITS))


def channel_stats(split):
    """Per-channel mean and std of a split in unit scale."""
    px = split.images.reshape(-1, split.images.shape[-1]).astype(np.float64) / 255.0
    return tuple(px.mean(axis=0)), tuple(px.std(axis=0))
