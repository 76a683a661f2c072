"""Counter-based random streams.

Every random decision in the pipeline draws from a generator keyed by a tuple
of integers such as ``(seed, epoch, sample, repeat, purpose)``.  The key is
hashed through :class:`numpy.random.SeedSequence`, so a given key always yields
the same draws no matter which worker evaluates it or in which order.
"""

import zlib

import numpy as np

# Stable purpose tags.  Values are part of the reproducibility contract.
PURPOSES = {
    "data": 1,
    "rrc": 2,
    "flip": 3,
    "randaugment": 4,
    "erasing": 5,
    "mix": 6,
    "drop_path": 7,
    "dropout": 8,
    "init": 9,
    "sampler": 10,
    "lr_noise": 11,
}


def purpose_id(tag):
    if isinstance(tag, int):
        return tag
    try:
        return PURPOSES[tag]
    except KeyError:
        # unregistered tags still get a stable id
        return 1000 + zlib.crc32(tag.encode("utf-8"))


def stream(*key, purpose=None):
    """Return a fresh generator for ``key`` (non-negative ints).

    ``purpose`` may be a registered tag name or an int and is appended to the key.
    """
    words = [int(k) for k in key]
    if any(k < 0 for k in words):
        raise ValueError(f"rng key entries must be non-negative, got {key}")
    if purpose is not None:
        words.append(purpose_id(purpose))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(words)))


class RngStream:
    """A keyed stream that can spawn child streams by extending its key."""

    def __init__(self, *key):
        self.key = tuple(int(k) for k in key)
        self._gen = None

    @property
    def gen(self):
        if self._gen is None:
            self._gen = stream(*self.key)
        return self._gen

    def child(self, *extra, purpose=None):
        ext = list(extra)
        if purpose is not None:
            ext.append(purpose_id(purpose))
        return RngStream(*self.key, *ext)

    # thin conveniences used by the augmentation code
    def uniform(self, low=0.0, high=1.0, size=None):
        return self.gen.uniform(low, high, size)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self.gen.normal(loc, scale, size)

    def integers(self, low, high=None, size=None):
        return self.gen.integers(low, high, size)

    def random(self, size=None):
        return self.gen.random(size)

    def __repr__(self):
        return f"RngStream{self.key}"


def as_generator(rng):
    """Accept an RngStream, a Generator, or an int seed."""
    if isinstance(rng, RngStream):
        return rng.gen
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        raise ValueError("an rng stream is required")
    return stream(int(rng))
