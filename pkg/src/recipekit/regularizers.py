"""Stochastic depth, dropout, EMA weight averaging and the repeated-augmentation sampler."""

import math

import numpy as np

from .errors import ConfigError, ContractError
from .rng import as_generator, stream
from .tensor import Tensor


def drop_path(x, rate, rng, training=True):
    """Zero whole rows of the residual branch ``x`` (B x D) with probability ``rate``.

    Kept rows are scaled by ``1 / (1 - rate)`` so the expectation is unchanged.
    """
    if not 0 <= rate < 1:
        raise ConfigError(f"drop_path rate must be in [0, 1), got {rate}")
    if not training or rate == 0:
        return x
    keep = 1.0 - rate
    b = x.shape[0]
    mask = (as_generator(rng).random(b) < keep) / keep
    return x * Tensor(mask.reshape((b,) + (1,) * (x.ndim - 1)))


def dropout(x, rate, rng, training=True):
    """Inverted per-element dropout; identity at eval or ``rate == 0``."""
    if not 0 <= rate < 1:
        raise ConfigError(f"dropout rate must be in [0, 1), got {rate}")
    if not training or rate == 0:
        return x
    keep = 1.0 - rate
    mask = (as_generator(rng).random(x.shape) < keep) / keep
    return x * Tensor(mask)


class EmaState:
    """Exponential moving average of parameter values.

    The shadow starts as a copy of the live weights.
    """

    def __init__(self, params, decay=0.9999):
        if not 0 <= decay < 1:
            raise ConfigError(f"EMA decay must be in [0, 1), got {decay}")
        self.decay = float(decay)
        self.shadow = [np.array(p.data, copy=True) for p in params]

    def update(self, params):
        params = list(params)
        if len(params) != len(self.shadow):
            raise ContractError("EMA parameter count changed")
        d = self.decay
        for s, p in zip(self.shadow, params):
            if s.shape != p.data.shape:
                raise ContractError(f"EMA shape drift: {s.shape} vs {p.data.shape}")
            s *= d
            s += (1.0 - d) * p.data

    def swap(self, params):
        """Exchange shadow and live values (call twice to restore)."""
        for i, p in enumerate(params):
            live = p.data
            p.data = self.shadow[i]
            self.shadow[i] = live


def ema_update(state, live_params):
    state.update(live_params)


class RepeatedAugSampler:
    """Epoch index order with each selected sample repeated ``repeats`` times.

    ``ceil(N / repeats)`` samples are drawn from a seeded shuffle, so an epoch
    still has about N slots and some samples go unseen.  ``repeats == 1``
    degenerates to a plain shuffle.
    """

    def __init__(self, dataset_size, batch_size, repeats=3, seed=0):
        if repeats < 1:
            raise ConfigError(f"repeats must be >= 1, got {repeats}")
        if repeats > 1 and batch_size % repeats:
            raise ConfigError(f"batch not divisible by repeats ({batch_size} % {repeats})")
        self.dataset_size = int(dataset_size)
        self.batch_size = int(batch_size)
        self.repeats = int(repeats)
        self.seed = int(seed)

    def epoch(self, epoch, num_replicas=1, rank=0):
        """``(indices, repeat_ordinals)`` for this epoch and replica."""
        perm = stream(self.seed, epoch, purpose="sampler").permutation(self.dataset_size)
        m = self.repeats
        chosen = perm[: math.ceil(self.dataset_size / m)]
        idx = np.repeat(chosen, m)
        rep = np.tile(np.arange(m), len(chosen))
        return idx[rank::num_replicas], rep[rank::num_replicas]


def ra_indices(sampler, epoch, num_replicas=1, rank=0):
    return sampler.epoch(epoch, num_replicas, rank)[0]
