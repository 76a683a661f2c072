"""Cross-entropy and binary cross-entropy on the autodiff tape."""

import numpy as np

from .errors import ContractError, DimensionError
from .mixing import TargetMatrix
from .tensor import Tensor, bce_with_logits, log_softmax


def _values(targets):
    if isinstance(targets, TargetMatrix):
        return targets.values, targets.semantics
    return np.asarray(targets, dtype=np.float64), None


def ce_loss(logits, targets):
    """Batch mean of ``-sum_k t_k log softmax(z)_k``; needs distribution targets."""
    t, semantics = _values(targets)
    if semantics == "multilabel":
        raise ContractError("cross-entropy needs distribution targets, got multilabel")
    if t.shape != logits.shape or logits.ndim != 2:
        raise DimensionError(f"ce: logits {logits.shape} vs targets {t.shape}")
    picked = log_softmax(logits, axis=1) * Tensor(t)
    return picked.sum() * (-1.0 / logits.shape[0])


def bce_loss(logits, targets):
    """Mean over all B*K entries of the per-class binary cross-entropy."""
    t, _ = _values(targets)
    if np.any(t < 0) or np.any(t > 1):
        raise ContractError("BCE targets must lie in [0, 1]")
    return bce_with_logits(logits, t).mean()


def loss_fn(kind):
    if kind == "ce":
        return ce_loss
    if kind == "bce":
        return bce_loss
    raise ValueError(f"unknown loss {kind!r}")
