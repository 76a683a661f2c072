"""Parameter update rules: LAMB, SGD (Nesterov), TF-style RMSProp, AdamP, plus AGC.

Parameters are :class:`~recipekit.tensor.Tensor` leaves updated in place.
Weight matrices use the (in, out) layout, so "per output unit" norms reduce
over every axis except the last; rank-0/1 tensors form a single group.

Weight decay placement differs per rule and follows each recipe:
SGD and RMSProp add ``wd * w`` to the gradient (coupled), LAMB adds it to the
adaptive update before the trust ratio, AdamP decays the weights directly.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, NumericError


def unit_axes(arr):
    """Axes reduced by unit-wise norms (None means the whole tensor)."""
    if arr.ndim <= 1:
        return None
    return tuple(range(arr.ndim - 1))


def unitwise_norm(arr):
    axes = unit_axes(arr)
    if axes is None:
        return np.sqrt(np.sum(arr * arr))
    return np.sqrt(np.sum(arr * arr, axis=axes, keepdims=True))


def _as_params(params):
    params = list(params)
    if not params:
        raise ConfigError("optimizer got an empty parameter list")
    return params


class Optimizer:
    """Shared bookkeeping: parameter list, per-parameter state, step count."""

    def __init__(self, params, lr):
        if not lr > 0:
            raise ConfigError(f"learning rate must be > 0, got {lr}")
        self.params = _as_params(params)
        self.lr = float(lr)
        self.t = 0
        self.state = [dict() for _ in self.params]

    def zero_grad(self):
        for p in self.params:
            p.grad = None

    def _grads(self):
        grads = []
        for p in self.params:
            g = np.zeros_like(p.data) if p.grad is None else p.grad
            if not np.all(np.isfinite(g)):
                raise NumericError("non-finite gradient; optimizer step aborted")
            grads.append(g)
        return grads

    def step(self, lr=None):
        lr = self.lr if lr is None else float(lr)
        grads = self._grads()
        self.t += 1
        for p, g, st in zip(self.params, grads, self.state):
            self._update(p, g, st, lr)

    def _update(self, p, g, state, lr):
        raise NotImplementedError


@dataclass
class LambConfig:
    lr: float = 5e-3
    betas: tuple = (0.9, 0.999)
    eps: float = 1e-6
    weight_decay: float = 0.01
    trust_clip: Optional[float] = None


class Lamb(Optimizer):
    """Adam moments with bias correction, scaled per tensor by ``||w|| / ||r||``."""

    def __init__(self, params, lr=5e-3, betas=(0.9, 0.999), eps=1e-6, weight_decay=0.0,
                 trust_clip=None):
        super().__init__(params, lr)
        b1, b2 = betas
        if not (0 <= b1 < 1 and 0 <= b2 < 1):
            raise ConfigError(f"betas must lie in [0, 1), got {betas}")
        self.betas = (float(b1), float(b2))
        self.eps = float(eps)
        self.weight_decay = float(weight_decay)
        self.trust_clip = trust_clip

    def _update(self, p, g, st, lr):
        b1, b2 = self.betas
        if not st:
            st["m"] = np.zeros_like(p.data)
            st["v"] = np.zeros_like(p.data)
        m, v = st["m"], st["v"]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1 ** self.t)
        v_hat = v / (1.0 - b2 ** self.t)
        r = m_hat / (np.sqrt(v_hat) + self.eps)
        if self.weight_decay:
            r = r + self.weight_decay * p.data
        w_norm = math.sqrt(float(np.sum(p.data * p.data)))
        r_norm = math.sqrt(float(np.sum(r * r)))
        trust = w_norm / r_norm if w_norm > 0 and r_norm > 0 else 1.0
        if self.trust_clip is not None:
            trust = min(trust, self.trust_clip)
        st["trust"] = trust
        p.data -= lr * trust * r


class SGD(Optimizer):
    """SGD with (Nesterov) momentum and coupled L2 weight decay."""

    def __init__(self, params, lr=0.1, momentum=0.9, weight_decay=0.0, nesterov=True):
        super().__init__(params, lr)
        if not 0 <= momentum < 1:
            raise ConfigError(f"momentum must lie in [0, 1), got {momentum}")
        self.momentum = float(momentum)
        self.weight_decay = float(weight_decay)
        self.nesterov = nesterov

    def _update(self, p, g, st, lr):
        g = g + self.weight_decay * p.data if self.weight_decay else g
        buf = st.setdefault("buf", np.zeros_like(p.data))
        buf *= self.momentum
        buf += g
        if self.nesterov:
            p.data -= lr * (g + self.momentum * buf)
        else:
            p.data -= lr * buf


class RMSPropTF(Optimizer):
    """RMSProp with TensorFlow 1.x semantics.

    The square average starts at ones, epsilon sits inside the square root and
    the learning rate is folded into the momentum buffer.
    """

    def __init__(self, params, lr=0.01, rho=0.9, eps=1e-3, momentum=0.9, weight_decay=0.0):
        super().__init__(params, lr)
        if not 0 <= rho < 1:
            raise ConfigError(f"rho must lie in [0, 1), got {rho}")
        self.rho = float(rho)
        self.eps = float(eps)
        self.momentum = float(momentum)
        self.weight_decay = float(weight_decay)

    def _update(self, p, g, st, lr):
        if not st:
            st["v"] = np.ones_like(p.data)
            st["buf"] = np.zeros_like(p.data)
        g = g + self.weight_decay * p.data if self.weight_decay else g
        v, buf = st["v"], st["buf"]
        v *= self.rho
        v += (1.0 - self.rho) * g * g
        buf *= self.momentum
        buf += lr * g / np.sqrt(v + self.eps)
        p.data -= buf


class AdamP(Optimizer):
    """Adam whose update is projected off the weight direction when ``w`` and
    ``g`` are nearly orthogonal (scale-invariant weights).

    Projection is decided per unit group: if ``|cos(w, g)| < delta / sqrt(n)``
    (``n`` elements in the group) the radial component of the update is removed
    and that group's weight decay is scaled by ``wd_ratio``.
    """

    def __init__(self, params, lr=1e-3, betas=(0.9, 0.999), eps=1e-8, weight_decay=0.0,
                 delta=0.1, wd_ratio=0.1):
        super().__init__(params, lr)
        self.betas = tuple(float(b) for b in betas)
        self.eps = float(eps)
        self.weight_decay = float(weight_decay)
        self.delta = float(delta)
        self.wd_ratio = float(wd_ratio)

    def project(self, w, g, u):
        """Return ``(u_projected, wd_scale)``, both shaped like ``w``."""
        axes = unit_axes(w)
        keep = axes is not None
        w_norm = np.sqrt(np.sum(w * w, axis=axes, keepdims=keep))
        g_norm = np.sqrt(np.sum(g * g, axis=axes, keepdims=keep))
        dot_wg = np.sum(w * g, axis=axes, keepdims=keep)
        denom = w_norm * g_norm
        cos = np.abs(dot_wg) / np.where(denom > 0, denom, 1.0)
        group_size = w.size if axes is None else w.size // w.shape[-1]
        project = (w_norm > 0) & (cos < self.delta / math.sqrt(group_size))
        if not np.any(project):
            return u, np.ones_like(w)
        safe = np.where(w_norm > 0, w_norm * w_norm, 1.0)
        radial = np.sum(w * u, axis=axes, keepdims=keep) / safe
        u = np.where(project, u - radial * w, u)
        scale = np.where(project, self.wd_ratio, 1.0)
        return u, np.broadcast_to(scale, w.shape)

    def _update(self, p, g, st, lr):
        b1, b2 = self.betas
        if not st:
            st["m"] = np.zeros_like(p.data)
            st["v"] = np.zeros_like(p.data)
        m, v = st["m"], st["v"]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        u = (m / (1.0 - b1 ** self.t)) / (np.sqrt(v / (1.0 - b2 ** self.t)) + self.eps)
        u, wd_scale = self.project(p.data, g, u)
        decay = lr * self.weight_decay * wd_scale * p.data if self.weight_decay else 0.0
        p.data -= lr * u + decay


@dataclass
class AgcConfig:
    clip_factor: float = 0.05
    eps: float = 1e-3

    def __post_init__(self):
        if not self.clip_factor > 0:
            raise ConfigError(f"AGC clip factor must be > 0, got {self.clip_factor}")


def agc_clip(params, clip_factor, eps=1e-3):
    """Adaptive gradient clipping, in place, per unit group.

    A group whose ``||g|| / max(||w||, eps)`` exceeds ``clip_factor`` has its
    gradient rescaled to exactly that ratio.  Callers choose which tensors to
    pass (the trainer leaves biases out).
    """
    if not clip_factor > 0:
        raise ConfigError(f"AGC clip factor must be > 0, got {clip_factor}")
    for p in params:
        if p.grad is None:
            continue
        w_norm = np.maximum(unitwise_norm(p.data), eps)
        g_norm = unitwise_norm(p.grad)
        max_norm = clip_factor * w_norm
        scale = np.where(g_norm > max_norm, max_norm / np.where(g_norm > 0, g_norm, 1.0), 1.0)
        p.grad = p.grad * scale


OPTIMIZERS = {"lamb": Lamb, "sgd": SGD, "rmsprop_tf": RMSPropTF, "adamp": AdamP}


def build_optimizer(kind, params, **kwargs):
    try:
        cls = OPTIMIZERS[kind]
    except KeyError:
        raise ConfigError(f"unknown optimizer {kind!r}; expected one of {sorted(OPTIMIZERS)}") from None
    return cls(params, **kwargs)
