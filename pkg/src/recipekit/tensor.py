"""Dense float64 tensors with reverse-mode automatic differentiation.

Only the handful of operations needed by the toy network, the losses and the
regularizers are provided.  Every forward op checks that its result is finite;
NaN/Inf raises :class:`~recipekit.errors.NumericError` immediately instead of
propagating silently.

Gradients accumulate additively into leaf tensors, so callers must
``zero_grad()`` before each new backward pass.
"""

import math

import numpy as np

from .errors import ContractError, DimensionError, NumericError

_GELU_C = math.sqrt(2.0 / math.pi)
_GELU_K = 0.044715


def _check_finite(arr, op):
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"non-finite value produced by {op}")
    return arr


def _unbroadcast(grad, shape):
    """Sum ``grad`` down to ``shape`` (reverse of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    ndiff = grad.ndim - len(shape)
    if ndiff > 0:
        grad = grad.sum(axis=tuple(range(ndiff)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    """N-D array of float64 with an optional gradient.

    ``_parents`` and ``_backward`` describe the op that produced the tensor;
    leaves have neither.  ``_backward(g)`` returns one gradient per parent.
    """

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "op", "_consumed")

    def __init__(self, data, requires_grad=False, _parents=(), _backward=None, op="leaf"):
        if isinstance(data, np.ndarray):
            arr = np.require(data, dtype=np.float64, requirements="C")  # keeps 0-d as 0-d
        else:
            arr = np.array(data, dtype=np.float64, copy=True)
        self.data = arr
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents = _parents
        self._backward = _backward
        self.op = op
        self._consumed = False

    # -- basic introspection ---------------------------------------------
    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def is_leaf(self):
        return not self._parents

    def numpy(self):
        return self.data

    def item(self):
        if self.data.size != 1:
            raise DimensionError(f"item() needs a single element, shape is {self.shape}")
        return float(self.data.reshape(()))

    def detach(self):
        return Tensor(self.data)

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag}, op={self.op})"

    # -- operator sugar ----------------------------------------------------
    def __add__(self, other):
        return elementwise(self, other, "add")

    def __radd__(self, other):
        return elementwise(self, other, "add")

    def __sub__(self, other):
        return elementwise(self, other, "sub")

    def __rsub__(self, other):
        return elementwise(_lift(other), self, "sub")

    def __mul__(self, other):
        return elementwise(self, other, "mul")

    def __rmul__(self, other):
        return elementwise(self, other, "mul")

    def __truediv__(self, other):
        return elementwise(self, other, "div")

    def __rtruediv__(self, other):
        return elementwise(_lift(other), self, "div")

    def __neg__(self):
        return elementwise(self, -1.0, "mul")

    def __matmul__(self, other):
        return matmul(self, other)

    def sum(self, axis=None):
        return reduce(self, "sum", axis)

    def mean(self, axis=None):
        return reduce(self, "mean", axis)

    def relu(self):
        return activation(self, "relu")

    def gelu(self):
        return activation(self, "gelu")

    def sigmoid(self):
        return activation(self, "sigmoid")

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def backward(self):
        backward(self)


def _lift(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(data, parents, backward_fn, op):
    _check_finite(data, op)
    live = tuple(p for p in parents if p.requires_grad)
    if not live:
        return Tensor(data, op=op)
    return Tensor(data, requires_grad=True, _parents=parents, _backward=backward_fn, op=op)


# -- ops ---------------------------------------------------------------------

def matmul(a, b):
    """Matrix product of two 2-D tensors."""
    a, b = _lift(a), _lift(b)
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionError(f"matmul expects 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul inner extents differ: {a.shape} @ {b.shape}")
    out = a.data @ b.data

    def bw(g):
        return g @ b.data.T, a.data.T @ g

    return _make(out, (a, b), bw, "matmul")


def elementwise(a, b, kind):
    """Pointwise add/sub/mul/div.  ``b`` may be a scalar or broadcastable."""
    a, b = _lift(a), _lift(b)
    try:
        shape = np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise DimensionError(f"{kind}: shapes {a.shape} and {b.shape} do not broadcast") from None
    x, y = a.data, b.data
    if kind == "add":
        out = x + y

        def bw(g):
            return _unbroadcast(g, x.shape), _unbroadcast(g, y.shape)
    elif kind == "sub":
        out = x - y

        def bw(g):
            return _unbroadcast(g, x.shape), _unbroadcast(-g, y.shape)
    elif kind == "mul":
        out = x * y

        def bw(g):
            return _unbroadcast(g * y, x.shape), _unbroadcast(g * x, y.shape)
    elif kind == "div":
        if np.any(y == 0):
            raise NumericError("division by zero")
        out = x / y

        def bw(g):
            return _unbroadcast(g / y, x.shape), _unbroadcast(-g * x / (y * y), y.shape)
    else:
        raise ValueError(f"unknown elementwise kind {kind!r}")
    assert out.shape == shape
    return _make(out, (a, b), bw, kind)


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def gelu_value(x):
    return 0.5 * x * (1.0 + np.tanh(_GELU_C * (x + _GELU_K * x ** 3)))


def activation(x, kind):
    """relu, gelu (tanh approximation) or sigmoid."""
    x = _lift(x)
    v = x.data
    if kind == "relu":
        out = np.maximum(v, 0.0)

        def bw(g):
            return (g * (v > 0),)
    elif kind == "gelu":
        t = np.tanh(_GELU_C * (v + _GELU_K * v ** 3))
        out = 0.5 * v * (1.0 + t)

        def bw(g):
            dt = (1.0 - t * t) * _GELU_C * (1.0 + 3.0 * _GELU_K * v * v)
            return (g * (0.5 * (1.0 + t) + 0.5 * v * dt),)
    elif kind == "sigmoid":
        out = _sigmoid(v)

        def bw(g):
            return (g * out * (1.0 - out),)
    else:
        raise ValueError(f"unknown activation {kind!r}")
    return _make(out, (x,), bw, kind)


def _norm_axes(axes, ndim):
    if axes is None:
        return tuple(range(ndim))
    if isinstance(axes, int):
        axes = (axes,)
    out = []
    for ax in axes:
        if not -ndim <= ax < ndim:
            raise DimensionError(f"axis {ax} out of range for rank {ndim}")
        out.append(ax % ndim)
    if len(set(out)) != len(out):
        raise DimensionError(f"repeated axis in {axes}")
    return tuple(sorted(out))


def reduce(x, kind, axes=None):
    """Sum or mean over ``axes`` (all axes when None); reduced axes are dropped."""
    x = _lift(x)
    ax = _norm_axes(axes, x.ndim)
    count = int(np.prod([x.shape[i] for i in ax])) if ax else 1
    if kind == "sum":
        out = x.data.sum(axis=ax)
        scale = 1.0
    elif kind == "mean":
        if count == 0:
            raise DimensionError("mean over an empty axis")
        out = x.data.sum(axis=ax) / count
        scale = 1.0 / count
    else:
        raise ValueError(f"unknown reduction {kind!r}")
    in_shape = x.shape

    def bw(g):
        g = np.expand_dims(g, ax) if ax else g
        return (np.broadcast_to(g * scale, in_shape).copy(),)

    return _make(np.asarray(out, dtype=np.float64), (x,), bw, kind)


def reshape(x, shape):
    x = _lift(x)
    try:
        out = x.data.reshape(shape)
    except ValueError:
        raise DimensionError(f"cannot reshape {x.shape} to {shape}") from None
    in_shape = x.shape

    def bw(g):
        return (g.reshape(in_shape),)

    return _make(out, (x,), bw, "reshape")


def log_softmax(x, axis=-1):
    """Numerically stable log-softmax along ``axis``."""
    x = _lift(x)
    z = x.data - x.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=axis, keepdims=True))
    out = z - lse

    def bw(g):
        soft = np.exp(out)
        return (g - soft * g.sum(axis=axis, keepdims=True),)

    return _make(out, (x,), bw, "log_softmax")


def bce_with_logits(z, targets):
    """Elementwise ``-[t log s(z) + (1-t) log(1-s(z))]`` in the stable logit form.

    ``targets`` is treated as a constant.
    """
    z = _lift(z)
    t = targets.data if isinstance(targets, Tensor) else np.asarray(targets, dtype=np.float64)
    if t.shape != z.shape:
        raise DimensionError(f"bce: logits {z.shape} vs targets {t.shape}")
    v = z.data
    out = np.maximum(v, 0.0) - v * t + np.log1p(np.exp(-np.abs(v)))

    def bw(g):
        return (g * (_sigmoid(v) - t),)

    return _make(out, (z,), bw, "bce_with_logits")


# -- backward ----------------------------------------------------------------

class Tape:
    """Topologically ordered record of the ops that produced ``loss``."""

    def __init__(self, loss):
        order, seen = [], set()
        stack = [(loss, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad and id(p) not in seen:
                    stack.append((p, False))
        self.entries = order

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def backward(loss):
    """Populate ``.grad`` of every leaf reachable from the scalar ``loss``."""
    if not isinstance(loss, Tensor):
        raise ContractError("backward() needs a Tensor")
    if loss.data.size != 1:
        raise ContractError(f"backward() needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        raise ContractError("loss is not on the tape (no input requires grad)")
    if loss._consumed:
        raise ContractError("backward() already ran on this graph; rebuild it first")
    tape = Tape(loss)
    grads = {id(loss): np.ones_like(loss.data)}
    for node in reversed(tape.entries):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node.is_leaf:
            node.grad = g.copy() if node.grad is None else node.grad + g
            continue
        for parent, pg in zip(node._parents, node._backward(g)):
            if not parent.requires_grad:
                continue
            key = id(parent)
            grads[key] = pg if key not in grads else grads[key] + pg
    loss._consumed = True


def grad_check(f, x, h=1e-5):
    """Max relative error between autodiff and central differences.

    ``f`` maps a Tensor to a scalar Tensor.  The relative error of a component is
    ``|a - n| / max(|a|, |n|, 1e-8)``.
    """
    x0 = np.array(x.data if isinstance(x, Tensor) else x, dtype=np.float64)
    xt = Tensor(x0, requires_grad=True)
    f(xt).backward()
    analytic = xt.grad if xt.grad is not None else np.zeros_like(x0)
    numeric = np.empty_like(x0)
    flat = x0.reshape(-1)
    nflat = numeric.reshape(-1)
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + h
        fp = f(Tensor(x0)).item()
        flat[i] = old - h
        fm = f(Tensor(x0)).item()
        flat[i] = old
        nflat[i] = (fp - fm) / (2.0 * h)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denom)) if x0.size else 0.0
