"""ToyNet: a residual MLP over mean-pooled patch embeddings, plus the ``RSBW`` weights format.

Each non-overlapping P x P patch is flattened and passed through a shared
affine map and GELU; patch features are averaged, so the network accepts any
resolution divisible by P.  The pooled vector goes through ``depth`` residual
blocks ``h + drop_path(affine(gelu(affine(h))))`` and a dropout + affine head.
"""

import math
import struct

import numpy as np

from ..regularizers import drop_path, dropout
from ..rng import stream
from ..tensor import Tensor, matmul, reshape

WEIGHTS_MAGIC = b"RSBW"


def patchify(x, patch):
    """B x H x W x C array -> (B * n_patches) x (P*P*C) array."""
    b, h, w, c = x.shape
    if h % patch or w % patch:
        raise ValueError(f"resolution {h}x{w} not divisible by patch {patch}")
    gh, gw = h // patch, w // patch
    t = x.reshape(b, gh, patch, gw, patch, c).transpose(0, 1, 3, 2, 4, 5)
    return np.ascontiguousarray(t.reshape(b * gh * gw, patch * patch * c)), gh * gw


class ToyNet:
    def __init__(self, num_classes, width=128, depth=4, patch=8, channels=3, seed=0):
        self.num_classes = num_classes
        self.width = width
        self.depth = depth
        self.patch = patch
        self.channels = channels
        g = stream(seed, purpose="init")
        fan = patch * patch * channels
        self.names = []
        self.params = []

        def add(name, shape, fan_in):
            bound = 1.0 / math.sqrt(fan_in)
            self.names.append(name)
            self.params.append(Tensor(g.uniform(-bound, bound, shape), requires_grad=True))

        add("embed.w", (fan, width), fan)
        add("embed.b", (width,), fan)
        for i in range(depth):
            add(f"block{i}.w1", (width, width), width)
            add(f"block{i}.b1", (width,), width)
            add(f"block{i}.w2", (width, width), width)
            add(f"block{i}.b2", (width,), width)
        add("head.w", (width, num_classes), width)
        add("head.b", (num_classes,), width)

    def named(self):
        return dict(zip(self.names, self.params))

    def weight_params(self):
        """Matrices only (biases excluded), e.g. for AGC."""
        return [p for n, p in zip(self.names, self.params) if p.ndim >= 2]

    def num_parameters(self):
        return sum(p.size for p in self.params)

    def forward(self, x, training=False, drop_path_rate=0.0, dropout_rate=0.0, key=(0,)):
        """Logits for a B x H x W x C batch of normalized pixels.

        ``key`` seeds the stochastic-depth and dropout masks of this call.
        """
        p = self.named()
        b = x.shape[0]
        patches, n = patchify(np.asarray(x, dtype=np.float64), self.patch)
        h = (matmul(Tensor(patches), p["embed.w"]) + p["embed.b"]).gelu()
        h = reshape(h, (b, n, self.width)).mean(axis=1)
        for i in range(self.depth):
            r = (matmul(h, p[f"block{i}.w1"]) + p[f"block{i}.b1"]).gelu()
            r = matmul(r, p[f"block{i}.w2"]) + p[f"block{i}.b2"]
            if training and drop_path_rate > 0:
                r = drop_path(r, drop_path_rate, stream(*key, i, purpose="drop_path"))
            h = h + r
        if training and dropout_rate > 0:
            h = dropout(h, dropout_rate, stream(*key, purpose="dropout"))
        return matmul(h, p["head.w"]) + p["head.b"]

    def predict(self, x, batch=500):
        out = []
        for i in range(0, len(x), batch):
            out.append(self.forward(x[i:i + batch]).data)
        return np.concatenate(out) if out else np.empty((0, self.num_classes))

    # -- persistence --------------------------------------------------------
    def state(self):
        return {n: p.data.copy() for n, p in zip(self.names, self.params)}

    def load_state(self, state):
        for n, p in zip(self.names, self.params):
            if state[n].shape != p.data.shape:
                raise ValueError(f"{n}: shape {state[n].shape} != {p.data.shape}")
            p.data = np.array(state[n], dtype=np.float64)

    @classmethod
    def from_state(cls, state, channels=3):
        fan, width = state["embed.w"].shape
        patch = int(round(math.sqrt(fan / channels)))
        depth = sum(1 for n in state if n.endswith(".w1"))
        net = cls(state["head.w"].shape[1], width, depth, patch, channels)
        net.load_state(state)
        return net


def save_weights(path, state):
    with open(path, "wb") as fh:
        fh.write(WEIGHTS_MAGIC)
        fh.write(struct.pack("<I", len(state)))
        for name, arr in state.items():
            raw = name.encode("utf-8")
            if len(raw) > 255 or arr.ndim > 255:
                raise ValueError(f"tensor {name!r} does not fit the weights format")
            fh.write(struct.pack("<B", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<B", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_weights(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != WEIGHTS_MAGIC:
        raise ValueError(f"{path}: not a weights file")
    (count,) = struct.unpack_from("<I", raw, 4)
    pos = 8
    state = {}
    for _ in range(count):
        (nlen,) = struct.unpack_from("<B", raw, pos)
        pos += 1
        name = raw[pos:pos + nlen].decode("utf-8")
        pos += nlen
        (rank,) = struct.unpack_from("<B", raw, pos)
        pos += 1
        shape = struct.unpack_from(f"<{rank}I", raw, pos)
        pos += 4 * rank
        n = int(np.prod(shape)) if rank else 1
        state[name] = np.frombuffer(raw, dtype="<f8", count=n, offset=pos).reshape(shape).astype(np.float64)
        pos += 8 * n
    if pos != len(raw):
        raise ValueError(f"{path}: {len(raw) - pos} trailing bytes")
    return state
