"""Independent reference implementations used as test oracles.

Everything here works on Python floats and nested lists, element by element,
so it shares no code path with the vectorized package code.
"""

import math


def _flat(arr):
    return [float(v) for v in arr.reshape(-1)]


def _columns(shape):
    """Index groups of a row-major tensor: one group per last-axis unit (rank >= 2)."""
    n = 1
    for s in shape:
        n *= s
    if len(shape) <= 1:
        return [list(range(n))]
    out = shape[-1]
    return [list(range(j, n, out)) for j in range(out)]


def _norm(vals, idx):
    return math.sqrt(sum(vals[i] * vals[i] for i in idx))


class ScalarLamb:
    def __init__(self, w, lr, b1, b2, eps, wd):
        self.w = _flat(w)
        self.lr, self.b1, self.b2, self.eps, self.wd = lr, b1, b2, eps, wd
        self.m = [0.0] * len(self.w)
        self.v = [0.0] * len(self.w)
        self.t = 0

    def step(self, g, lr=None):
        lr = self.lr if lr is None else lr
        g = _flat(g)
        self.t += 1
        r = []
        for i, gi in enumerate(g):
            self.m[i] = self.b1 * self.m[i] + (1 - self.b1) * gi
            self.v[i] = self.b2 * self.v[i] + (1 - self.b2) * gi * gi
            mh = self.m[i] / (1 - self.b1 ** self.t)
            vh = self.v[i] / (1 - self.b2 ** self.t)
            r.append(mh / (math.sqrt(vh) + self.eps) + self.wd * self.w[i])
        wn = math.sqrt(sum(x * x for x in self.w))
        rn = math.sqrt(sum(x * x for x in r))
        trust = wn / rn if wn > 0 and rn > 0 else 1.0
        self.w = [wi - lr * trust * ri for wi, ri in zip(self.w, r)]
        return trust


class ScalarSGD:
    def __init__(self, w, lr, momentum, wd, nesterov=True):
        self.w = _flat(w)
        self.lr, self.mu, self.wd, self.nesterov = lr, momentum, wd, nesterov
        self.buf = [0.0] * len(self.w)

    def step(self, g, lr=None):
        lr = self.lr if lr is None else lr
        for i, gi in enumerate(_flat(g)):
            d = gi + self.wd * self.w[i]
            self.buf[i] = self.mu * self.buf[i] + d
            upd = d + self.mu * self.buf[i] if self.nesterov else self.buf[i]
            self.w[i] -= lr * upd


class ScalarRMSPropTF:
    def __init__(self, w, lr, rho, eps, momentum, wd):
        self.w = _flat(w)
        self.lr, self.rho, self.eps, self.mu, self.wd = lr, rho, eps, momentum, wd
        self.sq = [1.0] * len(self.w)
        self.mom = [0.0] * len(self.w)

    def step(self, g, lr=None):
        lr = self.lr if lr is None else lr
        for i, gi in enumerate(_flat(g)):
            d = gi + self.wd * self.w[i]
            self.sq[i] = self.rho * self.sq[i] + (1 - self.rho) * d * d
            self.mom[i] = self.mu * self.mom[i] + lr * d / math.sqrt(self.sq[i] + self.eps)
            self.w[i] -= self.mom[i]


class ScalarAdamP:
    def __init__(self, w, lr, b1, b2, eps, wd, delta, wd_ratio):
        self.shape = w.shape
        self.w = _flat(w)
        self.lr, self.b1, self.b2, self.eps = lr, b1, b2, eps
        self.wd, self.delta, self.wd_ratio = wd, delta, wd_ratio
        self.m = [0.0] * len(self.w)
        self.v = [0.0] * len(self.w)
        self.t = 0

    def step(self, g, lr=None):
        lr = self.lr if lr is None else lr
        g = _flat(g)
        self.t += 1
        u = []
        for i, gi in enumerate(g):
            self.m[i] = self.b1 * self.m[i] + (1 - self.b1) * gi
            self.v[i] = self.b2 * self.v[i] + (1 - self.b2) * gi * gi
            u.append((self.m[i] / (1 - self.b1 ** self.t))
                     / (math.sqrt(self.v[i] / (1 - self.b2 ** self.t)) + self.eps))
        scale = [1.0] * len(self.w)
        for idx in _columns(self.shape):
            wn = _norm(self.w, idx)
            gn = _norm(g, idx)
            dot = sum(self.w[i] * g[i] for i in idx)
            cos = abs(dot) / (wn * gn) if wn * gn > 0 else 0.0
            if wn > 0 and cos < self.delta / math.sqrt(len(idx)):
                radial = sum(self.w[i] * u[i] for i in idx) / (wn * wn)
                for i in idx:
                    u[i] -= radial * self.w[i]
                    scale[i] = self.wd_ratio
        self.w = [wi - lr * ui - lr * self.wd * si * wi for wi, ui, si in zip(self.w, u, scale)]


def agc(w, g, clip, eps=1e-3):
    """Clipped gradient as a flat list."""
    wf, gf = _flat(w), _flat(g)
    out = list(gf)
    for idx in _columns(w.shape):
        wn = max(_norm(wf, idx), eps)
        gn = _norm(gf, idx)
        if gn > clip * wn:
            for i in idx:
                out[i] = gf[i] * (clip * wn / gn)
    return out


# -- schedules -------------------------------------------------------------------

def closed_form_lr(recipe, epoch):
    """Learning rate at integer ``epoch`` written directly from the schedule formulas."""
    s = recipe.schedule
    base = recipe.optimizer.lr
    total = recipe.epochs
    w = s.warmup_epochs
    if epoch < w:
        lr = base * epoch / w
    elif s.kind == "cosine":
        lo = s.min_lr_ratio * base
        lr = lo + 0.5 * (base - lo) * (1 + math.cos(math.pi * (epoch - w) / (total - w)))
    elif s.kind == "step":
        lr = base * s.decay_rate ** int((epoch - w) // s.decay_interval)
    else:
        lr = base
        for m in s.milestones:
            if epoch >= m:
                lr *= s.waterfall_factor
    return lr


# -- statistics ------------------------------------------------------------------

def stats(values):
    """(mean, unbiased std, min, max) by textbook two-pass formulas."""
    vals = [float(v) for v in values]
    n = len(vals)
    mean = math.fsum(vals) / n
    var = math.fsum((v - mean) ** 2 for v in vals) / (n - 1)
    return mean, math.sqrt(var), min(vals), max(vals)
