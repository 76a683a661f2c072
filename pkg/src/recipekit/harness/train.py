"""The training loop: one Recipe, one dataset, one seed -> a TrainReport."""

import math
import time
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from ..augment import RandAugmentConfig, RandomErasingConfig, RrcConfig, TrainAugmentConfig, augment_batch
from ..errors import NumericError
from ..losses import loss_fn
from ..mixing import MixConfig, MixOutcome, apply_mix, build_targets, plan_mix
from ..optim import agc_clip, build_optimizer
from ..recipes import check
from ..regularizers import EmaState, RepeatedAugSampler
from ..rng import stream
from ..schedule import NoiseConfig, ScheduleConfig, scheduled_lr
from ..tensor import backward
from .data import channel_stats
from .evaluate import prepare_split, top1
from .model import ToyNet


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_top1: float
    lr: float
    ema_val_top1: Optional[float]
    wall_time: float


@dataclass
class TrainReport:
    recipe: str
    seed: int
    epochs: List[EpochRecord] = field(default_factory=list)
    test_top1: float = float("nan")
    ema_test_top1: Optional[float] = None
    final_val_top1: float = float("nan")
    weights: dict = field(default_factory=dict, repr=False)

    def deterministic_view(self):
        """Everything except wall-clock times, for bitwise comparisons."""
        rows = tuple((r.epoch, r.train_loss, r.val_top1, r.lr, r.ema_val_top1) for r in self.epochs)
        w = tuple((k, v.tobytes()) for k, v in sorted(self.weights.items()))
        return (self.recipe, self.seed, rows, self.test_top1, self.ema_test_top1,
                self.final_val_top1, w)


def schedule_config(recipe):
    s = recipe.schedule
    base = recipe.effective_lr()
    noise = None
    if s.noise_range is not None:
        noise = NoiseConfig(active_range=tuple(s.noise_range), std=s.noise_std, seed=s.noise_seed)
    return ScheduleConfig(
        base_lr=base,
        total_epochs=recipe.epochs,
        kind=s.kind,
        warmup_epochs=s.warmup_epochs,
        min_lr=s.min_lr_ratio * base,
        step_decay_rate=s.decay_rate,
        step_interval_epochs=s.decay_interval,
        waterfall_factor=s.waterfall_factor,
        waterfall_milestones=tuple(s.milestones),
        noise=noise,
    )


def augment_config(recipe, mean, std):
    a = recipe.augment
    rrc = None
    if a.rrc:
        rrc = RrcConfig((recipe.train_res, recipe.train_res), tuple(a.rrc_scale), tuple(a.rrc_ratio))
    ra = None
    if a.randaugment:
        ra = RandAugmentConfig(a.randaugment_m, a.randaugment_n, a.randaugment_mstd,
                               fill=tuple(float(m) for m in mean))
    erase = None
    if a.erase_prob > 0:
        erase = RandomErasingConfig(a.erase_prob, a.erase_count)
    return TrainAugmentConfig(rrc=rrc, flip_prob=a.hflip, randaugment=ra,
                              mean=tuple(mean), std=tuple(std), erasing=erase)


def mix_config(recipe):
    a = recipe.augment
    return MixConfig(a.mixup_alpha, a.cutmix_alpha, a.mix_switch_prob, a.mix_mode, a.mix_prob)


def optimizer_kwargs(recipe):
    o = recipe.optimizer
    common = dict(lr=recipe.effective_lr(), weight_decay=o.weight_decay)
    if o.kind == "lamb":
        return dict(common, betas=tuple(o.betas), eps=o.eps, trust_clip=o.trust_clip)
    if o.kind == "sgd":
        return dict(common, momentum=o.momentum, nesterov=o.nesterov)
    if o.kind == "rmsprop_tf":
        return dict(common, rho=o.rho, eps=o.eps, momentum=o.momentum)
    return dict(common, betas=tuple(o.betas), eps=o.eps, delta=o.delta, wd_ratio=o.wd_ratio)


def epoch_order(recipe, n, seed, epoch):
    """Sample indices and repeat ordinals for one epoch."""
    if recipe.repeated_aug > 1:
        return RepeatedAugSampler(n, recipe.batch_size, recipe.repeated_aug, seed).epoch(epoch)
    idx = stream(seed, epoch, purpose="sampler").permutation(n)
    return idx, np.zeros(n, dtype=np.int64)


def _finite(value, what, epoch, step):
    if not math.isfinite(value):
        raise NumericError(f"{what} is {value} at epoch {epoch}, step {step}")


def train(recipe, dataset, seed=None, workers=1, progress=None):
    """Train a ToyNet under ``recipe`` and return its report.

    The last epoch's weights (and EMA weights, if enabled) are the only ones
    evaluated on the test split.  ``progress`` is called with each
    :class:`EpochRecord` as it completes.  Overflow raises NumericError
    (with the epoch and step) rather than a numpy warning.
    """
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        return _train(recipe, dataset, seed, workers, progress)


def _train(recipe, dataset, seed, workers, progress):
    recipe = check(recipe if seed is None else replace(recipe, seed=int(seed)))
    seed = recipe.seed
    k = dataset.num_classes
    channels = dataset.train.images.shape[-1]
    mean, std = channel_stats(dataset.train)
    m = recipe.model
    net = ToyNet(k, m.width, m.depth, m.patch, channels, seed=seed)
    report = TrainReport(recipe.name, seed)

    val_x = prepare_split(dataset.val, recipe.test_res, recipe.test_crop_ratio, mean, std)
    test_x = prepare_split(dataset.test, recipe.test_res, recipe.test_crop_ratio, mean, std)
    ema = EmaState(net.params, recipe.ema_decay) if recipe.ema_decay is not None else None

    def ema_eval(x, labels):
        ema.swap(net.params)
        try:
            return top1(net.predict(x), labels)
        finally:
            ema.swap(net.params)

    if recipe.epochs > 0:
        sched = schedule_config(recipe)
        aug = augment_config(recipe, mean, std)
        mix = mix_config(recipe)
        opt = build_optimizer(recipe.optimizer.kind, net.params, **optimizer_kwargs(recipe))
        criterion = loss_fn(recipe.loss)
        weights = net.weight_params()
        n = len(dataset.train)
        for epoch in range(recipe.epochs):
            start = time.perf_counter()
            idx, rep = epoch_order(recipe, n, seed, epoch)
            steps = len(idx) // recipe.batch_size
            losses = []
            for step in range(steps):
                sl = slice(step * recipe.batch_size, (step + 1) * recipe.batch_size)
                bi, br = idx[sl], rep[sl]
                x = augment_batch(dataset.train.images, bi, aug, seed, epoch, br, workers=workers)
                labels = dataset.train.labels[bi]
                if mix.enabled:
                    outcome = plan_mix(len(bi), x.shape[1], x.shape[2], mix,
                                       stream(seed, epoch, step, purpose="mix"))
                    x = apply_mix(x, outcome)
                else:
                    outcome = MixOutcome.identity(len(bi))
                targets = build_targets(labels, outcome, k, recipe.loss, recipe.smoothing, recipe.bce_style)
                lr = scheduled_lr(sched, epoch + step / steps)
                try:
                    logits = net.forward(x, training=True, drop_path_rate=recipe.drop_path,
                                         dropout_rate=recipe.dropout, key=(seed, epoch, step))
                    loss = criterion(logits, targets)
                    _finite(loss.item(), "training loss", epoch, step)
                    opt.zero_grad()
                    backward(loss)
                    if recipe.grad_clip is not None:
                        agc_clip(weights, recipe.grad_clip)
                    opt.step(lr)
                except NumericError as exc:
                    if "epoch" in str(exc):
                        raise
                    raise NumericError(f"epoch {epoch}, step {step}: {exc}") from exc
                for p in net.params:
                    if not np.all(np.isfinite(p.data)):
                        raise NumericError(f"non-finite weights after epoch {epoch}, step {step}")
                if ema is not None:
                    ema.update(net.params)
                losses.append(loss.item())
            val = top1(net.predict(val_x), dataset.val.labels)
            ema_val = ema_eval(val_x, dataset.val.labels) if ema is not None else None
            rec = EpochRecord(epoch, float(np.mean(losses)) if losses else float("nan"), val,
                              scheduled_lr(sched, epoch), ema_val, time.perf_counter() - start)
            report.epochs.append(rec)
            if progress is not None:
                progress(rec)

    report.test_top1 = top1(net.predict(test_x), dataset.test.labels)
    report.final_val_top1 = top1(net.predict(val_x), dataset.val.labels)
    if ema is not None:
        report.ema_test_top1 = ema_eval(test_x, dataset.test.labels)
    report.weights = net.state()
    return report
