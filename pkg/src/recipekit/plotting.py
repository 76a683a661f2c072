"""Matplotlib figures written next to the TSV reports (headless Agg backend)."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def training_curves(report, path):
    ep = [r.epoch for r in report.epochs]
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.4))
    axes[0].plot(ep, [r.train_loss for r in report.epochs])
    axes[0].set_title("train loss")
    axes[1].plot(ep, [r.val_top1 for r in report.epochs], label="live")
    if any(r.ema_val_top1 is not None for r in report.epochs):
        axes[1].plot(ep, [r.ema_val_top1 for r in report.epochs], label="EMA")
        axes[1].legend()
    axes[1].set_title("val top-1")
    axes[2].plot(ep, [r.lr for r in report.epochs])
    axes[2].set_title("learning rate")
    for ax in axes:
        ax.set_xlabel("epoch")
    return _save(fig, path)


def lr_curve(epochs, lrs, path, title="learning rate"):
    fig, ax = plt.subplots(figsize=(6, 3.4))
    ax.plot(epochs, lrs)
    ax.set_xlabel("epoch")
    ax.set_ylabel("lr")
    ax.set_title(title)
    return _save(fig, path)


def seed_band(band_rows, path):
    """Mean curve with the min/max envelope and a +-1 std band across seeds."""
    rows = np.asarray(band_rows, dtype=np.float64)
    ep, mean, std, lo, hi = rows.T
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.fill_between(ep, lo, hi, alpha=0.2, label="min-max")
    ax.fill_between(ep, mean - std, mean + std, alpha=0.35, label="mean +- std")
    ax.plot(ep, mean, label="mean")
    ax.set_xlabel("epoch")
    ax.set_ylabel("val top-1")
    ax.legend()
    return _save(fig, path)


def val_test_scatter(rows, path):
    rows = np.asarray(rows, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(4.2, 4.2))
    ax.scatter(rows[:, 1], rows[:, 2], s=14)
    ax.set_xlabel("val top-1")
    ax.set_ylabel("test top-1")
    return _save(fig, path)


def resolution_sweep(rows, path):
    """Top-1 against test resolution, one line per crop ratio."""
    fig, ax = plt.subplots(figsize=(6, 3.6))
    for ratio in sorted({r[1] for r in rows}):
        pts = sorted((r[0], r[3]) for r in rows if r[1] == ratio)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"crop {ratio:g}")
    ax.set_xlabel("test resolution")
    ax.set_ylabel("top-1")
    ax.legend()
    return _save(fig, path)


def stage_grid(stage_images, path):
    """``stage_images`` maps stage name -> list of H x W x C unit-range arrays."""
    names = list(stage_images)
    n = max(len(v) for v in stage_images.values())
    fig, axes = plt.subplots(n, len(names), figsize=(1.6 * len(names), 1.6 * n), squeeze=False)
    for j, name in enumerate(names):
        for i in range(n):
            ax = axes[i][j]
            ax.axis("off")
            imgs = stage_images[name]
            if i < len(imgs):
                ax.imshow(np.clip(imgs[i], 0.0, 1.0), interpolation="nearest")
            if i == 0:
                ax.set_title(name, fontsize=8)
    return _save(fig, path)
