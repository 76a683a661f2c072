"""Closed-form ridge-regression linear probe on raw pixels (the baseline to beat)."""

import numpy as np

from .data import channel_stats
from .evaluate import top1


def _features(split, mean, std):
    x = split.images.astype(np.float64) / 255.0
    x = (x - np.asarray(mean)) / np.asarray(std)
    flat = x.reshape(len(x), -1)
    return np.hstack([flat, np.ones((len(x), 1))])


def fit_probe(split, num_classes, ridge=1.0, mean=None, std=None):
    """Least-squares weights mapping pixels (plus a bias) to one-hot labels."""
    if mean is None or std is None:
        mean, std = channel_stats(split)
    x = _features(split, mean, std)
    y = np.eye(num_classes)[split.labels]
    gram = x.T @ x + ridge * np.eye(x.shape[1])
    return np.linalg.solve(gram, x.T @ y), (mean, std)


RIDGE_GRID = (1.0, 10.0, 100.0, 1e3, 1e4, 1e5)


def linear_probe(dataset, ridge=None, split="val"):
    """Top-1 of a ridge probe fitted on the train split, scored on ``split``.

    With ``ridge=None`` the penalty is picked from :data:`RIDGE_GRID` by val
    accuracy, which makes the baseline as strong as a linear model gets here.
    """
    mean, std = channel_stats(dataset.train)
    x = _features(dataset.train, mean, std)
    y = np.eye(dataset.num_classes)[dataset.train.labels]
    gram, xty = x.T @ x, x.T @ y
    eye = np.eye(x.shape[1])

    def score(r, part):
        w = np.linalg.solve(gram + r * eye, xty)
        return top1(_features(part, mean, std) @ w, part.labels)

    if ridge is None:
        ridge = max(RIDGE_GRID, key=lambda r: score(r, dataset.val))
    return score(ridge, dataset.split(split))
