"""Desk-scale harness: synthetic data, ToyNet, training, evaluation and sweeps."""

from .data import SyntheticDatasetSpec, generate_dataset, read_dataset, write_dataset
from .evaluate import evaluate, top1
from .model import ToyNet, load_weights, save_weights
from .probe import linear_probe
from .sweep import SeedSweepReport, seed_sweep
from .train import EpochRecord, TrainReport, train
