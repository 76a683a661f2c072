import numpy as np
import pytest

from recipekit.errors import ConfigError, ContractError
from recipekit.regularizers import EmaState, RepeatedAugSampler, drop_path, dropout, ra_indices
from recipekit.rng import stream
from recipekit.tensor import Tensor


def test_drop_path_identity_at_eval_and_zero_rate():
    x = Tensor(np.ones((4, 3)))
    assert drop_path(x, 0.5, stream(0), training=False) is x
    assert drop_path(x, 0.0, stream(0)) is x


def test_drop_path_zeroes_whole_rows_and_rescales():
    x = Tensor(np.ones((2000, 3)))
    out = drop_path(x, 0.25, stream(1)).data
    rows = set(map(tuple, out))
    assert rows <= {(0.0, 0.0, 0.0), (4 / 3, 4 / 3, 4 / 3)}
    assert abs(out.mean() - 1.0) < 0.05


def test_drop_path_rate_range():
    with pytest.raises(ConfigError):
        drop_path(Tensor(np.ones((2, 2))), 1.0, stream(0))


def test_dropout_elementwise_expectation():
    out = dropout(Tensor(np.ones((200, 50))), 0.2, stream(2)).data
    assert set(np.unique(out)) <= {0.0, 1.25}
    assert abs(out.mean() - 1.0) < 0.02


def test_ema_starts_from_live_weights_and_tracks():
    p = Tensor(np.array([1.0, 2.0]), requires_grad=True)
    ema = EmaState([p], decay=0.5)
    assert np.array_equal(ema.shadow[0], [1.0, 2.0])
    p.data = np.array([3.0, 4.0])
    ema.update([p])
    assert np.array_equal(ema.shadow[0], [2.0, 3.0])


def test_ema_swap_roundtrip():
    p = Tensor(np.array([1.0]), requires_grad=True)
    ema = EmaState([p], 0.9)
    p.data = np.array([5.0])
    ema.swap([p])
    assert p.data[0] == 1.0
    ema.swap([p])
    assert p.data[0] == 5.0


def test_ema_shape_drift_detected():
    p = Tensor(np.ones(2), requires_grad=True)
    ema = EmaState([p], 0.9)
    p.data = np.ones(3)
    with pytest.raises(ContractError):
        ema.update([p])


def test_ra_sampler_structure():
    s = RepeatedAugSampler(dataset_size=100, batch_size=12, repeats=3, seed=0)
    idx, rep = s.epoch(0)
    assert len(idx) == 102  # ceil(100 / 3) * 3
    for b in range(0, 96, 12):
        assert len(set(idx[b:b + 12])) == 4
    groups = idx.reshape(-1, 3)
    assert np.all(groups == groups[:, :1])
    assert len(set(groups[:, 0])) == len(groups)
    assert list(rep[:6]) == [0, 1, 2, 0, 1, 2]


def test_ra_sampler_epochs_differ_and_replicas_partition():
    s = RepeatedAugSampler(60, 6, 3, seed=4)
    assert not np.array_equal(ra_indices(s, 0), ra_indices(s, 1))
    full = ra_indices(s, 2)
    parts = [ra_indices(s, 2, 2, r) for r in range(2)]
    assert sorted(np.concatenate(parts)) == sorted(full)


def test_ra_sampler_divisibility():
    with pytest.raises(ConfigError):
        RepeatedAugSampler(100, 10, 3)
