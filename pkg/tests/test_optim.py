import math

import numpy as np
import pytest

from optimchecks import agc_worst, run_trajectories
from recipekit.errors import ConfigError, NumericError
from recipekit.optim import SGD, AdamP, Lamb, RMSPropTF, agc_clip, build_optimizer, unitwise_norm
from recipekit.tensor import Tensor


@pytest.mark.parametrize("kind", ["lamb", "sgd", "rmsprop_tf", "adamp"])
def test_optimizer_matches_scalar_oracle(kind):
    assert run_trajectories(kind, count=20) < 1e-12


def test_agc_matches_scalar_oracle():
    assert agc_worst() < 1e-12


def test_agc_leaves_small_gradients_alone():
    p = Tensor(np.ones((3, 2)), requires_grad=True)
    p.grad = np.full((3, 2), 1e-4)
    agc_clip([p], 0.05)
    assert np.array_equal(p.grad, np.full((3, 2), 1e-4))


def test_agc_clips_to_exact_ratio():
    p = Tensor(np.ones((4, 2)), requires_grad=True)
    p.grad = np.full((4, 2), 10.0)
    agc_clip([p], 0.1)
    ratio = unitwise_norm(p.grad) / unitwise_norm(p.data)
    assert np.allclose(ratio, 0.1, rtol=0, atol=1e-15)


def test_agc_rejects_nonpositive_factor():
    with pytest.raises(ConfigError):
        agc_clip([Tensor(np.ones(2), requires_grad=True)], 0.0)


def test_rmsprop_tf_first_step_uses_unit_square_average():
    # square average starts at 1: first step = lr*g/sqrt(rho + (1-rho)g^2 + eps)
    lr, rho, eps, g0 = 0.1, 0.9, 1e-3, 2.0
    p = Tensor(np.array([0.0]), requires_grad=True)
    p.grad = np.array([g0])
    RMSPropTF([p], lr, rho, eps, momentum=0.9).step()
    ones_init = -lr * g0 / math.sqrt(rho + (1 - rho) * g0 * g0 + eps)
    zero_init = -lr * g0 / math.sqrt((1 - rho) * g0 * g0 + eps)
    assert p.data[0] == pytest.approx(ones_init, rel=1e-15)
    assert abs(p.data[0] - zero_init) > 0.1


def test_lamb_trust_ratio_is_weight_over_update_norm():
    w = np.array([3.0, 4.0])
    p = Tensor(w.copy(), requires_grad=True)
    p.grad = np.array([1.0, -1.0])
    opt = Lamb([p], lr=0.1, eps=0.0, weight_decay=0.0)
    opt.step()
    # first bias-corrected Adam step is sign(g), norm sqrt(2)
    assert opt.state[0]["trust"] == pytest.approx(5.0 / math.sqrt(2), rel=1e-14)
    assert np.allclose(p.data, w - 0.1 * 5.0 / math.sqrt(2) * np.array([1.0, -1.0]), atol=1e-14)


def test_zero_gradient_from_fresh_state_is_a_noop():
    for kind in ("lamb", "sgd", "rmsprop_tf", "adamp"):
        w = np.arange(6.0).reshape(3, 2) - 2.5
        p = Tensor(w.copy(), requires_grad=True)
        opt = build_optimizer(kind, [p], lr=0.1)
        for _ in range(3):
            p.grad = np.zeros_like(w)
            opt.step()
        assert np.array_equal(p.data, w), kind


def test_nonfinite_gradient_aborts_without_touching_weights():
    p = Tensor(np.ones(3), requires_grad=True)
    p.grad = np.array([1.0, np.nan, 0.0])
    opt = SGD([p], lr=0.1)
    with pytest.raises(NumericError):
        opt.step()
    assert np.array_equal(p.data, np.ones(3))


def test_adamp_projects_orthogonal_gradient():
    w = np.array([[1.0], [0.0]])
    p = Tensor(w.copy(), requires_grad=True)
    p.grad = np.array([[0.0], [1.0]])
    AdamP([p], lr=0.1, weight_decay=0.0).step()
    # the radial (first) coordinate is untouched after projection
    assert p.data[0, 0] == 1.0
    assert p.data[1, 0] < 0


def test_unknown_optimizer():
    with pytest.raises(ConfigError):
        build_optimizer("adagrad", [Tensor(np.ones(1), requires_grad=True)])
