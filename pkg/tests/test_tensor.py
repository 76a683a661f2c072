import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gradsuite import worst_errors
from recipekit.errors import ContractError, DimensionError, NumericError
from recipekit.tensor import Tape, Tensor, activation, backward, gelu_value, grad_check, log_softmax, matmul


def test_matmul_gradients():
    a = Tensor(np.arange(6.0).reshape(2, 3), requires_grad=True)
    b = Tensor(np.ones((3, 4)), requires_grad=True)
    backward(matmul(a, b).sum())
    assert np.array_equal(a.grad, np.full((2, 3), 4.0))
    assert np.array_equal(b.grad, np.repeat(np.array([[3.0], [5.0], [7.0]]), 4, axis=1))


def test_matmul_shape_mismatch():
    with pytest.raises(DimensionError):
        matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))


def test_broadcast_add_reduces_gradient():
    a = Tensor(np.zeros((3, 2)), requires_grad=True)
    b = Tensor(np.zeros(2), requires_grad=True)
    backward((a + b).sum())
    assert np.array_equal(b.grad, [3.0, 3.0])


def test_leaf_used_twice_accumulates():
    x = Tensor(np.array([2.0]), requires_grad=True)
    backward((x * x + x).sum())
    assert x.grad[0] == 5.0


def test_backward_twice_is_an_error():
    x = Tensor(np.ones(2), requires_grad=True)
    loss = (x * 2.0).sum()
    backward(loss)
    with pytest.raises(ContractError):
        backward(loss)


def test_backward_needs_scalar_on_tape():
    with pytest.raises(ContractError):
        backward(Tensor(np.ones(2), requires_grad=True) * 1.0)
    with pytest.raises(ContractError):
        backward(Tensor(np.ones(2)).sum())


def test_division_by_zero_raises():
    with pytest.raises(NumericError):
        Tensor(np.ones(2)) / Tensor(np.array([1.0, 0.0]))


@pytest.mark.filterwarnings("ignore:overflow")
def test_overflow_raises():
    with pytest.raises(NumericError):
        Tensor(np.array([1e308])) * 10.0


def test_tape_is_topological():
    x = Tensor(np.ones(3), requires_grad=True)
    y = (x * 2.0).gelu().sum()
    order = list(Tape(y))
    pos = {id(n): i for i, n in enumerate(order)}
    for n in order:
        for p in n._parents:
            if p.requires_grad:
                assert pos[id(p)] < pos[id(n)]


def test_gelu_tanh_form():
    v = np.array([-2.0, 0.0, 1.0])
    ref = 0.5 * v * (1 + np.tanh(np.sqrt(2 / np.pi) * (v + 0.044715 * v ** 3)))
    assert np.allclose(gelu_value(v), ref, rtol=0, atol=1e-15)


def test_log_softmax_is_stable():
    out = log_softmax(Tensor(np.array([[1000.0, 0.0]]))).data
    assert np.isfinite(out).all()
    assert out[0, 0] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("kind", ["relu", "gelu", "sigmoid"])
def test_activation_gradients(kind):
    x = np.array([-1.3, -0.2, 0.4, 2.0])
    assert grad_check(lambda t: activation(t, kind).sum(), x) < 1e-6


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (3, 4), elements=st.floats(-3, 3)))
def test_mean_sum_chain_gradcheck(x):
    assert grad_check(lambda t: (t.mean(axis=1) * t.sum(axis=0).sum()).sum(), x) < 1e-4


def test_gradient_suite_small():
    errs = worst_errors(seeds=range(3))
    assert max(errs.values()) < 1e-4, errs
