import numpy as np
import pytest

from skill_adapters.tensorcore import ops
from skill_adapters.tensorcore.errors import ContractError, DimensionError
from skill_adapters.tensorcore.ops import seq_sum
from skill_adapters.tensorcore.tensor import constant, tensor


def test_matmul_rejects_inner_dimension_mismatch():
    with pytest.raises(DimensionError):
        ops.matmul(tensor(np.ones((2, 3))), tensor(np.ones((4, 2))))


def test_add_rejects_unbroadcastable_shapes():
    with pytest.raises(DimensionError):
        ops.add(tensor(np.ones((2, 3))), tensor(np.ones(4)))


def test_dot_requires_equal_shapes():
    with pytest.raises(DimensionError):
        ops.dot(tensor(np.ones(3)), tensor(np.ones(4)))


def test_reshape_rejects_a_different_size():
    with pytest.raises(DimensionError):
        ops.reshape(tensor(np.ones((2, 3))), (4, 2))


def test_unknown_activation_is_a_contract_error():
    with pytest.raises(ContractError):
        ops.activation(tensor(np.ones(2)), "tanh")


def test_layer_norm_rejects_non_positive_eps():
    x = tensor(np.ones((2, 3)))
    with pytest.raises(ContractError):
        ops.layer_norm(x, tensor(np.ones(3)), tensor(np.zeros(3)), eps=0.0)


def test_cross_entropy_needs_one_target_per_row():
    with pytest.raises(DimensionError):
        ops.cross_entropy(tensor(np.zeros((3, 3))), np.array([0, 1]))


def test_softmax_rows_sum_to_one():
    out = ops.softmax(tensor(np.random.default_rng(0).normal(size=(4, 6))))
    assert np.allclose(out.data.sum(axis=-1), 1.0)


def test_transpose_defaults_to_swapping_the_last_two_axes():
    x = np.arange(24, dtype=np.float32).reshape(2, 3, 4)
    assert ops.transpose(tensor(x)).shape == (2, 4, 3)


def test_gelu_matches_the_tanh_approximation_at_known_points():
    out = ops.gelu(tensor(np.array([0.0, 1.0, -1.0], dtype=np.float64), dtype=np.float64))
    assert out.data[0] == 0.0
    assert out.data[1] == pytest.approx(0.8411919906, abs=1e-8)
    assert out.data[2] == pytest.approx(-0.1588080094, abs=1e-8)


def test_cross_entropy_of_uniform_logits_is_log_of_classes():
    out = ops.cross_entropy(tensor(np.zeros((3, 5)), dtype=np.float64), np.array([0, 1, 2]))
    assert out.item() == pytest.approx(np.log(5))


def test_sequential_sum_is_independent_of_leading_rows():
    rng = np.random.default_rng(3)
    rows = rng.normal(size=(5, 17)).astype(np.float32)
    alone = seq_sum(rows[2:3], axis=-1)
    stacked = seq_sum(rows, axis=-1)[2:3]
    assert alone.tobytes() == stacked.tobytes()


def test_embedding_gathers_rows():
    table = constant(np.arange(12, dtype=np.float32).reshape(4, 3))
    out = ops.embedding(table, np.array([[3, 0]]))
    assert out.data.tolist() == [[[9.0, 10.0, 11.0], [0.0, 1.0, 2.0]]]
