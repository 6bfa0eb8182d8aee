import numpy as np
import pytest
from hypothesis import given, strategies as st

from advlab import (
    ChannelStats,
    ImageTensor,
    ShapeMismatchError,
    channel_stats,
    elementwise,
    l2_distance,
    linf_distance,
    tensor,
)


def test_tensor_is_readonly_float64_c_order():
    t = tensor([[1, 2], [3, 4]])
    assert t.dtype == np.float64
    assert t.flags["C_CONTIGUOUS"]
    with pytest.raises(ValueError):
        t[0, 0] = 5.0


def test_tensor_reshape():
    t = tensor([1, 2, 3, 4, 5, 6], shape=(2, 3))
    assert t.shape == (2, 3)
    assert t[1, 2] == 6.0


def test_elementwise_binary_ops():
    a = tensor([1.0, -2.0, 3.0])
    b = tensor([0.5, 0.5, 0.5])
    assert np.array_equal(elementwise("add", a, b), [1.5, -1.5, 3.5])
    assert np.array_equal(elementwise("sub", a, b), [0.5, -2.5, 2.5])
    assert np.array_equal(elementwise("mul", a, 2.0), [2.0, -4.0, 6.0])
    assert np.array_equal(elementwise("clamp-lo", a, 0.0), [1.0, 0.0, 3.0])
    assert np.array_equal(elementwise("clamp-hi", a, 1.0), [1.0, -2.0, 1.0])


def test_elementwise_unary_ops():
    a = tensor([-3.0, 0.0, 2.0])
    assert np.array_equal(elementwise("sign", a), [-1.0, 0.0, 1.0])
    assert np.array_equal(elementwise("abs", a), [3.0, 0.0, 2.0])


def test_elementwise_rejects_unknown_op():
    with pytest.raises(ValueError, match="unknown elementwise op"):
        elementwise("pow", tensor([1.0]), 2.0)


def test_elementwise_requires_operand():
    with pytest.raises(ValueError, match="second operand"):
        elementwise("add", tensor([1.0]))


def test_elementwise_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        elementwise("add", tensor([1.0, 2.0]), tensor([1.0, 2.0, 3.0]))


def test_distances_hand_values():
    a = tensor([0.0, 3.0])
    b = tensor([4.0, 0.0])
    assert linf_distance(a, b) == 4.0
    assert l2_distance(a, b) == 5.0
    with pytest.raises(ShapeMismatchError):
        linf_distance(tensor([1.0]), tensor([1.0, 2.0]))


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=20),
       st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=20))
def test_distance_properties(xs, ys):
    n = min(len(xs), len(ys))
    a, b = tensor(xs[:n]), tensor(ys[:n])
    assert linf_distance(a, b) == linf_distance(b, a)
    assert linf_distance(a, a) == 0.0
    assert l2_distance(a, b) >= linf_distance(a, b)


def test_image_tensor_requires_rank3():
    with pytest.raises(ShapeMismatchError, match=r"\(H, W, C\)"):
        ImageTensor(np.zeros((4, 4)))


def test_image_tensor_rejects_nonfinite():
    data = np.zeros((2, 2, 3))
    data[0, 0, 0] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        ImageTensor(data)


def test_image_tensor_freezes_data_and_tags_domain():
    img = ImageTensor(np.ones((2, 2, 3)))
    assert img.domain == "raw"
    with pytest.raises(ValueError):
        img.data[0, 0, 0] = 2.0
    other = img.with_data(np.zeros((2, 2, 3)))
    assert other.domain == "raw"
    assert other.data.sum() == 0.0


def test_channel_stats_hand_case():
    data = np.array(
        [[[1.0, -2.0], [0.0, 4.0]],
         [[3.0, 0.0], [-0.0, 2.0]]]
    )
    stats = channel_stats(ImageTensor(data))
    assert stats.minimum == (-0.0, -2.0)
    assert stats.maximum == (3.0, 4.0)
    assert stats.mean == (1.0, 1.0)
    assert stats.zero_count == (2, 1)  # -0.0 counts as zero
    assert stats.std[0] == pytest.approx(np.std([1.0, 0.0, 3.0, 0.0]))


def test_channel_stats_is_a_plain_record():
    stats = channel_stats(ImageTensor(np.zeros((2, 2, 1))))
    assert isinstance(stats, ChannelStats)
    assert stats.zero_count == (4,)
