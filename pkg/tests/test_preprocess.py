import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as npst

from advlab import (
    CLIP_MODEL_BOX,
    CLIP_NONE,
    CLIP_PIXEL_BOX,
    CLIP_UNIT_BOX,
    ClipPolicy,
    DomainMismatchError,
    ImageTensor,
    apply,
    channel_limits,
    clip,
    get_clip_policy,
    get_spec,
    invert,
    linf_distance,
)
from advlab.preprocess import policy_box

SPECS = ("caffe-bgr", "inception-sym", "identity")


def raw_images(max_side=4):
    side = st.integers(1, max_side)
    return side.flatmap(
        lambda h: side.flatmap(
            lambda w: npst.arrays(
                np.float64, (h, w, 3), elements=st.floats(0.0, 255.0)
            ).map(ImageTensor)
        )
    )


def test_caffe_limit_endpoints():
    raw = ImageTensor(np.zeros((1, 1, 3)))
    pre = apply("caffe-bgr", raw)
    assert pre.data[0, 0, 0] == -103.939
    assert pre.data[0, 0, 1] == -116.779
    assert pre.data[0, 0, 2] == -123.68

    raw = ImageTensor(np.full((1, 1, 3), 255.0))
    pre = apply("caffe-bgr", raw)
    assert pre.data[0, 0, 0] == 151.061
    assert pre.data[0, 0, 1] == 138.221
    assert pre.data[0, 0, 2] == 131.32


def test_caffe_swaps_channels():
    data = np.zeros((1, 1, 3))
    data[0, 0] = [10.0, 20.0, 30.0]  # R, G, B
    pre = apply("caffe-bgr", ImageTensor(data))
    # channel 0 of the output is blue minus the blue mean
    assert pre.data[0, 0, 0] == pytest.approx(30.0 - 103.939)
    assert pre.data[0, 0, 1] == pytest.approx(20.0 - 116.779)
    assert pre.data[0, 0, 2] == pytest.approx(10.0 - 123.68)


def test_inception_midpoint_and_endpoints():
    data = np.zeros((1, 1, 3))
    data[0, 0] = [127.5, 0.0, 255.0]
    pre = apply("inception-sym", ImageTensor(data))
    assert pre.data[0, 0, 0] == 0.0
    assert pre.data[0, 0, 1] == -1.0
    assert pre.data[0, 0, 2] == 1.0
    assert pre.domain == "inception-sym"


def test_identity_passthrough():
    data = np.full((2, 2, 3), 42.0)
    pre = apply("identity", ImageTensor(data))
    assert np.array_equal(pre.data, data)
    assert pre.domain == "identity"


def test_apply_rejects_out_of_range():
    with pytest.raises(ValueError, match="outside"):
        apply("caffe-bgr", ImageTensor(np.full((1, 1, 3), 256.0)))


def test_apply_rejects_preprocessed_input():
    pre = apply("identity", ImageTensor(np.zeros((1, 1, 3))))
    with pytest.raises(DomainMismatchError):
        apply("caffe-bgr", pre)


def test_get_spec_unknown_name():
    with pytest.raises(ValueError, match="unknown preprocess spec"):
        get_spec("torch-rgb")


def test_channel_limits_exact():
    assert channel_limits("caffe-bgr") == (
        (-103.939, 151.061), (-116.779, 138.221), (-123.68, 131.32)
    )
    assert channel_limits("inception-sym") == ((-1.0, 1.0),) * 3
    assert channel_limits("identity") == ((0.0, 255.0),) * 3


@settings(max_examples=60)
@given(raw_images(), st.sampled_from(SPECS))
def test_apply_invert_round_trip(raw, spec):
    pre = apply(spec, raw)
    back, clamped = invert(spec, pre)
    assert not clamped
    assert linf_distance(back.data, raw.data) <= 1e-9


def test_invert_requires_matching_domain():
    pre = apply("identity", ImageTensor(np.zeros((1, 1, 3))))
    with pytest.raises(DomainMismatchError):
        invert("caffe-bgr", pre)


def test_invert_clamps_and_flags_out_of_box():
    pre = ImageTensor(np.full((1, 1, 3), 2.0), "inception-sym")  # beyond +1
    back, clamped = invert("inception-sym", pre)
    assert clamped
    assert back.data.max() == 255.0


def test_invert_endpoint():
    pre = ImageTensor(np.full((1, 1, 3), 1.0), "inception-sym")
    back, clamped = invert("inception-sym", pre)
    assert not clamped
    assert np.all(back.data == 255.0)


def test_invert_zero_caffe_gives_means_in_rgb_order():
    pre = ImageTensor(np.zeros((1, 1, 3)), "caffe-bgr")
    back, clamped = invert("caffe-bgr", pre)
    assert not clamped
    assert back.data[0, 0].tolist() == [123.68, 116.779, 103.939]


def test_apply_preserves_differences_within_channel():
    rng = np.random.default_rng(5)
    a = ImageTensor(rng.uniform(1.0, 254.0, (3, 3, 3)))
    b = ImageTensor(rng.uniform(1.0, 254.0, (3, 3, 3)))
    d_raw = linf_distance(a.data, b.data)
    d_pre = linf_distance(apply("caffe-bgr", a).data, apply("caffe-bgr", b).data)
    assert d_pre == pytest.approx(d_raw, abs=1e-9)


def test_clip_policy_validation():
    with pytest.raises(ValueError, match="unknown clip policy"):
        ClipPolicy("l2-ball")
    assert get_clip_policy("unit-box") is not None
    assert get_clip_policy(CLIP_NONE).kind == "none"


def test_clip_unit_box_floors_negative():
    pre = ImageTensor(np.full((1, 1, 3), -50.0), "caffe-bgr")
    out = clip(CLIP_UNIT_BOX, "caffe-bgr", pre)
    assert np.all(out.data == 0.0)


def test_clip_pixel_box_ceiling():
    pre = ImageTensor(np.full((1, 1, 3), 300.0), "identity")
    out = clip(CLIP_PIXEL_BOX, "identity", pre)
    assert np.all(out.data == 255.0)


def test_clip_model_box_leaves_in_range_unchanged():
    raw = ImageTensor(np.random.default_rng(0).uniform(0, 255, (3, 3, 3)))
    pre = apply("caffe-bgr", raw)
    out = clip(CLIP_MODEL_BOX, "caffe-bgr", pre)
    assert np.array_equal(out.data, pre.data)


def test_clip_none_returns_input():
    pre = ImageTensor(np.full((1, 1, 3), 999.0), "identity")
    assert clip(CLIP_NONE, "identity", pre) is pre


def test_clip_domain_check():
    pre = ImageTensor(np.zeros((1, 1, 3)), "identity")
    with pytest.raises(DomainMismatchError):
        clip(CLIP_UNIT_BOX, "caffe-bgr", pre)


@settings(max_examples=40)
@given(
    npst.arrays(np.float64, (2, 2, 3), elements=st.floats(-300.0, 300.0)),
    st.sampled_from(["model-box", "pixel-box", "unit-box"]),
    st.sampled_from(SPECS),
)
def test_clip_idempotent(data, policy, spec):
    img = ImageTensor(data, spec)
    once = clip(policy, spec, img)
    twice = clip(policy, spec, once)
    assert np.array_equal(once.data, twice.data)


@given(st.floats(-500.0, 500.0), st.sampled_from(["model-box", "pixel-box", "unit-box"]))
def test_clip_is_nearest_point_in_box(value, policy):
    """Grid oracle on a single caffe channel: no box point is closer."""
    lo, hi = policy_box(policy, "caffe-bgr", 3)
    img = ImageTensor(np.full((1, 1, 3), value), "caffe-bgr")
    clipped = clip(policy, "caffe-bgr", img)
    for c in range(3):
        got = abs(clipped.data[0, 0, c] - value)
        best = min(abs(g - value) for g in np.linspace(lo[c], hi[c], 257))
        assert got <= best + 1e-9


def test_policy_box_identity_broadcasts_channels():
    lo, hi = policy_box("pixel-box", "identity", 5)
    assert lo.shape == (5,) and hi.shape == (5,)
    assert hi[0] == 255.0


def test_policy_box_none_is_unconstrained():
    assert policy_box("none", "caffe-bgr", 3) is None
