import numpy as np
import pytest

from advlab import ImageTensor, apply
from advlab.nn import Dense, Flatten, Model, TrainConfig, build_model, train
from advlab.preprocess import CAFFE_BGR_MEANS


def make_monotone_model(input_shape, spec_name):
    """Two-class model whose loss gradient for label 0 is negative at every pixel.

    Logits are (0, w . x) with w = -0.01 everywhere, so
    d loss(x, 0) / dx = softmax_1 * w < 0 elementwise.
    """
    n = int(np.prod(input_shape))
    weights = np.zeros((n, 2))
    weights[:, 1] = -0.01
    return Model([Flatten(), Dense(weights, np.zeros(2))], input_shape, spec_name=spec_name)


def blob_images(rng, count, shape=(6, 6, 3), classes=2):
    """Class-0 images cluster dark, class-1 bright; learnable by a tiny net."""
    images, labels = [], []
    for i in range(count):
        label = i % classes
        base = 70.0 + label * (110.0 / max(classes - 1, 1))
        data = np.clip(rng.normal(base, 25.0, shape), 0.0, 255.0)
        images.append(ImageTensor(data))
        labels.append(label)
    return images, labels


def train_blob_model(images, labels, spec_name, seed, epochs=4, lr=0.0005):
    pre = [(apply(spec_name, img), label) for img, label in zip(images, labels)]
    model = build_model(
        [
            {"type": "conv2d", "kernel": [3, 3], "out_channels": 4},
            {"type": "relu"},
            {"type": "maxpool"},
            {"type": "flatten"},
            {"type": "dense", "out": 2},
        ],
        pre[0][0].shape,
        spec_name=spec_name,
        seed=seed,
    )
    return train(model, pre, TrainConfig(lr, epochs, 4, seed=seed))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def blob_corpus():
    rng = np.random.default_rng(7)
    return blob_images(rng, 12)


@pytest.fixture(scope="session")
def caffe_model(blob_corpus):
    images, labels = blob_corpus
    return train_blob_model(images, labels, "caffe-bgr", seed=3)


@pytest.fixture(scope="session")
def caffe_model_b(blob_corpus):
    images, labels = blob_corpus
    return train_blob_model(images, labels, "caffe-bgr", seed=11)


@pytest.fixture(scope="session")
def inception_corpus():
    rng = np.random.default_rng(13)
    return blob_images(rng, 12)


@pytest.fixture(scope="session")
def inception_model(inception_corpus):
    images, labels = inception_corpus
    return train_blob_model(images, labels, "inception-sym", seed=5)


def saturation_raws(rng, count=5, shape=(6, 6, 3)):
    """Raw images whose pre-processed caffe values are all inside [0, 255].

    Every raw value sits at or above its channel's subtracted mean, and the
    first image carries one raw-255 blue pixel, whose pre-processed value is
    the channel-0 limit 151.061.
    """
    means_rgb = (CAFFE_BGR_MEANS[2], CAFFE_BGR_MEANS[1], CAFFE_BGR_MEANS[0])
    images = []
    for i in range(count):
        data = np.empty(shape)
        for c, mean in enumerate(means_rgb):
            data[:, :, c] = rng.uniform(mean, 255.0, shape[:2])
        if i == 0:
            data[0, 0, 2] = 255.0  # raw-255 blue -> 151.061 after the BGR swap
        images.append(ImageTensor(data))
    return images


@pytest.fixture(scope="session")
def saturation_fixture():
    rng = np.random.default_rng(99)
    images = saturation_raws(rng)
    model = make_monotone_model((6, 6, 3), "caffe-bgr")
    return model, images
