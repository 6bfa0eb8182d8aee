"""Binary model files.

Layout (all integers little-endian):

    magic   4 bytes  "PXM1"
    version u16      (currently 1)
    nlen    u16      spec-name byte length
    name    nlen bytes, UTF-8
    count   u16      number of layer records

Each layer record starts with a type code (u8) and the layer's input
shape (u8 rank, then rank u32 dims), followed by type-specific fields:

    conv2d (1):  kh u16, kw u16, c_out u32, weights f32[kh*kw*c_in*c_out], bias f32[c_out]
    dense  (2):  n_out u32, weights f32[n_in*n_out], bias f32[n_out]
    relu (3), maxpool (4), flatten (5): nothing

Parameters are stored as float32; loading promotes them back to the
float64 working precision.
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import ParseError
from .layers import Conv2D, Dense, Flatten, MaxPool2, ReLU
from .model import Model

__all__ = ["save_model", "load_model", "MAGIC"]

MAGIC = b"PXM1"
VERSION = 1


def _shape_bytes(shape) -> bytes:
    out = struct.pack("<B", len(shape))
    for dim in shape:
        out += struct.pack("<I", dim)
    return out


def _f32_bytes(arr) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f4").tobytes()


def save_model(model, path) -> None:
    name = model.spec_name.encode("utf-8")
    chunks = [MAGIC, struct.pack("<HH", VERSION, len(name)), name,
              struct.pack("<H", len(model.layers))]
    shape = model.input_shape
    for layer in model.layers:
        chunks.append(struct.pack("<B", layer.code))
        chunks.append(_shape_bytes(shape))
        if isinstance(layer, Conv2D):
            kh, kw, _, c_out = layer.weights.shape
            chunks.append(struct.pack("<HHI", kh, kw, c_out))
            chunks.append(_f32_bytes(layer.weights))
            chunks.append(_f32_bytes(layer.bias))
        elif isinstance(layer, Dense):
            _, n_out = layer.weights.shape
            chunks.append(struct.pack("<I", n_out))
            chunks.append(_f32_bytes(layer.weights))
            chunks.append(_f32_bytes(layer.bias))
        shape = layer.output_shape(shape)
    with open(path, "wb") as fh:
        fh.write(b"".join(chunks))


class _Reader:
    def __init__(self, path, data: bytes):
        self.path = str(path)
        self.data = data
        self.offset = 0

    def fail(self, message):
        raise ParseError(self.path, self.offset, message)

    def take(self, n: int, what: str) -> bytes:
        if self.offset + n > len(self.data):
            self.fail(f"file truncated reading {what}")
        out = self.data[self.offset : self.offset + n]
        self.offset += n
        return out

    def u8(self, what) -> int:
        return self.take(1, what)[0]

    def u16(self, what) -> int:
        return struct.unpack("<H", self.take(2, what))[0]

    def u32(self, what) -> int:
        return struct.unpack("<I", self.take(4, what))[0]

    def f32_array(self, shape, what):
        count = int(np.prod(shape)) if shape else 1
        raw = self.take(4 * count, what)
        return np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(shape)

    def shape(self, what):
        rank = self.u8(f"{what} rank")
        return tuple(self.u32(f"{what} dim {i}") for i in range(rank))


def load_model(path) -> Model:
    with open(path, "rb") as fh:
        data = fh.read()
    r = _Reader(path, data)
    magic = r.take(4, "magic")
    if magic != MAGIC:
        r.offset = 0
        r.fail(f"bad magic {magic!r}, expected {MAGIC!r}")
    version = r.u16("version")
    if version != VERSION:
        r.fail(f"unsupported version {version}")
    nlen = r.u16("spec-name length")
    try:
        spec_name = r.take(nlen, "spec name").decode("utf-8")
    except UnicodeDecodeError:
        r.fail("spec name is not valid UTF-8")
    count = r.u16("layer count")
    if count == 0:
        r.fail("model has no layers")

    layers = []
    input_shape = None
    for i in range(count):
        what = f"layer {i}"
        code = r.u8(f"{what} type code")
        shape = r.shape(f"{what} input shape")
        if input_shape is None:
            input_shape = shape
        if code == Conv2D.code:
            if len(shape) != 3:
                r.fail(f"{what}: conv2d needs a rank-3 input shape, got rank {len(shape)}")
            kh = r.u16(f"{what} kernel height")
            kw = r.u16(f"{what} kernel width")
            c_out = r.u32(f"{what} output channels")
            c_in = shape[2]
            weights = r.f32_array((kh, kw, c_in, c_out), f"{what} weights")
            bias = r.f32_array((c_out,), f"{what} bias")
            layers.append(Conv2D(weights, bias))
        elif code == Dense.code:
            if len(shape) != 1:
                r.fail(f"{what}: dense needs a rank-1 input shape, got rank {len(shape)}")
            n_out = r.u32(f"{what} output size")
            weights = r.f32_array((shape[0], n_out), f"{what} weights")
            bias = r.f32_array((n_out,), f"{what} bias")
            layers.append(Dense(weights, bias))
        elif code == ReLU.code:
            layers.append(ReLU())
        elif code == MaxPool2.code:
            layers.append(MaxPool2())
        elif code == Flatten.code:
            layers.append(Flatten())
        else:
            r.fail(f"{what}: unknown type code {code}")
    if r.offset != len(data):
        r.fail(f"{len(data) - r.offset} trailing bytes after last layer")
    return Model(layers, input_shape, spec_name=spec_name)
