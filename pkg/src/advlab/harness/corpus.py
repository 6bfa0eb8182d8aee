"""Tensor files and the manifest-driven image corpus.

Tensor file layout (integers little-endian):

    magic   4 bytes  "PXT1"
    dtype   u8       1 = 32-bit IEEE-754 floats
    ndim    u8
    dims    ndim x u32
    payload row-major values

The manifest is a CSV with header ``image_file,label``; image paths are
resolved relative to the manifest's directory.
"""

from __future__ import annotations

import csv
import os
import struct
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..errors import CorpusError, ParseError
from ..tensor import ImageTensor

__all__ = ["MAGIC", "save_tensor", "load_tensor", "CorpusItem", "Corpus",
           "load_corpus", "save_corpus"]

MAGIC = b"PXT1"
_DTYPE_F32 = 1
_MAX_RANK = 8


def save_tensor(path, array) -> None:
    """Write an array as 32-bit floats."""
    arr = np.ascontiguousarray(array, dtype="<f4")
    if not 1 <= arr.ndim <= _MAX_RANK:
        raise ValueError(f"tensor rank {arr.ndim} outside 1..{_MAX_RANK}")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<BB", _DTYPE_F32, arr.ndim))
        for dim in arr.shape:
            fh.write(struct.pack("<I", dim))
        fh.write(arr.tobytes(order="C"))


def load_tensor(path) -> np.ndarray:
    """Read a tensor file back as float64."""
    with open(path, "rb") as fh:
        data = fh.read()
    path = str(path)

    def fail(offset, message):
        raise ParseError(path, offset, message)

    if len(data) < 4:
        fail(0, "file truncated reading magic")
    if data[:4] != MAGIC:
        fail(0, f"bad magic {data[:4]!r}, expected {MAGIC!r}")
    if len(data) < 6:
        fail(4, "file truncated reading dtype/rank")
    dtype_code, ndim = data[4], data[5]
    if dtype_code != _DTYPE_F32:
        fail(4, f"unsupported dtype code {dtype_code}")
    if not 1 <= ndim <= _MAX_RANK:
        fail(5, f"tensor rank {ndim} outside 1..{_MAX_RANK}")
    offset = 6
    dims = []
    for i in range(ndim):
        if offset + 4 > len(data):
            fail(offset, f"file truncated reading dim {i}")
        dims.append(struct.unpack_from("<I", data, offset)[0])
        offset += 4
    count = 1
    for d in dims:
        count *= d
    expected = offset + 4 * count
    if len(data) < expected:
        fail(offset, f"file truncated: payload needs {4 * count} bytes, have {len(data) - offset}")
    if len(data) > expected:
        fail(expected, f"{len(data) - expected} trailing bytes after payload")
    values = np.frombuffer(data, dtype="<f4", count=count, offset=offset)
    return values.astype(np.float64).reshape(dims)


class CorpusItem(NamedTuple):
    image_id: str
    image: ImageTensor
    label: int


@dataclass(frozen=True)
class Corpus:
    """Manifest-ordered raw images with labels."""

    items: tuple
    manifest_path: str

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __getitem__(self, i):
        return self.items[i]


def load_corpus(manifest_path, class_count=None) -> Corpus:
    """Load every image a manifest lists, in manifest order.

    Raises FileNotFoundError for missing files, ParseError for malformed
    tensor files, and CorpusError for manifest-level problems (bad header,
    duplicate ids, label issues, inconsistent shapes).
    """
    manifest_path = str(manifest_path)
    base = os.path.dirname(os.path.abspath(manifest_path))
    with open(manifest_path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["image_file", "label"]:
        raise CorpusError(
            f"{manifest_path}: manifest must start with header 'image_file,label'"
        )
    items = []
    seen = set()
    shape = None
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 2:
            raise CorpusError(f"{manifest_path}:{lineno}: expected 2 columns, got {len(row)}")
        image_file, label_text = row
        if image_file in seen:
            raise CorpusError(f"{manifest_path}:{lineno}: duplicate image id {image_file!r}")
        seen.add(image_file)
        try:
            label = int(label_text)
        except ValueError:
            raise CorpusError(
                f"{manifest_path}:{lineno}: label {label_text!r} is not an integer"
            ) from None
        if label < 0:
            raise CorpusError(f"{manifest_path}:{lineno}: label {label} is negative")
        if class_count is not None and label >= class_count:
            raise CorpusError(
                f"{manifest_path}:{lineno}: label {label} outside 0..{class_count - 1}"
            )
        data = load_tensor(os.path.join(base, image_file))
        if data.ndim != 3:
            raise CorpusError(
                f"{manifest_path}:{lineno}: {image_file!r} has rank {data.ndim}, images must be rank 3"
            )
        if shape is None:
            shape = data.shape
        elif data.shape != shape:
            raise CorpusError(
                f"{manifest_path}:{lineno}: {image_file!r} has shape {data.shape}, "
                f"but earlier images have shape {shape}"
            )
        items.append(CorpusItem(image_file, ImageTensor(data, "raw"), label))
    return Corpus(tuple(items), manifest_path)


def save_corpus(manifest_path, images, labels) -> str:
    """Write images as tensor files next to a new manifest; returns its path.

    Mostly a fixture helper: ids are img_000.pxt, img_001.pxt, ...
    """
    images = list(images)
    labels = list(labels)
    if len(images) != len(labels):
        raise ValueError(f"{len(images)} images but {len(labels)} labels")
    manifest_path = str(manifest_path)
    base = os.path.dirname(os.path.abspath(manifest_path))
    os.makedirs(base, exist_ok=True)
    names = []
    for i, image in enumerate(images):
        name = f"img_{i:03d}.pxt"
        data = image.data if isinstance(image, ImageTensor) else image
        save_tensor(os.path.join(base, name), data)
        names.append(name)
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("image_file,label\n")
        for name, label in zip(names, labels):
            fh.write(f"{name},{int(label)}\n")
    return manifest_path
