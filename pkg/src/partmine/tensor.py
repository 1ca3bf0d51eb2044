"""Tensor container, NPY v1.0 file I/O and shared numeric primitives.

A :class:`Tensor` is an immutable rank-1..3 grid of float32 values stored in
row-major (C) order.  Rank-3 tensors are indexed (channel, row, col).  The
on-disk format is NPY v1.0 restricted to real element types, which keeps the
files readable by any numpy-compatible tool.
"""
from __future__ import annotations

import ast
import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    IoFailure,
    MalformedHeader,
    ShapeMismatch,
    TruncatedPayload,
    UnsupportedElementType,
    ZeroExtent,
    ZeroVector,
)

_MAGIC = b"\x93NUMPY"
# little/big endian 4- and 8-byte IEEE floats; everything else is refused
_REAL_DESCRS = {"<f4", "<f8", ">f4", ">f8", "=f4", "=f8"}


@dataclass(frozen=True)
class Tensor:
    """Immutable float32 value grid of rank 1 to 3."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float32)
        if arr.ndim < 1 or arr.ndim > 3:
            raise ShapeMismatch(f"tensor rank must be 1..3, got {arr.ndim}")
        if any(d < 1 for d in arr.shape):
            raise ShapeMismatch(f"tensor extents must be >= 1, got {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def rank(self) -> int:
        return self.data.ndim

    @property
    def spatial(self) -> tuple[int, int]:
        """(height, width) of the trailing two axes."""
        if self.rank < 2:
            raise ShapeMismatch("rank-1 tensor has no spatial dims")
        return self.data.shape[-2], self.data.shape[-1]


def read_tensor(path) -> Tensor:
    """Parse an NPY v1.0 file into a Tensor.

    The container must hold a C-ordered real-valued array of rank 1..3;
    elements are widened or narrowed to float32.  Parse errors name the byte
    offset at which the file became invalid.
    """
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc

    if len(raw) < 6 or raw[:6] != _MAGIC:
        raise MalformedHeader("bad magic, not an NPY file", offset=0)
    if len(raw) < 8:
        raise MalformedHeader("file ends inside the version field", offset=6)
    major, minor = raw[6], raw[7]
    if (major, minor) != (1, 0):
        raise MalformedHeader(f"unsupported NPY version {major}.{minor}", offset=6)
    if len(raw) < 10:
        raise MalformedHeader("file ends inside the header-length field", offset=8)
    (hlen,) = struct.unpack("<H", raw[8:10])
    if len(raw) < 10 + hlen:
        raise MalformedHeader("file ends inside the header text", offset=10)

    header_text = raw[10 : 10 + hlen].decode("latin1")
    try:
        header = ast.literal_eval(header_text)
    except (ValueError, SyntaxError) as exc:
        raise MalformedHeader(f"unparseable header dict: {exc}", offset=10) from exc
    if not isinstance(header, dict) or set(header) != {"descr", "fortran_order", "shape"}:
        raise MalformedHeader("header is not a {descr, fortran_order, shape} dict", offset=10)

    descr = header["descr"]
    if descr not in _REAL_DESCRS:
        raise UnsupportedElementType(f"element type {descr!r} is not a real float", offset=10)
    if header["fortran_order"] is not False:
        raise MalformedHeader("payload must be C-ordered (fortran_order False)", offset=10)
    shape = header["shape"]
    if (
        not isinstance(shape, tuple)
        or not 1 <= len(shape) <= 3
        or not all(isinstance(d, int) and d >= 1 for d in shape)
    ):
        raise MalformedHeader(f"shape {shape!r} is not a rank-1..3 tuple of positive ints", offset=10)

    dtype = np.dtype(descr)
    start = 10 + hlen
    need = int(np.prod(shape)) * dtype.itemsize
    if len(raw) - start < need:
        raise TruncatedPayload(
            f"payload needs {need} bytes, file ends after {len(raw) - start}",
            offset=len(raw),
        )
    arr = np.frombuffer(raw, dtype=dtype, count=int(np.prod(shape)), offset=start)
    return Tensor(arr.astype(np.float32).reshape(shape))


def write_tensor(t: Tensor, path) -> None:
    """Write a Tensor as NPY v1.0 (<f4, C order); round-trips bit-exactly."""
    header = {
        "descr": "<f4",
        "fortran_order": False,
        "shape": tuple(int(d) for d in t.dims),
    }
    text = "{'descr': %r, 'fortran_order': False, 'shape': %r, }" % (
        header["descr"],
        header["shape"],
    )
    # pad with spaces so magic+version+len+header is a multiple of 64, newline-terminated
    unpadded = 10 + len(text) + 1
    text = text + " " * (-unpadded % 64) + "\n"
    try:
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(bytes([1, 0]))
            fh.write(struct.pack("<H", len(text)))
            fh.write(text.encode("latin1"))
            fh.write(np.ascontiguousarray(t.data, dtype="<f4").tobytes())
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _axis_coords(n_in: int, n_out: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Corner-aligned source coordinates for one axis: (lo index, hi index, frac)."""
    if n_out == 1:
        coords = np.zeros(1)
    else:
        coords = np.arange(n_out) * ((n_in - 1) / (n_out - 1))
    lo = np.floor(coords).astype(np.intp)
    lo = np.minimum(lo, n_in - 1)
    hi = np.minimum(lo + 1, n_in - 1)
    return lo, hi, coords - lo


def bilinear_resize(t: Tensor, out_h: int, out_w: int) -> Tensor:
    """Per-channel bilinear interpolation with corner-aligned sampling.

    Source corners map exactly onto target corners, so resizing to the input
    size is the identity and constant inputs stay constant to the last bit.
    """
    if out_h < 1 or out_w < 1:
        raise ZeroExtent(f"output extents must be >= 1, got ({out_h}, {out_w})")
    if t.rank not in (2, 3):
        raise ShapeMismatch(f"bilinear_resize needs rank 2 or 3, got {t.rank}")

    src = t.data if t.rank == 3 else t.data[np.newaxis]
    h, w = src.shape[1], src.shape[2]
    y0, y1, fy = _axis_coords(h, out_h)
    x0, x1, fx = _axis_coords(w, out_w)

    src64 = src.astype(np.float64)
    v00 = src64[:, y0[:, None], x0[None, :]]
    v01 = src64[:, y0[:, None], x1[None, :]]
    v10 = src64[:, y1[:, None], x0[None, :]]
    v11 = src64[:, y1[:, None], x1[None, :]]
    # incremental lerp keeps equal neighbours exactly equal
    top = v00 + fx[None, None, :] * (v01 - v00)
    bot = v10 + fx[None, None, :] * (v11 - v10)
    out = top + fy[None, :, None] * (bot - top)

    out = out.astype(np.float32)
    return Tensor(out if t.rank == 3 else out[0])


def global_average_pool(t: Tensor) -> np.ndarray:
    """Per-channel spatial mean of a rank-3 tensor; length-C float32 vector.

    The denominator is always the full spatial size h*w, including zeros a
    mask may have introduced.
    """
    if t.rank != 3:
        raise ShapeMismatch(f"global_average_pool needs rank 3, got {t.rank}")
    return t.data.mean(axis=(1, 2), dtype=np.float64).astype(np.float32)


def l2_normalize(d: np.ndarray) -> np.ndarray:
    """Scale a vector to unit Euclidean norm; direction is preserved."""
    d = np.asarray(d, dtype=np.float32)
    if d.ndim != 1:
        raise ShapeMismatch(f"l2_normalize needs a 1-D vector, got rank {d.ndim}")
    norm = float(np.linalg.norm(d.astype(np.float64)))
    if norm < 1e-12:
        raise ZeroVector("cannot normalize a zero vector")
    return (d / norm).astype(np.float32)


def masked_multiply(t: Tensor, mask: np.ndarray) -> Tensor:
    """Element-wise product with a binary rank-2 mask, broadcast over channels."""
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ShapeMismatch(f"mask must be rank 2, got rank {mask.ndim}")
    if t.rank < 2 or mask.shape != t.spatial:
        raise ShapeMismatch(f"mask shape {mask.shape} != tensor spatial {t.spatial}")
    if not np.isin(mask, (0, 1)).all():
        raise ShapeMismatch("mask values must be 0 or 1")
    return Tensor(t.data * mask.astype(np.float32))
