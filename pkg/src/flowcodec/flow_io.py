"""Middlebury-style .flo reading/writing and colour-coded visualization.

A .flo stream is the 4-byte tag "PIEH", little-endian int32 width and
height, then width*height interleaved (u, v) little-endian float32 pairs
in raster order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import BadMagic, NonFiniteValue, TruncatedStream

FLO_MAGIC = b"PIEH"

# Conventional sentinel for unknown flow; anything this large is rejected.
UNKNOWN_FLOW_THRESHOLD = 1e9


@dataclass(frozen=True)
class FlowField:
    """Dense two-channel flow field.

    u and v are float32 arrays of shape (height, width): horizontal and
    vertical displacement in pixels per frame.
    """

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if self.u.ndim != 2 or self.u.shape != self.v.shape:
            raise ValueError("u and v must be 2-D arrays of equal shape")
        if self.u.shape[0] < 1 or self.u.shape[1] < 1:
            raise ValueError("flow field must be at least 1x1")

    @property
    def height(self) -> int:
        return self.u.shape[0]

    @property
    def width(self) -> int:
        return self.u.shape[1]

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.u.astype(np.float64), self.v.astype(np.float64))

    def __eq__(self, other) -> bool:
        if not isinstance(other, FlowField):
            return NotImplemented
        return (
            self.u.shape == other.u.shape
            and np.array_equal(self.u, other.u)
            and np.array_equal(self.v, other.v)
        )


def make_field(u, v) -> FlowField:
    """Build a FlowField from any array-likes, converting to float32."""
    return FlowField(
        np.ascontiguousarray(u, dtype=np.float32),
        np.ascontiguousarray(v, dtype=np.float32),
    )


def read_flow(data: bytes) -> FlowField:
    """Parse a .flo byte stream.

    Raises BadMagic, TruncatedStream or NonFiniteValue.
    """
    if len(data) < 4:
        raise TruncatedStream("stream shorter than the magic tag")
    if data[:4] != FLO_MAGIC:
        raise BadMagic(f"expected {FLO_MAGIC!r}, got {data[:4]!r}")
    if len(data) < 12:
        raise TruncatedStream("stream ends inside the dimension fields")
    width, height = struct.unpack_from("<ii", data, 4)
    if width < 1 or height < 1:
        raise TruncatedStream(f"invalid dimensions {width}x{height}")
    need = 12 + 8 * width * height
    if len(data) < need:
        raise TruncatedStream(f"need {need} bytes, got {len(data)}")
    pairs = np.frombuffer(data, dtype="<f4", count=2 * width * height, offset=12)
    pairs = pairs.reshape(height, width, 2)
    u = np.ascontiguousarray(pairs[:, :, 0])
    v = np.ascontiguousarray(pairs[:, :, 1])
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise NonFiniteValue("flow field contains NaN or Inf")
    if max(np.abs(u).max(), np.abs(v).max()) > UNKNOWN_FLOW_THRESHOLD:
        raise NonFiniteValue("flow field contains unknown-flow sentinel values")
    return FlowField(u, v)


def write_flow(field: FlowField) -> bytes:
    """Serialize a FlowField; exact inverse of read_flow."""
    h, w = field.height, field.width
    pairs = np.empty((h, w, 2), dtype="<f4")
    pairs[:, :, 0] = field.u
    pairs[:, :, 1] = field.v
    return FLO_MAGIC + struct.pack("<ii", w, h) + pairs.tobytes()


def _make_colorwheel() -> np.ndarray:
    """Middlebury colour wheel: 55 RGB rows in [0, 255]."""
    RY, YG, GC, CB, BM, MR = 15, 6, 4, 11, 13, 6
    ncols = RY + YG + GC + CB + BM + MR
    wheel = np.zeros((ncols, 3))
    col = 0
    wheel[0:RY, 0] = 255
    wheel[0:RY, 1] = np.floor(255 * np.arange(RY) / RY)
    col += RY
    wheel[col : col + YG, 0] = 255 - np.floor(255 * np.arange(YG) / YG)
    wheel[col : col + YG, 1] = 255
    col += YG
    wheel[col : col + GC, 1] = 255
    wheel[col : col + GC, 2] = np.floor(255 * np.arange(GC) / GC)
    col += GC
    wheel[col : col + CB, 1] = 255 - np.floor(255 * np.arange(CB) / CB)
    wheel[col : col + CB, 2] = 255
    col += CB
    wheel[col : col + BM, 2] = 255
    wheel[col : col + BM, 0] = np.floor(255 * np.arange(BM) / BM)
    col += BM
    wheel[col : col + MR, 2] = 255 - np.floor(255 * np.arange(MR) / MR)
    wheel[col : col + MR, 0] = 255
    return wheel


_COLORWHEEL = _make_colorwheel()


def visualize(field: FlowField, max_magnitude: float | None = None) -> np.ndarray:
    """Colour-code a flow field (Middlebury convention), returning an
    RGB uint8 array of shape (height, width, 3). Zero flow maps to white.
    """
    u = field.u.astype(np.float64)
    v = field.v.astype(np.float64)
    rad = np.hypot(u, v)
    if max_magnitude is None:
        max_magnitude = float(rad.max())
    if max_magnitude <= 0:
        max_magnitude = 1.0
    u = u / max_magnitude
    v = v / max_magnitude
    rad = rad / max_magnitude

    ncols = _COLORWHEEL.shape[0]
    a = np.arctan2(-v, -u) / np.pi
    fk = (a + 1.0) / 2.0 * (ncols - 1)
    k0 = np.floor(fk).astype(int) % ncols
    k1 = (k0 + 1) % ncols
    f = (fk - np.floor(fk))[..., None]
    col = (1 - f) * _COLORWHEEL[k0] / 255.0 + f * _COLORWHEEL[k1] / 255.0

    small = rad <= 1
    col[small] = 1 - rad[small, None] * (1 - col[small])
    col[~small] *= 0.75
    return np.floor(255.0 * col).astype(np.uint8)


def write_ppm(image: np.ndarray) -> bytes:
    """Encode an RGB uint8 array as a binary PPM (P6)."""
    if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
        raise ValueError("expected an (h, w, 3) uint8 array")
    h, w = image.shape[:2]
    return b"P6\n%d %d\n255\n" % (w, h) + image.tobytes()
