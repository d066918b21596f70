"""Compressed file container (.fcf).

Layout: a fixed little-endian header stored raw, followed by the
range-coded payload (serialized chain stream, then quantised codes,
channel-wise). See docs/format.md for the exact bit layout.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from . import backend
from .chaincode import ChainStream, deserialize_chainstream, serialize_chainstream
from .errors import BadMagic, CorruptPayload, MalformedStream, TruncatedStream, VersionMismatch

MAGIC = b"FCF\x01"
VERSION = 1

# Sanity bounds so a corrupted header cannot trigger huge allocations.
MAX_DIMENSION = 1 << 16
MAX_PIXELS = 1 << 26

# magic 4s | version u8 | crc32 u32 (over everything after this field)
# | width u32 | height u32 | spacing u16 | offset u16 | k u16
# | min/max per channel 4 x f32 | n_starts u32 | n_symbols u32
# | n_segments u32 | compressed payload length u32
_HEADER_FMT = "<4sBIIIHHHffffIIII"
HEADER_SIZE = struct.calcsize(_HEADER_FMT)
_CRC_END = 9  # magic + version + crc field


@dataclass(frozen=True)
class Header:
    width: int
    height: int
    spacing: int
    offset: int
    k: int
    min_u: float
    max_u: float
    min_v: float
    max_v: float
    n_starts: int
    n_symbols: int
    n_segments: int

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if self.width < 1 or self.height < 1:
            raise ValueError("invalid dimensions")


@dataclass(frozen=True)
class Payload:
    """Chain stream plus quantised codes: all u-channel codes then all
    v-channel codes; within a channel, grid points in raster order then
    segment averages in segment-id order."""

    chain: ChainStream
    codes_u: np.ndarray
    codes_v: np.ndarray


def _code_width(k: int) -> int:
    return 1 if k <= 256 else 2


def _pack_codes(codes: np.ndarray, k: int) -> bytes:
    if _code_width(k) == 1:
        return codes.astype("<u1").tobytes()
    return codes.astype("<u2").tobytes()


def _unpack_codes(data: bytes, count: int, k: int) -> np.ndarray:
    width = _code_width(k)
    if len(data) < count * width:
        raise CorruptPayload("code section shorter than declared")
    dtype = "<u1" if width == 1 else "<u2"
    codes = np.frombuffer(data, dtype=dtype, count=count).astype(np.int64)
    if np.any(codes > k - 1):
        raise CorruptPayload("quantised code out of range")
    return codes


def entropy_encode(data: bytes) -> bytes:
    """Lossless adaptive range coding; output starts with the u32 raw size."""
    return struct.pack("<I", len(data)) + backend.rc_encode(
        np.frombuffer(data, dtype=np.uint8)
    )


def entropy_decode(data: bytes) -> bytes:
    if len(data) < 4:
        raise CorruptPayload("entropy stream shorter than its size field")
    (n,) = struct.unpack_from("<I", data, 0)
    if n == 0:
        return b""
    try:
        return backend.rc_decode(np.frombuffer(data, dtype=np.uint8, offset=4), n)
    except ValueError as exc:
        raise CorruptPayload(str(exc)) from None


def pack(header: Header, payload: Payload) -> bytes:
    """Header raw, payload entropy-coded. Deterministic."""
    chain_bytes = serialize_chainstream(payload.chain)
    raw = (
        chain_bytes
        + _pack_codes(payload.codes_u, header.k)
        + _pack_codes(payload.codes_v, header.k)
    )
    compressed = entropy_encode(raw)
    head = struct.pack(
        _HEADER_FMT,
        MAGIC,
        VERSION,
        0,  # crc placeholder
        header.width,
        header.height,
        header.spacing,
        header.offset,
        header.k,
        header.min_u,
        header.max_u,
        header.min_v,
        header.max_v,
        header.n_starts,
        header.n_symbols,
        header.n_segments,
        len(compressed),
    )
    crc = zlib.crc32(head[_CRC_END:] + compressed)
    return head[:5] + struct.pack("<I", crc) + head[_CRC_END:] + compressed


def unpack(data: bytes, n_grid_points: int | None = None) -> tuple[Header, Payload]:
    """Exact inverse of pack.

    n_grid_points, when given, is the expected |K| (derived from the header
    by the codec); the per-channel code count is |K| + n_segments.
    """
    if len(data) < 4:
        raise TruncatedStream("stream shorter than the magic tag")
    if data[:4] != MAGIC:
        raise BadMagic(f"expected {MAGIC!r}, got {data[:4]!r}")
    if len(data) < HEADER_SIZE:
        raise CorruptPayload("truncated header")
    fields = struct.unpack_from(_HEADER_FMT, data, 0)
    (_, version, crc, width, height, spacing, offset, k, min_u, max_u, min_v, max_v,
     n_starts, n_symbols, n_segments, comp_len) = fields
    if version != VERSION:
        raise VersionMismatch(f"unsupported container version {version}")
    if crc != zlib.crc32(data[_CRC_END:]):
        raise CorruptPayload("checksum mismatch")
    if width > MAX_DIMENSION or height > MAX_DIMENSION or width * height > MAX_PIXELS:
        raise CorruptPayload(f"implausible dimensions {width}x{height}")
    if spacing < 1:
        raise CorruptPayload("grid spacing must be positive")
    try:
        header = Header(
            width, height, spacing, offset, k,
            min_u, max_u, min_v, max_v, n_starts, n_symbols, n_segments,
        )
    except ValueError as exc:
        raise CorruptPayload(str(exc)) from None
    if len(data) != HEADER_SIZE + comp_len:
        raise CorruptPayload("compressed payload length mismatch")

    raw = entropy_decode(data[HEADER_SIZE:])
    chain_len = (
        8 + (n_starts * 35 + 7) // 8 + (n_symbols * 2 + 7) // 8
    )
    if len(raw) < chain_len:
        raise CorruptPayload("payload shorter than the declared chain stream")
    try:
        chain = deserialize_chainstream(raw[:chain_len])
    except MalformedStream as exc:
        raise CorruptPayload(str(exc)) from None
    if len(chain.starts) != n_starts or len(chain.symbols) != n_symbols:
        raise CorruptPayload("chain stream counts disagree with the header")

    if n_grid_points is None:
        # infer |K| from the remaining byte count
        width_b = _code_width(k)
        rest = len(raw) - chain_len
        if rest % (2 * width_b) != 0:
            raise CorruptPayload("code section has an odd byte count")
        per_channel = rest // (2 * width_b)
        n_grid_points = per_channel - n_segments
        if n_grid_points < 0:
            raise CorruptPayload("segment count exceeds the stored codes")
    count = n_grid_points + n_segments
    width_b = _code_width(k)
    need = chain_len + 2 * count * width_b
    if len(raw) != need:
        raise CorruptPayload(f"payload is {len(raw)} bytes, expected {need}")
    codes_u = _unpack_codes(raw[chain_len:], count, k)
    codes_v = _unpack_codes(raw[chain_len + count * width_b :], count, k)
    return header, Payload(chain, codes_u, codes_v)
