"""Container packing, entropy coding, corruption handling."""

import numpy as np
import pytest

from flowcodec.chaincode import ChainStream, encode_edges
from flowcodec.container import (
    HEADER_SIZE,
    MAGIC,
    Header,
    Payload,
    entropy_decode,
    entropy_encode,
    pack,
    unpack,
)
from flowcodec.errors import (
    BadMagic,
    CorruptPayload,
    FlowCodecError,
    TruncatedStream,
    VersionMismatch,
)

from conftest import random_edgeset


def _random_pair(rng):
    """Random consistent (Header, Payload)."""
    w = int(rng.integers(2, 40))
    h = int(rng.integers(2, 40))
    edges = random_edgeset(rng, w, h, float(rng.uniform(0.0, 0.2)))
    chain = encode_edges(edges)
    k = int(rng.choice([2, 16, 256, 1024]))
    n_grid = int(rng.integers(1, 20))
    n_segments = int(rng.integers(0, 4))
    codes_u = rng.integers(0, k, n_grid + n_segments)
    codes_v = rng.integers(0, k, n_grid + n_segments)
    spacing = int(rng.integers(1, 30))
    # min/max are stored as 32-bit floats: pre-round so roundtrips are exact
    f32 = lambda value: float(np.float32(value))
    header = Header(
        width=w,
        height=h,
        spacing=spacing,
        offset=spacing // 2,
        k=k,
        min_u=f32(rng.normal()),
        max_u=f32(rng.normal() + 10),
        min_v=f32(rng.normal()),
        max_v=f32(rng.normal() + 10),
        n_starts=len(chain.starts),
        n_symbols=len(chain.symbols),
        n_segments=n_segments,
    )
    return header, Payload(chain, codes_u, codes_v), n_grid


def test_roundtrip_random_pairs(rng):
    for _ in range(50):
        header, payload, n_grid = _random_pair(rng)
        data = pack(header, payload)
        h2, p2 = unpack(data, n_grid_points=n_grid)
        assert h2 == header
        assert p2.chain.starts == payload.chain.starts
        assert p2.chain.symbols == payload.chain.symbols
        assert np.array_equal(p2.codes_u, payload.codes_u)
        assert np.array_equal(p2.codes_v, payload.codes_v)


def test_grid_count_inference(rng):
    header, payload, n_grid = _random_pair(rng)
    data = pack(header, payload)
    h2, p2 = unpack(data)  # count inferred from byte length
    assert len(p2.codes_u) == n_grid + header.n_segments


def test_deterministic_bytes(rng):
    header, payload, _ = _random_pair(rng)
    assert pack(header, payload) == pack(header, payload)


def test_wrong_magic():
    with pytest.raises(BadMagic):
        unpack(b"XFCF" + b"\x00" * 60)
    with pytest.raises(TruncatedStream):
        unpack(b"FC")


def test_version_mismatch(rng):
    header, payload, n = _random_pair(rng)
    data = bytearray(pack(header, payload))
    data[4] = 99
    with pytest.raises(VersionMismatch):
        unpack(bytes(data), n)


def test_truncation_rejected(rng):
    header, payload, n = _random_pair(rng)
    data = pack(header, payload)
    for cut in (5, HEADER_SIZE - 1, HEADER_SIZE + 1, len(data) - 1):
        with pytest.raises((CorruptPayload, TruncatedStream, BadMagic)):
            unpack(data[:cut], n)


def test_every_single_byte_corruption_classified(rng):
    """Flipping any single byte yields a classified FlowCodecError or a
    (rare) still-consistent stream — never an unclassified exception."""
    header, payload, n = _random_pair(rng)
    data = pack(header, payload)
    for pos in range(len(data)):
        corrupted = bytearray(data)
        corrupted[pos] ^= 0xFF
        try:
            unpack(bytes(corrupted), n)
        except FlowCodecError:
            pass


def test_code_out_of_range_rejected():
    chain = ChainStream()
    header = Header(4, 4, 2, 1, 2, 0.0, 1.0, 0.0, 1.0, 0, 0, 0)
    payload = Payload(chain, np.array([1, 1, 1, 1]), np.array([1, 1, 1, 1]))
    data = pack(header, payload)
    assert unpack(data, 4)[0].k == 2
    bad = Payload(chain, np.array([5, 1, 1, 1]), np.array([1, 1, 1, 1]))
    with pytest.raises(CorruptPayload):
        unpack(pack(header, bad), 4)


def test_header_magic_prefix(rng):
    header, payload, _ = _random_pair(rng)
    assert pack(header, payload).startswith(MAGIC)


# --- entropy coder ---------------------------------------------------------


def test_entropy_roundtrip_empty():
    data = entropy_encode(b"")
    assert entropy_decode(data) == b""


def test_entropy_roundtrip_random(rng):
    raw = rng.integers(0, 256, 5000, dtype=np.uint8).tobytes()
    assert entropy_decode(entropy_encode(raw)) == raw


def test_entropy_constant_compresses():
    raw = b"\x00" * 4096
    out = entropy_encode(raw)
    assert entropy_decode(out) == raw
    assert len(out) < 200


def test_entropy_random_overhead_bounded(rng):
    raw = rng.integers(0, 256, 4096, dtype=np.uint8).tobytes()
    out = entropy_encode(raw)
    assert len(out) <= 4096 + 128


def test_entropy_decode_garbage():
    with pytest.raises(CorruptPayload):
        entropy_decode(b"\x01")
    # declared length far beyond the available compressed bytes
    with pytest.raises(CorruptPayload):
        entropy_decode(b"\xff\xff\x00\x00" + b"\x00" * 3)
