"""Golden fixture files: compressed bytes are bit-stable across backends;
the frozen reconstruction matches bit-exactly under the compiled backend
and to float32 accuracy under the pure one (the two CG implementations
sum in different orders)."""

import pathlib

import numpy as np

from flowcodec.backend import BACKEND_NAME
from flowcodec.codec import decode, encode
from flowcodec.flow_io import read_flow

from fixtures.generate import PARAMS

FIXTURES = pathlib.Path(__file__).resolve().parent / "fixtures"


def test_encode_matches_golden_bytes():
    field = read_flow((FIXTURES / "ramps.flo").read_bytes())
    assert encode(field, PARAMS) == (FIXTURES / "ramps.fcf").read_bytes()


def test_decode_matches_golden_reconstruction():
    rec = decode((FIXTURES / "ramps.fcf").read_bytes())
    golden = read_flow((FIXTURES / "ramps.golden.flo").read_bytes())
    if BACKEND_NAME == "compiled":
        assert rec == golden
    else:
        assert np.allclose(rec.u, golden.u, atol=1e-6)
        assert np.allclose(rec.v, golden.v, atol=1e-6)


def test_golden_reconstruction_is_plausible():
    original = read_flow((FIXTURES / "ramps.flo").read_bytes())
    golden = read_flow((FIXTURES / "ramps.golden.flo").read_bytes())
    assert golden.width == original.width and golden.height == original.height
    span = float(original.u.max() - original.u.min())
    assert np.abs(golden.u.astype(float) - original.u.astype(float)).mean() < 0.05 * span
