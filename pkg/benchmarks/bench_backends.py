"""Compare the pure and compiled kernel backends.

Times the two hot kernels — the conjugate-gradient solve and the adaptive
range coder — on matched workloads, and one end-to-end encode/decode.

    python3 benchmarks/bench_backends.py [--size 256] [--repeats 3]
"""

import argparse
import pathlib
import sys
import time

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "tests"))

from conftest import make_piecewise_field

from flowcodec.backend import get_backend
from flowcodec.codec import EncodeParams, decode, encode


def _timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_cg(backend, size, repeats):
    rng = np.random.default_rng(0)
    cr = rng.random((size, size - 1)) < 0.95
    cd = rng.random((size - 1, size)) < 0.95
    deg = np.zeros((size, size))
    deg[:, :-1] += cr
    deg[:, 1:] += cr
    deg[:-1, :] += cd
    deg[1:, :] += cd
    deg += 0.05
    b = rng.normal(size=(size, size))
    secs, (x, iters) = _timeit(lambda: backend.cg_solve(deg, cr, cd, b, 1e-9, 100_000), repeats)
    return secs, iters


def bench_rc(backend, nbytes, repeats):
    rng = np.random.default_rng(1)
    # mildly structured data, similar to real payloads
    data = (rng.integers(0, 64, nbytes, dtype=np.uint8) | 0x40).tobytes()
    enc_secs, stream = _timeit(lambda: backend.rc_encode(data), repeats)
    dec_secs, out = _timeit(lambda: backend.rc_decode(stream, nbytes), repeats)
    assert out == data
    return enc_secs, dec_secs, len(stream)


def bench_end_to_end(size, repeats):
    field = make_piecewise_field(size, size)
    params = EncodeParams(density=0.01, k=64)
    enc_secs, data = _timeit(lambda: encode(field, params), repeats)
    dec_secs, _ = _timeit(lambda: decode(data), repeats)
    return enc_secs, dec_secs, len(data)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=192, help="square grid side for CG")
    ap.add_argument("--rc-bytes", type=int, default=1_000_000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    rows = []
    for name in ("pure", "compiled"):
        try:
            backend = get_backend(name)
        except ImportError:
            print(f"{name}: unavailable, skipping")
            continue
        cg_secs, iters = bench_cg(backend, args.size, args.repeats)
        enc, dec, compressed = bench_rc(backend, args.rc_bytes, args.repeats)
        rows.append((name, cg_secs, iters, enc, dec))
        print(
            f"{name:>9}: cg {args.size}x{args.size} {cg_secs * 1e3:8.1f} ms "
            f"({iters} iters) | rc encode {enc * 1e3:8.1f} ms, "
            f"decode {dec * 1e3:8.1f} ms on {args.rc_bytes} bytes "
            f"-> {compressed} bytes"
        )
    if len(rows) == 2:
        (_, cg_p, _, enc_p, dec_p), (_, cg_c, _, enc_c, dec_c) = rows
        print(
            f"  speedup: cg {cg_p / cg_c:4.1f}x | "
            f"rc encode {enc_p / enc_c:5.1f}x, decode {dec_p / dec_c:5.1f}x"
        )

    enc, dec, size = bench_end_to_end(192, args.repeats)
    print(
        f"end-to-end 192x192 (active backend): encode {enc * 1e3:.1f} ms, "
        f"decode {dec * 1e3:.1f} ms, {size} bytes"
    )


if __name__ == "__main__":
    main()
