"""Pure-Python/NumPy fallback for the two hot kernels: the conjugate
gradient solve of the edge-aware Laplace system and the adaptive binary
range coder. flowcodec._core provides the compiled twin; both must
produce identical compressed bytes and equivalent solutions.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "pure"

# ---------------------------------------------------------------------------
# Conjugate gradients on the edge-aware 5-point stencil
# ---------------------------------------------------------------------------


def _apply(deg, conn_r, conn_d, x, out):
    """out = A x for the reduced system embedded in the grid: diagonal deg,
    -1 couplings along open unknown-unknown neighbour pairs."""
    np.multiply(deg, x, out=out)
    if conn_r.size:
        out[:, :-1] -= np.where(conn_r, x[:, 1:], 0.0)
        out[:, 1:] -= np.where(conn_r, x[:, :-1], 0.0)
    if conn_d.size:
        out[:-1, :] -= np.where(conn_d, x[1:, :], 0.0)
        out[1:, :] -= np.where(conn_d, x[:-1, :], 0.0)
    return out


def cg_solve(deg, conn_r, conn_d, b, tol, max_iter):
    """Plain CG from a zero initial guess, stopping when the residual norm
    has decayed by the factor tol relative to ||b||.

    Returns (x, iterations); iterations is -1 when max_iter was exhausted.
    """
    x = np.zeros_like(b)
    r = b.copy()
    rs = float(np.vdot(r, r))
    if rs == 0.0:
        return x, 0
    target = tol * tol * rs
    p = r.copy()
    ap = np.empty_like(b)
    for it in range(1, max_iter + 1):
        _apply(deg, conn_r, conn_d, p, ap)
        alpha = rs / float(np.vdot(p, ap))
        x += alpha * p
        r -= alpha * ap
        rs_new = float(np.vdot(r, r))
        if rs_new <= target:
            return x, it
        p *= rs_new / rs
        p += r
        rs = rs_new
    return x, -1


# ---------------------------------------------------------------------------
# Adaptive binary range coder (carry-handling as in LZMA's rc)
# ---------------------------------------------------------------------------

_PROB_BITS = 12
_PROB_INIT = 1 << (_PROB_BITS - 1)
_ADAPT_SHIFT = 5
_TOP = 1 << 24
_MASK32 = 0xFFFFFFFF


def rc_encode(data) -> bytes:
    """Compress a byte string with an order-1 byte-context bit-tree model."""
    data = bytes(data)  # plain ints during iteration
    probs = np.full(65536, _PROB_INIT, dtype=np.uint32)
    out = bytearray()
    low = 0
    rng = _MASK32
    cache = 0
    cache_size = 1
    prev = 0

    def shift_low():
        nonlocal low, cache, cache_size
        if low < 0xFF000000 or low > _MASK32:
            carry = low >> 32
            temp = cache
            while True:
                out.append((temp + carry) & 0xFF)
                temp = 0xFF
                cache_size -= 1
                if cache_size == 0:
                    break
            cache = (low >> 24) & 0xFF
        cache_size += 1
        low = (low << 8) & _MASK32

    for byte in data:
        base = prev << 8
        node = 1
        for shift in range(7, -1, -1):
            bit = (byte >> shift) & 1
            idx = base + node
            p = int(probs[idx])
            bound = (rng >> _PROB_BITS) * p
            if bit == 0:
                rng = bound
                probs[idx] = p + (((1 << _PROB_BITS) - p) >> _ADAPT_SHIFT)
            else:
                low += bound
                rng -= bound
                probs[idx] = p - (p >> _ADAPT_SHIFT)
            while rng < _TOP:
                shift_low()
                rng <<= 8
            node = (node << 1) | bit
        prev = byte

    for _ in range(5):
        shift_low()
    return bytes(out)


def rc_decode(data, n: int) -> bytes:
    """Decode n bytes; raises ValueError if the stream is exhausted."""
    data = bytes(data)
    probs = np.full(65536, _PROB_INIT, dtype=np.uint32)
    out = bytearray(n)
    pos = 0
    size = len(data)

    def next_byte():
        nonlocal pos
        if pos >= size:
            raise ValueError("range-coded stream exhausted")
        b = data[pos]
        pos += 1
        return b

    next_byte()  # leading cache byte, always present
    code = 0
    for _ in range(4):
        code = (code << 8) | next_byte()
    rng = _MASK32
    prev = 0
    for i in range(n):
        base = prev << 8
        node = 1
        for _ in range(8):
            idx = base + node
            p = int(probs[idx])
            bound = (rng >> _PROB_BITS) * p
            if code < bound:
                bit = 0
                rng = bound
                probs[idx] = p + (((1 << _PROB_BITS) - p) >> _ADAPT_SHIFT)
            else:
                bit = 1
                code -= bound
                rng -= bound
                probs[idx] = p - (p >> _ADAPT_SHIFT)
            while rng < _TOP:
                rng <<= 8
                code = ((code << 8) | next_byte()) & _MASK32
            node = (node << 1) | bit
        prev = node & 0xFF
        out[i] = prev
    return bytes(out)
