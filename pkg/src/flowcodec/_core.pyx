# cython: boundscheck=False, wraparound=False, cdivision=True, nonecheck=False
"""Compiled twin of flowcodec._pure: CG solve of the edge-aware Laplace
system and the adaptive binary range coder. Bitstreams are identical to
the pure backend's."""

import numpy as np

from libc.math cimport sqrt
from libc.stdint cimport uint8_t, uint32_t, uint64_t

BACKEND_NAME = "compiled"


cdef void _apply(double[:, ::1] deg, uint8_t[:, ::1] conn_r, uint8_t[:, ::1] conn_d,
                 double[:, ::1] x, double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t h = deg.shape[0], w = deg.shape[1]
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(h):
        for j in range(w):
            acc = deg[i, j] * x[i, j]
            if j > 0 and conn_r[i, j - 1]:
                acc -= x[i, j - 1]
            if j < w - 1 and conn_r[i, j]:
                acc -= x[i, j + 1]
            if i > 0 and conn_d[i - 1, j]:
                acc -= x[i - 1, j]
            if i < h - 1 and conn_d[i, j]:
                acc -= x[i + 1, j]
            out[i, j] = acc


cdef double _dot(double[:, ::1] a, double[:, ::1] b) noexcept nogil:
    cdef Py_ssize_t h = a.shape[0], w = a.shape[1]
    cdef Py_ssize_t i, j
    cdef double s = 0.0
    for i in range(h):
        for j in range(w):
            s += a[i, j] * b[i, j]
    return s


def cg_solve(deg, conn_r, conn_d, b, double tol, long max_iter):
    """Plain CG from a zero initial guess; stops when ||r|| <= tol * ||b||.
    Returns (x, iterations), iterations == -1 on non-convergence."""
    cdef double[:, ::1] deg_v = deg
    cdef uint8_t[:, ::1] cr = conn_r.view(np.uint8)
    cdef uint8_t[:, ::1] cd = conn_d.view(np.uint8)
    x_arr = np.zeros_like(b)
    r_arr = b.copy()
    p_arr = b.copy()
    ap_arr = np.empty_like(b)
    cdef double[:, ::1] x = x_arr
    cdef double[:, ::1] r = r_arr
    cdef double[:, ::1] p = p_arr
    cdef double[:, ::1] ap = ap_arr
    cdef double rs = _dot(r, r)
    if rs == 0.0:
        return x_arr, 0
    cdef double target = tol * tol * rs
    cdef double alpha, beta, rs_new, pap
    cdef Py_ssize_t h = deg_v.shape[0], w = deg_v.shape[1]
    cdef Py_ssize_t i, j
    cdef long it
    with nogil:
        for it in range(1, max_iter + 1):
            _apply(deg_v, cr, cd, p, ap)
            pap = _dot(p, ap)
            alpha = rs / pap
            for i in range(h):
                for j in range(w):
                    x[i, j] += alpha * p[i, j]
                    r[i, j] -= alpha * ap[i, j]
            rs_new = _dot(r, r)
            if rs_new <= target:
                with gil:
                    return x_arr, it
            beta = rs_new / rs
            for i in range(h):
                for j in range(w):
                    p[i, j] = r[i, j] + beta * p[i, j]
            rs = rs_new
    return x_arr, -1


DEF PROB_BITS = 12
DEF PROB_INIT = 2048
DEF ADAPT_SHIFT = 5
DEF TOP = 1 << 24
DEF MASK32 = 0xFFFFFFFF


def rc_encode(const uint8_t[::1] data not None):
    """Order-1 bit-tree adaptive range encoder (LZMA-style carry handling)."""
    cdef uint32_t[::1] probs = np.full(65536, PROB_INIT, dtype=np.uint32)
    out = bytearray()
    cdef uint64_t low = 0
    cdef uint32_t rng = MASK32
    cdef uint32_t cache = 0
    cdef uint64_t cache_size = 1
    cdef uint32_t prev = 0, base, node, p, bound, carry, temp
    cdef Py_ssize_t n = data.shape[0], i
    cdef int shift, bit
    for i in range(n):
        base = prev << 8
        node = 1
        for shift in range(7, -1, -1):
            bit = (data[i] >> shift) & 1
            p = probs[base + node]
            bound = (rng >> PROB_BITS) * p
            if bit == 0:
                rng = bound
                probs[base + node] = p + (((1 << PROB_BITS) - p) >> ADAPT_SHIFT)
            else:
                low += bound
                rng -= bound
                probs[base + node] = p - (p >> ADAPT_SHIFT)
            while rng < TOP:
                # shift_low
                if low < 0xFF000000 or low > MASK32:
                    carry = <uint32_t>(low >> 32)
                    temp = cache
                    while True:
                        out.append((temp + carry) & 0xFF)
                        temp = 0xFF
                        cache_size -= 1
                        if cache_size == 0:
                            break
                    cache = <uint32_t>((low >> 24) & 0xFF)
                cache_size += 1
                low = (low << 8) & MASK32
                rng <<= 8
            node = (node << 1) | bit
        prev = data[i]
    cdef int k
    for k in range(5):
        if low < 0xFF000000 or low > MASK32:
            carry = <uint32_t>(low >> 32)
            temp = cache
            while True:
                out.append((temp + carry) & 0xFF)
                temp = 0xFF
                cache_size -= 1
                if cache_size == 0:
                    break
            cache = <uint32_t>((low >> 24) & 0xFF)
        cache_size += 1
        low = (low << 8) & MASK32
    return bytes(out)


def rc_decode(const uint8_t[::1] data not None, Py_ssize_t n):
    """Decode n bytes; raises ValueError if the stream is exhausted."""
    cdef uint32_t[::1] probs = np.full(65536, PROB_INIT, dtype=np.uint32)
    out_arr = np.empty(n, dtype=np.uint8)
    cdef uint8_t[::1] out = out_arr
    cdef Py_ssize_t pos = 0, size = data.shape[0], i
    cdef uint32_t code = 0, rng = MASK32
    cdef uint32_t prev = 0, base, node, p, bound
    cdef int j
    if size < 5:
        raise ValueError("range-coded stream exhausted")
    pos = 1  # leading cache byte
    for j in range(4):
        code = (code << 8) | data[pos]
        pos += 1
    for i in range(n):
        base = prev << 8
        node = 1
        for j in range(8):
            p = probs[base + node]
            bound = (rng >> PROB_BITS) * p
            if code < bound:
                rng = bound
                probs[base + node] = p + (((1 << PROB_BITS) - p) >> ADAPT_SHIFT)
                node = node << 1
            else:
                code -= bound
                rng -= bound
                probs[base + node] = p - (p >> ADAPT_SHIFT)
                node = (node << 1) | 1
            while rng < TOP:
                if pos >= size:
                    raise ValueError("range-coded stream exhausted")
                rng <<= 8
                code = (code << 8) | data[pos]
                pos += 1
        prev = node & 0xFF
        out[i] = <uint8_t>prev
    return bytes(out_arr.tobytes())
