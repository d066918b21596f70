"""Edge detection: Gaussian smoothing, Laplacian zero crossings,
hysteresis. Oracles here are independent brute-force implementations."""

import numpy as np
import pytest

from flowcodec.edges import (
    DetectorParams,
    EdgeSet,
    detect_edges,
    edge_images,
    gaussian_kernel,
    gaussian_smooth,
    laplacian,
)
from flowcodec.flow_io import make_field

from conftest import make_step_field, random_field


# --- independent oracles ---------------------------------------------------


def _reflect_index(i: int, n: int) -> int:
    # scipy 'reflect' mode: (d c b a | a b c d | d c b a)
    period = 2 * n
    i %= period
    if i < 0:
        i += period
    return i if i < n else period - 1 - i


def _oracle_smooth(channel: np.ndarray, sigma: float) -> np.ndarray:
    """Dense O(n^2 k^2) separable Gaussian with reflect boundaries."""
    kern = gaussian_kernel(sigma)
    r = len(kern) // 2
    h, w = channel.shape
    tmp = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            tmp[y, x] = sum(
                kern[t + r] * channel[_reflect_index(y + t, h), x] for t in range(-r, r + 1)
            )
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            out[y, x] = sum(
                kern[t + r] * tmp[y, _reflect_index(x + t, w)] for t in range(-r, r + 1)
            )
    return out


def _oracle_laplacian(c: np.ndarray) -> np.ndarray:
    h, w = c.shape
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            for dy, dx in ((0, 1), (0, -1), (1, 0), (-1, 0)):
                ny, nx = y + dy, x + dx
                if 0 <= ny < h and 0 <= nx < w:
                    out[y, x] += c[ny, nx] - c[y, x]
    return out


def _oracle_detect(field, params):
    """Brute-force pipeline: per-channel zero crossings, pooled gradient,
    hysteresis by repeated sweeps over shared-dual-vertex adjacency."""
    us = _oracle_smooth(field.u.astype(float), params.sigma)
    vs = _oracle_smooth(field.v.astype(float), params.sigma)
    lu, lv = _oracle_laplacian(us), _oracle_laplacian(vs)
    h, w = us.shape

    def zc(a, b):
        return a * b < 0 or (a == 0) != (b == 0)

    cand = {}
    for y in range(h):
        for x in range(w - 1):
            if zc(lu[y, x], lu[y, x + 1]) or zc(lv[y, x], lv[y, x + 1]):
                g = np.hypot(us[y, x + 1] - us[y, x], vs[y, x + 1] - vs[y, x])
                cand[(0, x, y)] = g
    for y in range(h - 1):
        for x in range(w):
            if zc(lu[y, x], lu[y + 1, x]) or zc(lv[y, x], lv[y + 1, x]):
                g = np.hypot(us[y + 1, x] - us[y, x], vs[y + 1, x] - vs[y, x])
                cand[(1, x, y)] = g

    def verts(e):
        o, x, y = e
        return {(x + 1, y), (x + 1, y + 1)} if o == 0 else {(x, y + 1), (x + 1, y + 1)}

    keep = {e for e, g in cand.items() if g > params.t_high}
    changed = True
    while changed:
        changed = False
        for e, g in cand.items():
            if e in keep or g <= params.t_low:
                continue
            ve = verts(e)
            if any(ve & verts(k) for k in keep):
                keep.add(e)
                changed = True

    out = EdgeSet.empty(w, h)
    vert = out.vertical.copy()
    horiz = out.horizontal.copy()
    for o, x, y in keep:
        if o == 0:
            vert[y, x] = True
        else:
            horiz[y, x] = True
    return EdgeSet(w, h, vert, horiz)


# --- gaussian smoothing ----------------------------------------------------


def test_kernel_normalized_and_symmetric():
    for sigma in (0.5, 1.0, 2.3):
        k = gaussian_kernel(sigma)
        assert len(k) == 2 * int(np.ceil(3 * sigma)) + 1
        assert k.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(k, k[::-1])


def test_smooth_constant_field_unchanged():
    field = make_field(np.full((5, 6), 3.5), np.full((5, 6), -1.25))
    out = gaussian_smooth(field, 1.0)
    assert np.allclose(out.u, 3.5, atol=1e-6)
    assert np.allclose(out.v, -1.25, atol=1e-6)


def test_smooth_1x3_center_matches_direct_convolution():
    # impulse input: the smoothed centre equals the normalized centre tap
    field = make_field([[0.0, 1.0, 0.0]], [[0.0, 0.0, 0.0]])
    out = gaussian_smooth(field, 0.5)
    kern = gaussian_kernel(0.5)
    assert out.u[0, 1] == pytest.approx(kern[len(kern) // 2], abs=1e-7)
    oracle = _oracle_smooth(np.array([[0.0, 1.0, 0.0]]), 0.5)
    assert np.allclose(out.u, oracle, atol=1e-7)


def test_smooth_matches_oracle_random(rng):
    field = random_field(rng, 9, 7, scale=5.0)
    for sigma in (0.5, 1.7):
        out = gaussian_smooth(field, sigma)
        assert np.allclose(out.u, _oracle_smooth(field.u.astype(float), sigma), atol=1e-6)
        assert np.allclose(out.v, _oracle_smooth(field.v.astype(float), sigma), atol=1e-6)


def test_smooth_preserves_symmetry():
    c = np.zeros((5, 5))
    c[2, 2] = 1.0
    out = gaussian_smooth(make_field(c, c), 0.8).u
    assert np.allclose(out, out[::-1, :], atol=1e-7)
    assert np.allclose(out, out[:, ::-1], atol=1e-7)


def test_smooth_rejects_bad_sigma():
    with pytest.raises(ValueError):
        gaussian_smooth(make_field([[0.0]], [[0.0]]), 0.0)


# --- laplacian ---------------------------------------------------------------


def test_laplacian_matches_oracle(rng):
    c = rng.normal(size=(6, 8))
    assert np.allclose(laplacian(c), _oracle_laplacian(c), atol=1e-12)


def test_laplacian_constant_is_zero():
    assert np.allclose(laplacian(np.full((4, 4), 7.0)), 0.0)


# --- detector ----------------------------------------------------------------


def test_constant_field_no_edges():
    field = make_field(np.full((8, 8), 2.0), np.full((8, 8), -3.0))
    assert detect_edges(field, DetectorParams()) == EdgeSet.empty(8, 8)


def test_step_field_vertical_wall():
    """8x8 step of contrast 10: all vertical edgels on the boundary column
    are retained, no horizontal edgels."""
    field = make_step_field(8, 8, 10.0)
    edges = detect_edges(field, DetectorParams(sigma=0.5, t_high=4, t_low=2))
    expect = EdgeSet.empty(8, 8)
    vert = expect.vertical.copy()
    vert[:, 3] = True  # between columns 3 and 4
    assert edges == EdgeSet(8, 8, vert, expect.horizontal)


def test_step_field_matches_full_pipeline_oracle():
    field = make_step_field(8, 8, 10.0)
    params = DetectorParams(sigma=0.5, t_high=4, t_low=2)
    assert detect_edges(field, params) == _oracle_detect(field, params)


def test_step_field_high_threshold_empty():
    field = make_step_field(8, 8, 10.0)
    edges = detect_edges(field, DetectorParams(sigma=0.5, t_high=100, t_low=2))
    assert edges == EdgeSet.empty(8, 8)


def test_detector_matches_oracle_random(rng):
    for _ in range(5):
        base = random_field(rng, 10, 9, scale=1.0)
        # add a discontinuity so something is detectable
        u = base.u.copy()
        u[:, 5:] += 8.0
        field = make_field(u, base.v)
        params = DetectorParams(sigma=0.5, t_high=4, t_low=2)
        assert detect_edges(field, params) == _oracle_detect(field, params)


def test_retained_subset_of_candidates_and_hysteresis_reachability(rng):
    field = random_field(rng, 16, 16, scale=4.0)
    params = DetectorParams(sigma=0.5, t_high=3, t_low=1)
    edges = detect_edges(field, params)
    oracle = _oracle_detect(field, params)
    assert edges == oracle  # the oracle construction enforces both properties


def test_shift_invariance():
    field = make_step_field(8, 8, 10.0)
    shifted = make_field(field.u + 42.0, field.v + 42.0)
    params = DetectorParams()
    assert detect_edges(field, params) == detect_edges(shifted, params)


def test_transpose_equivariance(rng):
    base = random_field(rng, 9, 7, scale=1.0)
    u = base.u.copy()
    u[4:, :] += 6.0
    field = make_field(u, base.v)
    params = DetectorParams()
    direct = detect_edges(make_field(field.u.T, field.v.T), params)
    assert direct == detect_edges(field, params).transpose()


def test_params_validation():
    with pytest.raises(ValueError):
        DetectorParams(sigma=-1.0)
    with pytest.raises(ValueError):
        DetectorParams(t_high=2.0, t_low=2.0)


def test_edge_images_shapes():
    edges = EdgeSet.empty(5, 4)
    vert, horiz = edge_images(edges)
    assert vert.shape == (4, 4) and horiz.shape == (3, 5)
    assert vert.dtype == np.uint8
