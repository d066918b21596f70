"""Shared test helpers: synthetic fields, random edge sets and random
determined inpainting problems."""

from __future__ import annotations

import numpy as np
import pytest

from flowcodec.edges import EdgeSet
from flowcodec.flow_io import FlowField, make_field
from flowcodec.mask import label_components
from flowcodec.solver import InpaintProblem


def make_piecewise_field(w: int, h: int) -> FlowField:
    """Three-region field with linear ramps inside each region: a smooth
    left region plus two right regions split horizontally, with large
    jumps across the region boundaries."""
    y, x = np.mgrid[0:h, 0:w]
    xf, yf = x / w, y / h
    region_b = (xf >= 0.4) & (yf < 0.5)
    region_c = (xf >= 0.4) & (yf >= 0.5)
    u = 2.0 + 1.5 * xf + 0.5 * yf
    v = -1.0 + 0.8 * yf
    u = np.where(region_b, 14.0 - 1.0 * xf + 0.7 * yf, u)
    v = np.where(region_b, 9.0 + 1.2 * xf, v)
    u = np.where(region_c, -6.0 + 0.9 * xf - 1.1 * yf, u)
    v = np.where(region_c, -12.0 + 0.6 * xf + 0.9 * yf, v)
    return make_field(u, v)


def make_step_field(w: int = 8, h: int = 8, contrast: float = 10.0) -> FlowField:
    """u is 0 on the left half and `contrast` on the right half; v is 0."""
    u = np.zeros((h, w))
    u[:, w // 2 :] = contrast
    return make_field(u, np.zeros((h, w)))


def random_edgeset(rng: np.random.Generator, w: int, h: int, density: float) -> EdgeSet:
    return EdgeSet(
        w,
        h,
        rng.random((h, max(w - 1, 0))) < density,
        rng.random((max(h - 1, 0), w)) < density,
    )


def random_field(rng: np.random.Generator, w: int, h: int, scale: float = 1.0) -> FlowField:
    return make_field(rng.normal(0, scale, (h, w)), rng.normal(0, scale, (h, w)))


def random_determined_problem(
    rng: np.random.Generator,
    min_dim: int = 8,
    max_dim: int = 32,
    edge_density: float = 0.05,
    mask_lo: float = 0.05,
    mask_hi: float = 0.30,
) -> InpaintProblem:
    """Random problem with a 5-30% mask and sparse random edges; every
    edgel-blocked component receives at least one known pixel so the
    problem is determined."""
    w = int(rng.integers(min_dim, max_dim + 1))
    h = int(rng.integers(min_dim, max_dim + 1))
    edges = random_edgeset(rng, w, h, edge_density)
    labels, count = label_components(w, h, edges)
    n = w * h
    frac = rng.uniform(mask_lo, mask_hi)
    idx = set(map(int, rng.choice(n, size=max(1, int(frac * n)), replace=False)))
    for comp in range(count):
        idx.add(int(np.flatnonzero(labels == comp)[0]))
    known = {i: (float(rng.normal()), float(rng.normal())) for i in sorted(idx)}
    return InpaintProblem(w, h, edges, known)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
