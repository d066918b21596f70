"""Regular-grid inpainting mask, isolated-segment handling and uniform
quantisation of stored flow values."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .edges import EdgeSet
from .errors import OutOfRange
from .flow_io import FlowField


@dataclass(frozen=True)
class MaskSpec:
    """Regular mask grid, fully determined by the density parameter."""

    density: float

    def __post_init__(self):
        if not 0 < self.density <= 1:
            raise ValueError("density must lie in (0, 1]")

    @property
    def spacing(self) -> int:
        return max(1, round(1.0 / np.sqrt(self.density)))

    @property
    def offset(self) -> int:
        return self.spacing // 2

    @classmethod
    def from_spacing(cls, spacing: int) -> "MaskSpec":
        return cls(1.0 / (spacing * spacing))


@dataclass(frozen=True)
class Segment:
    """Connected component of the edgel-blocked pixel graph that holds no
    regular-grid mask point. Identified by the raster index of its first
    pixel; carries one average flow value per channel once filled in."""

    seg_id: int
    pixels: np.ndarray  # raster indices, ascending
    mean_u: float = 0.0
    mean_v: float = 0.0


def label_components(width: int, height: int, edges: EdgeSet) -> tuple[np.ndarray, int]:
    """Label pixels under 4-adjacency where a pair is adjacent iff no edgel
    separates them. Labels are renumbered so that components appear in
    raster order of their first pixel. Returns (labels flat array, count)."""
    n = width * height
    idx = np.arange(n).reshape(height, width)
    rows = []
    cols = []
    if width > 1:
        open_r = ~edges.vertical
        rows.append(idx[:, :-1][open_r])
        cols.append(idx[:, 1:][open_r])
    if height > 1:
        open_d = ~edges.horizontal
        rows.append(idx[:-1, :][open_d])
        cols.append(idx[1:, :][open_d])
    if rows:
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        graph = coo_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(n, n))
        count, labels = connected_components(graph, directed=False)
    else:
        count, labels = n, np.arange(n)
    # canonicalize label order by first raster occurrence
    first = np.full(count, n, dtype=np.int64)
    np.minimum.at(first, labels, np.arange(n))
    order = np.argsort(first, kind="stable")
    remap = np.empty(count, dtype=np.int64)
    remap[order] = np.arange(count)
    return remap[labels], count


def grid_points(width: int, height: int, spec: MaskSpec) -> np.ndarray:
    """Raster indices of the regular-grid mask points, ascending."""
    s, o = spec.spacing, spec.offset
    xs = np.arange(o, width, s)
    ys = np.arange(o, height, s)
    return (ys[:, None] * width + xs[None, :]).ravel()


def build_mask(
    width: int, height: int, spec: MaskSpec, edges: EdgeSet
) -> tuple[np.ndarray, list[Segment]]:
    """Mask point set K (raster indices) plus the isolated segments: the
    edgel-blocked components that contain no point of K, in raster order
    of their first pixel. Segment averages are left at zero."""
    k_points = grid_points(width, height, spec)
    labels, count = label_components(width, height, edges)
    has_mask = np.zeros(count, dtype=bool)
    has_mask[labels[k_points]] = True
    segments = []
    if not has_mask.all():
        order = np.argsort(labels, kind="stable")
        bounds = np.searchsorted(labels[order], np.arange(count + 1))
        for comp in np.flatnonzero(~has_mask):
            pixels = order[bounds[comp] : bounds[comp + 1]]
            segments.append(Segment(int(pixels[0]), np.sort(pixels)))
    return k_points, segments


def fill_segment_means(segments: list[Segment], field: FlowField) -> list[Segment]:
    """Attach per-channel average flow values to each segment."""
    u = field.u.ravel()
    v = field.v.ravel()
    return [
        Segment(s.seg_id, s.pixels, float(u[s.pixels].mean()), float(v[s.pixels].mean()))
        for s in segments
    ]


def channel_range(field: FlowField, channel: str) -> tuple[float, float]:
    """Exact extrema of one channel ('u' or 'v')."""
    data = getattr(field, channel)
    return float(data.min()), float(data.max())


def _check_k(k: int):
    if k < 2:
        raise ValueError("quantisation needs at least 2 levels")


def quantise(x, min_val, max_val, k: int):
    """Uniform quantisation to integer codes in {0, ..., k-1} with interval
    width a = (max-min)/(k-1); endpoints map exactly to 0 and k-1.
    x, min_val and max_val may be scalars or broadcastable arrays; a
    degenerate range (min == max) maps to code 0."""
    _check_k(k)
    x = np.asarray(x, dtype=np.float64)
    min_val = np.asarray(min_val, dtype=np.float64)
    max_val = np.asarray(max_val, dtype=np.float64)
    if np.any(min_val > max_val):
        raise ValueError("min_val must not exceed max_val")
    span = max_val - min_val
    tol = 1e-6 * span
    if np.any(x < min_val - tol) or np.any(x > max_val + tol):
        raise OutOfRange("value outside the quantisation range")
    with np.errstate(divide="ignore", invalid="ignore"):
        a = span / (k - 1)
        q = np.floor((x - min_val) / a + 0.5)
    q = np.where(span == 0, 0, np.nan_to_num(q)).astype(np.int64)
    q = np.clip(q, 0, k - 1)
    return int(q) if q.ndim == 0 else q


def dequantise(q, min_val, max_val, k: int):
    """Reconstruction value min + a*q of a quantised code. Arguments may
    be scalars or broadcastable arrays."""
    _check_k(k)
    q = np.asarray(q)
    if np.any(q < 0) or np.any(q > k - 1):
        raise OutOfRange(f"code outside {{0, ..., {k - 1}}}")
    min_val = np.asarray(min_val, dtype=np.float64)
    max_val = np.asarray(max_val, dtype=np.float64)
    a = (max_val - min_val) / (k - 1)
    x = min_val + a * q.astype(np.float64)
    # pin the top code to max exactly; a*(k-1) can round away from the span
    x = np.where(q == k - 1, max_val, x)
    x = np.where(max_val == min_val, min_val, x)
    return float(x) if x.ndim == 0 else x
