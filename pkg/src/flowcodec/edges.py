"""Flow-discontinuity detection on between-pixel lattices.

Edges live at between-pixel positions on two staggered grids: a vertical
edgel (x, y) separates pixels (x, y) and (x+1, y); a horizontal edgel
(x, y) separates pixels (x, y) and (x, y+1). Detection is Marr-Hildreth
(zero crossings of the Laplacian of the Gaussian-smoothed field) pruned
by Canny-style hysteresis on the across-edgel gradient magnitude.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .flow_io import FlowField, make_field


@dataclass(frozen=True)
class EdgeSet:
    """Boolean edgel lattices for a width x height pixel grid.

    vertical has shape (height, width-1): vertical[y, x] separates
    pixels (x, y) and (x+1, y). horizontal has shape (height-1, width):
    horizontal[y, x] separates pixels (x, y) and (x, y+1).
    """

    width: int
    height: int
    vertical: np.ndarray
    horizontal: np.ndarray

    def __post_init__(self):
        if self.vertical.shape != (self.height, max(self.width - 1, 0)):
            raise ValueError("vertical lattice shape mismatch")
        if self.horizontal.shape != (max(self.height - 1, 0), self.width):
            raise ValueError("horizontal lattice shape mismatch")

    @classmethod
    def empty(cls, width: int, height: int) -> "EdgeSet":
        return cls(
            width,
            height,
            np.zeros((height, max(width - 1, 0)), dtype=bool),
            np.zeros((max(height - 1, 0), width), dtype=bool),
        )

    def count(self) -> int:
        return int(self.vertical.sum() + self.horizontal.sum())

    def transpose(self) -> "EdgeSet":
        """Swap x/y; vertical and horizontal lattices exchange roles."""
        return EdgeSet(self.height, self.width, self.horizontal.T, self.vertical.T)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EdgeSet):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and np.array_equal(self.vertical, other.vertical)
            and np.array_equal(self.horizontal, other.horizontal)
        )


@dataclass(frozen=True)
class DetectorParams:
    """Marr-Hildreth + hysteresis parameters."""

    sigma: float = 0.5
    t_high: float = 4.0
    t_low: float = 2.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if not self.t_low < self.t_high:
            raise ValueError("t_low must be strictly below t_high")


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Sampled 1-D Gaussian, truncated at ceil(3*sigma) taps per side,
    renormalized to sum to 1."""
    radius = int(np.ceil(3.0 * sigma))
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(t * t) / (2.0 * sigma * sigma))
    return k / k.sum()


def _smooth_channel(channel: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    out = correlate1d(channel, kernel, axis=0, mode="reflect")
    return correlate1d(out, kernel, axis=1, mode="reflect")


def gaussian_smooth(field: FlowField, sigma: float) -> FlowField:
    """Separable Gaussian convolution of both channels with reflecting
    boundary handling."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    kernel = gaussian_kernel(sigma)
    u = _smooth_channel(field.u.astype(np.float64), kernel)
    v = _smooth_channel(field.v.astype(np.float64), kernel)
    return make_field(u, v)


def laplacian(channel: np.ndarray) -> np.ndarray:
    """5-point Laplacian with reflecting boundaries (out-of-domain
    neighbours mirror the centre pixel, so their terms vanish)."""
    c = np.asarray(channel, dtype=np.float64)
    out = np.zeros_like(c)
    out[:, 1:] += c[:, :-1] - c[:, 1:]
    out[:, :-1] += c[:, 1:] - c[:, :-1]
    out[1:, :] += c[:-1, :] - c[1:, :]
    out[:-1, :] += c[1:, :] - c[:-1, :]
    return out


def _zero_crossing(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Sign change between neighbours; an exact zero next to a nonzero
    # value counts as the boundary of a crossing.
    return (a * b < 0) | ((a == 0) ^ (b == 0))


def _vertex_incident_edgels(x: int, y: int, width: int, height: int):
    """Edgels incident to dual-lattice vertex (x, y); vertex (x, y) is the
    corner shared by pixels (x-1, y-1) and (x, y). Yields (orient, ex, ey)
    with orient 0 = vertical, 1 = horizontal."""
    if 1 <= x <= width - 1:
        if 1 <= y <= height:
            yield (0, x - 1, y - 1)  # vertical edgel above the vertex
        if 0 <= y <= height - 1:
            yield (0, x - 1, y)  # vertical edgel below
    if 1 <= y <= height - 1:
        if 1 <= x <= width:
            yield (1, x - 1, y - 1)  # horizontal edgel to the left
        if 0 <= x <= width - 1:
            yield (1, x, y - 1)  # horizontal edgel to the right



def edgel_vertices(orient: int, x: int, y: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """Endpoints of an edgel on the dual lattice."""
    if orient == 0:
        return (x + 1, y), (x + 1, y + 1)
    return (x, y + 1), (x + 1, y + 1)


def detect_edges(field: FlowField, params: DetectorParams) -> EdgeSet:
    """Marr-Hildreth zero crossings plus hysteresis thresholding.

    Candidates come from a sign change of the Laplacian in either channel;
    the hysteresis thresholds act on the Euclidean norm of the across-edgel
    differences of both smoothed channels.
    """
    smoothed = gaussian_smooth(field, params.sigma)
    us = smoothed.u.astype(np.float64)
    vs = smoothed.v.astype(np.float64)
    lu = laplacian(us)
    lv = laplacian(vs)

    cand_v = _zero_crossing(lu[:, :-1], lu[:, 1:]) | _zero_crossing(lv[:, :-1], lv[:, 1:])
    cand_h = _zero_crossing(lu[:-1, :], lu[1:, :]) | _zero_crossing(lv[:-1, :], lv[1:, :])

    g_v = np.hypot(us[:, 1:] - us[:, :-1], vs[:, 1:] - vs[:, :-1])
    g_h = np.hypot(us[1:, :] - us[:-1, :], vs[1:, :] - vs[:-1, :])

    keep_v = np.zeros_like(cand_v)
    keep_h = np.zeros_like(cand_h)
    grow_v = cand_v & (g_v > params.t_low)
    grow_h = cand_h & (g_h > params.t_low)

    queue: deque = deque()
    seeds_v = cand_v & (g_v > params.t_high)
    seeds_h = cand_h & (g_h > params.t_high)
    for y, x in np.argwhere(seeds_v):
        queue.append((0, x, y))
        keep_v[y, x] = True
    for y, x in np.argwhere(seeds_h):
        queue.append((1, x, y))
        keep_h[y, x] = True

    w, h = field.width, field.height
    while queue:
        orient, x, y = queue.popleft()
        for vert in edgel_vertices(orient, x, y):
            for no, nx, ny in _vertex_incident_edgels(vert[0], vert[1], w, h):
                if no == 0:
                    if grow_v[ny, nx] and not keep_v[ny, nx]:
                        keep_v[ny, nx] = True
                        queue.append((0, nx, ny))
                else:
                    if grow_h[ny, nx] and not keep_h[ny, nx]:
                        keep_h[ny, nx] = True
                        queue.append((1, nx, ny))

    return EdgeSet(w, h, keep_v, keep_h)


def edge_images(edges: EdgeSet) -> tuple[np.ndarray, np.ndarray]:
    """Debug rendering of the two edgel lattices as uint8 images
    (255 = edgel present)."""
    return (
        edges.vertical.astype(np.uint8) * 255,
        edges.horizontal.astype(np.uint8) * 255,
    )
