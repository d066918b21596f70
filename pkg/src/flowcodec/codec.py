"""Encoder/decoder orchestration and rate-distortion evaluation.

The measurement protocol snaps input fields to their 8-bit quantised
representation (256 levels per channel) before compression; compression
ratios are computed against width*height*2 bytes of that snapped field.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .chaincode import decode_edges, encode_edges
from .container import Header, Payload, pack, unpack
from .edges import DetectorParams, detect_edges
from .errors import CorruptPayload, DimensionMismatch, MalformedStream, NoFeasiblePoint
from .flow_io import FlowField, make_field
from .mask import (
    MaskSpec,
    build_mask,
    channel_range,
    dequantise,
    fill_segment_means,
    grid_points,
    quantise,
)
from .solver import InpaintProblem, SolverConfig, solve

SNAP_LEVELS = 256


@dataclass(frozen=True)
class EncodeParams:
    detector: DetectorParams = DetectorParams()
    density: float = 0.01
    k: int = 256
    solver: SolverConfig = SolverConfig()

    def __post_init__(self):
        if not 0 < self.density <= 1:
            raise ValueError("density must lie in (0, 1]")
        if self.k < 2:
            raise ValueError("k must be at least 2")


@dataclass(frozen=True)
class RatePoint:
    compressed_bytes: int
    ratio: float
    psnr_db: float


@dataclass(frozen=True)
class SweepEntry:
    density: float
    k: int
    t1: float
    t2: float
    point: RatePoint


def _snap_channel(data: np.ndarray) -> np.ndarray:
    lo, hi = float(data.min()), float(data.max())
    q = quantise(data, lo, hi, SNAP_LEVELS)
    return dequantise(q, lo, hi, SNAP_LEVELS)


def snap_to_8bit(field: FlowField) -> FlowField:
    """Project each channel onto its 256-level uniform quantisation grid."""
    return make_field(_snap_channel(field.u), _snap_channel(field.v))


def encode(field: FlowField, params: EncodeParams = EncodeParams(), snap_input: bool = True) -> bytes:
    """Compress a flow field to a .fcf byte stream."""
    if snap_input:
        field = snap_to_8bit(field)
    w, h = field.width, field.height
    edges = detect_edges(field, params.detector)
    chain = encode_edges(edges)
    spec = MaskSpec(params.density)
    k_points, segments = build_mask(w, h, spec, edges)
    segments = fill_segment_means(segments, field)

    min_u, max_u = channel_range(field, "u")
    min_v, max_v = channel_range(field, "v")
    vals_u = np.concatenate([field.u.ravel()[k_points], [s.mean_u for s in segments]])
    vals_v = np.concatenate([field.v.ravel()[k_points], [s.mean_v for s in segments]])
    codes_u = quantise(vals_u, min_u, max_u, params.k)
    codes_v = quantise(vals_v, min_v, max_v, params.k)

    header = Header(
        width=w,
        height=h,
        spacing=spec.spacing,
        offset=spec.offset,
        k=params.k,
        min_u=min_u,
        max_u=max_u,
        min_v=min_v,
        max_v=max_v,
        n_starts=len(chain.starts),
        n_symbols=len(chain.symbols),
        n_segments=len(segments),
    )
    return pack(header, Payload(chain, codes_u, codes_v))


def decode(data: bytes, solver_config: SolverConfig | None = None) -> FlowField:
    """Reconstruct a flow field from a .fcf byte stream."""
    # peek the header to derive the grid-point count for the cross-check
    header, payload = unpack(data)
    w, h = header.width, header.height
    spec = MaskSpec.from_spacing(header.spacing)
    if spec.offset != header.offset:
        raise CorruptPayload("stored grid offset disagrees with the spacing")
    try:
        edges = decode_edges(payload.chain, w, h)
    except MalformedStream as exc:
        raise CorruptPayload(str(exc)) from None
    k_points, segments = build_mask(w, h, spec, edges)
    if len(segments) != header.n_segments:
        raise CorruptPayload(
            f"derived {len(segments)} isolated segments, header says {header.n_segments}"
        )
    count = len(k_points) + len(segments)
    if len(payload.codes_u) != count:
        raise CorruptPayload(
            f"stored {len(payload.codes_u)} codes per channel, expected {count}"
        )

    vals_u = dequantise(payload.codes_u, header.min_u, header.max_u, header.k)
    vals_v = dequantise(payload.codes_v, header.min_v, header.max_v, header.k)
    known = {}
    for i, pix in enumerate(k_points):
        known[int(pix)] = (float(vals_u[i]), float(vals_v[i]))
    for j, seg in enumerate(segments):
        known[seg.seg_id] = (
            float(vals_u[len(k_points) + j]),
            float(vals_v[len(k_points) + j]),
        )
    problem = InpaintProblem(w, h, edges, known)
    return solve(problem, solver_config or SolverConfig())


def _codes_8bit(data: np.ndarray, lo: float, hi: float) -> np.ndarray:
    if hi == lo:
        return np.zeros(data.shape, dtype=np.int64)
    clipped = np.clip(data.astype(np.float64), lo, hi)
    return quantise(clipped, lo, hi, SNAP_LEVELS)


def psnr(reference: FlowField, reconstruction: FlowField) -> float:
    """PSNR in 8-bit code space (peak 255), averaged over both channels.

    Both fields are mapped to the reference's per-channel 256-level grids;
    identical code images give the +inf sentinel.
    """
    if (reference.width, reference.height) != (reconstruction.width, reconstruction.height):
        raise DimensionMismatch("fields must share dimensions")
    total = 0.0
    for channel in ("u", "v"):
        ref = getattr(reference, channel)
        rec = getattr(reconstruction, channel)
        lo, hi = channel_range(reference, channel)
        dref = _codes_8bit(ref, lo, hi)
        drec = _codes_8bit(rec, lo, hi)
        total += float(((dref - drec) ** 2).sum())
    mse = total / (2 * reference.width * reference.height)
    if mse == 0:
        return float("inf")
    return 10.0 * np.log10(255.0**2 / mse)


def compression_ratio(field: FlowField, compressed_size: int) -> float:
    """Raw size of the 8-bit snapped two-channel field over the file size."""
    return field.width * field.height * 2 / compressed_size


DEFAULT_DENSITIES = (0.002, 0.005, 0.01, 0.02, 0.05)
DEFAULT_LEVELS = (16, 32, 64, 128, 256)
DEFAULT_THRESHOLDS = ((4.0, 2.0), (8.0, 4.0), (16.0, 8.0))


def default_grid() -> list[tuple[float, int, float, float]]:
    return [
        (d, k, t1, t2)
        for d in DEFAULT_DENSITIES
        for k in DEFAULT_LEVELS
        for (t1, t2) in DEFAULT_THRESHOLDS
    ]


def _evaluate_point(args) -> SweepEntry:
    field, sigma, d, k, t1, t2 = args
    params = EncodeParams(
        detector=DetectorParams(sigma=sigma, t_high=t1, t_low=t2), density=d, k=k
    )
    snapped = snap_to_8bit(field)
    data = encode(snapped, params, snap_input=False)
    rec = decode(data)
    point = RatePoint(len(data), compression_ratio(field, len(data)), psnr(snapped, rec))
    return SweepEntry(d, k, t1, t2, point)


def evaluate_grid(
    field: FlowField,
    grid: list[tuple[float, int, float, float]] | None = None,
    sigma: float = 0.5,
    jobs: int = 1,
) -> list[SweepEntry]:
    """Encode/decode the field at every grid point."""
    grid = default_grid() if grid is None else grid
    work = [(field, sigma, d, k, t1, t2) for (d, k, t1, t2) in grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_evaluate_point, work))
    return [_evaluate_point(w) for w in work]


def sweep(
    field: FlowField,
    target_ratios: list[float],
    grid: list[tuple[float, int, float, float]] | None = None,
    sigma: float = 0.5,
    jobs: int = 1,
) -> list[SweepEntry]:
    """Best PSNR grid point for each target ratio (achieved ratio >= target)."""
    entries = evaluate_grid(field, grid, sigma=sigma, jobs=jobs)
    out = []
    for target in target_ratios:
        feasible = [e for e in entries if e.point.ratio >= target]
        if not feasible:
            raise NoFeasiblePoint(f"no grid point reaches ratio {target}:1")
        out.append(
            max(feasible, key=lambda e: (e.point.psnr_db, e.point.ratio))
        )
    return out
