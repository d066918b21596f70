"""Lossy optical-flow codec based on edge-aware homogeneous diffusion
inpainting: stored flow-discontinuity edges (chain codes), a sparse
regular grid of quantised flow vectors, and Laplace-equation
reconstruction between them."""

from .backend import BACKEND_NAME
from .chaincode import ChainStream, StartElement, StartKind, decode_edges, encode_edges
from .codec import EncodeParams, RatePoint, decode, encode, psnr, snap_to_8bit, sweep
from .edges import DetectorParams, EdgeSet, detect_edges, gaussian_smooth
from .flow_io import FlowField, make_field, read_flow, visualize, write_flow
from .mask import MaskSpec, build_mask, channel_range, dequantise, quantise
from .solver import InpaintProblem, SolverConfig, solve, solve_direct_oracle

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME",
    "ChainStream",
    "DetectorParams",
    "EdgeSet",
    "EncodeParams",
    "FlowField",
    "InpaintProblem",
    "MaskSpec",
    "RatePoint",
    "SolverConfig",
    "StartElement",
    "StartKind",
    "build_mask",
    "channel_range",
    "decode",
    "decode_edges",
    "dequantise",
    "detect_edges",
    "encode",
    "encode_edges",
    "gaussian_smooth",
    "make_field",
    "psnr",
    "quantise",
    "read_flow",
    "snap_to_8bit",
    "solve",
    "solve_direct_oracle",
    "sweep",
    "visualize",
    "write_flow",
]
