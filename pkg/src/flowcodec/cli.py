"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import codec, flow_io
from .edges import DetectorParams
from .errors import FlowCodecError
from .solver import SolverConfig


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="flowcodec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="compress a .flo flow field to .fcf")
    enc.add_argument("input", type=Path)
    enc.add_argument("output", type=Path)
    enc.add_argument("--density", type=float, default=0.01)
    enc.add_argument("--levels", type=int, default=256, dest="k")
    enc.add_argument("--t1", type=float, default=4.0)
    enc.add_argument("--t2", type=float, default=2.0)
    enc.add_argument("--sigma", type=float, default=0.5)
    enc.add_argument(
        "--no-snap",
        action="store_true",
        help="compress the raw float field instead of its 8-bit snapped form",
    )

    dec = sub.add_parser("decode", help="reconstruct a .flo flow field from .fcf")
    dec.add_argument("input", type=Path)
    dec.add_argument("output", type=Path)
    dec.add_argument("--tol", type=float, default=1e-5, help="CG relative residual tolerance")

    ps = sub.add_parser("psnr", help="PSNR between two .flo fields (8-bit code space)")
    ps.add_argument("reference", type=Path)
    ps.add_argument("reconstruction", type=Path)

    vis = sub.add_parser("visualize", help="write a colour-coded PPM of a .flo field")
    vis.add_argument("input", type=Path)
    vis.add_argument("output", type=Path)
    vis.add_argument("--max-mag", type=float, default=None)

    sw = sub.add_parser("sweep", help="grid-search rate-distortion curve to CSV")
    sw.add_argument("input", type=Path)
    sw.add_argument("--out", type=Path, required=True)
    sw.add_argument(
        "--targets",
        type=str,
        default="50,100,200,400,600,900",
        help="comma-separated target compression ratios",
    )
    sw.add_argument("--densities", type=str, default=None)
    sw.add_argument("--levels", type=str, default=None)
    sw.add_argument("--thresholds", type=str, default=None, help="e.g. '4:2,8:4'")
    sw.add_argument("--sigma", type=float, default=0.5)
    sw.add_argument("--jobs", type=int, default=1)
    return parser


def _read_field(path: Path) -> flow_io.FlowField:
    return flow_io.read_flow(path.read_bytes())


def _cmd_encode(args) -> int:
    field = _read_field(args.input)
    params = codec.EncodeParams(
        detector=DetectorParams(sigma=args.sigma, t_high=args.t1, t_low=args.t2),
        density=args.density,
        k=args.k,
    )
    data = codec.encode(field, params, snap_input=not args.no_snap)
    args.output.write_bytes(data)
    ratio = codec.compression_ratio(field, len(data))
    print(f"{len(data)} bytes, ratio {ratio:.1f}:1")
    return 0


def _cmd_decode(args) -> int:
    field = codec.decode(args.input.read_bytes(), SolverConfig(rel_residual_tol=args.tol))
    args.output.write_bytes(flow_io.write_flow(field))
    return 0


def _cmd_psnr(args) -> int:
    value = codec.psnr(_read_field(args.reference), _read_field(args.reconstruction))
    print(f"{value:.4f}" if value != float("inf") else "inf")
    return 0


def _cmd_visualize(args) -> int:
    image = flow_io.visualize(_read_field(args.input), args.max_mag)
    args.output.write_bytes(flow_io.write_ppm(image))
    return 0


def _parse_grid(args):
    if args.densities is None and args.levels is None and args.thresholds is None:
        return None
    densities = (
        [float(x) for x in args.densities.split(",")]
        if args.densities
        else list(codec.DEFAULT_DENSITIES)
    )
    levels = (
        [int(x) for x in args.levels.split(",")] if args.levels else list(codec.DEFAULT_LEVELS)
    )
    if args.thresholds:
        thresholds = []
        for part in args.thresholds.split(","):
            t1, t2 = part.split(":")
            thresholds.append((float(t1), float(t2)))
    else:
        thresholds = list(codec.DEFAULT_THRESHOLDS)
    return [(d, k, t1, t2) for d in densities for k in levels for (t1, t2) in thresholds]


def _cmd_sweep(args) -> int:
    field = _read_field(args.input)
    targets = [float(x) for x in args.targets.split(",")]
    entries = codec.sweep(
        field, targets, grid=_parse_grid(args), sigma=args.sigma, jobs=args.jobs
    )
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["density", "k", "t1", "t2", "bytes", "ratio", "psnr_db"])
        for e in entries:
            writer.writerow(
                [e.density, e.k, e.t1, e.t2, e.point.compressed_bytes,
                 f"{e.point.ratio:.4f}", f"{e.point.psnr_db:.4f}"]
            )
    print(f"wrote {len(entries)} rate points to {args.out}")
    return 0


_COMMANDS = {
    "encode": _cmd_encode,
    "decode": _cmd_decode,
    "psnr": _cmd_psnr,
    "visualize": _cmd_visualize,
    "sweep": _cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except FlowCodecError as exc:
        print(f"flowcodec: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"flowcodec: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
