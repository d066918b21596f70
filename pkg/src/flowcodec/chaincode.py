"""Lossless chain-code serialization of edgel sets.

Contours are stored as typed starting elements plus a 4-symbol chain code
(LEFT / STRAIGHT / RIGHT relative to the walk direction, plus END).
Every dual-lattice vertex with three incident edgels is a T-junction and
becomes a starting element; a 4-way crossing is covered by two junction
elements. Components without junctions (simple paths and cycles) get an
isolated starting element at a canonical first edgel. The decoder replays
the exact traversal, so no per-branch bookkeeping is stored.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .edges import EdgeSet
from .errors import MalformedStream

# Chain symbols, 2 bits each.
SYM_LEFT = 0
SYM_STRAIGHT = 1
SYM_RIGHT = 2
SYM_END = 3

UP = (0, -1)
DOWN = (0, 1)
LEFT = (-1, 0)
RIGHT = (1, 0)


class StartKind(IntEnum):
    T1_LEFT = 0  # vertical run with a branch to the left
    T2_RIGHT = 1  # vertical run with a branch to the right
    T3_DOWN = 2  # horizontal run with a branch downward
    T4_UP = 3  # horizontal run with a branch upward
    ISO_VERT = 4  # isolated component, first edgel vertical
    ISO_HORIZ = 5  # isolated component, first edgel horizontal


# Walk order of the branches implied by each junction type.
_TEMPLATE_DIRS = {
    StartKind.T1_LEFT: (UP, DOWN, LEFT),
    StartKind.T2_RIGHT: (UP, DOWN, RIGHT),
    StartKind.T3_DOWN: (LEFT, RIGHT, DOWN),
    StartKind.T4_UP: (LEFT, RIGHT, UP),
}

_JUNCTION_KINDS = frozenset(_TEMPLATE_DIRS)


@dataclass(frozen=True)
class StartElement:
    kind: StartKind
    ref_x: int
    ref_y: int


@dataclass
class ChainStream:
    starts: list[StartElement] = field(default_factory=list)
    symbols: list[int] = field(default_factory=list)


def _turn_left(d):
    return (d[1], -d[0])


def _turn_right(d):
    return (-d[1], d[0])


def _edgel_from_vertex(vx, vy, d, width, height):
    """Edgel leaving dual vertex (vx, vy) in direction d, or None if it
    would lie outside the lattice. Returns (orient, x, y); orient 0 is
    vertical, 1 is horizontal."""
    dx, dy = d
    if dx == 0:
        if not 1 <= vx <= width - 1:
            return None
        if dy < 0:
            return (0, vx - 1, vy - 1) if vy >= 1 else None
        return (0, vx - 1, vy) if vy <= height - 1 else None
    if not 1 <= vy <= height - 1:
        return None
    if dx < 0:
        return (1, vx - 1, vy - 1) if vx >= 1 else None
    return (1, vx, vy - 1) if vx <= width - 1 else None


def _junction_elements(edges: EdgeSet) -> list[tuple[int, int, StartKind]]:
    """(vx, vy, kind) for every junction start, in raster order of the
    junction vertex. Degree-4 crossings yield two elements."""
    w, h = edges.width, edges.height
    if w < 2 or h < 2:
        return []
    up = edges.vertical[0 : h - 1, :]
    down = edges.vertical[1:h, :]
    left = edges.horizontal[:, 0 : w - 1]
    right = edges.horizontal[:, 1:w]
    deg = (
        up.astype(np.int8) + down.astype(np.int8) + left.astype(np.int8) + right.astype(np.int8)
    )
    out = []
    for iy, ix in np.argwhere(deg >= 3):
        vx, vy = int(ix) + 1, int(iy) + 1
        if deg[iy, ix] == 4:
            out.append((vx, vy, StartKind.T1_LEFT))
            out.append((vx, vy, StartKind.T2_RIGHT))
        elif not right[iy, ix]:
            out.append((vx, vy, StartKind.T1_LEFT))
        elif not left[iy, ix]:
            out.append((vx, vy, StartKind.T2_RIGHT))
        elif not up[iy, ix]:
            out.append((vx, vy, StartKind.T3_DOWN))
        else:
            out.append((vx, vy, StartKind.T4_UP))
    return out


def _walk_encode(vx, vy, d, edges, vis_v, vis_h, symbols):
    """Follow unvisited edgels from (vx, vy) with incoming direction d,
    priority STRAIGHT > LEFT > RIGHT, appending one symbol per step and a
    terminating END."""
    w, h = edges.width, edges.height
    while True:
        for sym, nd in (
            (SYM_STRAIGHT, d),
            (SYM_LEFT, _turn_left(d)),
            (SYM_RIGHT, _turn_right(d)),
        ):
            e = _edgel_from_vertex(vx, vy, nd, w, h)
            if e is None:
                continue
            orient, ex, ey = e
            if orient == 0:
                if not edges.vertical[ey, ex] or vis_v[ey, ex]:
                    continue
                vis_v[ey, ex] = True
            else:
                if not edges.horizontal[ey, ex] or vis_h[ey, ex]:
                    continue
                vis_h[ey, ex] = True
            symbols.append(sym)
            vx, vy = vx + nd[0], vy + nd[1]
            d = nd
            break
        else:
            symbols.append(SYM_END)
            return


def _remaining_components(edges, vis_v, vis_h):
    """Connected components (via shared dual vertices) of edgels not yet
    visited, each as a list headed by its canonical first edgel. Scan order
    is all vertical edgels in raster order, then all horizontal ones, so a
    component's head is its topmost-then-leftmost vertical edgel when one
    exists."""
    width, height = edges.width, edges.height
    seen_v = vis_v.copy()
    seen_h = vis_h.copy()
    comps = []

    def scan():
        for ey, ex in np.argwhere(edges.vertical & ~seen_v):
            yield (0, int(ex), int(ey))
        for ey, ex in np.argwhere(edges.horizontal & ~seen_h):
            yield (1, int(ex), int(ey))

    for head in scan():
        if head[0] == 0:
            if seen_v[head[2], head[1]]:
                continue
        elif seen_h[head[2], head[1]]:
            continue
        comp = [head]
        stack = [head]
        if head[0] == 0:
            seen_v[head[2], head[1]] = True
        else:
            seen_h[head[2], head[1]] = True
        while stack:
            orient, ex, ey = stack.pop()
            if orient == 0:
                verts = ((ex + 1, ey), (ex + 1, ey + 1))
            else:
                verts = ((ex, ey + 1), (ex + 1, ey + 1))
            for cx, cy in verts:
                for d in (UP, DOWN, LEFT, RIGHT):
                    e = _edgel_from_vertex(cx, cy, d, width, height)
                    if e is None:
                        continue
                    no, nx, ny = e
                    if no == 0:
                        if edges.vertical[ny, nx] and not seen_v[ny, nx]:
                            seen_v[ny, nx] = True
                            comp.append(e)
                            stack.append(e)
                    elif edges.horizontal[ny, nx] and not seen_h[ny, nx]:
                        seen_h[ny, nx] = True
                        comp.append(e)
                        stack.append(e)
        comps.append(comp)
    return comps


def encode_edges(edges: EdgeSet) -> ChainStream:
    """Serialize an EdgeSet into starting elements plus chain symbols.

    Deterministic; every edgel is covered exactly once."""
    w, h = edges.width, edges.height
    vis_v = np.zeros_like(edges.vertical)
    vis_h = np.zeros_like(edges.horizontal)
    stream = ChainStream()

    for vx, vy, kind in _junction_elements(edges):
        stream.starts.append(StartElement(kind, vx - 1, vy - 1))
        for d in _TEMPLATE_DIRS[kind]:
            orient, ex, ey = _edgel_from_vertex(vx, vy, d, w, h)
            if orient == 0:
                if vis_v[ey, ex]:
                    continue
                vis_v[ey, ex] = True
            else:
                if vis_h[ey, ex]:
                    continue
                vis_h[ey, ex] = True
            _walk_encode(vx + d[0], vy + d[1], d, edges, vis_v, vis_h, stream.symbols)

    for comp in _remaining_components(edges, vis_v, vis_h):
        orient, ex, ey = comp[0]
        if orient == 0:
            stream.starts.append(StartElement(StartKind.ISO_VERT, ex, ey))
            vis_v[ey, ex] = True
            # forward chain from the bottom vertex, then reverse from the top
            _walk_encode(ex + 1, ey + 1, DOWN, edges, vis_v, vis_h, stream.symbols)
            _walk_encode(ex + 1, ey, UP, edges, vis_v, vis_h, stream.symbols)
        else:
            stream.starts.append(StartElement(StartKind.ISO_HORIZ, ex, ey))
            vis_h[ey, ex] = True
            _walk_encode(ex + 1, ey + 1, RIGHT, edges, vis_v, vis_h, stream.symbols)
            _walk_encode(ex, ey + 1, LEFT, edges, vis_v, vis_h, stream.symbols)

    assert np.array_equal(vis_v, edges.vertical) and np.array_equal(vis_h, edges.horizontal)
    return stream


def extract_starts(edges: EdgeSet) -> list[StartElement]:
    """Starting elements only (junctions in raster order, then isolated
    components in canonical order)."""
    return encode_edges(edges).starts


class _SymbolReader:
    def __init__(self, symbols):
        self.symbols = symbols
        self.pos = 0

    def next(self) -> int:
        if self.pos >= len(self.symbols):
            raise MalformedStream("chain code ended without a terminating symbol")
        s = self.symbols[self.pos]
        self.pos += 1
        return s


def _claim(dec_v, dec_h, e):
    orient, ex, ey = e
    if orient == 0:
        if dec_v[ey, ex]:
            raise MalformedStream("chain revisits an edgel")
        dec_v[ey, ex] = True
    else:
        if dec_h[ey, ex]:
            raise MalformedStream("chain revisits an edgel")
        dec_h[ey, ex] = True


def _walk_decode(vx, vy, d, width, height, dec_v, dec_h, reader):
    while True:
        sym = reader.next()
        if sym == SYM_END:
            return
        if sym == SYM_STRAIGHT:
            nd = d
        elif sym == SYM_LEFT:
            nd = _turn_left(d)
        else:
            nd = _turn_right(d)
        e = _edgel_from_vertex(vx, vy, nd, width, height)
        if e is None:
            raise MalformedStream("chain walks off the lattice")
        _claim(dec_v, dec_h, e)
        vx, vy = vx + nd[0], vy + nd[1]
        d = nd


def decode_edges(stream: ChainStream, width: int, height: int) -> EdgeSet:
    """Exact inverse of encode_edges for the given dimensions."""
    dec_v = np.zeros((height, max(width - 1, 0)), dtype=bool)
    dec_h = np.zeros((max(height - 1, 0), width), dtype=bool)
    reader = _SymbolReader(stream.symbols)

    for start in stream.starts:
        kind = StartKind(start.kind)
        if kind in _JUNCTION_KINDS:
            vx, vy = start.ref_x + 1, start.ref_y + 1
            if not (1 <= vx <= width - 1 and 1 <= vy <= height - 1):
                raise MalformedStream("junction reference point out of bounds")
            for d in _TEMPLATE_DIRS[kind]:
                e = _edgel_from_vertex(vx, vy, d, width, height)
                orient, ex, ey = e
                if orient == 0:
                    if dec_v[ey, ex]:
                        continue
                    dec_v[ey, ex] = True
                else:
                    if dec_h[ey, ex]:
                        continue
                    dec_h[ey, ex] = True
                _walk_decode(vx + d[0], vy + d[1], d, width, height, dec_v, dec_h, reader)
        elif kind == StartKind.ISO_VERT:
            ex, ey = start.ref_x, start.ref_y
            if not (0 <= ex <= width - 2 and 0 <= ey <= height - 1):
                raise MalformedStream("isolated start out of bounds")
            _claim(dec_v, dec_h, (0, ex, ey))
            _walk_decode(ex + 1, ey + 1, DOWN, width, height, dec_v, dec_h, reader)
            _walk_decode(ex + 1, ey, UP, width, height, dec_v, dec_h, reader)
        else:
            ex, ey = start.ref_x, start.ref_y
            if not (0 <= ex <= width - 1 and 0 <= ey <= height - 2):
                raise MalformedStream("isolated start out of bounds")
            _claim(dec_v, dec_h, (1, ex, ey))
            _walk_decode(ex + 1, ey + 1, RIGHT, width, height, dec_v, dec_h, reader)
            _walk_decode(ex, ey + 1, LEFT, width, height, dec_v, dec_h, reader)

    if reader.pos != len(stream.symbols):
        raise MalformedStream("trailing chain symbols after the last start element")
    return EdgeSet(width, height, dec_v, dec_h)


class _BitWriter:
    def __init__(self):
        self.out = bytearray()
        self.acc = 0
        self.nbits = 0

    def write(self, value: int, width: int):
        self.acc = (self.acc << width) | (value & ((1 << width) - 1))
        self.nbits += width
        while self.nbits >= 8:
            self.nbits -= 8
            self.out.append((self.acc >> self.nbits) & 0xFF)

    def pad(self):
        if self.nbits:
            self.out.append((self.acc << (8 - self.nbits)) & 0xFF)
            self.acc = 0
            self.nbits = 0


class _BitReader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0
        self.acc = 0
        self.nbits = 0

    def read(self, width: int) -> int:
        while self.nbits < width:
            if self.pos >= len(self.data):
                raise MalformedStream("chain stream truncated")
            self.acc = (self.acc << 8) | self.data[self.pos]
            self.pos += 1
            self.nbits += 8
        self.nbits -= width
        val = (self.acc >> self.nbits) & ((1 << width) - 1)
        return val

    def pad(self):
        self.acc = 0
        self.nbits = 0


# Per start element: 3-bit kind plus two 16-bit reference coordinates.
_START_BITS = 35


def serialize_chainstream(stream: ChainStream) -> bytes:
    """Byte layout: u32 start count, u32 symbol count, bit-packed starts
    (padded to a byte), symbols at 2 bits each (padded to a byte)."""
    writer = _BitWriter()
    for s in stream.starts:
        writer.write(int(s.kind), 3)
        writer.write(s.ref_x, 16)
        writer.write(s.ref_y, 16)
    writer.pad()
    for sym in stream.symbols:
        writer.write(sym, 2)
    writer.pad()
    return struct.pack("<II", len(stream.starts), len(stream.symbols)) + bytes(writer.out)


def deserialize_chainstream(data: bytes) -> ChainStream:
    if len(data) < 8:
        raise MalformedStream("chain stream shorter than its header")
    n_starts, n_symbols = struct.unpack_from("<II", data, 0)
    expect = 8 + (n_starts * _START_BITS + 7) // 8 + (n_symbols * 2 + 7) // 8
    if len(data) != expect:
        raise MalformedStream(f"chain stream length {len(data)}, expected {expect}")
    reader = _BitReader(data[8:])
    starts = []
    for _ in range(n_starts):
        kind = reader.read(3)
        if kind > int(StartKind.ISO_HORIZ):
            raise MalformedStream(f"unknown start kind {kind}")
        ref_x = reader.read(16)
        ref_y = reader.read(16)
        starts.append(StartElement(StartKind(kind), ref_x, ref_y))
    # symbols begin on the byte boundary after the starts block
    reader.pos = (n_starts * _START_BITS + 7) // 8
    reader.acc = 0
    reader.nbits = 0
    symbols = [reader.read(2) for _ in range(n_symbols)]
    return ChainStream(starts, symbols)
