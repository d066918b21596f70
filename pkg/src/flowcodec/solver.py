"""Edge-aware homogeneous diffusion inpainting.

Reconstructs a dense flow field from known pixels by solving the discrete
Laplace equation with reflecting conditions at the domain boundary and
across edgels, and Dirichlet conditions at known pixels. Dirichlet
unknowns are eliminated, so the reduced system is symmetric positive
definite on every component that contains a known pixel, and plain
conjugate gradients apply. Components are decoupled, so each one is
solved independently (this also makes component isolation exact).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix

from . import backend
from .edges import EdgeSet
from .errors import MaxIterationsExceeded, Underdetermined
from .flow_io import FlowField, make_field
from .mask import label_components

log = logging.getLogger(__name__)

# Residual decay alone does not bound the solution error: for the reduced
# Laplace system the error scales like the residual over the smallest
# eigenvalue, which costs several orders of magnitude at typical mask
# densities. The configured tolerance is therefore the guaranteed upper
# bound on the relative residual, and CG is driven past it by this factor
# so reconstructed values agree with a dense direct solve to ~1e-6 on
# unit-scale data. The floor keeps the target attainable in float64.
_EXTRA_DECAY = 1e-4
_MIN_TARGET = 1e-12


def _cg_target(tol: float) -> float:
    return min(tol, max(tol * _EXTRA_DECAY, _MIN_TARGET))


@dataclass(frozen=True)
class SolverConfig:
    rel_residual_tol: float = 1e-5
    max_iterations: int | None = None  # defaults to 10 * width * height

    def __post_init__(self):
        if self.rel_residual_tol <= 0:
            raise ValueError("tolerance must be positive")

    def iteration_cap(self, width: int, height: int) -> int:
        if self.max_iterations is not None:
            return self.max_iterations
        return 10 * width * height


@dataclass(frozen=True)
class InpaintProblem:
    """known maps pixel raster index -> (u, v) flow value."""

    width: int
    height: int
    edges: EdgeSet
    known: dict[int, tuple[float, float]]


def _problem_arrays(problem: InpaintProblem):
    h, w = problem.height, problem.width
    known_mask = np.zeros((h, w), dtype=bool)
    fu = np.zeros((h, w))
    fv = np.zeros((h, w))
    for idx, (uval, vval) in problem.known.items():
        known_mask[idx // w, idx % w] = True
        fu[idx // w, idx % w] = uval
        fv[idx // w, idx % w] = vval

    open_r = ~problem.edges.vertical if w > 1 else np.zeros((h, 0), dtype=bool)
    open_d = ~problem.edges.horizontal if h > 1 else np.zeros((0, w), dtype=bool)

    deg = np.zeros((h, w))
    if w > 1:
        deg[:, :-1] += open_r
        deg[:, 1:] += open_r
    if h > 1:
        deg[:-1, :] += open_d
        deg[1:, :] += open_d

    unknown = ~known_mask
    conn_r = open_r & unknown[:, :-1] & unknown[:, 1:]
    conn_d = open_d & unknown[:-1, :] & unknown[1:, :]

    def rhs(f):
        b = np.zeros((h, w))
        if w > 1:
            b[:, :-1] += np.where(open_r & known_mask[:, 1:], f[:, 1:], 0.0)
            b[:, 1:] += np.where(open_r & known_mask[:, :-1], f[:, :-1], 0.0)
        if h > 1:
            b[:-1, :] += np.where(open_d & known_mask[1:, :], f[1:, :], 0.0)
            b[1:, :] += np.where(open_d & known_mask[:-1, :], f[:-1, :], 0.0)
        b[known_mask] = 0.0
        return b

    return known_mask, fu, fv, deg, conn_r, conn_d, rhs


def _check_determined(problem: InpaintProblem, known_mask: np.ndarray) -> np.ndarray:
    labels, count = label_components(problem.width, problem.height, problem.edges)
    has_known = np.zeros(count, dtype=bool)
    has_known[labels[known_mask.ravel()]] = True
    if not has_known.all():
        missing = int(np.flatnonzero(~has_known)[0])
        raise Underdetermined(f"component {missing} contains no known pixel")
    return labels


def assemble(problem: InpaintProblem):
    """Reduced sparse system for the unknown pixels.

    Returns (A, b_u, b_v, unknown_idx): A is CSR over unknowns (shared by
    both channels), b_* the per-channel right-hand sides, unknown_idx the
    raster indices the rows correspond to.
    """
    known_mask, fu, fv, deg, conn_r, conn_d, rhs = _problem_arrays(problem)
    _check_determined(problem, known_mask)
    h, w = problem.height, problem.width
    n = h * w
    unknown_idx = np.flatnonzero(~known_mask.ravel())
    reduced = np.full(n, -1, dtype=np.int64)
    reduced[unknown_idx] = np.arange(len(unknown_idx))

    idx = np.arange(n).reshape(h, w)
    rows = [reduced[unknown_idx]]
    cols = [reduced[unknown_idx]]
    vals = [deg.ravel()[unknown_idx]]
    for conn, a, bn in (
        (conn_r, idx[:, :-1], idx[:, 1:]),
        (conn_d, idx[:-1, :], idx[1:, :]),
    ):
        if conn.size == 0:
            continue
        pa = reduced[a[conn]]
        pb = reduced[bn[conn]]
        rows.extend([pa, pb])
        cols.extend([pb, pa])
        vals.extend([-np.ones(len(pa)), -np.ones(len(pb))])
    m = len(unknown_idx)
    a_mat = coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(m, m)
    ).tocsr()
    b_u = rhs(fu).ravel()[unknown_idx]
    b_v = rhs(fv).ravel()[unknown_idx]
    return a_mat, b_u, b_v, unknown_idx


def solve(problem: InpaintProblem, config: SolverConfig = SolverConfig()) -> FlowField:
    """CG reconstruction; known pixels are reproduced exactly.

    The relative residual of the returned solution is at most
    config.rel_residual_tol; internally CG converges further (see
    _EXTRA_DECAY) so values match a direct solve closely.
    """
    known_mask, fu, fv, deg, conn_r, conn_d, rhs = _problem_arrays(problem)
    labels = _check_determined(problem, known_mask)
    h, w = problem.height, problem.width
    label_grid = labels.reshape(h, w)
    max_iter = config.iteration_cap(w, h)

    out_u = np.where(known_mask, fu, 0.0)
    out_v = np.where(known_mask, fv, 0.0)
    b_u = rhs(fu)
    b_v = rhs(fv)

    unknown = ~known_mask
    for comp in np.unique(label_grid[unknown]):
        comp_mask = (label_grid == comp) & unknown
        ys, xs = np.nonzero(comp_mask)
        y0, y1 = ys.min(), ys.max() + 1
        x0, x1 = xs.min(), xs.max() + 1
        sel = comp_mask[y0:y1, x0:x1]
        deg_s = np.ascontiguousarray(deg[y0:y1, x0:x1])
        cr_s = np.ascontiguousarray(conn_r[y0:y1, x0 : x1 - 1])
        cd_s = np.ascontiguousarray(conn_d[y0 : y1 - 1, x0:x1])
        for b_full, out in ((b_u, out_u), (b_v, out_v)):
            b_s = np.where(sel, b_full[y0:y1, x0:x1], 0.0)
            x_s, iters = backend.cg_solve(
                deg_s, cr_s, cd_s, b_s, _cg_target(config.rel_residual_tol), max_iter
            )
            if iters < 0:
                raise MaxIterationsExceeded(
                    f"CG did not converge within {max_iter} iterations"
                )
            log.debug("component %d: %d CG iterations", comp, iters)
            out[y0:y1, x0:x1][sel] = x_s[sel]

    return make_field(out_u, out_v)


def solve_direct_oracle(problem: InpaintProblem) -> FlowField:
    """Dense direct solve of the same system; test oracle for small grids."""
    if problem.width * problem.height > 4096:
        raise ValueError("direct oracle is limited to 4096 pixels")
    a_mat, b_u, b_v, unknown_idx = assemble(problem)
    h, w = problem.height, problem.width
    fu = np.zeros(h * w)
    fv = np.zeros(h * w)
    for idx, (uval, vval) in problem.known.items():
        fu[idx] = uval
        fv[idx] = vval
    if len(unknown_idx):
        dense = a_mat.toarray()
        fu[unknown_idx] = np.linalg.solve(dense, b_u)
        fv[unknown_idx] = np.linalg.solve(dense, b_v)
    return make_field(fu.reshape(h, w), fv.reshape(h, w))
