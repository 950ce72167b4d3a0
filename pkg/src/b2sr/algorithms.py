"""Graph algorithms expressed as semiring operations over bit tiles.

Each algorithm takes an adjacency pattern with a[i, j] = 1 for an edge
i -> j and traverses out-edges by gathering over the transpose, so a
frontier gather lands mass on edge heads.  Results report the vertex values,
the number of kernel sweeps executed, and whether the stopping rule was a
reached fixpoint rather than an iteration cap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FormatError
from .formats import B2srMatrix, BitVector, CsrMatrix, b2sr_to_csr, b2sr_transpose, csr_to_b2sr
from .kernels import (
    bmm_bin_bin_sum_masked,
    bmv_bin_bin_bin_masked,
    bmv_bin_full_full,
    used_columns,
)
from .semirings import ARITHMETIC, min_plus


@dataclass(frozen=True)
class AlgoParams:
    """Iteration controls; PageRank is the only consumer of all three."""

    alpha: float = 0.85
    epsilon: float = 1e-9
    max_iter: int = 10

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass(frozen=True)
class AlgoResult:
    per_vertex: np.ndarray | None
    iterations: int
    converged: bool
    count: int | None = None

    def to_report(self) -> dict:
        doc = {
            "kind": "run",
            "iterations": self.iterations,
            "converged": self.converged,
        }
        if self.count is not None:
            doc["count"] = self.count
        if self.per_vertex is not None:
            doc["perVertex"] = [_json_float(v) for v in self.per_vertex.tolist()]
        return doc


def _json_float(v: float):
    return "inf" if np.isinf(v) else v


def _check_src(n: int, src: int) -> int:
    src = int(src)
    if not 0 <= src < n:
        raise ValueError(f"source vertex {src} out of range for n={n}")
    return src


def bfs(a: B2srMatrix, src: int, *, workers: int | None = None) -> AlgoResult:
    """Level-synchronous BFS; per_vertex holds hop counts, +inf if unreachable."""
    src = _check_src(a.n, src)
    at = b2sr_transpose(a)
    levels = np.full(a.n, np.inf)
    levels[src] = 0.0
    visited = BitVector.from_indices(a.n, [src], a.tile_dim)
    frontier = visited
    sweeps = 0
    while frontier.any():
        nxt = bmv_bin_bin_bin_masked(at, frontier, visited.invert(), workers=workers)
        sweeps += 1
        if nxt.any():
            levels[nxt.to_indices()] = sweeps
            visited = visited | nxt
        frontier = nxt
        if sweeps > a.n:
            raise RuntimeError("BFS failed to drain its frontier")
    return AlgoResult(per_vertex=levels, iterations=sweeps, converged=True)


def _drop_diagonal(csr: CsrMatrix) -> CsrMatrix:
    rows, cols = csr.entries()
    keep = rows != cols
    if np.all(keep):
        return csr
    return CsrMatrix.from_coo(csr.n, rows[keep], cols[keep])


def sssp(a: B2srMatrix, src: int, *, workers: int | None = None) -> AlgoResult:
    """Unit-weight shortest paths by min-plus relaxation to a fixpoint.

    Self-loops are dropped first; they cannot shorten a path.  At most n-1
    sweeps run; hop distances equal BFS levels.
    """
    src = _check_src(a.n, src)
    clean = _drop_diagonal(b2sr_to_csr(a))
    at = b2sr_transpose(csr_to_b2sr(clean, a.tile_dim))
    ring = min_plus(1)
    dist = np.full(a.n, np.inf)
    dist[src] = 0.0
    sweeps = 0
    for _ in range(a.n - 1):
        relaxed = np.minimum(dist, bmv_bin_full_full(at, dist, ring, workers=workers))
        sweeps += 1
        if np.array_equal(relaxed, dist):
            break
        dist = relaxed
    # n-1 unit-weight relaxation rounds always reach the fixpoint
    return AlgoResult(per_vertex=dist, iterations=sweeps, converged=True)


def pagerank(
    a: B2srMatrix,
    out_degree,
    params: AlgoParams | None = None,
    *,
    workers: int | None = None,
) -> AlgoResult:
    """Power iteration with damping; a is the transposed adjacency.

    ``a`` stores a[i, j] = 1 when the original graph has an edge j -> i, and
    ``out_degree[j]`` must count the out-edges of vertex j.  Mass from
    vertices without out-edges leaks (ranks then sum below one).  Stops when
    the L1 step change drops below epsilon or after max_iter sweeps.
    """
    params = params or AlgoParams()
    deg = np.asarray(out_degree, dtype=np.float64).ravel()
    if deg.shape != (a.n,):
        raise ValueError(f"expected a length-{a.n} out-degree vector")
    bad = (deg == 0.0) & used_columns(a)
    if np.any(bad):
        j = int(np.flatnonzero(bad)[0])
        raise ValueError(f"out_degree[{j}] is zero but vertex {j} has out-edges")
    n = a.n
    rank = np.full(n, 1.0 / n)
    teleport = (1.0 - params.alpha) / n
    sweeps = 0
    converged = False
    while sweeps < params.max_iter:
        gathered = bmv_bin_full_full(a, rank, ARITHMETIC, scale=deg, workers=workers)
        new_rank = teleport + params.alpha * gathered
        delta = float(np.abs(new_rank - rank).sum())
        rank = new_rank
        sweeps += 1
        if delta < params.epsilon:
            converged = True
            break
    return AlgoResult(per_vertex=rank, iterations=sweeps, converged=converged)


def connected_components(a: B2srMatrix, *, workers: int | None = None) -> AlgoResult:
    """Label propagation with hooking and shortcutting; labels are the
    smallest vertex id in each component.  Requires a symmetric pattern."""
    if a != b2sr_transpose(a):
        raise FormatError("connected components requires a symmetric pattern")
    n = a.n
    ring = min_plus(0)
    labels = np.arange(n, dtype=np.float64)
    sweeps = 0
    while True:
        neigh_min = bmv_bin_full_full(a, labels, ring, workers=workers)
        sweeps += 1
        nxt = labels.copy()
        # hook: point the current parent of i at the smallest neighbour label;
        # sequential ascending i keeps the update order deterministic
        for i in range(n):
            m = neigh_min[i]
            t = int(nxt[i])
            if m < nxt[t]:
                nxt[t] = m
        # shortcut until every label points at a fixpoint
        while True:
            jumped = nxt[nxt.astype(np.int64)]
            if np.array_equal(jumped, nxt):
                break
            nxt = jumped
        if np.array_equal(nxt, labels):
            return AlgoResult(per_vertex=labels, iterations=sweeps, converged=True)
        labels = nxt
        if sweeps > n + 1:
            raise RuntimeError("component labels failed to stabilise")


def triangle_count(csr: CsrMatrix, tile_dim, *, workers: int | None = None) -> AlgoResult:
    """Triangles of an undirected simple graph via the masked product.

    With L the strict lower triangle, every triangle i > j > k contributes
    exactly once to sum over L of (L @ L^T); the mask keeps tile work
    proportional to the triangle support.
    """
    pattern = csr.pattern()
    rows, cols = pattern.entries()
    if np.any(rows == cols):
        raise FormatError("triangle counting requires a loop-free pattern")
    if pattern != CsrMatrix.from_coo(pattern.n, cols, rows):
        raise FormatError("triangle counting requires a symmetric pattern")
    lower = lower_triangle(pattern)
    lo = csr_to_b2sr(lower, tile_dim)
    total = bmm_bin_bin_sum_masked(lo, b2sr_transpose(lo), lo, workers=workers)
    return AlgoResult(per_vertex=None, iterations=1, converged=True, count=int(total))


def lower_triangle(csr: CsrMatrix) -> CsrMatrix:
    """Strictly-below-diagonal part of a pattern."""
    rows, cols = csr.pattern().entries()
    keep = rows > cols
    return CsrMatrix.from_coo(csr.n, rows[keep], cols[keep])
