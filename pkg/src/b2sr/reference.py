"""Slow, independent reference implementations used to check the kernels.

Everything here works on dense arrays or plain CSR with textbook loops; no
tile code is shared with the kernel path.  The arithmetic matrix-vector
oracle reduces each output element sequentially in ascending column order so
its float64 results can be compared bit-for-bit against the tile kernels.
"""

from __future__ import annotations

import numpy as np

from .formats import CsrMatrix
from .semirings import Semiring


def _check_dense(a: np.ndarray, x: np.ndarray):
    a = np.asarray(a, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64).ravel()
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if x.shape != (a.shape[0],):
        raise ValueError("vector length must match the matrix")
    return a, x


def dense_semiring_mxv(a: np.ndarray, x: np.ndarray, semiring: Semiring) -> np.ndarray:
    """Textbook semiring matrix-vector product over a dense matrix.

    Absent entries (zeros) contribute nothing; an element with no present
    entries is the add identity.
    """
    a, x = _check_dense(a, x)
    n = len(x)
    out = np.full(n, semiring.add_identity, dtype=np.float64)
    if semiring.name == "arithmetic":
        for i in range(n):
            acc = 0.0
            row = a[i]
            for j in np.flatnonzero(row != 0.0):
                acc += row[j] * x[j]
            out[i] = acc
        return out
    present = a != 0.0
    if semiring.name == "boolean":
        hit = present & (x != 0.0)
        return hit.any(axis=1).astype(np.float64)
    for i in range(n):
        cols = np.flatnonzero(present[i])
        if not len(cols):
            continue
        if semiring.name == "minplus":
            out[i] = np.min(x[cols] + semiring.edge_increment)
        else:
            out[i] = np.max(a[i, cols] * x[cols])
    return out


def dense_mxm_masked_sum(a: np.ndarray, b: np.ndarray, mask: np.ndarray | None = None) -> int:
    """Entry sum of the 0/1 matrix product, optionally restricted to mask=1.

    Products of binary matrices are small integers, exact in float64.
    """
    a = (np.asarray(a) != 0).astype(np.float64)
    b = (np.asarray(b) != 0).astype(np.float64)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("operands must be square matrices of equal shape")
    prod = a @ b
    if mask is None:
        return int(round(prod.sum()))
    keep = np.asarray(mask) != 0
    if keep.shape != a.shape:
        raise ValueError("mask shape must match the operands")
    return int(round(prod[keep].sum()))


def csr_spmv_f32(csr: CsrMatrix, x: np.ndarray) -> np.ndarray:
    """Standard CSR SpMV with float32 accumulation; the timing baseline."""
    xv = np.asarray(x, dtype=np.float32).ravel()
    if xv.shape != (csr.n,):
        raise ValueError(f"expected a length-{csr.n} vector")
    vals = np.ones(csr.nnz, dtype=np.float32) if csr.values is None else csr.values
    terms = vals * xv[csr.col_ind.astype(np.int64)]
    out = np.zeros(csr.n, dtype=np.float32)
    rows, _ = csr.entries()
    np.add.at(out, rows, terms)
    return out.astype(np.float64)


def csr_spgemm_sum_f32(a: CsrMatrix, b: CsrMatrix) -> float:
    """Entry sum of the sparse product A @ B with float32 products."""
    if a.n != b.n:
        raise ValueError("operands must share n")
    a_rows, a_cols = a.entries()
    a_vals = np.ones(a.nnz, dtype=np.float32) if a.values is None else a.values
    b_ptr = b.row_ptr.astype(np.int64)
    b_vals = np.ones(b.nnz, dtype=np.float32) if b.values is None else b.values
    cnt = b_ptr[a_cols + 1] - b_ptr[a_cols]
    total = int(cnt.sum())
    if total == 0:
        return 0.0
    offsets = np.repeat(np.cumsum(cnt) - cnt, cnt)
    b_idx = np.repeat(b_ptr[a_cols], cnt) + (np.arange(total, dtype=np.int64) - offsets)
    prods = np.repeat(a_vals, cnt) * b_vals[b_idx]
    return float(prods.sum(dtype=np.float32))


def oracle_bfs(csr: CsrMatrix, src: int) -> np.ndarray:
    """Queue BFS levels over out-edges; unreachable vertices hold +inf."""
    n = csr.n
    if not 0 <= src < n:
        raise ValueError(f"source {src} out of range")
    levels = np.full(n, np.inf)
    levels[src] = 0.0
    frontier = [src]
    depth = 0
    while frontier:
        depth += 1
        nxt = []
        for u in frontier:
            for v in csr.row(u):
                if levels[v] == np.inf:
                    levels[v] = depth
                    nxt.append(int(v))
        frontier = nxt
    return levels


def oracle_bellman_ford(csr: CsrMatrix, src: int) -> np.ndarray:
    """Unit-weight Bellman-Ford distances over out-edges."""
    n = csr.n
    if not 0 <= src < n:
        raise ValueError(f"source {src} out of range")
    dist = np.full(n, np.inf)
    dist[src] = 0.0
    tails, heads = csr.entries()
    for _ in range(n):
        relaxed = dist.copy()
        np.minimum.at(relaxed, heads, dist[tails] + 1.0)
        if np.array_equal(relaxed, dist):
            break
        dist = relaxed
    return dist


def oracle_pagerank(csr: CsrMatrix, alpha: float, iters: int) -> np.ndarray:
    """Dense power iteration for a fixed number of steps.

    Vertices without out-edges contribute no mass (it leaks), matching the
    kernel formulation.
    """
    n = csr.n
    a = (csr.to_dense() != 0).astype(np.float64)
    out_deg = a.sum(axis=1)
    safe = np.where(out_deg == 0.0, 1.0, out_deg)
    w = (a / safe[:, None]).T  # w[i, j] = edge j->i weight 1/outdeg(j)
    r = np.full(n, 1.0 / n)
    for _ in range(iters):
        r = (1.0 - alpha) / n + alpha * (w @ r)
    return r


def oracle_cc_union_find(csr: CsrMatrix) -> np.ndarray:
    """Connected-component labels (smallest member id) via union-find."""
    n = csr.n
    parent = list(range(n))

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    rows, cols = csr.entries()
    for u, v in zip(rows.tolist(), cols.tolist()):
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    labels = np.empty(n, dtype=np.float64)
    smallest: dict[int, int] = {}
    for v in range(n):
        r = find(v)
        if r not in smallest:
            smallest[r] = v
        labels[v] = smallest[r]
    return labels


def oracle_triangle_count(csr: CsrMatrix) -> int:
    """Triangles by neighbour-set intersection over an undirected pattern."""
    n = csr.n
    neigh = [set(csr.row(u).tolist()) - {u} for u in range(n)]
    count = 0
    for u in range(n):
        for v in neigh[u]:
            if v <= u:
                continue
            for w in neigh[u] & neigh[v]:
                if w > v:
                    count += 1
    return count
