"""Tile-level matrix-vector and matrix-matrix kernels.

Kernel naming follows the operand precision triplet (matrix, input vector,
output vector): ``bin_bin_bin`` is pure bit OR/AND, ``bin_bin_full`` counts
bits per output element, ``bin_full_full`` runs a semiring gather over a
full-precision vector.  ``_masked`` variants take a keep vector and apply it
when the output is stored; the computation itself is not pruned, so a masked
result is exactly the unmasked result with cleared positions holding the
semiring's add identity (0 for bit outputs).

All kernels accept ``workers``; output tile rows are split into contiguous
chunks, chunks may run on a thread pool, and results are assembled in chunk
order, so output bytes do not depend on the worker count.  The arithmetic
gather reduces each output element sequentially in ascending column order,
which pins the float rounding order: results are bit-identical across tile
widths and worker counts.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .formats import B2srMatrix, BitVector, _pack_bit_rows, _unpack_words
from .semirings import Semiring

WORKERS_ENV = "BITBLAS_THREADS"


def resolve_workers(workers: int | None = None) -> int:
    """Explicit argument, else the BITBLAS_THREADS variable, else 1."""
    if workers is None:
        env = os.environ.get(WORKERS_ENV, "").strip()
        workers = int(env) if env else 1
    workers = int(workers)
    if workers < 1:
        raise ValueError("worker count must be at least 1")
    return workers


def _chunk_bounds(n_rows: int, workers: int) -> list[tuple[int, int]]:
    """Split [0, n_rows) into at most `workers` contiguous non-empty ranges."""
    parts = min(workers, n_rows) or 1
    edges = np.linspace(0, n_rows, parts + 1, dtype=np.int64)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _map_tile_rows(fn, n_rows: int, workers: int) -> list:
    """Run fn(lo, hi) over row chunks; results come back in chunk order."""
    bounds = _chunk_bounds(n_rows, workers)
    if workers == 1 or len(bounds) <= 1:
        return [fn(lo, hi) for lo, hi in bounds]
    with ThreadPoolExecutor(max_workers=len(bounds)) as pool:
        return list(pool.map(lambda b: fn(*b), bounds))


def _check_bmv(a: B2srMatrix, x, bits: bool):
    if bits:
        if not isinstance(x, BitVector):
            raise TypeError("expected a BitVector input")
        if x.n != a.n or x.dim != a.dim:
            raise ValueError("vector length/tile width must match the matrix")
        return x
    if isinstance(x, BitVector):
        raise TypeError("expected a full-precision vector, not a BitVector")
    arr = np.asarray(x, dtype=np.float64).ravel()
    if arr.shape != (a.n,):
        raise ValueError(f"expected a length-{a.n} vector")
    return arr


def _check_keep(a: B2srMatrix, keep: BitVector):
    if not isinstance(keep, BitVector):
        raise TypeError("keep mask must be a BitVector")
    if keep.n != a.n or keep.dim != a.dim:
        raise ValueError("keep mask length/tile width must match the matrix")


def _local_row_ids(trp: np.ndarray, lo: int, hi: int) -> np.ndarray:
    return np.repeat(np.arange(hi - lo, dtype=np.int64), np.diff(trp[lo : hi + 1]))


def used_columns(a: B2srMatrix) -> np.ndarray:
    """Boolean length-n array marking columns with at least one set bit."""
    d = a.dim
    ntr = a.n_tile_rows
    col_words = np.zeros(ntr, dtype=a.tile_dim.word_dtype)
    if a.num_tiles:
        per_tile = np.bitwise_or.reduce(a.bit_tiles, axis=1)
        np.bitwise_or.at(col_words, a.tile_col_ind.astype(np.int64), per_tile)
    return _unpack_words(col_words, d).reshape(-1)[: a.n].astype(bool)


def bmv_bin_bin_bin(a: B2srMatrix, x: BitVector, *, workers: int | None = None) -> BitVector:
    """y[i] = OR over j of (a[i,j] AND x[j])."""
    x = _check_bmv(a, x, bits=True)
    workers = resolve_workers(workers)
    trp = a.tile_row_ptr.astype(np.int64)
    xw = x.words

    def run(lo: int, hi: int) -> np.ndarray:
        t0, t1 = trp[lo], trp[hi]
        out = np.zeros(hi - lo, dtype=a.tile_dim.word_dtype)
        if t1 > t0:
            tiles = a.bit_tiles[t0:t1]
            cols = a.tile_col_ind[t0:t1].astype(np.int64)
            hit = (tiles & xw[cols][:, None]) != 0
            np.bitwise_or.at(out, _local_row_ids(trp, lo, hi), _pack_bit_rows(hit, a.dim))
        return out

    parts = _map_tile_rows(run, a.n_tile_rows, workers)
    return BitVector(a.n, a.tile_dim, np.concatenate(parts))


def bmv_bin_bin_full(a: B2srMatrix, x: BitVector, *, workers: int | None = None) -> np.ndarray:
    """y[i] = number of j with a[i,j] AND x[j]; returned as float64."""
    x = _check_bmv(a, x, bits=True)
    workers = resolve_workers(workers)
    trp = a.tile_row_ptr.astype(np.int64)
    xw = x.words
    d = a.dim

    def run(lo: int, hi: int) -> np.ndarray:
        acc = np.zeros((hi - lo, d), dtype=np.int64)
        t0, t1 = trp[lo], trp[hi]
        if t1 > t0:
            tiles = a.bit_tiles[t0:t1]
            cols = a.tile_col_ind[t0:t1].astype(np.int64)
            pops = np.bitwise_count(tiles & xw[cols][:, None]).astype(np.int64)
            np.add.at(acc, _local_row_ids(trp, lo, hi), pops)
        return acc.reshape(-1)

    parts = _map_tile_rows(run, a.n_tile_rows, workers)
    return np.concatenate(parts)[: a.n].astype(np.float64)


def bmv_bin_full_full(
    a: B2srMatrix,
    x,
    semiring: Semiring,
    scale=None,
    *,
    workers: int | None = None,
) -> np.ndarray:
    """Semiring gather y[i] = reduce over set a[i,j] of multiply(bit, x[j]).

    Each output element reduces its terms in ascending j; for the arithmetic
    semiring this fixes the float addition order exactly.  ``scale`` (only
    with the arithmetic semiring) divides x element-wise before the gather;
    a zero scale at a column that carries a bit is an error.
    """
    xv = _check_bmv(a, x, bits=False)
    if semiring.name == "boolean":
        raise ValueError("boolean semiring has no full-precision gather; use bmv_bin_bin_bin")
    workers = resolve_workers(workers)
    if scale is not None:
        if semiring.name != "arithmetic":
            raise ValueError("scale is only supported with the arithmetic semiring")
        sc = np.asarray(scale, dtype=np.float64).ravel()
        if sc.shape != (a.n,):
            raise ValueError(f"expected a length-{a.n} scale vector")
        zero = sc == 0.0
        if np.any(zero):
            bad = zero & used_columns(a)
            if np.any(bad):
                j = int(np.flatnonzero(bad)[0])
                raise ValueError(f"scale is zero at column {j}, which has incident bits")
            xv = np.where(zero, 0.0, xv / np.where(zero, 1.0, sc))
        else:
            xv = xv / sc
    d = a.dim
    ntr = a.n_tile_rows
    ident = semiring.add_identity
    xpad = np.zeros(ntr * d, dtype=np.float64)
    xpad[: a.n] = xv
    xseg = xpad.reshape(ntr, d)
    trp = a.tile_row_ptr.astype(np.int64)
    cols_all = a.tile_col_ind.astype(np.int64)
    name = semiring.name
    inc = semiring.edge_increment

    def run(lo: int, hi: int) -> np.ndarray:
        nrows = hi - lo
        acc = np.full((nrows, d), ident, dtype=np.float64)
        t0, t1 = trp[lo], trp[hi]
        if t1 == t0:
            return acc.reshape(-1)
        tiles = a.bit_tiles[t0:t1]
        xs = xseg[cols_all[t0:t1]]  # (tiles, d): x value for bit k of each tile
        counts = np.diff(trp[lo : hi + 1])
        starts = trp[lo:hi] - t0
        # slot s walks each row's tiles left to right; bit k walks columns
        # inside a tile, so every output element reduces in ascending j
        for s in range(int(counts.max())):
            sel = np.flatnonzero(counts > s)
            ti = starts[sel] + s
            tw = tiles[ti]
            txs = xs[ti]
            cur = acc[sel]
            for k in range(d):
                bit = ((tw >> k) & 1).astype(bool)  # (rows, d) bit k of each bit-row
                term = txs[:, k : k + 1]
                if name == "arithmetic":
                    cur = cur + np.where(bit, term, 0.0)
                elif name == "minplus":
                    cur = np.where(bit, np.minimum(cur, term + inc), cur)
                else:
                    cur = np.where(bit, np.maximum(cur, term), cur)
            acc[sel] = cur
        return acc.reshape(-1)

    parts = _map_tile_rows(run, ntr, workers)
    return np.concatenate(parts)[: a.n]


def bmv_bin_bin_bin_masked(
    a: B2srMatrix, x: BitVector, keep: BitVector, *, workers: int | None = None
) -> BitVector:
    """bmv_bin_bin_bin with cleared keep bits forced to 0 at store time."""
    _check_keep(a, keep)
    out = bmv_bin_bin_bin(a, x, workers=workers)
    return BitVector(a.n, a.tile_dim, out.words & keep.words)


def bmv_bin_bin_full_masked(
    a: B2srMatrix, x: BitVector, keep: BitVector, *, workers: int | None = None
) -> np.ndarray:
    """bmv_bin_bin_full with cleared keep positions forced to 0 at store time."""
    _check_keep(a, keep)
    out = bmv_bin_bin_full(a, x, workers=workers)
    return np.where(keep.to_bools(), out, 0.0)


def bmv_bin_full_full_masked(
    a: B2srMatrix,
    x,
    semiring: Semiring,
    keep: BitVector,
    scale=None,
    *,
    workers: int | None = None,
) -> np.ndarray:
    """bmv_bin_full_full with cleared keep positions holding the add identity."""
    _check_keep(a, keep)
    out = bmv_bin_full_full(a, x, semiring, scale, workers=workers)
    return np.where(keep.to_bools(), out, semiring.add_identity)


@dataclass(frozen=True)
class MaskedOutput:
    """A masked kernel result bundled with the keep mask it was stored under.

    Convenience wrapper for callers that audit mask behaviour; the masked
    kernels themselves return plain vectors.
    """

    result: object
    keep: BitVector

    def cleared_values(self) -> np.ndarray:
        """Values sitting at cleared keep positions."""
        off = ~self.keep.to_bools()
        if isinstance(self.result, BitVector):
            return self.result.to_bools()[off].astype(np.float64)
        return np.asarray(self.result)[off]


def _check_bmm(a: B2srMatrix, b: B2srMatrix):
    if not isinstance(b, B2srMatrix):
        raise TypeError("expected a B2srMatrix operand")
    if a.n != b.n or a.dim != b.dim:
        raise ValueError("operands must share n and tile width")
    if a.n ** 3 > 2 ** 63 - 1:
        raise ValueError("entry-sum may overflow a 64-bit accumulator")


def _pair_b_tiles(a: B2srMatrix, b_trp: np.ndarray, t0: int, t1: int):
    """For A tiles [t0, t1), enumerate (a_rel, b_idx) products A[I,K]*B[K,J].

    Returns int64 arrays: for each pair, the A tile offset relative to t0 and
    the absolute B tile index.
    """
    a_cols = a.tile_col_ind[t0:t1].astype(np.int64)
    b_lo = b_trp[a_cols]
    cnt = b_trp[a_cols + 1] - b_lo
    total = int(cnt.sum())
    if total == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    a_rel = np.repeat(np.arange(t1 - t0, dtype=np.int64), cnt)
    offsets = np.repeat(np.cumsum(cnt) - cnt, cnt)
    b_idx = np.repeat(b_lo, cnt) + (np.arange(total, dtype=np.int64) - offsets)
    return a_rel, b_idx


def bmm_bin_bin_sum(a: B2srMatrix, b: B2srMatrix, *, workers: int | None = None) -> int:
    """Sum of all entries of the integer matrix product A @ B.

    Each tile pair contributes sum_k colpop(A_tile, k) * rowpop(B_tile, k),
    so no product tile is ever materialised.
    """
    _check_bmm(a, b)
    workers = resolve_workers(workers)
    trp = a.tile_row_ptr.astype(np.int64)
    b_trp = b.tile_row_ptr.astype(np.int64)
    rowpop_b = np.bitwise_count(b.bit_tiles).astype(np.int64)

    def run(lo: int, hi: int) -> int:
        t0, t1 = int(trp[lo]), int(trp[hi])
        if t1 == t0:
            return 0
        a_rel, b_idx = _pair_b_tiles(a, b_trp, t0, t1)
        if not len(a_rel):
            return 0
        colpop_a = _unpack_words(a.bit_tiles[t0:t1], a.dim).sum(axis=1, dtype=np.int64)
        return int((colpop_a[a_rel] * rowpop_b[b_idx]).sum(dtype=np.int64))

    return sum(_map_tile_rows(run, a.n_tile_rows, workers))


def bmm_bin_bin_sum_masked(
    a: B2srMatrix, b: B2srMatrix, mask: B2srMatrix, *, workers: int | None = None
) -> int:
    """Sum of (A @ B)[i,j] over positions where mask[i,j] = 1.

    Product tiles are only accumulated where the mask stores a tile; inside a
    kept tile the element mask is applied at store time.
    """
    _check_bmm(a, b)
    _check_bmm(a, mask)
    workers = resolve_workers(workers)
    if mask.num_tiles == 0:
        return 0
    d = a.dim
    ntr = a.n_tile_rows
    trp = a.tile_row_ptr.astype(np.int64)
    b_trp = b.tile_row_ptr.astype(np.int64)
    b_cols = b.tile_col_ind.astype(np.int64)
    bits_b = _unpack_words(b.bit_tiles, d).astype(np.int32)
    m_keys = mask.tile_row_ids() * ntr + mask.tile_col_ind.astype(np.int64)
    mask_bits = _unpack_words(mask.bit_tiles, d).astype(np.int64)

    def run(lo: int, hi: int) -> int:
        t0, t1 = int(trp[lo]), int(trp[hi])
        if t1 == t0:
            return 0
        a_rel, b_idx = _pair_b_tiles(a, b_trp, t0, t1)
        if not len(a_rel):
            return 0
        a_tile_rows = np.repeat(
            np.arange(lo, hi, dtype=np.int64), np.diff(trp[lo : hi + 1])
        )
        out_keys = a_tile_rows[a_rel] * ntr + b_cols[b_idx]
        pos = np.searchsorted(m_keys, out_keys)
        pos_c = np.minimum(pos, len(m_keys) - 1)
        kept = m_keys[pos_c] == out_keys
        if not np.any(kept):
            return 0
        bits_a = _unpack_words(a.bit_tiles[t0:t1], d).astype(np.int32)
        prod = np.einsum("pik,pkj->pij", bits_a[a_rel[kept]], bits_b[b_idx[kept]])
        acc = np.zeros((len(m_keys), d, d), dtype=np.int64)
        np.add.at(acc, pos_c[kept], prod.astype(np.int64))
        return int((acc * mask_bits).sum(dtype=np.int64))

    return sum(_map_tile_rows(run, ntr, workers))
