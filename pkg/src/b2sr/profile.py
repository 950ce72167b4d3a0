"""Tile-width selection by sampling tile rows of a CSR matrix.

For each candidate width the profiler samples tile rows without replacement,
counts the non-empty tiles each sampled row would store, and extrapolates a
tile count, byte footprint, and compression ratio.  Sampling the full tile
row population reproduces the exact conversion statistics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .formats import TILE_DIMS, CsrMatrix, TileDim, csr_storage_bytes


@dataclass(frozen=True)
class TileDimEstimate:
    """Extrapolated conversion statistics for one tile width."""

    tile_dim: int
    sampled_tile_rows: int
    est_tile_count: float
    est_bytes: float
    est_compression_ratio: float
    avg_nnz_occupancy: float


@dataclass(frozen=True)
class SampleProfileReport:
    """Per-width estimates from one profiling pass."""

    n: int
    nnz: int
    sample_count: int
    seed: int
    estimates: tuple[TileDimEstimate, ...]

    def for_dim(self, dim: int) -> TileDimEstimate:
        for est in self.estimates:
            if est.tile_dim == dim:
                return est
        raise KeyError(dim)

    def recommended_tile_dim(self) -> int:
        """Width with the smallest estimated bytes; ties go to the smaller width."""
        best = min(self.estimates, key=lambda e: (e.est_bytes, e.tile_dim))
        return best.tile_dim

    def to_report(self) -> dict:
        """JSON-ready dict with deterministic key order."""
        return {
            "kind": "profile",
            "n": self.n,
            "nnz": self.nnz,
            "sampleCount": self.sample_count,
            "seed": self.seed,
            "recommendedTileDim": self.recommended_tile_dim(),
            "tileDims": {
                str(e.tile_dim): {
                    "sampledTileRows": e.sampled_tile_rows,
                    "estTileCount": e.est_tile_count,
                    "estBytes": e.est_bytes,
                    "estCompressionRatio": e.est_compression_ratio,
                    "avgNnzOccupancy": e.avg_nnz_occupancy,
                }
                for e in self.estimates
            },
        }


def sample_profile(csr: CsrMatrix, sample_count: int, seed: int) -> SampleProfileReport:
    """Estimate per-width storage by sampling tile rows.

    ``sample_count`` must lie in [1, ceil(n/4)]; widths with fewer tile rows
    than that are sampled exhaustively.  One generator seeded with ``seed``
    draws for all widths in ascending width order, so a report is a pure
    function of (matrix, sample_count, seed).
    """
    if csr.n < 1:
        raise ValueError("profiling needs at least a 1 x 1 matrix")
    max_rows = TileDim(4).tile_rows(csr.n)
    sample_count = int(sample_count)
    if not 1 <= sample_count <= max_rows:
        raise ValueError(f"sample_count must be in [1, {max_rows}]")
    rng = np.random.default_rng(seed)
    row_ptr = csr.row_ptr.astype(np.int64)
    csr_bytes = csr_storage_bytes(csr)
    estimates = []
    for dim in TILE_DIMS:
        td = TileDim(dim)
        rows_k = td.tile_rows(csr.n)
        m_k = min(sample_count, rows_k)
        sampled = np.sort(rng.choice(rows_k, size=m_k, replace=False))
        tiles_per_row = np.empty(m_k, dtype=np.int64)
        nnz_per_row = np.empty(m_k, dtype=np.int64)
        for i, s in enumerate(sampled):
            lo = row_ptr[s * dim]
            hi = row_ptr[min((s + 1) * dim, csr.n)]
            cols = csr.col_ind[lo:hi]
            tiles_per_row[i] = len(np.unique(cols // dim))
            nnz_per_row[i] = hi - lo
        total_tiles = int(tiles_per_row.sum())
        # integer product first so full coverage reproduces exact counts
        est_tiles = total_tiles * rows_k / m_k
        est_bytes = 4.0 * (rows_k + 1) + (4 + td.tile_bytes) * est_tiles
        occupancy = (
            int(nnz_per_row.sum()) / (dim * dim * total_tiles) if total_tiles else 0.0
        )
        estimates.append(
            TileDimEstimate(
                tile_dim=dim,
                sampled_tile_rows=m_k,
                est_tile_count=est_tiles,
                est_bytes=est_bytes,
                est_compression_ratio=est_bytes / csr_bytes,
                avg_nnz_occupancy=occupancy,
            )
        )
    return SampleProfileReport(
        n=csr.n,
        nnz=csr.nnz,
        sample_count=sample_count,
        seed=int(seed),
        estimates=tuple(estimates),
    )
