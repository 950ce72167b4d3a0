"""Bit-tile CSR matrices, popcount semiring kernels, and graph algorithms."""

from .algorithms import (
    AlgoParams,
    AlgoResult,
    bfs,
    connected_components,
    lower_triangle,
    pagerank,
    sssp,
    triangle_count,
)
from .errors import B2srError, FormatError, MatrixMarketError
from .formats import (
    TILE_DIMS,
    B2srMatrix,
    BitVector,
    CsrMatrix,
    TileDim,
    b2sr_to_csr,
    b2sr_transpose,
    compression_ratio,
    csr_storage_bytes,
    csr_to_b2sr,
    load_b2sr,
    nonzero_density,
    save_b2sr,
    storage_bytes,
)
from .kernels import (
    MaskedOutput,
    bmm_bin_bin_sum,
    bmm_bin_bin_sum_masked,
    bmv_bin_bin_bin,
    bmv_bin_bin_bin_masked,
    bmv_bin_bin_full,
    bmv_bin_bin_full_masked,
    bmv_bin_full_full,
    bmv_bin_full_full_masked,
    resolve_workers,
)
from .matrixio import IngestOptions, read_matrix_market, schema_path, write_report
from .profile import SampleProfileReport, TileDimEstimate, sample_profile
from .semirings import ARITHMETIC, BOOLEAN, MAX_TIMES, Semiring, min_plus

__version__ = "0.1.0"

__all__ = [
    "ARITHMETIC",
    "AlgoParams",
    "AlgoResult",
    "B2srError",
    "B2srMatrix",
    "BOOLEAN",
    "BitVector",
    "CsrMatrix",
    "FormatError",
    "IngestOptions",
    "MAX_TIMES",
    "MaskedOutput",
    "MatrixMarketError",
    "SampleProfileReport",
    "Semiring",
    "TILE_DIMS",
    "TileDim",
    "TileDimEstimate",
    "b2sr_to_csr",
    "b2sr_transpose",
    "bfs",
    "bmm_bin_bin_sum",
    "bmm_bin_bin_sum_masked",
    "bmv_bin_bin_bin",
    "bmv_bin_bin_bin_masked",
    "bmv_bin_bin_full",
    "bmv_bin_bin_full_masked",
    "bmv_bin_full_full",
    "bmv_bin_full_full_masked",
    "compression_ratio",
    "connected_components",
    "csr_storage_bytes",
    "csr_to_b2sr",
    "load_b2sr",
    "lower_triangle",
    "min_plus",
    "nonzero_density",
    "pagerank",
    "read_matrix_market",
    "resolve_workers",
    "sample_profile",
    "save_b2sr",
    "schema_path",
    "sssp",
    "storage_bytes",
    "triangle_count",
    "write_report",
]
