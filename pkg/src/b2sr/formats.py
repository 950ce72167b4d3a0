"""Bit-tile compressed sparse row storage for square binary matrices.

The format keeps CSR-style indices over non-empty square tiles.  Each stored
tile is a dense ``dim x dim`` bit matrix packed as ``dim`` row words: word
``i`` holds bit-row ``i`` of the tile, with the least-significant bit at the
lowest column index.  Supported tile widths are 4, 8, 16 and 32, stored in
row words of 1, 1, 2 and 4 bytes; a 4-wide tile keeps the high nibble of
every row byte clear.  Bits that fall outside the logical matrix (padding in
the last tile row/column when ``dim`` does not divide ``n``) are always zero.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import FormatError

TILE_DIMS = (4, 8, 16, 32)

_WORD_DTYPES = {
    4: np.dtype("<u1"),
    8: np.dtype("<u1"),
    16: np.dtype("<u2"),
    32: np.dtype("<u4"),
}

_MAGIC = b"B2SR"
_CONTAINER_VERSION = 1
_HEADER = struct.Struct("<4sIIIIQ")


@dataclass(frozen=True)
class TileDim:
    """One of the four supported tile widths."""

    dim: int

    def __post_init__(self):
        if self.dim not in TILE_DIMS:
            raise ValueError(f"tile dim must be one of {TILE_DIMS}, got {self.dim!r}")

    @staticmethod
    def of(dim) -> "TileDim":
        """Coerce an int or TileDim to a TileDim."""
        if isinstance(dim, TileDim):
            return dim
        return TileDim(int(dim))

    @property
    def word_dtype(self) -> np.dtype:
        return _WORD_DTYPES[self.dim]

    @property
    def row_word_bytes(self) -> int:
        return _WORD_DTYPES[self.dim].itemsize

    @property
    def tile_bytes(self) -> int:
        return self.dim * self.row_word_bytes

    def tile_rows(self, n: int) -> int:
        """Number of tile rows (= tile columns) covering an n x n matrix."""
        return -(-n // self.dim)


def _pack_bit_rows(bits: np.ndarray, dim: int) -> np.ndarray:
    """Pack a (..., dim) array of 0/1 values into row words, bit k from index k."""
    weights = np.left_shift(np.uint64(1), np.arange(dim, dtype=np.uint64))
    packed = (bits.astype(np.uint64) * weights).sum(axis=-1)
    return packed.astype(_WORD_DTYPES[dim])


def _unpack_words(words: np.ndarray, dim: int) -> np.ndarray:
    """Expand row words into a (..., dim) uint8 array of 0/1 values."""
    shifts = np.arange(dim, dtype=np.uint64)
    return ((words[..., None].astype(np.uint64) >> shifts) & np.uint64(1)).astype(np.uint8)


def _as_index_array(a, name: str) -> np.ndarray:
    arr = np.asarray(a)
    if arr.ndim != 1:
        raise FormatError(f"{name} must be one-dimensional")
    if arr.size:
        if arr.dtype.kind not in "ui":
            raise FormatError(f"{name} must hold integers")
        if int(arr.min()) < 0 or int(arr.max()) > 0xFFFFFFFF:
            raise FormatError(f"{name} entries out of uint32 range")
    out = arr.astype(np.uint32)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class CsrMatrix:
    """Square CSR matrix; ``values is None`` marks a pattern (binary) matrix.

    Column indices are strictly increasing inside each row, so duplicates are
    structurally impossible.  Stored values, when present, are float32 and
    never exactly zero.
    """

    n: int
    row_ptr: np.ndarray
    col_ind: np.ndarray
    values: np.ndarray | None = None

    def __post_init__(self):
        n = int(self.n)
        if n < 0:
            raise FormatError("matrix dimension must be non-negative")
        object.__setattr__(self, "n", n)
        row_ptr = _as_index_array(self.row_ptr, "row_ptr")
        col_ind = _as_index_array(self.col_ind, "col_ind")
        object.__setattr__(self, "row_ptr", row_ptr)
        object.__setattr__(self, "col_ind", col_ind)
        if row_ptr.shape != (n + 1,):
            raise FormatError(f"row_ptr must have length n+1 = {n + 1}")
        if row_ptr[0] != 0:
            raise FormatError("row_ptr must start at 0")
        if np.any(np.diff(row_ptr.astype(np.int64)) < 0):
            raise FormatError("row_ptr must be non-decreasing")
        nnz = len(col_ind)
        if int(row_ptr[-1]) != nnz:
            raise FormatError("row_ptr[-1] must equal nnz")
        if nnz and int(col_ind.max()) >= n:
            raise FormatError("column index out of range")
        if nnz > 1:
            # strictly increasing inside each row; comparisons that straddle a
            # row boundary are exempt
            boundary = np.zeros(nnz, dtype=bool)
            starts = row_ptr[1:-1].astype(np.int64)
            boundary[starts[starts < nnz]] = True
            deltas = np.diff(col_ind.astype(np.int64))
            if np.any(deltas[~boundary[1:]] <= 0):
                raise FormatError("column indices must be strictly increasing within a row")
        if self.values is not None:
            vals = np.asarray(self.values).astype(np.float32)
            if vals.shape != (nnz,):
                raise FormatError("values must match nnz")
            if np.any(vals == 0.0):
                raise FormatError("stored values must not be exactly zero")
            vals.flags.writeable = False
            object.__setattr__(self, "values", vals)

    @property
    def nnz(self) -> int:
        return len(self.col_ind)

    @property
    def is_pattern(self) -> bool:
        return self.values is None

    @classmethod
    def from_coo(cls, n, rows, cols, values=None) -> "CsrMatrix":
        """Build from coordinate arrays.

        Entries are sorted row-major.  Duplicate coordinates collapse to a
        single entry; with values present the last occurrence wins.
        """
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        if rows.shape != cols.shape:
            raise FormatError("row and column arrays must match")
        n = int(n)
        if rows.size:
            if rows.min() < 0 or rows.max() >= n or cols.min() < 0 or cols.max() >= n:
                raise FormatError("coordinate out of range")
        vals = None
        if values is not None:
            vals = np.asarray(values, dtype=np.float32).ravel()
            if vals.shape != rows.shape:
                raise FormatError("values must match coordinates")
        keys = rows * n + cols
        order = np.argsort(keys, kind="stable")
        keys = keys[order]
        uniq, first = np.unique(keys, return_index=True)
        if vals is not None:
            # last duplicate wins: index of the final occurrence of each key
            counts = np.diff(np.append(first, len(keys)))
            last = first + counts - 1
            vals = vals[order][last]
        urows = (uniq // n) if n else uniq
        ucols = (uniq % n) if n else uniq
        row_ptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(row_ptr, urows + 1, 1)
        np.cumsum(row_ptr, out=row_ptr)
        return cls(n, row_ptr, ucols, vals)

    def entries(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (rows, cols) int64 coordinate arrays in row-major order."""
        rows = np.repeat(
            np.arange(self.n, dtype=np.int64),
            np.diff(self.row_ptr.astype(np.int64)),
        )
        return rows, self.col_ind.astype(np.int64)

    def row(self, i: int) -> np.ndarray:
        lo, hi = int(self.row_ptr[i]), int(self.row_ptr[i + 1])
        return self.col_ind[lo:hi].astype(np.int64)

    def to_dense(self) -> np.ndarray:
        """Dense float64 copy; pattern matrices expand to 0.0/1.0."""
        out = np.zeros((self.n, self.n), dtype=np.float64)
        rows, cols = self.entries()
        out[rows, cols] = 1.0 if self.values is None else self.values.astype(np.float64)
        return out

    def pattern(self) -> "CsrMatrix":
        """This matrix with values stripped."""
        if self.values is None:
            return self
        return CsrMatrix(self.n, self.row_ptr, self.col_ind)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CsrMatrix):
            return NotImplemented
        if self.n != other.n or not np.array_equal(self.row_ptr, other.row_ptr) \
                or not np.array_equal(self.col_ind, other.col_ind):
            return False
        if (self.values is None) != (other.values is None):
            return False
        return self.values is None or np.array_equal(self.values, other.values)


@dataclass(frozen=True, eq=False)
class B2srMatrix:
    """Bit-tile CSR matrix: tile indices plus one dense bit tile per entry.

    ``bit_tiles`` has shape (num_tiles, dim); row ``i`` of tile ``t`` is the
    word ``bit_tiles[t, i]``.
    """

    n: int
    tile_dim: TileDim
    tile_row_ptr: np.ndarray
    tile_col_ind: np.ndarray
    bit_tiles: np.ndarray

    def __post_init__(self):
        n = int(self.n)
        if n <= 0:
            raise FormatError("matrix dimension must be positive")
        object.__setattr__(self, "n", n)
        td = TileDim.of(self.tile_dim)
        object.__setattr__(self, "tile_dim", td)
        d = td.dim
        ntr = td.tile_rows(n)
        trp = _as_index_array(self.tile_row_ptr, "tile_row_ptr")
        tci = _as_index_array(self.tile_col_ind, "tile_col_ind")
        object.__setattr__(self, "tile_row_ptr", trp)
        object.__setattr__(self, "tile_col_ind", tci)
        if trp.shape != (ntr + 1,):
            raise FormatError(f"tile_row_ptr must have length {ntr + 1}")
        if trp[0] != 0:
            raise FormatError("tile_row_ptr must start at 0")
        if np.any(np.diff(trp.astype(np.int64)) < 0):
            raise FormatError("tile_row_ptr must be non-decreasing")
        num_tiles = len(tci)
        if int(trp[-1]) != num_tiles:
            raise FormatError("tile_row_ptr[-1] must equal the tile count")
        if num_tiles and int(tci.max()) >= ntr:
            raise FormatError("tile column index out of range")
        if num_tiles > 1:
            boundary = np.zeros(num_tiles, dtype=bool)
            starts = trp[1:-1].astype(np.int64)
            boundary[starts[starts < num_tiles]] = True
            deltas = np.diff(tci.astype(np.int64))
            if np.any(deltas[~boundary[1:]] <= 0):
                raise FormatError("tile columns must be strictly increasing within a tile row")
        tiles = np.asarray(self.bit_tiles)
        if tiles.dtype.kind not in "ui":
            raise FormatError("bit_tiles must hold unsigned words")
        tiles = tiles.astype(td.word_dtype)
        if tiles.shape != (num_tiles, d):
            raise FormatError(f"bit_tiles must have shape ({num_tiles}, {d})")
        tiles.flags.writeable = False
        object.__setattr__(self, "bit_tiles", tiles)
        if num_tiles:
            if not np.all(tiles.any(axis=1)):
                raise FormatError("stored tiles must contain at least one set bit")
            if d == 4 and int(tiles.max()) > 0x0F:
                raise FormatError("4-wide tiles must keep the high nibble clear")
            # padding rows/columns beyond n must stay zero
            pad_rows = ntr * d - n
            if pad_rows:
                last_band = self.tile_row_ids() == ntr - 1
                if np.any(tiles[last_band, d - pad_rows:]):
                    raise FormatError("padding bit-rows must be zero")
                last_col = tci.astype(np.int64) == ntr - 1
                col_mask = td.word_dtype.type(((1 << (d - pad_rows)) - 1) ^ ((1 << d) - 1))
                if np.any(tiles[last_col] & col_mask):
                    raise FormatError("padding bit-columns must be zero")

    @property
    def dim(self) -> int:
        return self.tile_dim.dim

    @property
    def n_tile_rows(self) -> int:
        return self.tile_dim.tile_rows(self.n)

    @property
    def num_tiles(self) -> int:
        return len(self.tile_col_ind)

    def tile_row_ids(self) -> np.ndarray:
        """Tile-row index of each stored tile, int64, in storage order."""
        return np.repeat(
            np.arange(self.n_tile_rows, dtype=np.int64),
            np.diff(self.tile_row_ptr.astype(np.int64)),
        )

    @property
    def nnz(self) -> int:
        return int(np.bitwise_count(self.bit_tiles).sum()) if self.num_tiles else 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, B2srMatrix):
            return NotImplemented
        return (
            self.n == other.n
            and self.dim == other.dim
            and np.array_equal(self.tile_row_ptr, other.tile_row_ptr)
            and np.array_equal(self.tile_col_ind, other.tile_col_ind)
            and np.array_equal(self.bit_tiles, other.bit_tiles)
        )


class BitVector:
    """Length-n bit vector packed in the row-word layout of a tile width.

    Word ``s`` holds elements ``s*dim .. s*dim+dim-1``, least-significant bit
    first; padding bits past ``n`` (and the high nibble at width 4) are zero.
    """

    __slots__ = ("n", "tile_dim", "words")

    def __init__(self, n: int, tile_dim, words=None):
        n = int(n)
        if n < 0:
            raise FormatError("vector length must be non-negative")
        td = TileDim.of(tile_dim)
        nwords = td.tile_rows(n)
        if words is None:
            w = np.zeros(nwords, dtype=td.word_dtype)
        else:
            w = np.ascontiguousarray(words, dtype=td.word_dtype)
            if w.shape != (nwords,):
                raise FormatError(f"expected {nwords} words, got shape {w.shape}")
            w = w & _valid_bit_mask(n, td)
        w.flags.writeable = False
        self.n = n
        self.tile_dim = td
        self.words = w

    @classmethod
    def zeros(cls, n: int, tile_dim) -> "BitVector":
        return cls(n, tile_dim)

    @classmethod
    def from_bools(cls, flags, tile_dim) -> "BitVector":
        flags = np.asarray(flags, dtype=bool).ravel()
        td = TileDim.of(tile_dim)
        n = len(flags)
        pad = np.zeros(td.tile_rows(n) * td.dim, dtype=np.uint8)
        pad[:n] = flags
        return cls(n, td, _pack_bit_rows(pad.reshape(-1, td.dim), td.dim))

    @classmethod
    def from_indices(cls, n: int, indices, tile_dim) -> "BitVector":
        idx = np.asarray(indices, dtype=np.int64).ravel()
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise FormatError("bit index out of range")
        flags = np.zeros(n, dtype=bool)
        flags[idx] = True
        return cls.from_bools(flags, tile_dim)

    @property
    def dim(self) -> int:
        return self.tile_dim.dim

    def to_bools(self) -> np.ndarray:
        return _unpack_words(self.words, self.dim).reshape(-1)[: self.n].astype(bool)

    def to_indices(self) -> np.ndarray:
        return np.flatnonzero(self.to_bools())

    def get(self, i: int) -> bool:
        if not 0 <= i < self.n:
            raise IndexError(f"bit {i} out of range for length {self.n}")
        return bool((int(self.words[i // self.dim]) >> (i % self.dim)) & 1)

    def count(self) -> int:
        return int(np.bitwise_count(self.words).sum()) if len(self.words) else 0

    def any(self) -> bool:
        return bool(self.words.any())

    def invert(self) -> "BitVector":
        return BitVector(self.n, self.tile_dim, ~self.words)

    def __or__(self, other: "BitVector") -> "BitVector":
        self._check_same(other)
        return BitVector(self.n, self.tile_dim, self.words | other.words)

    def __and__(self, other: "BitVector") -> "BitVector":
        self._check_same(other)
        return BitVector(self.n, self.tile_dim, self.words & other.words)

    def repack(self, tile_dim) -> "BitVector":
        """The same logical bits at a different tile width."""
        return BitVector.from_bools(self.to_bools(), tile_dim)

    def _check_same(self, other: "BitVector"):
        if not isinstance(other, BitVector):
            raise TypeError("expected a BitVector")
        if self.n != other.n or self.dim != other.dim:
            raise ValueError("bit vectors must share length and tile width")

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitVector):
            return NotImplemented
        return self.n == other.n and self.dim == other.dim \
            and np.array_equal(self.words, other.words)

    def __repr__(self) -> str:
        return f"BitVector(n={self.n}, dim={self.dim}, set={self.count()})"


def _valid_bit_mask(n: int, td: TileDim) -> np.ndarray:
    """Per-word mask of bits that fall inside a length-n vector."""
    d = td.dim
    nwords = td.tile_rows(n)
    full = (1 << d) - 1
    mask = np.full(nwords, full, dtype=np.uint64)
    if nwords and n % d:
        mask[-1] = (1 << (n % d)) - 1
    return mask.astype(td.word_dtype)


def csr_to_b2sr(csr: CsrMatrix, tile_dim) -> B2srMatrix:
    """Convert a CSR pattern to tile form; values, if any, are ignored."""
    td = TileDim.of(tile_dim)
    if csr.n == 0:
        raise FormatError("cannot tile an empty matrix")
    d = td.dim
    ntr = td.tile_rows(csr.n)
    rows, cols = csr.entries()
    keys = (rows // d) * ntr + (cols // d)
    uniq, inv = np.unique(keys, return_inverse=True)
    num_tiles = len(uniq)
    if num_tiles > 0xFFFFFFFF:
        raise FormatError("tile count exceeds 32-bit index range")
    counts = np.bincount(uniq // ntr, minlength=ntr)
    tile_row_ptr = np.zeros(ntr + 1, dtype=np.int64)
    np.cumsum(counts, out=tile_row_ptr[1:])
    tiles = np.zeros((num_tiles, d), dtype=td.word_dtype)
    flat = inv * d + (rows % d)
    bits = np.left_shift(np.uint64(1), (cols % d).astype(np.uint64)).astype(td.word_dtype)
    np.bitwise_or.at(tiles.reshape(-1), flat, bits)
    return B2srMatrix(csr.n, td, tile_row_ptr, uniq % ntr, tiles)


def b2sr_to_csr(m: B2srMatrix) -> CsrMatrix:
    """Expand tiles back to a CSR pattern."""
    d = m.dim
    bits = _unpack_words(m.bit_tiles, d)  # (num_tiles, d, d); [t, i, k] = bit k of row i
    t, i, k = np.nonzero(bits)
    rows = m.tile_row_ids()[t] * d + i
    cols = m.tile_col_ind.astype(np.int64)[t] * d + k
    return CsrMatrix.from_coo(m.n, rows, cols)


def b2sr_transpose(m: B2srMatrix) -> B2srMatrix:
    """Transpose in tile form: tiles swap indices and transpose internally."""
    d = m.dim
    ntr = m.n_tile_rows
    bits = _unpack_words(m.bit_tiles, d)
    t_words = _pack_bit_rows(bits.transpose(0, 2, 1), d)
    old_rows = m.tile_row_ids()
    old_cols = m.tile_col_ind.astype(np.int64)
    order = np.lexsort((old_rows, old_cols))
    counts = np.bincount(old_cols, minlength=ntr)
    tile_row_ptr = np.zeros(ntr + 1, dtype=np.int64)
    np.cumsum(counts, out=tile_row_ptr[1:])
    return B2srMatrix(m.n, m.tile_dim, tile_row_ptr, old_rows[order], t_words[order])


def storage_bytes(m: B2srMatrix) -> int:
    """Index bytes plus tile payload bytes (4-byte tile indices)."""
    return 4 * (m.n_tile_rows + 1) + 4 * m.num_tiles + m.num_tiles * m.tile_dim.tile_bytes


def csr_storage_bytes(csr: CsrMatrix) -> int:
    """CSR footprint with 4-byte indices and 4-byte float values.

    Value bytes are counted for pattern matrices too, matching a CSR carrying
    explicit unit weights.
    """
    return 4 * (csr.n + 1) + 4 * csr.nnz + 4 * csr.nnz


def compression_ratio(m: B2srMatrix, csr: CsrMatrix) -> float:
    """Tile bytes over CSR bytes; below 1.0 means the tile form is smaller."""
    return storage_bytes(m) / csr_storage_bytes(csr)


def nonzero_density(csr: CsrMatrix) -> float:
    if csr.n == 0:
        raise ValueError("density of an empty matrix is undefined")
    return csr.nnz / float(csr.n) ** 2


def save_b2sr(m: B2srMatrix, path) -> None:
    """Write the on-disk container (little-endian, fixed header)."""
    header = _HEADER.pack(
        _MAGIC, _CONTAINER_VERSION, m.n, m.dim, m.n_tile_rows, m.num_tiles
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(m.tile_row_ptr.astype("<u4", copy=False).tobytes())
        fh.write(m.tile_col_ind.astype("<u4", copy=False).tobytes())
        fh.write(np.ascontiguousarray(m.bit_tiles, dtype=m.tile_dim.word_dtype).tobytes())


def load_b2sr(path) -> B2srMatrix:
    """Read a container written by :func:`save_b2sr`."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise FormatError("container truncated before header end")
    magic, version, n, dim, ntr, num_tiles = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise FormatError("bad magic; not a tile-matrix container")
    if version != _CONTAINER_VERSION:
        raise FormatError(f"unsupported container version {version}")
    if dim not in TILE_DIMS:
        raise FormatError(f"unsupported tile dim {dim}")
    td = TileDim(dim)
    if n <= 0 or ntr != td.tile_rows(n):
        raise FormatError("inconsistent header dimensions")
    off = _HEADER.size
    want = off + 4 * (ntr + 1) + 4 * num_tiles + num_tiles * td.tile_bytes
    if len(raw) != want:
        raise FormatError(f"container size {len(raw)} does not match header ({want} expected)")
    trp = np.frombuffer(raw, dtype="<u4", count=ntr + 1, offset=off)
    off += 4 * (ntr + 1)
    tci = np.frombuffer(raw, dtype="<u4", count=num_tiles, offset=off)
    off += 4 * num_tiles
    tiles = np.frombuffer(raw, dtype=td.word_dtype, count=num_tiles * dim, offset=off)
    return B2srMatrix(n, td, trp, tci, tiles.reshape(num_tiles, dim))
