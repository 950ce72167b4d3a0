import json

import jsonschema
import numpy as np
import pytest

from b2sr import CsrMatrix, IngestOptions, MatrixMarketError, read_matrix_market
from b2sr.matrixio import read_matrix_market_header, schema_path, write_report
from conftest import write_mtx


def test_pattern_general(tmp_path):
    p = write_mtx(tmp_path / "g.mtx", 4, [(0, 1), (2, 3), (3, 0)], comment="general pattern")
    csr = read_matrix_market(p)
    rows, cols = csr.entries()
    assert list(zip(rows.tolist(), cols.tolist())) == [(0, 1), (2, 3), (3, 0)]
    assert csr.is_pattern


def test_symmetric_expands(tmp_path):
    p = write_mtx(tmp_path / "s.mtx", 3, [(1, 0), (2, 1), (0, 0)], symmetry="symmetric")
    csr = read_matrix_market(p)
    # lower entries mirror; the diagonal stays single
    assert csr.nnz == 5
    assert csr.to_dense().tolist() == [
        [1, 1, 0],
        [1, 0, 1],
        [0, 1, 0],
    ]


def test_real_values_and_binarize(tmp_path):
    p = write_mtx(
        tmp_path / "r.mtx", 3, [(0, 1), (1, 2)], field="real", values=[2.5, -1.0]
    )
    pat = read_matrix_market(p)
    assert pat.is_pattern and pat.nnz == 2
    val = read_matrix_market(p, IngestOptions(binarize=False))
    assert val.values.tolist() == [2.5, -1.0]
    integer = write_mtx(
        tmp_path / "i.mtx", 3, [(0, 1), (1, 2)], field="integer", values=[7, -3]
    )
    vi = read_matrix_market(integer, IngestOptions(binarize=False))
    assert vi.values.tolist() == [7.0, -3.0]


def test_duplicates_merge_by_or(tmp_path):
    p = write_mtx(tmp_path / "d.mtx", 3, [(0, 1), (0, 1), (1, 2)])
    csr = read_matrix_market(p)
    assert csr.nnz == 2


def test_symmetrize_union(tmp_path):
    p = write_mtx(tmp_path / "u.mtx", 3, [(0, 1), (1, 0), (1, 2)])
    plain = read_matrix_market(p)
    assert plain.nnz == 3
    sym = read_matrix_market(p, IngestOptions(symmetrize="union"))
    dense = sym.to_dense()
    assert np.array_equal(dense, dense.T)
    assert sym.nnz == 4


def test_drop_self_loops(tmp_path):
    p = write_mtx(tmp_path / "l.mtx", 3, [(0, 0), (0, 1), (2, 2)])
    assert read_matrix_market(p).nnz == 3
    assert read_matrix_market(p, IngestOptions(drop_self_loops=True)).nnz == 1


def test_explicit_zeros(tmp_path):
    p = write_mtx(
        tmp_path / "z.mtx", 3, [(0, 1), (1, 2)], field="real", values=[0.0, 3.0]
    )
    # kept as a structural bit when binarizing
    assert read_matrix_market(p).nnz == 2
    dropped = read_matrix_market(p, IngestOptions(drop_explicit_zeros=True))
    assert dropped.nnz == 1
    with pytest.raises(MatrixMarketError):
        read_matrix_market(p, IngestOptions(binarize=False))
    ok = read_matrix_market(p, IngestOptions(binarize=False, drop_explicit_zeros=True))
    assert ok.values.tolist() == [3.0]


def test_header_reader(tmp_path):
    p = write_mtx(tmp_path / "h.mtx", 5, [(0, 1)], symmetry="symmetric")
    h = read_matrix_market_header(p)
    assert (h.n, h.declared_entries, h.field, h.symmetry) == (5, 1, "pattern", "symmetric")


def test_parse_errors_carry_line_numbers(tmp_path):
    bad_banner = tmp_path / "b.mtx"
    bad_banner.write_text("%%NotMatrixMarket matrix coordinate pattern general\n1 1 0\n")
    with pytest.raises(MatrixMarketError, match=":1:"):
        read_matrix_market(bad_banner)

    unsupported = tmp_path / "c.mtx"
    unsupported.write_text("%%MatrixMarket matrix coordinate complex general\n1 1 0\n")
    with pytest.raises(MatrixMarketError, match="complex"):
        read_matrix_market(unsupported)

    arr = tmp_path / "a.mtx"
    arr.write_text("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n")
    with pytest.raises(MatrixMarketError, match="coordinate"):
        read_matrix_market(arr)

    skew = tmp_path / "k.mtx"
    skew.write_text("%%MatrixMarket matrix coordinate pattern skew-symmetric\n2 2 1\n2 1\n")
    with pytest.raises(MatrixMarketError, match="symmetry"):
        read_matrix_market(skew)

    nonsquare = tmp_path / "n.mtx"
    nonsquare.write_text("%%MatrixMarket matrix coordinate pattern general\n2 3 1\n1 1\n")
    with pytest.raises(MatrixMarketError, match="square"):
        read_matrix_market(nonsquare)

    out_of_range = tmp_path / "o.mtx"
    out_of_range.write_text("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n3 1\n")
    with pytest.raises(MatrixMarketError, match=":3:"):
        read_matrix_market(out_of_range)

    missing = tmp_path / "m.mtx"
    missing.write_text("%%MatrixMarket matrix coordinate pattern general\n3 3 2\n1 1\n")
    with pytest.raises(MatrixMarketError, match="declared 2"):
        read_matrix_market(missing)

    extra = tmp_path / "x.mtx"
    extra.write_text("%%MatrixMarket matrix coordinate pattern general\n3 3 1\n1 1\n2 2\n")
    with pytest.raises(MatrixMarketError, match="more entries"):
        read_matrix_market(extra)

    badtok = tmp_path / "t.mtx"
    badtok.write_text("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 one\n")
    with pytest.raises(MatrixMarketError, match=":3:"):
        read_matrix_market(badtok)

    empty = tmp_path / "e.mtx"
    empty.write_text("")
    with pytest.raises(MatrixMarketError, match="empty"):
        read_matrix_market(empty)


def test_comments_and_blank_lines(tmp_path):
    p = tmp_path / "c.mtx"
    p.write_text(
        "%%MatrixMarket matrix coordinate pattern general\n"
        "% a comment\n"
        "\n"
        "3 3 2\n"
        "% another\n"
        "1 2\n"
        "\n"
        "3 3\n"
    )
    csr = read_matrix_market(p)
    assert csr.nnz == 2


def test_ingest_option_validation():
    with pytest.raises(ValueError):
        IngestOptions(symmetrize="both")


def test_write_report_valid_against_schema(tmp_path):
    schema = json.loads(schema_path().read_text())
    doc = {
        "kind": "info",
        "input": "x.mtx",
        "n": 3,
        "declaredEntries": 2,
        "nnz": 2,
        "field": "pattern",
        "symmetry": "general",
        "nonzeroDensity": 0.22,
        "patternSymmetric": False,
    }
    out = tmp_path / "r.json"
    write_report(doc, out)
    loaded = json.loads(out.read_text())
    jsonschema.validate(loaded, schema)
    assert loaded["schemaVersion"] == 1
    # key order is stable: schemaVersion first, then insertion order
    assert list(loaded)[0] == "schemaVersion"


def test_write_report_rejects_bad_path(tmp_path):
    with pytest.raises(OSError):
        write_report({"kind": "info"}, tmp_path / "no" / "dir" / "r.json")
