import numpy as np
import pytest

import b2sr.kernels as kernels
from b2sr import (
    ARITHMETIC,
    BOOLEAN,
    MAX_TIMES,
    BitVector,
    CsrMatrix,
    MaskedOutput,
    Semiring,
    b2sr_transpose,
    bmm_bin_bin_sum,
    bmm_bin_bin_sum_masked,
    bmv_bin_bin_bin,
    bmv_bin_bin_bin_masked,
    bmv_bin_bin_full,
    bmv_bin_bin_full_masked,
    bmv_bin_full_full,
    bmv_bin_full_full_masked,
    csr_to_b2sr,
    min_plus,
    resolve_workers,
)
from b2sr.reference import dense_mxm_masked_sum, dense_semiring_mxv
from conftest import random_bits, random_pattern

DIMS = (4, 8, 16, 32)


def fixture_matrix(dim=4):
    return csr_to_b2sr(CsrMatrix.from_coo(4, [0, 0, 1, 1, 2], [0, 1, 0, 2, 3]), dim)


def test_bbb_worked_example():
    for d in DIMS:
        a = fixture_matrix(d)
        x = BitVector.from_indices(4, [0, 2], d)
        assert bmv_bin_bin_bin(a, x).to_indices().tolist() == [0, 1]


def test_bbf_worked_example():
    for d in DIMS:
        a = fixture_matrix(d)
        x = BitVector.from_indices(4, [0, 2], d)
        out = bmv_bin_bin_full(a, x)
        assert out.dtype == np.float64
        assert out.tolist() == [1.0, 2.0, 0.0, 0.0]


def test_masked_worked_example():
    for d in DIMS:
        a = fixture_matrix(d)
        x = BitVector.from_indices(4, [0, 2], d)
        keep = BitVector.from_indices(4, [1, 2, 3], d)
        assert bmv_bin_bin_bin_masked(a, x, keep).to_indices().tolist() == [1]
        assert bmv_bin_bin_full_masked(a, x, keep).tolist() == [0.0, 2.0, 0.0, 0.0]


def test_minplus_worked_example():
    path = CsrMatrix.from_coo(4, [0, 1, 2], [1, 2, 3])
    x = np.array([0.0, np.inf, np.inf, np.inf])
    for d in DIMS:
        at = b2sr_transpose(csr_to_b2sr(path, d))
        out = bmv_bin_full_full(at, x, min_plus(1))
        assert out.tolist() == [np.inf, 1.0, np.inf, np.inf]


def test_boolean_semiring_rejected():
    a = fixture_matrix()
    with pytest.raises(ValueError):
        bmv_bin_full_full(a, np.zeros(4), BOOLEAN)


def test_scale_rules():
    a = fixture_matrix()
    x = np.array([1.0, 2.0, 3.0, 4.0])
    # column 3 has a bit (row 2), so a zero scale there must raise
    with pytest.raises(ValueError):
        bmv_bin_full_full(a, x, ARITHMETIC, scale=[1.0, 1.0, 1.0, 0.0])
    with pytest.raises(ValueError):
        bmv_bin_full_full(a, x, min_plus(1), scale=np.ones(4))
    # zero scale at a bitless column is fine; matrix has no column-1 bits
    cols_one = CsrMatrix.from_coo(4, [0, 2], [0, 2])
    m = csr_to_b2sr(cols_one, 4)
    out = bmv_bin_full_full(m, x, ARITHMETIC, scale=[1.0, 0.0, 2.0, 0.0])
    assert out.tolist() == [1.0, 0.0, 1.5, 0.0]


def test_arg_validation():
    a = fixture_matrix(4)
    with pytest.raises(TypeError):
        bmv_bin_bin_bin(a, np.ones(4))
    with pytest.raises(TypeError):
        bmv_bin_full_full(a, BitVector.zeros(4, 4), ARITHMETIC)
    with pytest.raises(ValueError):
        bmv_bin_bin_bin(a, BitVector.zeros(5, 4))
    with pytest.raises(ValueError):
        bmv_bin_bin_bin(a, BitVector.zeros(4, 8))  # width mismatch
    with pytest.raises(ValueError):
        bmv_bin_full_full(a, np.ones(3), ARITHMETIC)
    b8 = fixture_matrix(8)
    with pytest.raises(ValueError):
        bmm_bin_bin_sum(a, b8)
    with pytest.raises(ValueError):
        bmv_bin_bin_bin_masked(a, BitVector.zeros(4, 4), BitVector.zeros(4, 8))


def _dense_bits(csr):
    return csr.to_dense()


def test_bbb_matches_oracle(rng):
    for _ in range(30):
        n = int(rng.integers(1, 120))
        csr = random_pattern(rng, n, float(rng.uniform(0.01, 0.4)))
        xb = random_bits(rng, n)
        ref = dense_semiring_mxv(_dense_bits(csr), xb.astype(np.float64), BOOLEAN)
        for d in DIMS:
            out = bmv_bin_bin_bin(csr_to_b2sr(csr, d), BitVector.from_bools(xb, d))
            assert np.array_equal(out.to_bools().astype(np.float64), ref)


def test_bbf_matches_popcount(rng):
    for _ in range(30):
        n = int(rng.integers(1, 120))
        csr = random_pattern(rng, n, float(rng.uniform(0.01, 0.4)))
        xb = random_bits(rng, n)
        ref = _dense_bits(csr) @ xb.astype(np.float64)
        for d in DIMS:
            out = bmv_bin_bin_full(csr_to_b2sr(csr, d), BitVector.from_bools(xb, d))
            assert np.array_equal(out, ref)


def test_bff_arithmetic_bitwise_equal(rng):
    # sequential ascending-j reduction must agree with the oracle bit for bit
    for _ in range(20):
        n = int(rng.integers(1, 100))
        csr = random_pattern(rng, n, float(rng.uniform(0.02, 0.4)))
        x = rng.standard_normal(n) * rng.uniform(0.1, 100)
        ref = dense_semiring_mxv(_dense_bits(csr), x, ARITHMETIC)
        outs = []
        for d in DIMS:
            out = bmv_bin_full_full(csr_to_b2sr(csr, d), x, ARITHMETIC)
            assert out.tobytes() == ref.tobytes()
            outs.append(out)
        assert all(o.tobytes() == outs[0].tobytes() for o in outs)


def test_bff_minplus_and_maxtimes(rng):
    for _ in range(20):
        n = int(rng.integers(1, 100))
        csr = random_pattern(rng, n, float(rng.uniform(0.02, 0.4)))
        x = np.where(rng.random(n) < 0.3, np.inf, rng.integers(0, 50, n).astype(np.float64))
        for ring in (min_plus(1), min_plus(0)):
            ref = dense_semiring_mxv(_dense_bits(csr), x, ring)
            for d in DIMS:
                out = bmv_bin_full_full(csr_to_b2sr(csr, d), x, ring)
                assert np.array_equal(out, ref)
        xf = rng.random(n)
        ref = dense_semiring_mxv(_dense_bits(csr), xf, MAX_TIMES)
        for d in DIMS:
            out = bmv_bin_full_full(csr_to_b2sr(csr, d), xf, MAX_TIMES)
            assert np.array_equal(out, ref)


def test_empty_matrix_gives_identities():
    empty = CsrMatrix(6, [0] * 7, [])
    for d in DIMS:
        m = csr_to_b2sr(empty, d)
        assert bmv_bin_bin_bin(m, BitVector.from_indices(6, [0, 5], d)).count() == 0
        assert bmv_bin_bin_full(m, BitVector.from_indices(6, [1], d)).tolist() == [0.0] * 6
        out = bmv_bin_full_full(m, np.ones(6), min_plus(1))
        assert out.tolist() == [np.inf] * 6
        assert bmm_bin_bin_sum(m, m) == 0
        assert bmm_bin_bin_sum_masked(m, m, m) == 0


def test_mask_at_store_law(rng):
    # masked output == unmasked output with cleared slots at the identity
    for _ in range(25):
        n = int(rng.integers(1, 100))
        csr = random_pattern(rng, n, float(rng.uniform(0.02, 0.4)))
        keep_bools = random_bits(rng, n)
        xb = random_bits(rng, n)
        x = rng.standard_normal(n)
        d = int(rng.choice(DIMS))
        a = csr_to_b2sr(csr, d)
        keep = BitVector.from_bools(keep_bools, d)
        xbit = BitVector.from_bools(xb, d)

        plain = bmv_bin_bin_bin(a, xbit)
        masked = bmv_bin_bin_bin_masked(a, xbit, keep)
        assert np.array_equal(masked.to_bools(), plain.to_bools() & keep_bools)

        plainc = bmv_bin_bin_full(a, xbit)
        maskedc = bmv_bin_bin_full_masked(a, xbit, keep)
        assert np.array_equal(maskedc, np.where(keep_bools, plainc, 0.0))

        ring = min_plus(1)
        plainf = bmv_bin_full_full(a, x, ring)
        maskedf = bmv_bin_full_full_masked(a, x, ring, keep)
        assert np.array_equal(maskedf, np.where(keep_bools, plainf, np.inf))

        audit = MaskedOutput(maskedf, keep)
        assert np.all(audit.cleared_values() == np.inf)
        assert np.all(MaskedOutput(masked, keep).cleared_values() == 0.0)


def test_bmm_sum_matches_dense(rng):
    for _ in range(25):
        n = int(rng.integers(1, 90))
        a = random_pattern(rng, n, float(rng.uniform(0.02, 0.4)))
        b = random_pattern(rng, n, float(rng.uniform(0.02, 0.4)))
        ref = dense_mxm_masked_sum(a.to_dense(), b.to_dense())
        for d in DIMS:
            got = bmm_bin_bin_sum(csr_to_b2sr(a, d), csr_to_b2sr(b, d))
            assert got == ref


def test_bmm_masked_matches_dense(rng):
    for _ in range(25):
        n = int(rng.integers(1, 90))
        a = random_pattern(rng, n, float(rng.uniform(0.02, 0.3)))
        b = random_pattern(rng, n, float(rng.uniform(0.02, 0.3)))
        m = random_pattern(rng, n, float(rng.uniform(0.02, 0.3)))
        ref = dense_mxm_masked_sum(a.to_dense(), b.to_dense(), m.to_dense())
        for d in DIMS:
            got = bmm_bin_bin_sum_masked(
                csr_to_b2sr(a, d), csr_to_b2sr(b, d), csr_to_b2sr(m, d)
            )
            assert got == ref


def test_bmm_identity_product(rng):
    # A @ I sums to nnz(A)
    n = 37
    a = random_pattern(rng, n, 0.15)
    eye = CsrMatrix.from_coo(n, range(n), range(n))
    for d in DIMS:
        assert bmm_bin_bin_sum(csr_to_b2sr(a, d), csr_to_b2sr(eye, d)) == a.nnz


def test_workers_bitwise_identical(rng):
    for _ in range(8):
        n = int(rng.integers(50, 200))
        csr = random_pattern(rng, n, 0.05)
        xb = random_bits(rng, n)
        x = rng.standard_normal(n)
        for d in (4, 16):
            a = csr_to_b2sr(csr, d)
            xbit = BitVector.from_bools(xb, d)
            base = (
                bmv_bin_bin_bin(a, xbit, workers=1).words.tobytes(),
                bmv_bin_bin_full(a, xbit, workers=1).tobytes(),
                bmv_bin_full_full(a, x, ARITHMETIC, workers=1).tobytes(),
                bmm_bin_bin_sum(a, a, workers=1),
                bmm_bin_bin_sum_masked(a, a, a, workers=1),
            )
            for w in (2, 8):
                assert bmv_bin_bin_bin(a, xbit, workers=w).words.tobytes() == base[0]
                assert bmv_bin_bin_full(a, xbit, workers=w).tobytes() == base[1]
                assert bmv_bin_full_full(a, x, ARITHMETIC, workers=w).tobytes() == base[2]
                assert bmm_bin_bin_sum(a, a, workers=w) == base[3]
                assert bmm_bin_bin_sum_masked(a, a, a, workers=w) == base[4]


def test_resolve_workers(monkeypatch):
    monkeypatch.delenv(kernels.WORKERS_ENV, raising=False)
    assert resolve_workers() == 1
    assert resolve_workers(3) == 3
    monkeypatch.setenv(kernels.WORKERS_ENV, "4")
    assert resolve_workers() == 4
    assert resolve_workers(2) == 2  # explicit argument wins over env
    with pytest.raises(ValueError):
        resolve_workers(0)


def test_overflow_guard():
    big = CsrMatrix(3_000_000, np.zeros(3_000_001, dtype=np.uint32), [])
    m = csr_to_b2sr(big, 32)
    with pytest.raises(ValueError):
        bmm_bin_bin_sum(m, m)


def test_semiring_scalar_laws():
    cases = [
        (BOOLEAN, (0.0, 1.0)),
        (ARITHMETIC, (0.0, 1.0, 2.5, -3.0)),
        (min_plus(1), (0.0, 1.0, 2.5, np.inf)),
        (min_plus(0), (0.0, 1.0, 2.5, np.inf)),
        (MAX_TIMES, (0.0, 1.0, 2.5, np.inf)),
    ]
    for s, vals in cases:
        for a in vals:
            assert s.add(s.add_identity, a) == a
            for b in vals:
                assert s.add(a, b) == s.add(b, a)
    assert min_plus(1).multiply(1.0, 3.0) == 4.0
    assert min_plus(0).multiply(1.0, 3.0) == 3.0
    assert MAX_TIMES.multiply(1.0, 0.25) == 0.25
    with pytest.raises(ValueError):
        Semiring("minplus", np.inf, 2.0)
    with pytest.raises(ValueError):
        Semiring("nonsense", 0.0)
