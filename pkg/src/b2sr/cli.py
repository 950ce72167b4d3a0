"""Command-line front end.

Commands: convert, profile, bench, run, info.  Exit codes: 0 success,
1 Matrix Market parse/validation failure, 2 file I/O failure, 3 violated
matrix invariant or bad parameter, 4 benchmark output mismatch.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time

import numpy as np

from . import algorithms
from .errors import FormatError, MatrixMarketError
from .formats import (
    TILE_DIMS,
    BitVector,
    CsrMatrix,
    b2sr_transpose,
    compression_ratio,
    csr_storage_bytes,
    csr_to_b2sr,
    nonzero_density,
    save_b2sr,
    storage_bytes,
)
from .kernels import (
    WORKERS_ENV,
    bmm_bin_bin_sum,
    bmv_bin_bin_bin,
    bmv_bin_bin_full,
    bmv_bin_full_full,
)
from .matrixio import (
    IngestOptions,
    read_matrix_market,
    read_matrix_market_header,
    schema_path,
    write_report,
)
from .profile import sample_profile
from .reference import csr_spgemm_sum_f32, csr_spmv_f32
from .semirings import ARITHMETIC

_BENCH_KERNELS = ("bmv-bbb", "bmv-bbf", "bmv-bff", "bmm-sum")
_ALGOS = ("bfs", "sssp", "pagerank", "cc", "tc")
_PROFILE_CAP = 64


def _add_common(p: argparse.ArgumentParser, tile_dim=True):
    p.add_argument("input", help="Matrix Market file")
    if tile_dim:
        p.add_argument(
            "--tile-dim", type=int, choices=TILE_DIMS, default=None,
            help="tile width; picked by sampling when omitted",
        )
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument(
        "--threads", type=int, default=1,
        help=f"worker threads (default 1; the {WORKERS_ENV} variable wins)",
    )
    p.add_argument("--json", metavar="PATH", default=None, help="also write a JSON report")
    p.add_argument("--no-binarize", action="store_true", help="keep stored values")
    p.add_argument(
        "--symmetrize", choices=("none", "union"), default="none",
        help="union adds the transpose of every entry",
    )
    p.add_argument("--drop-self-loops", action="store_true")
    p.add_argument("--drop-explicit-zeros", action="store_true")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="b2sr",
        description="Bit-tile CSR storage, kernels, and graph algorithms.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="ingest a matrix and report tile storage")
    _add_common(p)
    p.add_argument("-o", "--output", default=None, help="write a .b2sr container here")
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("profile", help="estimate storage per tile width by sampling")
    _add_common(p, tile_dim=False)
    p.add_argument("--samples", type=int, default=None,
                   help="tile rows to sample (default min(64, ceil(n/4)))")
    p.set_defaults(func=_cmd_profile)

    p = sub.add_parser("bench", help="time a kernel against its CSR baseline")
    _add_common(p)
    p.add_argument("--kernel", choices=_BENCH_KERNELS, required=True)
    p.add_argument("--reps", type=int, default=5, help="timing repetitions (default 5)")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("run", help="run a graph algorithm")
    p.add_argument("algorithm", choices=_ALGOS)
    _add_common(p)
    p.add_argument("--src", type=int, default=0, help="source vertex for bfs/sssp")
    p.add_argument("--alpha", type=float, default=0.85)
    p.add_argument("--epsilon", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=10)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("info", help="describe a matrix file, or print the report schema path")
    p.add_argument("input", nargs="?", default=None)
    p.add_argument("--json", metavar="PATH", default=None)
    p.add_argument("--schema", action="store_true", help="print the JSON schema path and exit")
    p.set_defaults(func=_cmd_info)
    return parser


def _workers(args) -> int:
    env = os.environ.get(WORKERS_ENV, "").strip()
    w = int(env) if env else int(args.threads)
    if w < 1:
        raise ValueError("worker count must be at least 1")
    return w


def _ingest_options(args, force_drop_loops=False) -> IngestOptions:
    return IngestOptions(
        binarize=not args.no_binarize,
        symmetrize=args.symmetrize,
        drop_self_loops=args.drop_self_loops or force_drop_loops,
        drop_explicit_zeros=args.drop_explicit_zeros,
    )


def _pick_tile_dim(csr, args) -> tuple[int, str]:
    if args.tile_dim is not None:
        return int(args.tile_dim), "flag"
    samples = min(_PROFILE_CAP, -(-csr.n // 4))
    report = sample_profile(csr, samples, args.seed)
    return report.recommended_tile_dim(), "profile"


def _emit(args, doc: dict):
    if args.json:
        write_report(doc, args.json)


def _cmd_convert(args) -> int:
    csr = read_matrix_market(args.input, _ingest_options(args))
    dim, source = _pick_tile_dim(csr, args)
    mat = csr_to_b2sr(csr, dim)
    b_bytes = storage_bytes(mat)
    c_bytes = csr_storage_bytes(csr)
    occ = mat.nnz / (dim * dim * mat.num_tiles) if mat.num_tiles else 0.0
    if args.output:
        save_b2sr(mat, args.output)
    doc = {
        "kind": "convert",
        "input": args.input,
        "output": args.output,
        "n": csr.n,
        "nnz": csr.nnz,
        "tileDim": dim,
        "tileDimSource": source,
        "nTileRows": mat.n_tile_rows,
        "numTiles": mat.num_tiles,
        "b2srBytes": b_bytes,
        "csrBytes": c_bytes,
        "compressionRatio": compression_ratio(mat, csr),
        "nonzeroDensity": nonzero_density(csr),
        "avgNnzOccupancy": occ,
    }
    _emit(args, doc)
    print(f"n={csr.n} nnz={csr.nnz} tileDim={dim} ({source})")
    print(f"tiles={mat.num_tiles} tileRows={mat.n_tile_rows} occupancy={occ:.4f}")
    print(
        f"b2srBytes={b_bytes} csrBytes={c_bytes} "
        f"ratio={doc['compressionRatio']:.6f} density={doc['nonzeroDensity']:.6g}"
    )
    if args.output:
        print(f"wrote {args.output}")
    return 0


def _cmd_profile(args) -> int:
    csr = read_matrix_market(args.input, _ingest_options(args))
    samples = args.samples if args.samples is not None else min(_PROFILE_CAP, -(-csr.n // 4))
    report = sample_profile(csr, samples, args.seed)
    doc = report.to_report()
    _emit(args, doc)
    print(f"n={csr.n} nnz={csr.nnz} samples={report.sample_count} seed={report.seed}")
    for est in report.estimates:
        print(
            f"tileDim={est.tile_dim:>2} estTiles={est.est_tile_count:14.2f} "
            f"estBytes={est.est_bytes:16.2f} estRatio={est.est_compression_ratio:8.4f} "
            f"occupancy={est.avg_nnz_occupancy:.4f}"
        )
    print(f"recommended tileDim: {report.recommended_tile_dim()}")
    return 0


def _bench_once(kernel, mat, x_bit, x_full, workers):
    if kernel == "bmv-bbb":
        return lambda: bmv_bin_bin_bin(mat, x_bit, workers=workers)
    if kernel == "bmv-bbf":
        return lambda: bmv_bin_bin_full(mat, x_bit, workers=workers)
    if kernel == "bmv-bff":
        return lambda: bmv_bin_full_full(mat, x_full, ARITHMETIC, workers=workers)
    return lambda: bmm_bin_bin_sum(mat, mat, workers=workers)


def _bench_baseline(kernel, csr, x_bools, x_full):
    if kernel in ("bmv-bbb", "bmv-bbf"):
        return lambda: csr_spmv_f32(csr, x_bools.astype(np.float64))
    if kernel == "bmv-bff":
        return lambda: csr_spmv_f32(csr, x_full)
    return lambda: csr_spgemm_sum_f32(csr, csr)


def _outputs_match(kernel, out, ref) -> bool:
    if kernel == "bmv-bbb":
        return bool(np.array_equal(out.to_bools(), ref != 0.0))
    if kernel == "bmv-bbf":
        return bool(np.array_equal(out, ref))
    if kernel == "bmv-bff":
        return bool(np.allclose(out, ref, rtol=1e-5, atol=1e-8))
    return math.isclose(out, ref, rel_tol=1e-5, abs_tol=1e-6)


def _cmd_bench(args) -> int:
    if args.reps < 1:
        raise ValueError("reps must be at least 1")
    csr = read_matrix_market(args.input, _ingest_options(args)).pattern()
    dim, _ = _pick_tile_dim(csr, args)
    workers = _workers(args)
    mat = csr_to_b2sr(csr, dim)
    rng = np.random.default_rng(args.seed)
    x_bools = rng.random(csr.n) < 0.5
    x_bit = BitVector.from_bools(x_bools, dim)
    x_full = rng.random(csr.n)
    tiled = _bench_once(args.kernel, mat, x_bit, x_full, workers)
    baseline = _bench_baseline(args.kernel, csr, x_bools, x_full)
    match = _outputs_match(args.kernel, tiled(), baseline())
    t_ns, c_ns = [], []
    for _ in range(args.reps):
        t0 = time.perf_counter_ns()
        tiled()
        t_ns.append(time.perf_counter_ns() - t0)
        t0 = time.perf_counter_ns()
        baseline()
        c_ns.append(time.perf_counter_ns() - t0)
    best_t, best_c = min(t_ns), min(c_ns)
    doc = {
        "kind": "bench",
        "kernel": args.kernel,
        "input": args.input,
        "n": csr.n,
        "nnz": csr.nnz,
        "tileDim": dim,
        "workers": workers,
        "reps": args.reps,
        "seed": args.seed,
        "outputsMatch": match,
        "b2srNs": t_ns,
        "csrNs": c_ns,
        "b2srBestNs": best_t,
        "csrBestNs": best_c,
        "speedup": (best_c / best_t) if best_t else 0.0,
        "compressionRatio": compression_ratio(mat, csr),
    }
    _emit(args, doc)
    print(
        f"kernel={args.kernel} n={csr.n} nnz={csr.nnz} tileDim={dim} "
        f"workers={workers} reps={args.reps}"
    )
    print(f"outputsMatch={'true' if match else 'false'}")
    print(f"b2srBestNs={best_t} csrBestNs={best_c} speedup={doc['speedup']:.3f}")
    print(f"compressionRatio={doc['compressionRatio']:.6f}")
    if not match:
        print("error: kernel and baseline outputs disagree", file=sys.stderr)
        return 4
    return 0


def _cmd_run(args) -> int:
    algo = args.algorithm
    csr = read_matrix_market(
        args.input, _ingest_options(args, force_drop_loops=algo == "tc")
    ).pattern()
    dim, _ = _pick_tile_dim(csr, args)
    workers = _workers(args)
    doc = {
        "kind": "run",
        "algorithm": algo,
        "input": args.input,
        "n": csr.n,
        "nnz": csr.nnz,
        "tileDim": dim,
        "workers": workers,
    }
    if algo == "tc":
        result = algorithms.triangle_count(csr, dim, workers=workers)
    else:
        mat = csr_to_b2sr(csr, dim)
        if algo == "bfs":
            result = algorithms.bfs(mat, args.src, workers=workers)
            doc["src"] = args.src
        elif algo == "sssp":
            result = algorithms.sssp(mat, args.src, workers=workers)
            doc["src"] = args.src
        elif algo == "pagerank":
            params = algorithms.AlgoParams(args.alpha, args.epsilon, args.max_iter)
            out_deg = np.diff(csr.row_ptr.astype(np.int64)).astype(np.float64)
            result = algorithms.pagerank(
                b2sr_transpose(mat), out_deg, params, workers=workers
            )
            doc.update(alpha=args.alpha, epsilon=args.epsilon, maxIter=args.max_iter)
        else:
            result = algorithms.connected_components(mat, workers=workers)
    doc.update(result.to_report())
    _emit(args, doc)
    print(f"algorithm={algo} n={csr.n} nnz={csr.nnz} tileDim={dim} workers={workers}")
    print(f"iterations={result.iterations} converged={'true' if result.converged else 'false'}")
    if result.count is not None:
        print(f"count={result.count}")
    if result.per_vertex is not None:
        head = ", ".join(f"{v:g}" for v in result.per_vertex[:10])
        more = " ..." if csr.n > 10 else ""
        print(f"perVertex[0:10]=[{head}]{more}")
    return 0


def _cmd_info(args) -> int:
    if args.schema:
        print(schema_path())
        return 0
    if not args.input:
        raise ValueError("info needs an input file (or --schema)")
    header = read_matrix_market_header(args.input)
    csr = read_matrix_market(args.input)
    rows, cols = csr.entries()
    sym = csr == CsrMatrix.from_coo(csr.n, cols, rows)
    doc = {
        "kind": "info",
        "input": args.input,
        "n": header.n,
        "declaredEntries": header.declared_entries,
        "nnz": csr.nnz,
        "field": header.field,
        "symmetry": header.symmetry,
        "nonzeroDensity": nonzero_density(csr) if csr.n else 0.0,
        "patternSymmetric": bool(sym),
    }
    _emit(args, doc)
    print(f"input={args.input}")
    print(f"n={header.n} declaredEntries={header.declared_entries} nnz={csr.nnz}")
    print(f"field={header.field} symmetry={header.symmetry}")
    print(f"density={doc['nonzeroDensity']:.6g} patternSymmetric={'true' if sym else 'false'}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MatrixMarketError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def console_main() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    console_main()
