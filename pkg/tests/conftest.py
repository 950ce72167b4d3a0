import numpy as np
import pytest

from b2sr import CsrMatrix


def random_pattern(rng, n, density):
    """Random n x n binary pattern with iid entries."""
    mask = rng.random((n, n)) < density
    rows, cols = np.nonzero(mask)
    return CsrMatrix.from_coo(n, rows, cols)


def random_symmetric(rng, n, density, loops=False):
    """Random undirected pattern; no self-loops unless asked."""
    mask = rng.random((n, n)) < density
    mask |= mask.T
    if not loops:
        np.fill_diagonal(mask, False)
    rows, cols = np.nonzero(mask)
    return CsrMatrix.from_coo(n, rows, cols)


def random_bits(rng, n):
    return rng.random(n) < 0.5


def mycielskian(k):
    """Mycielski graph M_k grown from M_2 = K2.

    Each step keeps the current vertices 0..n-1, adds shadow vertices
    n..2n-1 (shadow n+i adjacent to the neighbours of i) and an apex 2n
    adjacent to every shadow.
    """
    edges = {(0, 1)}
    n = 2
    for _ in range(k - 2):
        grown = set(edges)
        for i, j in edges:
            grown.add((min(i, n + j), max(i, n + j)))
            grown.add((min(j, n + i), max(j, n + i)))
        for i in range(n):
            grown.add((n + i, 2 * n))
        edges = grown
        n = 2 * n + 1
    pairs = np.array(sorted(edges), dtype=np.int64)
    rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
    return CsrMatrix.from_coo(n, rows, cols)


def write_mtx(path, n, entries, field="pattern", symmetry="general", values=None,
              comment=None):
    """Write a coordinate Matrix Market file; entries are 0-based pairs."""
    lines = [f"%%MatrixMarket matrix coordinate {field} {symmetry}"]
    if comment:
        lines.append(f"% {comment}")
    lines.append(f"{n} {n} {len(entries)}")
    for idx, (i, j) in enumerate(entries):
        if field == "pattern":
            lines.append(f"{i + 1} {j + 1}")
        else:
            lines.append(f"{i + 1} {j + 1} {values[idx]}")
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
