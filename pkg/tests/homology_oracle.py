"""Brute-force cellular homology of a voxel pattern, independent of hconvex.cubical."""

import itertools

import numpy as np


def closure_cells(bits):
    """Every face of every filled voxel as a tuple of (lo, hi) integer intervals."""
    bits = np.asarray(bits, dtype=bool)
    cells = set()
    for v in zip(*np.nonzero(bits)):
        for choice in itertools.product(range(3), repeat=bits.ndim):
            cells.add(tuple((k, k + 1) if c == 2 else (k + c, k + c) for k, c in zip(map(int, v), choice)))
    return cells


def _dim(cell):
    return sum(b - a for a, b in cell)


def boundary_matrix(cells_k, cells_km1):
    """Signed boundary of k-cells in terms of (k-1)-cells."""
    index = {c: i for i, c in enumerate(cells_km1)}
    m = np.zeros((len(cells_km1), len(cells_k)), dtype=np.int64)
    for j, cell in enumerate(cells_k):
        sign = 1
        for ax, (a, b) in enumerate(cell):
            if a == b:
                continue
            for end, coef in ((b, sign), (a, -sign)):
                face = cell[:ax] + ((end, end),) + cell[ax + 1 :]
                m[index[face], j] += coef
            sign = -sign
    return m


def rank_gf2(m):
    m = (np.asarray(m) % 2).astype(np.uint8)
    r = 0
    rows, cols = m.shape
    for c in range(cols):
        piv = np.nonzero(m[r:, c])[0]
        if piv.size == 0:
            continue
        p = r + piv[0]
        m[[r, p]] = m[[p, r]]
        hit = np.nonzero(m[:, c])[0]
        hit = hit[hit != r]
        m[hit] ^= m[r]
        r += 1
        if r == rows:
            break
    return r


def rank_q(m):
    return 0 if m.size == 0 else int(np.linalg.matrix_rank(m.astype(float)))


def betti(bits, field="mod2"):
    bits = np.asarray(bits, dtype=bool)
    d = bits.ndim
    by_dim = [[] for _ in range(d + 1)]
    for c in sorted(closure_cells(bits)):
        by_dim[_dim(c)].append(c)
    rank = rank_gf2 if field == "mod2" else rank_q
    ranks = [0] * (d + 2)
    for k in range(1, d + 1):
        if by_dim[k] and by_dim[k - 1]:
            ranks[k] = rank(boundary_matrix(by_dim[k], by_dim[k - 1]))
    return [len(by_dim[k]) - ranks[k] - ranks[k + 1] for k in range(d + 1)]


def boundary_squares_to_zero(bits):
    bits = np.asarray(bits, dtype=bool)
    d = bits.ndim
    by_dim = [[] for _ in range(d + 1)]
    for c in sorted(closure_cells(bits)):
        by_dim[_dim(c)].append(c)
    for k in range(2, d + 1):
        a = boundary_matrix(by_dim[k - 1], by_dim[k - 2])
        b = boundary_matrix(by_dim[k], by_dim[k - 1])
        if np.any(a @ b):
            return False
    return True
