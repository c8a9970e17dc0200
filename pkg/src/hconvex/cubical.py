"""Cubical complexes of voxel sets and their Betti numbers over a field.

A voxel set of shape ``(n_1, ..., n_d)`` is encoded on the doubled grid of
shape ``(2 n_i + 1)``: a doubled coordinate is odd where the cell spans an
interval ``[k, k+1]`` and even where it is degenerate ``[k, k]``. Filled
voxels sit at all-odd positions and the complex is their closure, i.e. the
separable 3-wide dilation of the voxel pattern.

Homology is computed by (1) exhausting free-face collapses, (2) removing
one surviving vertex per connected component and exhausting coreduction
pairs, and (3) Gaussian elimination on whatever survives. Both kinds of
elementary pair restrict the boundary operator without correction terms, so
the ranks of the small remainder give the reduced Betti numbers of the
original complex.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal

import numpy as np

from . import _kernels

Field = Literal["mod2", "rational"]


@dataclass(frozen=True)
class BettiVector:
    values: tuple[int, ...]
    empty: bool = False

    def __getitem__(self, i: int) -> int:
        return self.values[i] if 0 <= i < len(self.values) else 0

    def __len__(self) -> int:
        return len(self.values)

    @property
    def reduced(self) -> tuple[int, ...]:
        if self.empty:
            return tuple(0 for _ in self.values)
        return (self.values[0] - 1,) + tuple(self.values[1:])

    def euler(self) -> int:
        return sum((-1) ** k * b for k, b in enumerate(self.values))

    def as_list(self) -> list[int]:
        return list(self.values)


@dataclass
class CubicalComplex:
    """Closure of the filled voxels of a d-dimensional bit pattern.

    ``present`` is the doubled grid padded by one empty layer on each side,
    stored flat in C order; ``offset`` is the voxel index of the cropped
    box's lowest corner inside the source grid.
    """

    dim: int
    box_shape: tuple[int, ...]
    offset: tuple[int, ...]
    present: np.ndarray
    voxels: np.ndarray = field(repr=False)

    @property
    def padded_shape(self) -> tuple[int, ...]:
        return tuple(2 * n + 3 for n in self.box_shape)

    @property
    def strides(self) -> np.ndarray:
        shp = self.padded_shape
        return np.cumprod((1,) + shp[::-1])[:-1][::-1].astype(np.int64)

    def oddmask(self) -> np.ndarray:
        """Bit i set where the padded doubled coordinate along axis i is an interval."""
        shp = self.padded_shape
        out = np.zeros(shp, dtype=np.uint8)
        for i, n in enumerate(shp):
            par = ((np.arange(n) - 1) % 2).astype(np.uint8) << i
            view = [1] * len(shp)
            view[i] = n
            out |= par.reshape(view)
        return out.reshape(-1)

    def cell_dims(self, idx: np.ndarray | None = None) -> np.ndarray:
        odd = self.oddmask()
        if idx is not None:
            odd = odd[idx]
        return np.array([bin(int(m)).count("1") for m in range(256)], dtype=np.int8)[odd]

    def cell_counts(self) -> list[int]:
        if self.present.size == 0:
            return [0] * (self.dim + 1)
        idx = np.flatnonzero(self.present)
        dims = self.cell_dims(idx)
        return np.bincount(dims, minlength=self.dim + 1).tolist()

    @property
    def n_cells(self) -> int:
        return int(np.count_nonzero(self.present))

    def euler(self) -> int:
        return sum((-1) ** k * n for k, n in enumerate(self.cell_counts()))

    def cells(self) -> list[tuple[tuple[int, int], ...]]:
        """Cells as interval products in source-grid vertex coordinates."""
        if self.present.size == 0:
            return []
        idx = np.flatnonzero(self.present)
        coords = np.stack(np.unravel_index(idx, self.padded_shape), axis=1) - 1
        out = []
        for row in coords:
            cell = []
            for i, c in enumerate(row):
                lo = c // 2 + self.offset[i]
                cell.append((lo, lo + (c % 2)))
            out.append(tuple(cell))
        return out

    def dump(self) -> str:
        """Plain-text cell list, one ``dim: [a,b]x[c,d]...`` per line."""
        lines = []
        for cell in self.cells():
            k = sum(b - a for a, b in cell)
            lines.append(f"{k}: " + "x".join(f"[{a},{b}]" for a, b in cell))
        return "\n".join(lines) + ("\n" if lines else "")


def _bits(v) -> np.ndarray:
    return np.asarray(getattr(v, "bits", v), dtype=bool)


def build_complex(v) -> CubicalComplex:
    """Cubical complex of a VoxelSet (or boolean array); empty input gives an empty complex."""
    bits = _bits(v)
    d = bits.ndim
    if not bits.any():
        return CubicalComplex(d, (0,) * d, (0,) * d, np.zeros(0, dtype=np.uint8), bits[tuple(slice(0, 0) for _ in range(d))])
    nz = np.nonzero(bits)
    lo = tuple(int(a.min()) for a in nz)
    hi = tuple(int(a.max()) + 1 for a in nz)
    box = bits[tuple(slice(a, b) for a, b in zip(lo, hi))]
    shp = tuple(2 * n + 3 for n in box.shape)
    grid = np.zeros(shp, dtype=np.uint8)
    grid[tuple(slice(2, -2, 2) for _ in shp)] = box
    for ax in range(d):
        shifted = grid.copy()
        lo_sl = [slice(None)] * d
        hi_sl = [slice(None)] * d
        lo_sl[ax] = slice(1, None)
        hi_sl[ax] = slice(None, -1)
        shifted[tuple(lo_sl)] |= grid[tuple(hi_sl)]
        shifted[tuple(hi_sl)] |= grid[tuple(lo_sl)]
        grid = shifted
    return CubicalComplex(d, tuple(box.shape), lo, np.ascontiguousarray(grid).reshape(-1), box)


def _rank_mod2(rows: list[int]) -> int:
    pivots: dict[int, int] = {}
    for v in rows:
        while v:
            p = v.bit_length() - 1
            if p in pivots:
                v ^= pivots[p]
            else:
                pivots[p] = v
                break
    return len(pivots)


def _rank_rational(rows: list[dict[int, int]]) -> int:
    pivots: dict[int, dict[int, Fraction]] = {}
    for r in rows:
        v = {k: Fraction(c) for k, c in r.items() if c}
        while v:
            p = max(v)
            if p in pivots:
                piv = pivots[p]
                f = v[p] / piv[p]
                for k, c in piv.items():
                    nv = v.get(k, 0) - f * c
                    if nv:
                        v[k] = nv
                    else:
                        v.pop(k, None)
            else:
                pivots[p] = v
                break
    return len(pivots)


def _vertex_seeds(c: CubicalComplex, vertices: np.ndarray) -> tuple[int, np.ndarray]:
    """Component count and one surviving vertex per component (lowest flat index)."""
    labels, count = _kernels.label(c.voxels, full=True)
    if count == 0 or vertices.size == 0:
        return count, np.zeros(0, dtype=np.int64)
    # padded vertex coordinate p is odd on every axis; adjacent voxels sit at p +- 1,
    # i.e. voxel index (p - 1) // 2 or (p - 1) // 2 - 1
    vcoords = np.stack(np.unravel_index(vertices, c.padded_shape), axis=1)
    base = (vcoords - 1) // 2
    padded_labels = np.pad(labels, 1)
    comp = np.zeros(len(vertices), dtype=np.int32)
    d = c.dim
    for corner in range(1 << d):
        shift = np.array([(corner >> a) & 1 for a in range(d)])
        idx = base - shift + 1
        lab = padded_labels[tuple(idx.T)]
        comp = np.where(comp == 0, lab, comp)
    seeds = []
    seen = set()
    for v, lab in zip(vertices.tolist(), comp.tolist()):
        if lab and lab not in seen:
            seen.add(lab)
            seeds.append(v)
    return count, np.asarray(seeds, dtype=np.int64)


def reduce_complex(c: CubicalComplex) -> tuple[int, np.ndarray]:
    """Component count and the flat indices of cells surviving reduction.

    Free faces are collapsed first; FIFO order peels the complex layer by
    layer down to a thin spine. One surviving vertex per component is then
    removed and coreductions finish the job.
    """
    if c.present.size == 0:
        return 0, np.zeros(0, dtype=np.int64)
    odd = c.oddmask()
    work = c.present.copy()
    _kernels.reduce_pairs(work, odd, c.strides, (), coreduction=False)
    rest = np.flatnonzero(work)
    vertices = rest[odd[rest] == 0]
    ncomp, seeds = _vertex_seeds(c, vertices)
    if len(seeds) != ncomp:
        raise RuntimeError("collapse removed every vertex of a component")
    _kernels.reduce_pairs(work, odd, c.strides, seeds, coreduction=True)
    return ncomp, np.flatnonzero(work)


def betti(c: CubicalComplex, field: Field = "mod2") -> BettiVector:
    """Betti numbers b_0..b_d of the complex over GF(2) or Q."""
    if field not in ("mod2", "rational"):
        raise ValueError(f"unknown field {field!r}")
    d = c.dim
    if c.present.size == 0 or not c.present.any():
        return BettiVector((0,) * (d + 1), empty=True)
    ncomp, rest = reduce_complex(c)
    odd = c.oddmask()[rest]
    dims = c.cell_dims(rest)
    pos = {int(cell): i for i, cell in enumerate(rest)}
    by_dim: list[list[int]] = [[] for _ in range(d + 1)]
    for i, k in enumerate(dims):
        by_dim[k].append(i)
    index_in_dim = {}
    for k in range(d + 1):
        for j, i in enumerate(by_dim[k]):
            index_in_dim[i] = j
    strides = c.strides
    ranks = [0] * (d + 2)
    for k in range(1, d + 1):
        rows_m2: list[int] = []
        rows_q: list[dict[int, int]] = []
        for i in by_dim[k]:
            cell = int(rest[i])
            m = int(odd[i])
            vec2 = 0
            vecq: dict[int, int] = {}
            sign = 1
            for ax in range(d):
                if not (m >> ax) & 1:
                    continue
                s = int(strides[ax])
                for face, coef in ((cell + s, sign), (cell - s, -sign)):
                    j = pos.get(face)
                    if j is not None:
                        col = index_in_dim[j]
                        vec2 ^= 1 << col
                        vecq[col] = vecq.get(col, 0) + coef
                sign = -sign
            rows_m2.append(vec2)
            rows_q.append(vecq)
        ranks[k] = _rank_mod2(rows_m2) if field == "mod2" else _rank_rational(rows_q)
    reduced = [len(by_dim[k]) - ranks[k] - ranks[k + 1] for k in range(d + 1)]
    values = [ncomp + reduced[0]] + reduced[1:]
    return BettiVector(tuple(int(x) for x in values))


def betti_of(v, field: Field = "mod2") -> BettiVector:
    return betti(build_complex(v), field)


@dataclass(frozen=True)
class AcyclicityResult:
    acyclic: bool
    status: Literal["acyclic", "cyclic", "empty"]
    betti: BettiVector

    def __bool__(self) -> bool:
        return self.acyclic


def is_acyclic(v, field: Field = "mod2") -> AcyclicityResult:
    """Nonempty with every reduced Betti number zero; empty sets get status ``"empty"``."""
    b = betti_of(v, field)
    if b.empty:
        return AcyclicityResult(False, "empty", b)
    ok = all(x == 0 for x in b.reduced)
    return AcyclicityResult(ok, "acyclic" if ok else "cyclic", b)
