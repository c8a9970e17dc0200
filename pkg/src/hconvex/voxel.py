"""Analytic scenes in H^n and their rasterization onto low-dimensional grids.

Real coordinates of a point of H^n are ordered ``(y1, z1, u1, t1, y2, ...)``.
A ``Frame`` embeds R^d (d <= 5) affinely into R^{4n}; a ``GridSpec`` cuts a
box of R^d into cells; a ``VoxelSet`` is one bit per cell, set iff the cell
centre satisfies the scene predicate.

Lower-dimensional pieces (curves, spheres) are given as thickened
equalities ``|g(x)| / |grad g(x)| <= tau``; with no explicit ``tau`` the
grid being rasterized supplies ``1.5 * cell diagonal``.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy import ndimage

from .quat import Functional, HLine, left_matrix, line_eval_arr

MAX_CELLS = 1 << 26
CHUNK = 1 << 17
TAU_FACTOR = 1.5

Op = Literal["le", "lt", "ge", "gt", "eq"]
Side = Literal["both", "inner", "outer"]


class GridError(ValueError):
    pass


class ImageBoundsError(ValueError):
    """Image points fall outside the target grid; ``required`` holds the needed (lo, hi)."""

    def __init__(self, msg: str, required: tuple[np.ndarray, np.ndarray]):
        super().__init__(msg)
        self.required = required


def coord_index(name: str) -> int:
    m = re.fullmatch(r"([yzut])(\d+)", name)
    if not m:
        raise ValueError(f"bad coordinate name {name!r}")
    return 4 * (int(m.group(2)) - 1) + "yzut".index(m.group(1))


def coord_name(i: int) -> str:
    return "yzut"[i % 4] + str(i // 4 + 1)


@dataclass(frozen=True)
class Frame:
    """Affine map ``local -> origin + local @ axes`` from R^d into R^{4n}."""

    ambient_n: int
    origin: np.ndarray
    axes: np.ndarray

    def __post_init__(self):
        origin = np.asarray(self.origin, dtype=float).reshape(-1)
        axes = np.atleast_2d(np.asarray(self.axes, dtype=float))
        if origin.shape != (4 * self.ambient_n,) or axes.shape[1] != 4 * self.ambient_n:
            raise ValueError("frame vectors must live in R^{4n}")
        if not 1 <= axes.shape[0] <= 5:
            raise ValueError("frame dimension must be between 1 and 5")
        gram = axes @ axes.T
        scale = gram[0, 0]
        if scale <= 0 or not np.allclose(gram, scale * np.eye(len(axes)), atol=1e-9 * max(1.0, scale)):
            raise ValueError("frame axes must be pairwise orthogonal with equal lengths")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "axes", axes)

    @property
    def dim(self) -> int:
        return self.axes.shape[0]

    @property
    def scale(self) -> float:
        return float(np.linalg.norm(self.axes[0]))

    @classmethod
    def coordinate(cls, ambient_n: int, names: Sequence[str], origin=None) -> "Frame":
        axes = np.zeros((len(names), 4 * ambient_n))
        for r, nm in enumerate(names):
            axes[r, coord_index(nm)] = 1.0
        if origin is None:
            origin = np.zeros(4 * ambient_n)
        return cls(ambient_n, np.asarray(origin, dtype=float), axes)

    @classmethod
    def quaternion_line(cls) -> "Frame":
        """H itself, coordinates (y, z, u, t)."""
        return cls(1, np.zeros(4), np.eye(4))

    @classmethod
    def for_line(cls, line: HLine) -> "Frame":
        return cls(line.n, line.base.flat(), line.real_axes())

    def to_ambient(self, local: np.ndarray) -> np.ndarray:
        return self.origin[None, :] + np.asarray(local, dtype=float) @ self.axes

    def to_local(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Local coordinates of the orthogonal projection, and the residual distance."""
        rel = np.asarray(pts, dtype=float) - self.origin[None, :]
        s2 = self.scale**2
        local = rel @ self.axes.T / s2
        resid = np.linalg.norm(rel - local @ self.axes, axis=1)
        return local, resid

    def same_as(self, other: "Frame") -> bool:
        return (
            self.ambient_n == other.ambient_n
            and self.axes.shape == other.axes.shape
            and np.allclose(self.origin, other.origin)
            and np.allclose(self.axes, other.axes)
        )


@dataclass(frozen=True)
class GridSpec:
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    cells: tuple[int, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        cells = tuple(int(v) for v in self.cells)
        if not (len(lo) == len(hi) == len(cells)):
            raise GridError("lo, hi and cells must have equal length")
        if any(a >= b for a, b in zip(lo, hi)):
            raise GridError("grid needs lo < hi on every axis")
        if any(c < 3 for c in cells):
            raise GridError("grid needs at least 3 cells per axis")
        if math.prod(cells) > MAX_CELLS:
            raise GridError(f"grid of {math.prod(cells)} cells exceeds the 2^26 memory guard")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "cells", cells)

    @classmethod
    def cube(cls, lo: float, hi: float, cells: int, dim: int) -> "GridSpec":
        return cls((lo,) * dim, (hi,) * dim, (cells,) * dim)

    @classmethod
    def around(cls, lo, hi, cell_size: float, margin: int = 3, max_cells: int | None = None) -> "GridSpec":
        """Grid covering [lo, hi] with roughly cubic cells and ``margin`` spare cells per side."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        h = float(cell_size)
        if max_cells is not None:
            while True:
                n = np.ceil((hi - lo) / h).astype(int) + 2 * margin + 1
                if np.prod(n) <= max_cells:
                    break
                h *= 1.1
        n = np.ceil((hi - lo) / h).astype(int) + 2 * margin + 1
        n = np.maximum(n, 3)
        mid = (lo + hi) / 2
        half = n * h / 2
        return cls(tuple(mid - half), tuple(mid + half), tuple(int(v) for v in n))

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.cells

    @property
    def size(self) -> np.ndarray:
        return (np.asarray(self.hi) - np.asarray(self.lo)) / np.asarray(self.cells)

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(self.size))

    def axis_centers(self, i: int) -> np.ndarray:
        return self.lo[i] + (np.arange(self.cells[i]) + 0.5) * self.size[i]

    def centers(self, flat_index: np.ndarray | None = None) -> np.ndarray:
        """Cell centres as rows (C order), optionally for selected flat indices."""
        if flat_index is None:
            grids = np.meshgrid(*[self.axis_centers(i) for i in range(self.dim)], indexing="ij")
            return np.stack([g.reshape(-1) for g in grids], axis=1)
        idx = np.stack(np.unravel_index(np.asarray(flat_index), self.cells), axis=1)
        return np.asarray(self.lo)[None, :] + (idx + 0.5) * self.size[None, :]

    def index_of(self, local: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Containing-cell indices (m, d) and an in-range mask."""
        local = np.atleast_2d(np.asarray(local, dtype=float))
        finite = np.all(np.isfinite(local), axis=1)
        local = np.where(finite[:, None], local, np.asarray(self.lo)[None, :] - 1.0)
        idx = np.floor((local - np.asarray(self.lo)[None, :]) / self.size[None, :]).astype(np.int64)
        ok = finite & np.all((idx >= 0) & (idx < np.asarray(self.cells)[None, :]), axis=1)
        return idx, ok

    def to_json(self) -> dict:
        return {"lo": list(self.lo), "hi": list(self.hi), "cells": list(self.cells)}


@dataclass(frozen=True, eq=False)
class VoxelSet:
    frame: Frame
    grid: GridSpec
    bits: np.ndarray
    line: HLine | None = field(default=None, compare=False)

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        if bits.shape != self.grid.cells:
            raise ValueError(f"bits shape {bits.shape} != grid {self.grid.cells}")
        if self.frame.dim != self.grid.dim:
            raise ValueError("frame dimension does not match grid")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    def like(self, bits: np.ndarray) -> "VoxelSet":
        return VoxelSet(self.frame, self.grid, bits, self.line)

    def empty_like(self) -> "VoxelSet":
        return self.like(np.zeros(self.grid.cells, dtype=bool))

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.bits))

    def is_empty(self) -> bool:
        return not self.bits.any()

    def local_points(self) -> np.ndarray:
        return self.grid.centers(np.flatnonzero(self.bits))

    def points(self) -> np.ndarray:
        """Ambient coordinates (m, 4n) of the filled cell centres."""
        return self.frame.to_ambient(self.local_points())

    def lookup_local(self, local: np.ndarray) -> np.ndarray:
        idx, ok = self.grid.index_of(local)
        out = np.zeros(len(idx), dtype=bool)
        if ok.any():
            out[ok] = self.bits[tuple(idx[ok].T)]
        return out

    def compatible(self, other: "VoxelSet") -> bool:
        return self.grid == other.grid and self.frame.same_as(other.frame)

    def __eq__(self, other) -> bool:
        return isinstance(other, VoxelSet) and self.compatible(other) and bool(np.array_equal(self.bits, other.bits))

    def __hash__(self):
        return id(self)

    def __le__(self, other: "VoxelSet") -> bool:
        return bool(np.all(~self.bits | other.bits))


# --- scene predicates -------------------------------------------------------


class SceneSet:
    """Membership predicate on R^{4n}; ``evaluate`` takes rows of real coordinates."""

    ambient_n: int

    def evaluate(self, pts: np.ndarray, tau: float) -> np.ndarray:
        raise NotImplementedError

    def __and__(self, other: "SceneSet") -> "SceneSet":
        return And((self, other))

    def __or__(self, other: "SceneSet") -> "SceneSet":
        return Or((self, other))

    def __invert__(self) -> "SceneSet":
        return Not(self)


def _compare(g: np.ndarray, op: str, tau: float, side: str) -> np.ndarray:
    if op == "le":
        return g <= 0
    if op == "lt":
        return g < 0
    if op == "ge":
        return g >= 0
    if op == "gt":
        return g > 0
    if op == "eq":
        if side == "inner":
            return (g <= 0) & (g >= -tau)
        if side == "outer":
            return (g >= 0) & (g <= tau)
        return np.abs(g) <= tau
    raise ValueError(f"unknown comparison {op!r}")


@dataclass(frozen=True, eq=False)
class Const(SceneSet):
    value: bool
    ambient_n: int = 1

    def evaluate(self, pts, tau):
        return np.full(len(pts), bool(self.value))


@dataclass(frozen=True, eq=False)
class Linear(SceneSet):
    """``a . x + c  <op>  0``; for ``eq`` the value is divided by |a| (signed distance)."""

    coeffs: np.ndarray
    const: float = 0.0
    op: Op = "le"
    tau: float | None = None
    side: Side = "both"

    @property
    def ambient_n(self) -> int:
        return len(self.coeffs) // 4

    def evaluate(self, pts, tau):
        a = np.asarray(self.coeffs, dtype=float)
        g = pts @ a + self.const
        if self.op == "eq":
            g = g / np.linalg.norm(a)
        return _compare(g, self.op, self.tau if self.tau is not None else tau, self.side)


@dataclass(frozen=True, eq=False)
class Quadratic(SceneSet):
    """``x^T Q x + b . x + c  <op>  0``; ``eq`` normalizes by the gradient norm."""

    quad: np.ndarray
    lin: np.ndarray
    const: float = 0.0
    op: Op = "le"
    tau: float | None = None
    side: Side = "both"

    @property
    def ambient_n(self) -> int:
        return len(self.lin) // 4

    def evaluate(self, pts, tau):
        Q = np.asarray(self.quad, dtype=float)
        b = np.asarray(self.lin, dtype=float)
        qx = pts @ Q
        g = np.einsum("ij,ij->i", qx, pts) + pts @ b + self.const
        if self.op == "eq":
            grad = qx + pts @ Q.T + b[None, :]
            gn = np.linalg.norm(grad, axis=1)
            with np.errstate(divide="ignore", invalid="ignore"):
                g = np.where(gn > 0, g / gn, np.where(g == 0, 0.0, np.inf))
        return _compare(g, self.op, self.tau if self.tau is not None else tau, self.side)


def ball(center: Sequence[float], radius: float, op: Op = "le", tau=None, side: Side = "both") -> Quadratic:
    """``|x - center|^2 - radius^2 <op> 0``."""
    c = np.asarray(center, dtype=float)
    m = len(c)
    return Quadratic(np.eye(m), -2 * c, float(c @ c - radius**2), op, tau, side)


@dataclass(frozen=True, eq=False)
class And(SceneSet):
    args: tuple[SceneSet, ...]

    @property
    def ambient_n(self) -> int:
        return self.args[0].ambient_n

    def evaluate(self, pts, tau):
        out = np.ones(len(pts), dtype=bool)
        for a in self.args:
            live = np.flatnonzero(out)
            if live.size == 0:
                break
            out[live] = a.evaluate(pts[live], tau)
        return out


@dataclass(frozen=True, eq=False)
class Or(SceneSet):
    args: tuple[SceneSet, ...]

    @property
    def ambient_n(self) -> int:
        return self.args[0].ambient_n

    def evaluate(self, pts, tau):
        out = np.zeros(len(pts), dtype=bool)
        for a in self.args:
            rest = np.flatnonzero(~out)
            if rest.size == 0:
                break
            out[rest] = a.evaluate(pts[rest], tau)
        return out


@dataclass(frozen=True, eq=False)
class Not(SceneSet):
    arg: SceneSet

    @property
    def ambient_n(self) -> int:
        return self.arg.ambient_n

    def evaluate(self, pts, tau):
        return ~self.arg.evaluate(pts, tau)


@dataclass(frozen=True, eq=False)
class Product(SceneSet):
    """``E_1 x ... x E_n`` from 4D voxel factors; nearest-cell lookups, outside -> False."""

    factors: tuple[VoxelSet, ...]

    def __post_init__(self):
        for f in self.factors:
            if f.grid.dim != 4 or f.frame.ambient_n != 1:
                raise ValueError("product factors must be 4D voxel sets in H")

    @property
    def ambient_n(self) -> int:
        return len(self.factors)

    def evaluate(self, pts, tau):
        out = np.ones(len(pts), dtype=bool)
        for k, f in enumerate(self.factors):
            local, _ = f.frame.to_local(pts[:, 4 * k : 4 * k + 4])
            out &= f.lookup_local(local)
        return out


@dataclass(frozen=True, eq=False)
class Polyhedron(SceneSet):
    """``{x : f_j(x) in E_j for all j}`` with 4D voxel sets E_j in H."""

    faces: tuple[tuple[Functional, VoxelSet], ...]

    def __post_init__(self):
        fs = [f for f, _ in self.faces]
        for a, b in itertools.combinations(fs, 2):
            if not independent(a, b):
                raise ValueError("polyhedron functionals must be pairwise linearly independent")
        for _, e in self.faces:
            if e.grid.dim != 4 or e.frame.ambient_n != 1:
                raise ValueError("polyhedron face sets must be 4D voxel sets in H")

    @property
    def ambient_n(self) -> int:
        return self.faces[0][0].n

    def evaluate(self, pts, tau):
        out = np.ones(len(pts), dtype=bool)
        for f, e in self.faces:
            live = np.flatnonzero(out)
            if live.size == 0:
                break
            img = f.apply(pts[live])
            local, _ = e.frame.to_local(img)
            out[live] = e.lookup_local(local)
        return out


def independent(f: Functional, g: Functional, tol: float = 1e-9) -> bool:
    """False iff ``g.h = f.h * s`` for some quaternion s (right proportional)."""
    cols_f = np.vstack([left_matrix(q) for q in f.h.as_array()])
    cols_g = np.vstack([left_matrix(q) for q in g.h.as_array()])
    return np.linalg.matrix_rank(np.hstack([cols_f, cols_g]), tol=tol) > 4


@dataclass(frozen=True, eq=False)
class VoxelScene(SceneSet):
    """A voxel set viewed as a subset of H^n.

    A point belongs iff its orthogonal projection lands in a filled cell and
    its distance from the frame is at most ``tol`` (default: the rasterizing
    grid's ``tau``).
    """

    voxels: VoxelSet
    tol: float | None = None

    @property
    def ambient_n(self) -> int:
        return self.voxels.frame.ambient_n

    def evaluate(self, pts, tau):
        local, resid = self.voxels.frame.to_local(pts)
        tol = self.tol if self.tol is not None else tau
        return (resid <= tol) & self.voxels.lookup_local(local)


# --- operations -------------------------------------------------------------


def default_tau(grid: GridSpec, frame: Frame | None = None) -> float:
    scale = frame.scale if frame is not None else 1.0
    return TAU_FACTOR * grid.diagonal * scale


def evaluate_chunked(scene: SceneSet, pts_fn, n: int, tau: float) -> np.ndarray:
    out = np.zeros(n, dtype=bool)
    for s in range(0, n, CHUNK):
        e = min(n, s + CHUNK)
        out[s:e] = scene.evaluate(pts_fn(s, e), tau)
    return out


def rasterize(scene: SceneSet, frame: Frame, grid: GridSpec, tau: float | None = None) -> VoxelSet:
    """Set each cell whose centre (mapped through the frame) satisfies the scene."""
    if frame.dim != grid.dim:
        raise GridError("frame dimension does not match grid")
    if scene.ambient_n != frame.ambient_n and not isinstance(scene, Const):
        raise ValueError(f"scene lives in H^{scene.ambient_n}, frame in H^{frame.ambient_n}")
    tau = default_tau(grid, frame) if tau is None else tau
    n = math.prod(grid.cells)
    bits = evaluate_chunked(scene, lambda s, e: frame.to_ambient(grid.centers(np.arange(s, e))), n, tau)
    return VoxelSet(frame, grid, bits.reshape(grid.cells))


def boolean_ops(a: VoxelSet, b: VoxelSet, op: Literal["and", "or", "diff"]) -> VoxelSet:
    if not a.compatible(b):
        raise ValueError("voxel sets live on different frames or grids")
    if op == "and":
        bits = a.bits & b.bits
    elif op == "or":
        bits = a.bits | b.bits
    elif op == "diff":
        bits = a.bits & ~b.bits
    else:
        raise ValueError(f"unknown boolean op {op!r}")
    return a.like(bits)


def product(*factors: VoxelSet) -> Product:
    return Product(tuple(factors))


def line_section(scene: SceneSet, line: HLine, tgrid: GridSpec, tau: float | None = None) -> VoxelSet:
    """Cells t of the parameter grid with ``line.base + t * line.dir`` in the scene."""
    if tgrid.dim != 4:
        raise GridError("line sections need a 4D parameter grid")
    frame = Frame.for_line(line)
    tau = default_tau(tgrid, frame) if tau is None else tau
    n = math.prod(tgrid.cells)
    bits = evaluate_chunked(scene, lambda s, e: line_eval_arr(line, tgrid.centers(np.arange(s, e))), n, tau)
    return VoxelSet(frame, tgrid, bits.reshape(tgrid.cells), line)


_SPLAT = np.array(list(itertools.product((-1, 0, 1), repeat=4)), dtype=np.int64)


def source_points(source) -> np.ndarray:
    if isinstance(source, VoxelSet):
        return source.points()
    return np.atleast_2d(np.asarray(source, dtype=float))


def image_bounds(source, f: Functional) -> tuple[np.ndarray, np.ndarray]:
    img = f.apply(source_points(source))
    return img.min(axis=0), img.max(axis=0)


def image_grid(source, f: Functional, cell_size: float, margin: int = 3, max_cells: int | None = None) -> GridSpec:
    """A 4D grid holding the image of ``source`` under ``f`` with spare cells for splats and fills."""
    lo, hi = image_bounds(source, f)
    return GridSpec.around(lo, hi, cell_size, margin=margin, max_cells=max_cells)


def project_image(source, f: Functional, tgrid: GridSpec) -> VoxelSet:
    """Rasterized image ``{f(x)}`` in H, each point splatted to its 3^4 neighbourhood."""
    if tgrid.dim != 4:
        raise GridError("images live in a 4D grid")
    pts = source_points(source)
    if pts.size == 0:
        raise ValueError("image of an empty sample")
    img = f.apply(pts)
    idx, ok = tgrid.index_of(img)
    lo = np.asarray(tgrid.lo) + tgrid.size
    hi = np.asarray(tgrid.hi) - tgrid.size
    if not ok.all() or np.any(img < lo) or np.any(img > hi):
        raise ImageBoundsError(
            "image exceeds grid bounds; need lo<=%s hi>=%s" % (np.round(img.min(0) - tgrid.size, 6).tolist(), np.round(img.max(0) + tgrid.size, 6).tolist()),
            (img.min(axis=0) - tgrid.size, img.max(axis=0) + tgrid.size),
        )
    bits = np.zeros(tgrid.cells, dtype=bool)
    idx = np.unique(idx, axis=0)
    for off in _SPLAT:
        j = idx + off
        bits[tuple(j.T)] = True
    return VoxelSet(Frame.quaternion_line(), tgrid, bits)


def hausdorff_cells(a: VoxelSet, b: VoxelSet) -> float:
    """Symmetric Hausdorff distance between filled cell centres, in cell-index units."""
    if a.grid.cells != b.grid.cells:
        raise ValueError("Hausdorff distance needs identical grids")
    ea, eb = a.is_empty(), b.is_empty()
    if ea and eb:
        return 0.0
    if ea or eb:
        return math.inf
    da = ndimage.distance_transform_edt(~b.bits)
    db = ndimage.distance_transform_edt(~a.bits)
    return float(max(da[a.bits].max(), db[b.bits].max()))
