"""Convexity operators on voxelized compacts in H^n.

Every operator works on finite samples: lines and functionals come from a
seeded low-discrepancy ``DirectionSample``, sets are bitsets on grids. The
sampled h-hull can only shrink as functionals are added; the sampled
h-combination can only grow as directions are added.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import norm, qmc

from . import _kernels
from .cubical import BettiVector, Field, betti_of
from .parallel import pmap
from .quat import Functional, HLine, HPoint, qinv_arr
from .voxel import (
    Frame,
    GridSpec,
    SceneSet,
    VoxelSet,
    image_grid,
    line_section,
    project_image,
    rasterize,
)


class UnboundedInWindow(ValueError):
    """A set touches its grid boundary, so bounded complement components are undecidable."""

    def __init__(self, msg: str = "unbounded-in-window"):
        super().__init__(msg)


class DegenerateConjugate(ValueError):
    pass


# --- direction samples ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DirectionSample:
    """Unit vectors of R^{4n} read as directions in H^n or functional coefficients."""

    n: int
    seed: int
    items: np.ndarray

    def __post_init__(self):
        items = np.atleast_2d(np.asarray(self.items, dtype=float))
        if items.shape[1] != 4 * self.n:
            raise ValueError("direction items must have 4n coordinates")
        norms = np.linalg.norm(items, axis=1)
        if np.any(norms == 0):
            raise ValueError("zero direction in sample")
        items = items / norms[:, None]
        items.setflags(write=False)
        object.__setattr__(self, "items", items)

    @classmethod
    def sobol(cls, n: int, count: int, seed: int, extra=()) -> "DirectionSample":
        """``extra`` vectors first, then scrambled Sobol points pushed to the sphere."""
        extra = [np.asarray(e, dtype=float).reshape(-1) for e in extra]
        need = max(0, count - len(extra))
        rows = list(extra)
        if need:
            eng = qmc.Sobol(d=4 * n, scramble=True, seed=seed)
            m = max(1, math.ceil(math.log2(need + 1)))
            u = eng.random_base2(m)
            z = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
            z = z[np.linalg.norm(z, axis=1) > 1e-9]
            rows.extend(z[:need])
        return cls(n, seed, np.asarray(rows[:count]) if rows else np.zeros((0, 4 * n)))

    def __len__(self) -> int:
        return len(self.items)

    def hpoints(self) -> list[HPoint]:
        return [HPoint.from_array(v.reshape(self.n, 4)) for v in self.items]

    def functionals(self) -> list[Functional]:
        return [Functional(p) for p in self.hpoints()]

    def head(self, k: int) -> "DirectionSample":
        return DirectionSample(self.n, self.seed, self.items[:k])


def centered_tgrid(half_width: float, cells: int = 21) -> GridSpec:
    """4D parameter grid on [-w, w]^4 with t = 0 at the centre of the middle cell."""
    if cells % 2 == 0:
        raise ValueError("centered parameter grids need an odd cell count")
    return GridSpec.cube(-half_width, half_width, cells, 4)


def _center_index(tgrid: GridSpec) -> tuple[int, ...]:
    idx, ok = tgrid.index_of(np.zeros((1, 4)))
    centre = tgrid.centers(np.ravel_multi_index(tuple(idx[0]), tgrid.cells)[None])[0]
    if not ok[0] or not np.allclose(centre, 0.0, atol=1e-9 * tgrid.diagonal):
        raise ValueError("parameter grid must place t = 0 at a cell centre")
    return tuple(int(v) for v in idx[0])


# --- h-combination ----------------------------------------------------------


def touches_boundary(bits: np.ndarray) -> bool:
    for ax in range(bits.ndim):
        if bits.take(0, axis=ax).any() or bits.take(-1, axis=ax).any():
            return True
    return False


def hcomb_bits(bits: np.ndarray) -> np.ndarray:
    bits = np.asarray(bits, dtype=bool)
    if not bits.any():
        return bits.copy()
    if touches_boundary(bits):
        raise UnboundedInWindow()
    return bits | ~_kernels.outside_reach(bits)


def hcomb(e: VoxelSet) -> VoxelSet:
    """The set together with every complement component not face-connected to the window edge."""
    return e.like(hcomb_bits(e.bits))


def boundary_cells(e: VoxelSet) -> VoxelSet:
    """Cells of the set with at least one face neighbour outside it (the window counts as outside)."""
    b = e.bits
    inner = b.copy()
    for ax in range(b.ndim):
        lo = [slice(None)] * b.ndim
        hi = [slice(None)] * b.ndim
        lo[ax] = slice(1, None)
        hi[ax] = slice(None, -1)
        shifted = np.zeros_like(b)
        shifted[tuple(hi)] = b[tuple(lo)]
        inner &= shifted
        shifted = np.zeros_like(b)
        shifted[tuple(lo)] = b[tuple(hi)]
        inner &= shifted
    return e.like(b & ~inner)


def _line_through(x: np.ndarray, d: np.ndarray, n: int) -> HLine:
    return HLine(HPoint.from_array(x.reshape(n, 4)), HPoint.from_array(d.reshape(n, 4)))


def in_section_comb(scene: SceneSet, x: np.ndarray, dirs: DirectionSample, tgrid: GridSpec, tau=None) -> int:
    """Index of the first direction whose section combination contains x, or -1."""
    centre = _center_index(tgrid)
    for k, d in enumerate(dirs.items):
        sec = line_section(scene, _line_through(x, d, dirs.n), tgrid, tau)
        if not sec.bits.any():
            continue
        if sec.bits[centre] or hcomb_bits(sec.bits)[centre]:
            return k
    return -1


def hcomb_n(
    scene: SceneSet,
    candidates: VoxelSet,
    dirs: DirectionSample,
    tgrid: GridSpec,
    tau: float | None = None,
    threads: int | None = None,
) -> VoxelSet:
    """Raster of the scene plus every candidate cell lying in the combination of some sampled line section.

    In H^1 the only line is H itself, so this is ``hcomb`` of the raster.
    Cells already in the raster are not re-tested.
    """
    raster = rasterize(scene, candidates.frame, candidates.grid, tau)
    if scene.ambient_n == 1 and candidates.grid.dim == 4:
        return raster.like(raster.bits | (candidates.bits & hcomb_bits(raster.bits)))
    todo = np.flatnonzero(candidates.bits & ~raster.bits)
    pts = candidates.frame.to_ambient(candidates.grid.centers(todo))
    hits = pmap(lambda x: in_section_comb(scene, x, dirs, tgrid, tau) >= 0, list(pts), threads)
    bits = raster.bits.copy().reshape(-1)
    bits[todo[np.asarray(hits, dtype=bool)]] = True
    return raster.like(bits.reshape(raster.grid.cells))


def hcomb_power(scene: SceneSet, candidates: VoxelSet, dirs, tgrid, m: int, tau=None, tol: float | None = None) -> VoxelSet:
    """m-fold iterated combination; each round uses the previous result as the scene."""
    from .voxel import VoxelScene

    cur = rasterize(scene, candidates.frame, candidates.grid, tau)
    cur_scene: SceneSet = scene
    for _ in range(m):
        nxt = hcomb_n(cur_scene, candidates, dirs, tgrid, tau)
        if nxt == cur:
            break
        cur = nxt
        cur_scene = VoxelScene(cur, tol)
    return cur


# --- h-hull -----------------------------------------------------------------


def frame_gain(f: Functional, frame: Frame) -> float:
    """Largest stretch of f restricted to the frame's local coordinates."""
    return float(np.linalg.svd(f.matrix() @ frame.axes.T, compute_uv=False)[0])


IMAGE_CELL_FACTOR = 0.7


def auto_image_grid(source: VoxelSet, f: Functional, max_cells: int = 48**4) -> GridSpec:
    """Image grid with cells ``IMAGE_CELL_FACTOR`` times the largest source cell as stretched by f."""
    h = IMAGE_CELL_FACTOR * float(np.max(source.grid.size)) * max(frame_gain(f, source.frame), 1e-12)
    return image_grid(source, f, h, margin=3, max_cells=max_cells)


@dataclass
class HullTrace:
    """Per-functional images and their combinations, in sample order."""

    images: list[VoxelSet] = field(default_factory=list)
    combs: list[VoxelSet] = field(default_factory=list)


def hhull(
    source,
    candidates: VoxelSet,
    funcs: DirectionSample | list[Functional],
    tgrid: GridSpec | None = None,
    trace: HullTrace | None = None,
) -> VoxelSet:
    """Candidates x with ``f(x)`` in the combination of the image ``f(source)`` for every sampled f.

    ``source`` is a VoxelSet or a scene (rasterized on the candidate grid).
    ``tgrid=None`` picks an image grid per functional.
    """
    if isinstance(source, SceneSet):
        source = rasterize(source, candidates.frame, candidates.grid)
    fl = funcs.functionals() if isinstance(funcs, DirectionSample) else list(funcs)
    keep = candidates.bits.reshape(-1).copy()
    if source.is_empty():
        return candidates.like(np.zeros(candidates.grid.cells, dtype=bool))
    for f in fl:
        g = tgrid if tgrid is not None else auto_image_grid(source, f)
        img = project_image(source, f, g)
        comb = hcomb(img)
        if trace is not None:
            trace.images.append(img)
            trace.combs.append(comb)
        live = np.flatnonzero(keep)
        for s in range(0, len(live), 1 << 18):
            sel = live[s : s + (1 << 18)]
            pts = candidates.frame.to_ambient(candidates.grid.centers(sel))
            keep[sel] = comb.lookup_local(f.apply(pts))
    return candidates.like(keep.reshape(candidates.grid.cells))


# --- conjugate sets ---------------------------------------------------------


def _min_pair_gap(h: np.ndarray, x: np.ndarray, n: int) -> np.ndarray:
    """min over rows x of |<h, x> - 1| for each row h (both flat, 4n wide)."""
    from .quat import qmul_arr

    out = np.full(len(h), np.inf)
    if n == 1:
        tree = cKDTree(x)
        r = np.linalg.norm(h, axis=1)
        nz = r > 0
        dist, _ = tree.query(qinv_arr(h[nz]))
        out[nz] = r[nz] * dist
        out[~nz] = 1.0
        return out
    hq = h.reshape(len(h), n, 4)
    xq = x.reshape(len(x), n, 4)
    step = max(1, (1 << 20) // max(1, len(x)))
    one = np.array([1.0, 0, 0, 0])
    for s in range(0, len(h), step):
        prod = qmul_arr(hq[s : s + step, None, :, :], xq[None, :, :, :]).sum(axis=2)
        out[s : s + step] = np.linalg.norm(prod - one, axis=-1).min(axis=1)
    return out


def conjugate(source, hframe: Frame, hgrid: GridSpec, eps: float | None = None) -> VoxelSet:
    """Cells h with ``|<h, x> - 1| > eps`` for every sample point x of the source.

    ``eps=None`` uses ``|h|`` times half the source cell diagonal, the most a
    sample centre can move ``<h, x>``.
    """
    if not isinstance(source, VoxelSet):
        raise TypeError("conjugate needs a voxelized source")
    pts = source.points()
    hs = hframe.to_ambient(hgrid.centers())
    if len(pts) == 0:
        return VoxelSet(hframe, hgrid, np.ones(hgrid.cells, dtype=bool))
    gap = _min_pair_gap(hs, pts, hframe.ambient_n)
    if eps is None:
        thr = np.linalg.norm(hs, axis=1) * 0.5 * source.grid.diagonal * source.frame.scale
    else:
        thr = np.full(len(hs), float(eps))
    return VoxelSet(hframe, hgrid, (gap > thr).reshape(hgrid.cells))


def _clear_of_inverse(query: np.ndarray, v: VoxelSet, margin: float) -> np.ndarray:
    """Rows q with q = 0 or dist(q^{-1}, filled centres of v) > margin (H^1 only).

    The nearest filled centre to a point outside the set is always a
    boundary cell, so only those enter the search tree.
    """
    out = np.ones(len(query), dtype=bool)
    nz = np.flatnonzero(np.linalg.norm(query, axis=1) > 0)
    if v.is_empty() or len(nz) == 0:
        return out
    inv = qinv_arr(query[nz])
    shell = boundary_cells(v).points()
    d, _ = cKDTree(shell).query(inv, distance_upper_bound=margin * (1 + 1e-9))
    out[nz] = np.isinf(d) & ~v.lookup_local(v.frame.to_local(inv)[0])
    return out


@dataclass(frozen=True)
class ConjugateHull:
    hull: VoxelSet
    dual: VoxelSet
    origin_component: VoxelSet
    unbounded: bool


def hull_via_conjugate_n1(e: VoxelSet, margin: float | None = None, dual_cells: int = 33) -> ConjugateHull:
    """Double conjugate through the origin component, for sets in H^1.

    Uses the scale-free form of the conjugate test in H^1:
    ``|h x - 1| = |h| |x - h^{-1}|``, so h is conjugate iff ``h^{-1}`` keeps
    a margin from the set. The dual window is sized from the inner and outer
    radii of the set; an origin component touching the dual window is taken
    to contain everything beyond it.
    """
    if e.frame.ambient_n != 1 or e.grid.dim != 4:
        raise ValueError("hull_via_conjugate_n1 works on 4D sets in H")
    pts = e.points()
    if len(pts) == 0:
        empty = e.empty_like()
        return ConjugateHull(empty, empty, empty, False)
    half_diag = 0.5 * e.grid.diagonal
    m_primal = half_diag if margin is None else margin
    r = np.linalg.norm(pts, axis=1)
    if e.lookup_local(e.frame.to_local(np.zeros((1, 4)))[0])[0]:
        # origin inside: E* lies within 1/inradius
        outside = e.grid.centers(np.flatnonzero(~e.bits))
        out_r = np.linalg.norm(e.frame.to_ambient(outside), axis=1)
        rho = max(float(out_r.min()) - half_diag if len(out_r) else float(r.max()), half_diag)
    else:
        rho = max(float(r.min()) - half_diag, half_diag)
    R = 1.25 / rho
    dframe = Frame.quaternion_line()
    dgrid = GridSpec.cube(-R, R, dual_cells, 4)
    hs = dgrid.centers()
    dual = VoxelSet(dframe, dgrid, _clear_of_inverse(hs, e, m_primal).reshape(dgrid.cells))
    labels, _ = _kernels.label(dual.bits, full=False)
    c0 = _center_index(dgrid)
    lab = labels[c0]
    if lab == 0:
        raise DegenerateConjugate("origin not in the conjugate set")
    comp = dual.like(labels == lab)
    unbounded = touches_boundary(comp.bits)
    m_dual = 0.5 * dgrid.diagonal if margin is None else margin
    xs = e.frame.to_ambient(e.grid.centers())
    keep = _clear_of_inverse(xs, comp, m_dual)
    xr = np.linalg.norm(xs, axis=1)
    zero = xr == 0
    keep[zero] = not unbounded
    if unbounded:
        inv = qinv_arr(xs[~zero])
        beyond = np.any(np.abs(inv) > R, axis=1)
        idx = np.flatnonzero(~zero)[beyond]
        keep[idx] = False
    hull = e.like(keep.reshape(e.grid.cells))
    return ConjugateHull(hull, dual, comp, unbounded)


# --- line-section checks ----------------------------------------------------


@dataclass(frozen=True)
class SectionRecord:
    index: int
    base: tuple[float, ...]
    direction: tuple[float, ...]
    betti: BettiVector
    clipped: bool

    @property
    def empty(self) -> bool:
        return self.betti.empty


@dataclass(frozen=True)
class QuasiconvexReport:
    records: tuple[SectionRecord, ...]
    criterion: str = "b3"

    @property
    def lines_tested(self) -> int:
        return len(self.records)

    @property
    def empty_count(self) -> int:
        return sum(r.empty for r in self.records)

    def failures(self) -> list[int]:
        out = []
        for r in self.records:
            if r.empty:
                continue
            if self.criterion == "b3":
                bad = r.betti[3] != 0
            else:
                bad = any(v != 0 for v in r.betti.reduced)
            if bad:
                out.append(r.index)
        return out

    @property
    def verdict(self) -> bool:
        return not self.failures()

    def betti_rows(self) -> list[list[int]]:
        return [r.betti.as_list() for r in self.records]


def sample_lines(raster: VoxelSet, dirs: DirectionSample, seed: int) -> list[HLine]:
    """One line per direction, through a seeded choice of filled cell centres."""
    pts = raster.points()
    if len(pts) == 0:
        raise ValueError("cannot sample base points from an empty raster")
    rng = np.random.default_rng(seed)
    pick = rng.integers(0, len(pts), size=len(dirs))
    return [_line_through(pts[i], d, dirs.n) for i, d in zip(pick, dirs.items)]


def _section_records(scene, lines, tgrid, field_: Field, tau, threads) -> tuple[SectionRecord, ...]:
    def one(item):
        k, line = item
        sec = line_section(scene, line, tgrid, tau)
        return SectionRecord(
            k,
            tuple(float(v) for v in line.base.flat()),
            tuple(float(v) for v in line.dir.flat()),
            betti_of(sec, field_),
            touches_boundary(sec.bits),
        )

    return tuple(pmap(one, list(enumerate(lines)), threads))


def quasiconvex_check(
    scene: SceneSet,
    lines: list[HLine],
    tgrid: GridSpec,
    field: Field = "mod2",
    tau: float | None = None,
    threads: int | None = None,
) -> QuasiconvexReport:
    """Betti numbers of every line section; passes iff no nonempty section has b3."""
    return QuasiconvexReport(_section_records(scene, lines, tgrid, field, tau, threads), "b3")


def strong_convexity_evidence(
    scene: SceneSet,
    lines: list[HLine],
    tgrid: GridSpec,
    field: Field = "mod2",
    tau: float | None = None,
    threads: int | None = None,
) -> QuasiconvexReport:
    """Like ``quasiconvex_check`` but every reduced Betti number of a nonempty section must vanish."""
    return QuasiconvexReport(_section_records(scene, lines, tgrid, field, tau, threads), "acyclic")


# --- h-extremal points ------------------------------------------------------


def _ball_offsets(r: float, step: float) -> np.ndarray:
    k = int(math.floor(r / step))
    ax = np.arange(-k, k + 1) * step
    g = np.stack(np.meshgrid(ax, ax, ax, ax, indexing="ij"), axis=-1).reshape(-1, 4)
    return g[np.linalg.norm(g, axis=1) < r]


def hextremal_points(
    scene: SceneSet,
    boundary: VoxelSet,
    dirs: DirectionSample,
    r: float,
    tau: float | None = None,
) -> VoxelSet:
    """Boundary cells admitting no sampled h-interval of radius r centred on them inside the scene.

    The open parameter ball ``|t| < r`` is sampled on a lattice with the
    boundary grid's smallest cell size.
    """
    step = float(np.min(boundary.grid.size)) * boundary.frame.scale
    if r < 2 * boundary.grid.diagonal * boundary.frame.scale:
        raise ValueError("radius below two cell diagonals")
    if tau is None:
        from .voxel import default_tau

        tau = default_tau(boundary.grid, boundary.frame)
    offs = _ball_offsets(r, step)
    idx = np.flatnonzero(boundary.bits)
    xs = boundary.frame.to_ambient(boundary.grid.centers(idx))
    n = dirs.n
    extremal = np.ones(len(idx), dtype=bool)
    use = dirs.items[:1] if n == 1 else dirs.items
    for d in use:
        line_axes = _line_through(np.zeros(4 * n), d, n).real_axes()
        disp = offs @ line_axes
        live = np.flatnonzero(extremal)
        for j in live:
            if scene.evaluate(xs[j][None, :] + disp, tau).all():
                extremal[j] = False
    bits = np.zeros(boundary.grid.cells, dtype=bool).reshape(-1)
    bits[idx[extremal]] = True
    return boundary.like(bits.reshape(boundary.grid.cells))


def hausdorff_ok(a: VoxelSet, b: VoxelSet, cells: float) -> bool:
    from .voxel import hausdorff_cells

    return hausdorff_cells(a, b) <= cells + 1e-9


__all__ = [
    "ConjugateHull",
    "DegenerateConjugate",
    "DirectionSample",
    "HullTrace",
    "QuasiconvexReport",
    "SectionRecord",
    "UnboundedInWindow",
    "boundary_cells",
    "centered_tgrid",
    "conjugate",
    "hcomb",
    "hcomb_n",
    "hcomb_power",
    "hextremal_points",
    "hhull",
    "hull_via_conjugate_n1",
    "quasiconvex_check",
    "sample_lines",
    "strong_convexity_evidence",
]
