import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.extra.numpy import arrays
from scipy import ndimage

from hconvex.cubical import betti_of
from hconvex.hconv import (
    DirectionSample,
    HullTrace,
    UnboundedInWindow,
    boundary_cells,
    centered_tgrid,
    conjugate,
    hcomb,
    hcomb_bits,
    hcomb_n,
    hcomb_power,
    hextremal_points,
    hhull,
    hull_via_conjugate_n1,
    quasiconvex_check,
    sample_lines,
    strong_convexity_evidence,
)
from hconvex.quat import HLine, HPoint
from hconvex.voxel import And, Const, Frame, GridSpec, Linear, Quadratic, VoxelSet, ball, hausdorff_cells, rasterize

H = Frame.quaternion_line()


def hgrid(half=1.5, cells=21):
    return GridSpec.cube(-half, half, cells, 4)


def comb_oracle(bits):
    """Fill complement components (face connectivity) that avoid the window edge."""
    lab, n = ndimage.label(~bits)
    edge = np.zeros_like(bits)
    for ax in range(bits.ndim):
        sl = [slice(None)] * bits.ndim
        sl[ax] = 0
        edge[tuple(sl)] = True
        sl[ax] = -1
        edge[tuple(sl)] = True
    outer = np.unique(lab[edge & ~bits])
    return bits | ((lab > 0) & ~np.isin(lab, outer))


def shell_bits(d=4):
    b = np.zeros((5,) * d, dtype=bool)
    b[(slice(1, 4),) * d] = True
    b[(2,) * d] = False
    return b


def h1_shell(g, r=1.0, tau=0.15):
    return rasterize(ball([0] * 4, r, "eq", tau, "inner"), H, g)


# combination in H


def test_hcomb_fills_cavity():
    filled = hcomb_bits(shell_bits())
    assert filled[(2,) * 4] and filled.sum() == 81


def test_hcomb_empty_and_window():
    assert not hcomb_bits(np.zeros((4,) * 4, dtype=bool)).any()
    with pytest.raises(UnboundedInWindow, match="unbounded-in-window"):
        hcomb_bits(np.ones((4,) * 4, dtype=bool))


def test_hcomb_of_shell_is_ball():
    g = hgrid(1.5, 21)
    solid = rasterize(ball([0] * 4, 1.0), H, g)
    assert hcomb(h1_shell(g)) == solid


def test_hcomb_of_ball_is_ball():
    g = hgrid(1.5, 15)
    B = rasterize(ball([0] * 4, 1.0), H, g)
    assert hcomb(B) == B


@settings(max_examples=80, deadline=None)
@given(arrays(bool, (5, 5, 4, 4)))
def test_hcomb_matches_oracle_and_is_closure(inner):
    bits = np.pad(inner, 1)
    got = hcomb_bits(bits)
    assert np.array_equal(got, comb_oracle(bits))
    assert np.all(got >= bits)
    assert np.array_equal(hcomb_bits(got), got)
    has_bounded_hole = not np.array_equal(got, bits)
    lab, n = ndimage.label(~bits)
    assert has_bounded_hole == (n > 1 or (n == 1 and not (~bits)[0, 0, 0, 0]))


def test_hcomb_random_idempotent(rng):
    for _ in range(100):
        bits = np.pad(rng.random((6, 6, 6, 6)) < 0.5, 1)
        once = hcomb_bits(bits)
        assert np.array_equal(hcomb_bits(once), once)


def test_boundary_cells_of_block():
    g = hgrid(1, 7)
    b = np.zeros(g.cells, dtype=bool)
    b[1:6, 1:6, 1:6, 1:6] = True
    bd = boundary_cells(VoxelSet(H, g, b))
    assert bd.count == 5**4 - 3**4


# combination in H^2


def test_hcomb_n_in_h1_matches_hcomb():
    g = hgrid(1.5, 15)
    scene = ball([0] * 4, 1.0, "eq", 0.2, "inner")
    cand = VoxelSet(H, g, np.ones(g.cells, dtype=bool))
    out = hcomb_n(scene, cand, DirectionSample.sobol(1, 1, 0), centered_tgrid(1.5, 15))
    assert out == hcomb(rasterize(scene, H, g))


def sphere_in_first_factor():
    """|x1| = 1 and x2 = 0 in H^2."""
    Q = np.zeros((8, 8))
    Q[:4, :4] = np.eye(4)
    flat = [Linear(np.eye(8)[4 + k], 0.0, "eq", 0.05) for k in range(4)]
    return And((*flat, Quadratic(Q, np.zeros(8), -1.0, "eq", 0.2, "inner")))


def test_hcomb_n_fills_sphere_in_h2():
    frame = Frame.coordinate(2, ["y1", "z1", "y2", "z2"])
    g = hgrid(1.5, 9)
    cand = np.zeros(g.cells, dtype=bool)
    cand[4, 4, 4, 4] = True  # origin
    cand[4, 4, 6, 4] = True  # off the H x {0} slice
    dirs = DirectionSample.sobol(2, 4, 0, extra=[[1, 0, 0, 0, 0, 0, 0, 0]])
    out = hcomb_n(sphere_in_first_factor(), VoxelSet(frame, g, cand), dirs, centered_tgrid(1.5, 15))
    assert out.bits[4, 4, 4, 4]
    assert not out.bits[4, 4, 6, 4]
    power = hcomb_power(sphere_in_first_factor(), VoxelSet(frame, g, cand), dirs, centered_tgrid(1.5, 15), 1)
    assert power == out


def test_hcomb_n_keeps_convex_ball():
    frame = Frame.coordinate(2, ["y1", "z1", "y2", "z2"])
    g = hgrid(1.5, 9)
    scene = ball([0] * 8, 1.0)
    raster = rasterize(scene, frame, g)
    cand = np.zeros(g.cells, dtype=bool)
    ring = np.flatnonzero(boundary_cells(VoxelSet(frame, g, ~raster.bits & np.pad(np.ones((7,) * 4, bool), 1))).bits)
    cand.reshape(-1)[ring[::40]] = True
    out = hcomb_n(scene, VoxelSet(frame, g, cand), DirectionSample.sobol(2, 4, 1), centered_tgrid(3.0, 11))
    assert out == raster


# hull


def test_hhull_of_ball():
    g = hgrid(1.5, 15)
    B = rasterize(ball([0] * 4, 1.0), H, g)
    full = VoxelSet(H, g, np.ones(g.cells, dtype=bool))
    tr = HullTrace()
    hull = hhull(B, full, DirectionSample.sobol(1, 4, 0), trace=tr)
    assert B <= hull
    assert hausdorff_cells(hull, B) <= 2
    assert len(tr.images) == len(tr.combs) == 4


def test_hhull_fills_shell():
    g = hgrid(1.5, 15)
    full = VoxelSet(H, g, np.ones(g.cells, dtype=bool))
    hull = hhull(h1_shell(g, tau=0.25), full, DirectionSample.sobol(1, 2, 0))
    assert hull.bits[7, 7, 7, 7]
    assert hausdorff_cells(hull, rasterize(ball([0] * 4, 1.0), H, g)) <= 2


def test_hhull_monotone_in_functionals():
    frame = Frame.coordinate(2, ["y1", "z1", "y2", "z2"])
    g = hgrid(1.5, 11)
    E = rasterize(ball([0.3, 0, 0, 0, 0, 0, 0, 0], 0.8), frame, g)
    full = VoxelSet(frame, g, np.ones(g.cells, dtype=bool))
    funcs = DirectionSample.sobol(2, 8, 3)
    few = hhull(E, full, funcs.head(3))
    many = hhull(E, full, funcs)
    assert E <= many <= few


def test_hhull_empty_source():
    g = hgrid(1, 5)
    full = VoxelSet(H, g, np.ones(g.cells, dtype=bool))
    assert hhull(full.empty_like(), full, DirectionSample.sobol(1, 2, 0)).is_empty()


# conjugates


def test_conjugate_of_ball_is_inverse_ball():
    src = rasterize(ball([0] * 4, 0.5), H, hgrid(0.7, 15))
    hg = hgrid(3.0, 21)
    dual = conjugate(src, H, hg)
    r = np.linalg.norm(hg.centers(), axis=1).reshape(hg.cells)
    slack = 0.5 * hg.diagonal + 2 * (0.7 / 15) * 4
    assert dual.bits[r < 2.0 - slack].all()
    assert not dual.bits[r > 2.0 + slack].any()


def test_conjugate_of_empty_is_everything():
    src = rasterize(Const(False), H, hgrid(1, 5))
    assert conjugate(src, H, hgrid(1, 5)).count == 5**4


def test_double_conjugate_recovers_ball():
    g = hgrid(1.5, 21)
    B = rasterize(ball([0] * 4, 1.0), H, g)
    ch = hull_via_conjugate_n1(B)
    assert not ch.unbounded
    assert hausdorff_cells(ch.hull, B) <= 1
    assert betti_of(ch.origin_component).as_list() == [1, 0, 0, 0, 0]


def test_double_conjugate_fills_shell():
    g = hgrid(1.5, 21)
    ch = hull_via_conjugate_n1(h1_shell(g))
    assert hausdorff_cells(ch.hull, rasterize(ball([0] * 4, 1.0), H, g)) <= 1


def test_hull_via_conjugate_checks_dimension():
    v = VoxelSet(Frame.coordinate(2, ["y1", "z1", "u1", "t1"]), hgrid(1, 5), np.ones((5,) * 4, dtype=bool))
    with pytest.raises(ValueError):
        hull_via_conjugate_n1(v)


# direction samples and parameter grids


def test_direction_sample():
    a = DirectionSample.sobol(2, 16, 7)
    b = DirectionSample.sobol(2, 16, 7)
    c = DirectionSample.sobol(2, 16, 8)
    assert len(a) == 16 and np.array_equal(a.items, b.items)
    assert not np.array_equal(a.items, c.items)
    assert np.allclose(np.linalg.norm(a.items, axis=1), 1)
    assert len(np.unique(a.items.round(9), axis=0)) == 16
    d = DirectionSample.sobol(1, 3, 0, extra=[[2, 0, 0, 0]])
    assert np.array_equal(d.items[0], [1, 0, 0, 0])
    assert len(d.head(2)) == 2
    with pytest.raises(ValueError):
        DirectionSample(1, 0, np.zeros((1, 4)))


def test_centered_tgrid_needs_odd_cells():
    with pytest.raises(ValueError):
        centered_tgrid(1.0, 20)


# section checks


def test_ball_in_h2_quasiconvex():
    frame = Frame.coordinate(2, ["y1", "z1", "y2", "z2"])
    scene = ball([0] * 8, 1.0)
    raster = rasterize(scene, frame, hgrid(1.2, 9))
    lines = sample_lines(raster, DirectionSample.sobol(2, 8, 0), 0)
    rep = strong_convexity_evidence(scene, lines, centered_tgrid(2.5, 15))
    assert rep.verdict and rep.lines_tested == 8 and rep.empty_count == 0


def test_shell_fails_quasiconvex():
    g = hgrid(1.5, 15)
    scene = ball([0] * 4, 1.0, "eq", 0.2, "inner")
    line = HLine(HPoint.of(0), HPoint.of(1))
    rep = quasiconvex_check(scene, [line], centered_tgrid(1.5, 15))
    assert not rep.verdict and rep.failures() == [0]
    assert rep.betti_rows()[0] == [1, 0, 0, 1, 0]


def test_loop_is_quasiconvex_but_not_strong():
    # |(y, z)| in [0.6, 1], |(u, t)| <= 0.25: a thickened circle
    yz = np.diag([1.0, 1, 0, 0])
    ut = np.diag([0.0, 0, 1, 1])
    scene = And((Quadratic(yz, np.zeros(4), -1.0), Quadratic(-yz, np.zeros(4), 0.36), Quadratic(ut, np.zeros(4), -0.0625)))
    line = [HLine(HPoint.of(0), HPoint.of(1))]
    tg = centered_tgrid(1.3, 21)
    assert quasiconvex_check(scene, line, tg).verdict
    strong = strong_convexity_evidence(scene, line, tg)
    assert not strong.verdict and strong.records[0].betti[1] == 1


def test_empty_sections_excluded():
    scene = ball([0] * 8, 0.5)
    far = HLine(HPoint.of(0, 5), HPoint.of(1, 0))
    rep = quasiconvex_check(scene, [far], centered_tgrid(1.0, 7))
    assert rep.empty_count == 1 and rep.verdict


# extremal points


def test_extremal_radius_guard():
    g = hgrid(1.5, 15)
    B = rasterize(ball([0] * 4, 1.0), H, g)
    with pytest.raises(ValueError, match="two cell diagonals"):
        hextremal_points(ball([0] * 4, 1.0), boundary_cells(B), DirectionSample.sobol(1, 1, 0), 0.1)


def test_extremal_of_ball_is_boundary():
    g = hgrid(1.5, 15)
    scene = ball([0] * 4, 1.0)
    bd = boundary_cells(rasterize(scene, H, g))
    r = 2.5 * g.diagonal
    ext = hextremal_points(scene, bd, DirectionSample.sobol(1, 1, 0), r)
    assert ext == bd
    assert hextremal_points(Const(True), bd, DirectionSample.sobol(1, 1, 0), r).is_empty()
