import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import homology_oracle as oracle
from hconvex.cubical import betti_of, build_complex, is_acyclic


def shell(d):
    b = np.ones((3,) * d, dtype=bool)
    b[(1,) * d] = False
    return b


def hollow_torus():
    a = np.ones((7, 7, 5), dtype=bool)
    a[3, 3, :] = False
    cavity = np.zeros_like(a)
    cavity[1:6, 1:6, 1:4] = True
    cavity[2:5, 2:5, :] = False
    return a & ~cavity


# cell counts and encoding


def test_single_voxel_cells():
    c = build_complex(np.ones((1, 1, 1, 1), dtype=bool))
    assert c.n_cells == 81
    assert c.cell_counts() == [16, 32, 24, 8, 1]
    assert c.euler() == 1


def test_two_voxels_share_face():
    b = np.zeros((2, 1, 1, 1), dtype=bool)
    b[:] = True
    assert build_complex(b).n_cells == 81 + 81 - 27


def test_empty_complex():
    c = build_complex(np.zeros((4, 4, 4, 4), dtype=bool))
    assert c.n_cells == 0
    assert betti_of(np.zeros((4, 4, 4, 4), dtype=bool)).empty
    r = is_acyclic(np.zeros((3, 3), dtype=bool))
    assert r.status == "empty" and not r


def test_dump_matches_oracle_cells():
    b = np.zeros((3, 2, 2), dtype=bool)
    b[0, 0, 0] = b[2, 1, 1] = True
    got = set(build_complex(b).cells())
    assert got == oracle.closure_cells(b)
    text = build_complex(b).dump()
    assert text.count("\n") == len(got)
    assert "3: [0,1]x[0,1]x[0,1]" in text


# frozen values computed with the brute-force oracle


@pytest.mark.parametrize(
    "bits, want",
    [
        (np.ones((1, 1, 1, 1), dtype=bool), [1, 0, 0, 0, 0]),
        (shell(4), [1, 0, 0, 1, 0]),
        (shell(3), [1, 0, 1, 0]),
        (shell(2), [1, 1, 0]),
        (hollow_torus(), [1, 2, 1, 0]),
    ],
    ids=["voxel", "s3_shell", "s2_shell", "ring", "torus"],
)
def test_frozen_betti(bits, want, backend):
    assert betti_of(bits).as_list() == want
    assert betti_of(bits, "rational").as_list() == want


def test_frozen_betti_oracle_agrees():
    assert oracle.betti(shell(4)) == [1, 0, 0, 1, 0]
    assert oracle.betti(hollow_torus()) == [1, 2, 1, 0]


def test_diagonal_voxels_touch_at_vertex():
    b = np.zeros((3, 3, 3, 3), dtype=bool)
    b[0, 0, 0, 0] = b[1, 1, 1, 1] = True
    assert betti_of(b).as_list() == [1, 0, 0, 0, 0]
    b[1, 1, 1, 1] = False
    b[2, 2, 2, 2] = True
    assert betti_of(b).as_list() == [2, 0, 0, 0, 0]


def test_acyclicity_status():
    assert is_acyclic(np.ones((2, 2, 2, 2), dtype=bool)).status == "acyclic"
    r = is_acyclic(shell(4))
    assert r.status == "cyclic" and r.betti[3] == 1


def test_unknown_field():
    with pytest.raises(ValueError):
        betti_of(np.ones((1, 1)), "gf3")


# invariants

small3 = arrays(bool, (4, 4, 3))
small4 = arrays(bool, (3, 3, 3, 2))


@settings(max_examples=60, deadline=None)
@given(small3)
def test_matches_oracle_3d(bits):
    assert betti_of(bits).as_list() == oracle.betti(bits)


@settings(max_examples=25, deadline=None)
@given(small4)
def test_matches_oracle_4d(bits):
    assert betti_of(bits).as_list() == oracle.betti(bits)


@settings(max_examples=40, deadline=None)
@given(small4)
def test_euler_characteristic(bits):
    c = build_complex(bits)
    b = betti_of(bits)
    assert b.euler() == (c.euler() if bits.any() else 0)


@settings(max_examples=40, deadline=None)
@given(small4, st.permutations(range(4)), st.tuples(*[st.integers(0, 3)] * 4))
def test_translation_and_axis_permutation(bits, perm, shift):
    want = betti_of(bits).as_list()
    moved = np.zeros(tuple(n + s for n, s in zip(bits.shape, shift)), dtype=bool)
    moved[tuple(slice(s, None) for s in shift)] = bits
    assert betti_of(moved).as_list() == want
    assert betti_of(np.transpose(bits, perm)).as_list() == want


@settings(max_examples=40, deadline=None)
@given(small4, small4)
def test_disjoint_union_adds(a, b):
    u = np.zeros((7, 3, 3, 2), dtype=bool)
    u[:3] = a
    u[4:] = b
    ba, bb = betti_of(a), betti_of(b)
    assert betti_of(u).as_list() == [x + y for x, y in zip(ba.values, bb.values)]


@settings(max_examples=40, deadline=None)
@given(small4)
def test_mod2_equals_rational(bits):
    assert betti_of(bits, "mod2").as_list() == betti_of(bits, "rational").as_list()


@settings(max_examples=20, deadline=None)
@given(arrays(bool, (3, 3, 3)))
def test_oracle_boundary_squares_to_zero(bits):
    assert oracle.boundary_squares_to_zero(bits)


def test_random_4d_against_oracle(rng):
    for p in (0.3, 0.6, 0.85):
        bits = rng.random((4, 4, 3, 3)) < p
        assert betti_of(bits).as_list() == oracle.betti(bits)
