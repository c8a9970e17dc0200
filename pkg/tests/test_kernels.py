import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.extra.numpy import arrays
from scipy import ndimage

from hconvex import _kernels
from hconvex.cubical import betti_of, build_complex, reduce_complex


def same_partition(a, b):
    """Two label arrays induce the same partition of the foreground."""
    fg = a > 0
    if not np.array_equal(fg, b > 0):
        return False
    pairs = set(zip(a[fg].tolist(), b[fg].tolist()))
    return len(pairs) == len({p[0] for p in pairs}) == len({p[1] for p in pairs})


def reach_oracle(mask):
    """Complement cells face-connected to the outside of the window."""
    padded = np.pad(~mask, 1, constant_values=True)
    lab, _ = ndimage.label(padded)
    rim = np.ones(padded.shape, dtype=bool)
    rim[tuple(slice(1, -1) for _ in mask.shape)] = False
    keep = np.isin(lab, np.unique(lab[rim & padded]))
    return keep[tuple(slice(1, -1) for _ in mask.shape)]


def test_backend_selection():
    assert "pure" in _kernels.available_backends()
    with _kernels.using("pure"):
        assert _kernels.backend_name() == "pure"
    with pytest.raises(ValueError):
        _kernels.set_backend("gpu")


def test_compiled_available():
    assert "compiled" in _kernels.available_backends(), "Cython extension not built"


@pytest.mark.parametrize("full", [False, True])
def test_label_matches_scipy(backend, rng, full):
    for shape in [(7,), (9, 8), (6, 5, 7), (5, 4, 5, 4)]:
        mask = rng.random(shape) < 0.45
        got, n = _kernels.label(mask, full)
        structure = ndimage.generate_binary_structure(mask.ndim, mask.ndim if full else 1)
        want, m = ndimage.label(mask, structure)
        assert n == m
        assert same_partition(got, want)


def test_label_empty(backend):
    lab, n = _kernels.label(np.zeros((3, 3), dtype=bool))
    assert n == 0 and not lab.any()


def test_outside_reach_matches_oracle(backend, rng):
    for shape in [(11,), (8, 9), (6, 6, 6), (5, 5, 5, 5)]:
        for p in (0.2, 0.5, 0.7):
            mask = rng.random(shape) < p
            assert np.array_equal(_kernels.outside_reach(mask), reach_oracle(mask))


def test_outside_reach_shell(backend):
    m = np.ones((3, 3, 3, 3), dtype=bool)
    m[1, 1, 1, 1] = False
    assert not _kernels.outside_reach(m).any()


@settings(max_examples=50, deadline=None)
@given(arrays(bool, (5, 4, 4, 3)))
def test_backends_agree_on_label_and_reach(mask):
    out = {}
    for name in _kernels.available_backends():
        with _kernels.using(name):
            out[name] = (_kernels.label(mask, True), _kernels.outside_reach(mask))
    (la, na), ra = out["pure"]
    for (lb, nb), rb in out.values():
        assert na == nb and np.array_equal(la, lb) and np.array_equal(ra, rb)


@settings(max_examples=50, deadline=None)
@given(arrays(bool, (4, 4, 3, 3)))
def test_backends_agree_on_reduction(bits):
    res = {}
    for name in _kernels.available_backends():
        with _kernels.using(name):
            c = build_complex(bits)
            ncomp, rest = reduce_complex(c) if bits.any() else (0, np.zeros(0, dtype=np.int64))
            res[name] = (ncomp, rest.tolist(), betti_of(bits).as_list())
    first = next(iter(res.values()))
    assert all(v == first for v in res.values())


def test_reduction_shrinks_ball(backend):
    c = build_complex(np.ones((6, 6, 6, 6), dtype=bool))
    ncomp, rest = reduce_complex(c)
    assert ncomp == 1 and rest.size == 0
