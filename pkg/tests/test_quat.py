import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import oracle_qmul
from hconvex.quat import (
    I,
    J,
    K,
    ONE,
    Functional,
    HLine,
    HPoint,
    Quaternion,
    annihilating_functional,
    left_matrix,
    line_eval,
    line_eval_arr,
    pair,
    qinv,
    qmul,
    qmul_arr,
    right_matrix,
)

coef = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
quats = st.builds(Quaternion, coef, coef, coef, coef)


def unit(rng, shape=()):
    v = rng.normal(size=shape + (4,))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


# defining relations


def test_ij_is_k():
    assert qmul(I, J) == K


def test_ji_is_minus_k():
    assert qmul(J, I) == -K
    assert qmul(J, I) != qmul(I, J)


def test_expansion():
    assert qmul(ONE + I, ONE + J) == Quaternion(1, 1, 1, 1)


def test_squares():
    for q in (I, J, K):
        assert qmul(q, q) == -ONE
    assert qmul(qmul(I, J), K) == -ONE


@pytest.mark.parametrize("q, inv", [(ONE, ONE), (I, -I), (Quaternion(2), Quaternion(0.5))])
def test_qinv_examples(q, inv):
    assert qinv(q).isclose(inv)


def test_qinv_zero():
    with pytest.raises(ZeroDivisionError):
        qinv(Quaternion())


# pairing and lines


def test_pair_identity():
    assert pair(HPoint.of(1, 0), HPoint.of(1, 0)) == ONE


def test_pair_chord_examples():
    h = HPoint.of(1, Quaternion(0, -2))
    assert pair(HPoint.of(Quaternion(1, -1), 1), h).isclose(Quaternion(1, -3))
    assert pair(HPoint.of(Quaternion(1, 1), 2), h).isclose(Quaternion(1, -3))
    assert pair(HPoint.of(Quaternion(0, 2), 1), h).isclose(Quaternion())


def test_pair_dimension_mismatch():
    with pytest.raises(ValueError):
        pair(HPoint.of(1), HPoint.of(1, 0))


def test_line_eval_examples():
    q = Quaternion(0.3, -1, 2, 0.5)
    assert line_eval(HLine(HPoint.of(0, 0), HPoint.of(1, 0)), q) == HPoint.of(q, 0)
    assert line_eval(HLine(HPoint.of(1, 1), HPoint.of(0, 1)), Quaternion()) == HPoint.of(1, 1)
    p = line_eval(HLine(HPoint.of(Quaternion(1, -1), 1), HPoint.of(Quaternion(0, 2), 1)), ONE)
    assert p == HPoint.of(Quaternion(1, 1), 2)


def test_line_needs_direction():
    with pytest.raises(ValueError):
        HLine(HPoint.of(0, 0), HPoint.of(0, 0))


def test_parameter_multiplies_on_the_left():
    d = HPoint.of(J, 0)
    p = line_eval(HLine(HPoint.of(0, 0), d), I)
    assert p.coords[0] == qmul(I, J) == K


def test_annihilating_examples():
    assert annihilating_functional(HPoint.of(1, 0)).h == HPoint.of(0, 1)
    assert annihilating_functional(HPoint.of(0, 1)).h == HPoint.of(1, 0)
    h = annihilating_functional(HPoint.of(Quaternion(0, 2), 1)).h
    # equal to (1, -2i) times a right scalar
    s = qmul(qinv(Quaternion(1)), h.coords[0])
    assert qmul(Quaternion(0, -2), s).isclose(h.coords[1])
    assert pair(HPoint.of(Quaternion(0, 2), 1), h).isclose(Quaternion())


def test_annihilating_errors():
    with pytest.raises(ValueError):
        annihilating_functional(HPoint.of(0, 0))
    with pytest.raises(ValueError):
        annihilating_functional(HPoint.of(1))


# oracle agreement and invariants


@given(quats, quats)
def test_product_matches_matrix_oracle(a, b):
    got = qmul(a, b).as_array()
    want = oracle_qmul(a.as_array(), b.as_array())
    assert np.allclose(got, want, rtol=1e-12, atol=1e-12 * (1 + abs(a) * abs(b)))


@given(quats, quats)
def test_norm_multiplicative(a, b):
    assert abs(abs(qmul(a, b)) - abs(a) * abs(b)) <= 1e-12 * max(1.0, abs(a) * abs(b))


@given(quats)
def test_inverse(q):
    if abs(q) < 1e-3:
        return
    assert qmul(q, qinv(q)).isclose(ONE, 1e-12)
    assert qmul(qinv(q), q).isclose(ONE, 1e-12)


@given(quats, quats, quats)
def test_associative(a, b, c):
    lhs = qmul(qmul(a, b), c).as_array()
    rhs = qmul(a, qmul(b, c)).as_array()
    assert np.allclose(lhs, rhs, atol=1e-9 * (1 + abs(a) * abs(b) * abs(c)))


def test_unit_norms_random(rng):
    p, q = unit(rng, (1000,)), unit(rng, (1000,))
    assert np.max(np.abs(np.linalg.norm(qmul_arr(p, q), axis=-1) - 1)) <= 1e-12


def test_left_right_matrices(rng):
    for _ in range(20):
        a, b = rng.normal(size=4), rng.normal(size=4)
        assert np.allclose(left_matrix(a) @ b, oracle_qmul(a, b))
        assert np.allclose(right_matrix(b) @ a, oracle_qmul(a, b))


def test_pair_linear_along_lines(rng):
    for n in (1, 2, 3):
        for _ in range(50):
            a, d, h = (HPoint.from_array(rng.normal(size=(n, 4))) for _ in range(3))
            t = Quaternion.from_array(rng.normal(size=4))
            lhs = pair(line_eval(HLine(a, d), t), h)
            rhs = pair(a, h) + qmul(t, pair(d, h))
            assert lhs.isclose(rhs, 1e-12 * (1 + abs(lhs)))


def test_functional_matrix_matches_pair(rng):
    h = HPoint.from_array(rng.normal(size=(2, 4)))
    xs = rng.normal(size=(30, 8))
    got = Functional(h).apply(xs)
    for x, g in zip(xs, got):
        assert np.allclose(pair(HPoint.from_array(x.reshape(2, 4)), h).as_array(), g)


def test_annihilator_random(rng):
    for n in (2, 3):
        for _ in range(1000 // 2):
            d = HPoint.from_array(rng.normal(size=(n, 4)) * rng.choice([1e-3, 1, 1e3]))
            h = annihilating_functional(d).h
            assert abs(pair(d, h)) <= 1e-12 * d.norm() * h.norm()


def test_annihilator_zero_coordinate():
    d = HPoint.of(0, 0, Quaternion(0, 0, 3))
    h = annihilating_functional(d).h
    assert abs(pair(d, h)) == 0 and not h.is_zero()


@settings(max_examples=30)
@given(st.integers(0, 2**31 - 1))
def test_right_reparametrization_same_points(seed):
    rng = np.random.default_rng(seed)
    line = HLine(HPoint.from_array(rng.normal(size=(2, 4))), HPoint.from_array(rng.normal(size=(2, 4))))
    s = rng.normal(size=4)
    ts = rng.normal(size=(40, 4))
    ts_s = qmul_arr(ts, s[None, :])
    a = line_eval_arr(line, ts_s)
    # the point at t*s is on the line: recover its parameter and match
    axes = line.real_axes()
    back, *_ = np.linalg.lstsq(axes.T, (a - line.base.flat()[None, :]).T, rcond=None)
    assert np.allclose(line_eval_arr(line, back.T), a, atol=1e-9)
    assert np.allclose(back.T, ts_s, atol=1e-9)
