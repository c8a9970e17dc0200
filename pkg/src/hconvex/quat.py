"""Quaternions, points of H^n, hypercomplex lines and right-linear functionals.

Scalar values are small immutable dataclasses; the vectorized helpers
(``qmul_arr``, ``pair_arr``, ...) work on float arrays whose last axis holds
the four real coefficients ``(y, z, u, t)`` of ``y + iz + ju + kt``.

Sidedness: a functional multiplies the variable point on the LEFT of its
fixed coefficients, ``f_h(x) = sum_k x_k h_k``, and a line is parametrized
with the quaternion parameter on the left of its direction,
``x_k(t) = a_k + t d_k``.  With these two choices ``f_h`` is affine along
every line: ``f_h(a + t d) = f_h(a) + t f_h(d)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

REL_TOL = 1e-12


def qmul_arr(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product of broadcastable arrays of shape (..., 4)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a0, a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    b0, b1, b2, b3 = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ],
        axis=-1,
    )


def qconj_arr(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def qinv_arr(q: np.ndarray) -> np.ndarray:
    """Elementwise inverse; zero quaternions map to NaN."""
    q = np.asarray(q, dtype=float)
    n2 = np.sum(q * q, axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = qconj_arr(q) / n2
    return np.where(n2 > 0, out, np.nan)


def left_matrix(q: np.ndarray) -> np.ndarray:
    """Real 4x4 matrix M with M @ p == q*p (coefficient vectors)."""
    a0, a1, a2, a3 = np.asarray(q, dtype=float)
    return np.array(
        [
            [a0, -a1, -a2, -a3],
            [a1, a0, -a3, a2],
            [a2, a3, a0, -a1],
            [a3, -a2, a1, a0],
        ]
    )


def right_matrix(q: np.ndarray) -> np.ndarray:
    """Real 4x4 matrix M with M @ p == p*q (coefficient vectors)."""
    b0, b1, b2, b3 = np.asarray(q, dtype=float)
    return np.array(
        [
            [b0, -b1, -b2, -b3],
            [b1, b0, b3, -b2],
            [b2, -b3, b0, b1],
            [b3, b2, -b1, b0],
        ]
    )


@dataclass(frozen=True)
class Quaternion:
    """``y + i z + j u + k t`` with real coefficients."""

    y: float = 0.0
    z: float = 0.0
    u: float = 0.0
    t: float = 0.0

    @classmethod
    def from_array(cls, a: Iterable[float]) -> "Quaternion":
        y, z, u, t = (float(v) for v in a)
        return cls(y, z, u, t)

    @classmethod
    def coerce(cls, v) -> "Quaternion":
        if isinstance(v, Quaternion):
            return v
        if isinstance(v, (int, float)):
            return cls(float(v))
        return cls.from_array(v)

    def as_array(self) -> np.ndarray:
        return np.array([self.y, self.z, self.u, self.t])

    def __abs__(self) -> float:
        return math.sqrt(self.y**2 + self.z**2 + self.u**2 + self.t**2)

    def __add__(self, other) -> "Quaternion":
        o = Quaternion.coerce(other)
        return Quaternion(self.y + o.y, self.z + o.z, self.u + o.u, self.t + o.t)

    __radd__ = __add__

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.y, -self.z, -self.u, -self.t)

    def __sub__(self, other) -> "Quaternion":
        return self + (-Quaternion.coerce(other))

    def __rsub__(self, other) -> "Quaternion":
        return Quaternion.coerce(other) - self

    def __mul__(self, other) -> "Quaternion":
        return qmul(self, Quaternion.coerce(other))

    def __rmul__(self, other) -> "Quaternion":
        return qmul(Quaternion.coerce(other), self)

    def conj(self) -> "Quaternion":
        return Quaternion(self.y, -self.z, -self.u, -self.t)

    def isclose(self, other, tol: float = 1e-12) -> bool:
        o = Quaternion.coerce(other)
        scale = max(1.0, abs(self), abs(o))
        return abs(self - o) <= tol * scale


ONE = Quaternion(1.0)
I = Quaternion(0.0, 1.0)
J = Quaternion(0.0, 0.0, 1.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


def qmul(a: Quaternion, b: Quaternion) -> Quaternion:
    return Quaternion(
        a.y * b.y - a.z * b.z - a.u * b.u - a.t * b.t,
        a.y * b.z + a.z * b.y + a.u * b.t - a.t * b.u,
        a.y * b.u - a.z * b.t + a.u * b.y + a.t * b.z,
        a.y * b.t + a.z * b.u - a.u * b.z + a.t * b.y,
    )


def qinv(q: Quaternion) -> Quaternion:
    n2 = q.y**2 + q.z**2 + q.u**2 + q.t**2
    if n2 == 0.0:
        raise ZeroDivisionError("zero quaternion has no inverse")
    return Quaternion(q.y / n2, -q.z / n2, -q.u / n2, -q.t / n2)


@dataclass(frozen=True)
class HPoint:
    """A point of H^n as a tuple of quaternion coordinates."""

    coords: tuple[Quaternion, ...]

    def __post_init__(self):
        if len(self.coords) < 1:
            raise ValueError("HPoint needs at least one coordinate")
        object.__setattr__(self, "coords", tuple(Quaternion.coerce(c) for c in self.coords))

    @classmethod
    def of(cls, *coords) -> "HPoint":
        return cls(tuple(Quaternion.coerce(c) for c in coords))

    @classmethod
    def from_array(cls, a) -> "HPoint":
        a = np.asarray(a, dtype=float).reshape(-1, 4)
        return cls(tuple(Quaternion.from_array(r) for r in a))

    @property
    def n(self) -> int:
        return len(self.coords)

    def as_array(self) -> np.ndarray:
        """Shape (n, 4)."""
        return np.array([c.as_array() for c in self.coords])

    def flat(self) -> np.ndarray:
        """Real coordinates (y1, z1, u1, t1, y2, ...) of length 4n."""
        return self.as_array().reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.flat()))

    def is_zero(self) -> bool:
        return all(abs(c) == 0.0 for c in self.coords)

    def __add__(self, other: "HPoint") -> "HPoint":
        _check_dims(self, other)
        return HPoint(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "HPoint") -> "HPoint":
        _check_dims(self, other)
        return HPoint(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def lmul(self, q: Quaternion) -> "HPoint":
        """``q * self`` coordinatewise (scalar on the left)."""
        return HPoint(tuple(qmul(q, c) for c in self.coords))

    def rmul(self, q: Quaternion) -> "HPoint":
        """``self * q`` coordinatewise (scalar on the right)."""
        return HPoint(tuple(qmul(c, q) for c in self.coords))


def _check_dims(a: HPoint, b: HPoint) -> None:
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: H^{a.n} vs H^{b.n}")


def pair(x: HPoint, h: HPoint) -> Quaternion:
    """``<x, h> = x_1 h_1 + ... + x_n h_n`` with each x_k on the left."""
    _check_dims(x, h)
    acc = Quaternion()
    for xk, hk in zip(x.coords, h.coords):
        acc = acc + qmul(xk, hk)
    return acc


def pair_arr(x: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Vectorized pairing: x of shape (..., n, 4), h of shape (n, 4) or broadcastable."""
    return qmul_arr(x, h).sum(axis=-2)


@dataclass(frozen=True)
class HLine:
    """``{base + t * dir : t in H}``; the parameter multiplies dir from the left."""

    base: HPoint
    dir: HPoint

    def __post_init__(self):
        _check_dims(self.base, self.dir)
        if self.dir.is_zero():
            raise ValueError("line direction must be nonzero")

    @property
    def n(self) -> int:
        return self.base.n

    def real_axes(self) -> np.ndarray:
        """Images of 1, i, j, k under t -> t*dir as rows in R^{4n} (shape 4 x 4n)."""
        d = self.dir.as_array()
        basis = np.eye(4)
        return np.stack([qmul_arr(b, d).reshape(-1) for b in basis])


def line_eval(line: HLine, t: Quaternion) -> HPoint:
    return line.base + line.dir.lmul(Quaternion.coerce(t))


def line_eval_arr(line: HLine, t: np.ndarray) -> np.ndarray:
    """Points for parameters t of shape (m, 4); returns flat coordinates (m, 4n)."""
    t = np.asarray(t, dtype=float).reshape(-1, 4)
    return line.base.flat()[None, :] + t @ line.real_axes()


@dataclass(frozen=True)
class Functional:
    """Right-linear functional ``f_h(x) = <x, h>``."""

    h: HPoint

    def __post_init__(self):
        if self.h.is_zero():
            raise ValueError("functional coefficients must be nonzero")

    @property
    def n(self) -> int:
        return self.h.n

    def __call__(self, x: HPoint) -> Quaternion:
        return pair(x, self.h)

    def matrix(self) -> np.ndarray:
        """Real 4 x 4n matrix A with f_h(x) = A @ flat(x)."""
        return np.hstack([right_matrix(hk.as_array()) for hk in self.h.coords])

    def apply(self, pts: np.ndarray) -> np.ndarray:
        """Evaluate on flat coordinate rows (m, 4n) -> (m, 4)."""
        pts = np.asarray(pts, dtype=float)
        return pts @ self.matrix().T


def annihilating_functional(d: HPoint) -> Functional:
    """A nonzero functional vanishing on direction d.

    Pivot on the coordinate of largest modulus (lowest index on ties); the
    first other coordinate gets coefficient 1, the pivot gets
    ``-d_p^{-1} d_o``, every remaining coefficient is 0.
    """
    if d.is_zero():
        raise ValueError("cannot annihilate the zero direction")
    if d.n == 1:
        raise ValueError("H^1 has no nonzero functional vanishing on a nonzero direction")
    mods = [abs(c) for c in d.coords]
    p = int(np.argmax(mods))
    o = 0 if p != 0 else 1
    coeffs = [Quaternion() for _ in range(d.n)]
    coeffs[o] = ONE
    coeffs[p] = -qmul(qinv(d.coords[p]), d.coords[o])
    return Functional(HPoint(tuple(coeffs)))


def as_hpoint(v: Sequence | HPoint) -> HPoint:
    if isinstance(v, HPoint):
        return v
    return HPoint(tuple(Quaternion.coerce(c) for c in v))
