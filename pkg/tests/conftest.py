import numpy as np
import pytest

from hconvex import _kernels


def as_complex2(q):
    """y + zi + uj + tk as the 2x2 complex matrix [[y+zi, u+ti], [-u+ti, y-zi]]."""
    y, z, u, t = (float(v) for v in q)
    return np.array([[y + 1j * z, u + 1j * t], [-u + 1j * t, y - 1j * z]])


def from_complex2(m):
    return np.array([m[0, 0].real, m[0, 0].imag, m[0, 1].real, m[0, 1].imag])


def oracle_qmul(a, b):
    return from_complex2(as_complex2(a) @ as_complex2(b))


@pytest.fixture(params=_kernels.available_backends())
def backend(request):
    with _kernels.using(request.param):
        yield request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
