"""Kernel backend selection.

The compiled extension ``_fast`` is used when it imports; otherwise, or when
``HCONVEX_PURE=1`` is set, the pure-Python ``_pure`` module is used.
"""

from __future__ import annotations

import contextlib
import itertools
import os

import numpy as np

from . import _pure

try:
    from . import _fast  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on build
    _fast = None

_BACKENDS = {"pure": _pure}
if _fast is not None:
    _BACKENDS["compiled"] = _fast

_active = "pure" if (_fast is None or os.environ.get("HCONVEX_PURE") == "1") else "compiled"


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def backend_name() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}")
    _active = name


@contextlib.contextmanager
def using(name: str):
    prev = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(prev)


def _impl():
    return _BACKENDS[_active]


def neighbor_offsets(shape, full: bool) -> np.ndarray:
    """Flat-index offsets of face (2d) or full (3^d - 1) neighbours in a C-order grid."""
    strides = np.cumprod((1,) + tuple(shape[::-1]))[:-1][::-1]
    if not full:
        offs = [s * sgn for s in strides for sgn in (-1, 1)]
    else:
        offs = []
        for steps in itertools.product((-1, 0, 1), repeat=len(shape)):
            if any(steps):
                offs.append(int(np.dot(steps, strides)))
    return np.asarray(offs, dtype=np.int64)


def label(mask: np.ndarray, full: bool = True) -> tuple[np.ndarray, int]:
    """Label connected components of a boolean n-D array.

    ``full`` selects the 3^d - 1 neighbourhood, otherwise the 2d face
    neighbourhood. Returns (int32 labels with the input shape, count).
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.size == 0:
        return np.zeros(mask.shape, dtype=np.int32), 0
    padded = np.pad(mask, 1).astype(np.uint8)
    offs = neighbor_offsets(padded.shape, full)
    labels, count = _impl().label(np.ascontiguousarray(padded).reshape(-1), offs)
    labels = labels.reshape(padded.shape)
    inner = tuple(slice(1, -1) for _ in mask.shape)
    return labels[inner], int(count)


def outside_reach(mask: np.ndarray) -> np.ndarray:
    """Complement cells face-connected to the window boundary (or beyond it)."""
    mask = np.asarray(mask, dtype=bool)
    state = np.pad(mask.astype(np.uint8), 1)
    state = np.pad(state, 1, constant_values=2)
    offs = neighbor_offsets(state.shape, full=False)
    start = int(np.ravel_multi_index((1,) * mask.ndim, state.shape))
    flat = np.ascontiguousarray(state).reshape(-1)
    reached = _impl().flood_from(flat, offs, start).astype(bool)
    if mask.ndim == 1:
        # the free layer is two disjoint end cells in 1-D
        reached |= _impl().flood_from(flat, offs, state.shape[0] - 2).astype(bool)
    reached = reached.reshape(state.shape)
    inner = tuple(slice(2, -2) for _ in mask.shape)
    return reached[inner]


def reduce_pairs(present: np.ndarray, oddmask: np.ndarray, strides, seeds=(), coreduction: bool = True) -> int:
    """In-place reduction of a flat padded doubled-grid complex; see ``_fast.reduce_pairs``."""
    return _impl().reduce_pairs(
        present,
        oddmask,
        np.asarray(strides, dtype=np.int64),
        np.asarray(seeds, dtype=np.int64),
        bool(coreduction),
    )
