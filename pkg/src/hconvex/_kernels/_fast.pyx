# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: flood fill, component labeling, cubical coreduction.

All routines work on flat C-contiguous buffers of padded grids so neighbour
lookups never leave the buffer. The pure-Python twin lives in ``_pure.py``
and must return identical results.
"""

import numpy as np
cimport numpy as cnp
from libcpp.vector cimport vector
from libcpp.deque cimport deque

cnp.import_array()


def flood_from(cnp.uint8_t[::1] state, cnp.int64_t[::1] offsets, Py_ssize_t start):
    """Mark every state==0 cell reachable from ``start``; returns uint8 mask.

    ``state`` holds 0 for passable cells and anything else for walls. The
    caller guarantees that walls surround the passable region.
    """
    cdef Py_ssize_t n = state.shape[0]
    cdef Py_ssize_t no = offsets.shape[0]
    out_arr = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] out = out_arr
    cdef vector[Py_ssize_t] stack
    cdef Py_ssize_t c, nb, k
    if state[start] != 0:
        return out_arr
    out[start] = 1
    stack.push_back(start)
    while stack.size() > 0:
        c = stack.back()
        stack.pop_back()
        for k in range(no):
            nb = c + offsets[k]
            if state[nb] == 0 and out[nb] == 0:
                out[nb] = 1
                stack.push_back(nb)
    return out_arr


def label(cnp.uint8_t[::1] mask, cnp.int64_t[::1] offsets):
    """Connected-component labels (1..count) of mask==1 cells; 0 elsewhere.

    The mask must carry a zero border at least one cell wide. Labels are
    assigned in increasing flat-index order of each component's first cell.
    """
    cdef Py_ssize_t n = mask.shape[0]
    cdef Py_ssize_t no = offsets.shape[0]
    labels_arr = np.zeros(n, dtype=np.int32)
    cdef cnp.int32_t[::1] labels = labels_arr
    cdef vector[Py_ssize_t] stack
    cdef Py_ssize_t i, c, nb, k
    cdef cnp.int32_t cur = 0
    for i in range(n):
        if mask[i] == 0 or labels[i] != 0:
            continue
        cur += 1
        labels[i] = cur
        stack.push_back(i)
        while stack.size() > 0:
            c = stack.back()
            stack.pop_back()
            for k in range(no):
                nb = c + offsets[k]
                if mask[nb] != 0 and labels[nb] == 0:
                    labels[nb] = cur
                    stack.push_back(nb)
    return labels_arr, int(cur)


cdef inline void _remove(Py_ssize_t c, cnp.uint8_t[::1] present, cnp.uint8_t[::1] oddmask,
                         cnp.int8_t[::1] fc, cnp.int8_t[::1] cc,
                         cnp.int64_t[::1] strides, int ndim, deque[Py_ssize_t]& queue) noexcept nogil:
    cdef int i
    cdef Py_ssize_t s, nb
    cdef int m = oddmask[c]
    present[c] = 0
    for i in range(ndim):
        s = strides[i]
        if (m >> i) & 1:
            nb = c - s
            if present[nb]:
                cc[nb] -= 1
                queue.push_back(nb)
            nb = c + s
            if present[nb]:
                cc[nb] -= 1
                queue.push_back(nb)
        else:
            nb = c - s
            if present[nb]:
                fc[nb] -= 1
                queue.push_back(nb)
            nb = c + s
            if present[nb]:
                fc[nb] -= 1
                queue.push_back(nb)


cdef Py_ssize_t _drain(cnp.uint8_t[::1] present, cnp.uint8_t[::1] oddmask,
                       cnp.int8_t[::1] fc, cnp.int8_t[::1] cc,
                       cnp.int64_t[::1] strides, int ndim, deque[Py_ssize_t]& queue,
                       int allow_coreduction) noexcept nogil:
    cdef Py_ssize_t c, s, other, removed = 0
    cdef int i, m, want_odd
    while queue.size() > 0:
        c = queue.front()
        queue.pop_front()
        if not present[c]:
            continue
        if allow_coreduction and fc[c] == 1:
            want_odd = 1
        elif cc[c] == 1:
            want_odd = 0
        else:
            continue
        m = oddmask[c]
        other = -1
        for i in range(ndim):
            if ((m >> i) & 1) == want_odd:
                s = strides[i]
                if present[c - s]:
                    other = c - s
                elif present[c + s]:
                    other = c + s
                if other >= 0:
                    break
        if other >= 0:
            _remove(c, present, oddmask, fc, cc, strides, ndim, queue)
            _remove(other, present, oddmask, fc, cc, strides, ndim, queue)
            removed += 2
    return removed


cdef void _counts(cnp.uint8_t[::1] present, cnp.uint8_t[::1] oddmask,
                  cnp.int8_t[::1] fc, cnp.int8_t[::1] cc,
                  cnp.int64_t[::1] strides, int ndim) noexcept nogil:
    cdef Py_ssize_t c, s
    cdef int i, m
    for c in range(present.shape[0]):
        if not present[c]:
            continue
        m = oddmask[c]
        for i in range(ndim):
            s = strides[i]
            if (m >> i) & 1:
                fc[c] += present[c - s] + present[c + s]
            else:
                cc[c] += present[c - s] + present[c + s]


def reduce_pairs(cnp.uint8_t[::1] present, cnp.uint8_t[::1] oddmask,
                 cnp.int64_t[::1] strides, cnp.int64_t[::1] seeds, bint coreduction):
    """Remove ``seeds``, then exhaust elementary reduction pairs in place.

    ``present`` marks the cells of a cubical complex on a doubled grid padded
    so that every face and coface index stays inside the buffer. Free-face
    collapses are always applied; with ``coreduction`` also pairs whose
    upper cell has a single remaining face. Returns the number of removed cells.
    """
    cdef Py_ssize_t n = present.shape[0]
    cdef int ndim = strides.shape[0]
    fc_arr = np.zeros(n, dtype=np.int8)
    cc_arr = np.zeros(n, dtype=np.int8)
    cdef cnp.int8_t[::1] fc = fc_arr
    cdef cnp.int8_t[::1] cc = cc_arr
    cdef deque[Py_ssize_t] queue
    cdef Py_ssize_t c, removed = 0, k
    with nogil:
        _counts(present, oddmask, fc, cc, strides, ndim)
        for k in range(seeds.shape[0]):
            c = seeds[k]
            if present[c]:
                _remove(c, present, oddmask, fc, cc, strides, ndim, queue)
                removed += 1
        for c in range(n):
            if present[c]:
                queue.push_back(c)
        removed += _drain(present, oddmask, fc, cc, strides, ndim, queue, coreduction)
    return removed
