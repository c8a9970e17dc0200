"""Pure-Python twins of the compiled kernels in ``_fast.pyx``.

Same signatures, same buffer conventions, same visiting order, so both
backends produce identical labels and identical reduced complexes.
"""

from collections import deque

import numpy as np


def flood_from(state, offsets, start):
    state = np.asarray(state)
    n = state.shape[0]
    out = bytearray(n)
    passable = (state == 0).tolist()
    offs = [int(o) for o in offsets]
    if not passable[start]:
        return np.zeros(n, dtype=np.uint8)
    out[start] = 1
    stack = [start]
    while stack:
        c = stack.pop()
        for o in offs:
            nb = c + o
            if passable[nb] and not out[nb]:
                out[nb] = 1
                stack.append(nb)
    return np.frombuffer(bytes(out), dtype=np.uint8).copy()


def label(mask, offsets):
    mask = np.asarray(mask)
    n = mask.shape[0]
    inside = (mask != 0).tolist()
    labels = [0] * n
    offs = [int(o) for o in offsets]
    cur = 0
    for i in np.flatnonzero(mask).tolist():
        if labels[i]:
            continue
        cur += 1
        labels[i] = cur
        stack = [i]
        while stack:
            c = stack.pop()
            for o in offs:
                nb = c + o
                if inside[nb] and not labels[nb]:
                    labels[nb] = cur
                    stack.append(nb)
    return np.asarray(labels, dtype=np.int32), cur


def _remove(c, present, oddmask, fc, cc, strides, queue):
    present[c] = 0
    m = oddmask[c]
    for i, s in enumerate(strides):
        if (m >> i) & 1:
            for nb in (c - s, c + s):
                if present[nb]:
                    cc[nb] -= 1
                    queue.append(nb)
        else:
            for nb in (c - s, c + s):
                if present[nb]:
                    fc[nb] -= 1
                    queue.append(nb)


def reduce_pairs(present, oddmask, strides, seeds, coreduction):
    """In-place on ``present`` (a writable uint8 numpy array)."""
    strides = [int(s) for s in strides]
    pres = present.tolist()
    odd = oddmask.tolist()
    n = len(pres)
    fc = [0] * n
    cc = [0] * n
    for c in range(n):
        if not pres[c]:
            continue
        m = odd[c]
        for i, s in enumerate(strides):
            k = pres[c - s] + pres[c + s]
            if (m >> i) & 1:
                fc[c] += k
            else:
                cc[c] += k
    queue = deque()
    removed = 0
    for c in seeds:
        c = int(c)
        if pres[c]:
            _remove(c, pres, odd, fc, cc, strides, queue)
            removed += 1
    queue.extend(c for c in range(n) if pres[c])
    removed += _drain(pres, odd, fc, cc, strides, queue, bool(coreduction))
    present[:] = np.asarray(pres, dtype=np.uint8)
    return removed


def _drain(pres, odd, fc, cc, strides, queue, allow_coreduction):
    removed = 0
    while queue:
        c = queue.popleft()
        if not pres[c]:
            continue
        if allow_coreduction and fc[c] == 1:
            want_odd = 1
        elif cc[c] == 1:
            want_odd = 0
        else:
            continue
        m = odd[c]
        other = -1
        for i, s in enumerate(strides):
            if ((m >> i) & 1) == want_odd:
                if pres[c - s]:
                    other = c - s
                elif pres[c + s]:
                    other = c + s
                if other >= 0:
                    break
        if other >= 0:
            _remove(c, pres, odd, fc, cc, strides, queue)
            _remove(other, pres, odd, fc, cc, strides, queue)
            removed += 2
    return removed
