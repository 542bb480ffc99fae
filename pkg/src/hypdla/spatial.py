"""Bounding-volume hierarchy over Euclidean disks for nearest-surface queries.

Disk radii in the half-plane chart scale with height, so an aggregate spans
many orders of magnitude in Euclidean size. A uniform grid degenerates on
such input; a median-split AABB tree does not.

All arrays are plain numpy so the tree can be handed to jitted kernels:

* ``disks``  (n, 4)  cx, cy, r, cx_lo
* ``boxes``  (m, 4)  node AABB: lo_x, lo_y, hi_x, hi_y
* ``nodes``  (m, 4)  left, right, start, count   (leaf iff count > 0)
* ``perm``   (n,)    disk indices in leaf order

Abscissas are double-double (``cx + cx_lo``; see :mod:`hypdla.geometry`).
Boxes are single doubles, padded outward so they stay conservative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

LEAF_SIZE = 6
STACK_DEPTH = 128
# relative outward padding of boxes; covers rounding and the dropped cx_lo
BOX_PAD = 1e-15


@njit(cache=True, nogil=True, inline="always")
def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit(cache=True, nogil=True, inline="always")
def dd_add(hi, lo, v):
    """``(hi, lo) + v`` renormalised to a double-double."""
    s, e = two_sum(hi, v)
    e += lo
    t = s + e
    return t, e - (t - s)


@njit(cache=True)
def _build(disks, leaf_size):
    n = disks.shape[0]
    perm = np.arange(n)
    max_nodes = max(1, 2 * n)
    boxes = np.empty((max_nodes, 4))
    nodes = np.full((max_nodes, 4), -1, dtype=np.int64)
    # work stack of (node, start, end)
    work = np.empty((max_nodes, 3), dtype=np.int64)
    top = 0
    work[0, 0] = 0
    work[0, 1] = 0
    work[0, 2] = n
    top = 1
    n_nodes = 1
    while top > 0:
        top -= 1
        node = work[top, 0]
        s = work[top, 1]
        e = work[top, 2]
        lx = np.inf
        ly = np.inf
        hx = -np.inf
        hy = -np.inf
        clx = np.inf
        cly = np.inf
        chx = -np.inf
        chy = -np.inf
        for k in range(s, e):
            i = perm[k]
            cx = disks[i, 0]
            cy = disks[i, 1]
            r = disks[i, 2]
            pad = BOX_PAD * (abs(cx) + r)
            lx = min(lx, cx - r - pad)
            ly = min(ly, cy - r - BOX_PAD * cy)
            hx = max(hx, cx + r + pad)
            hy = max(hy, cy + r + BOX_PAD * cy)
            clx = min(clx, cx)
            cly = min(cly, cy)
            chx = max(chx, cx)
            chy = max(chy, cy)
        boxes[node, 0] = lx
        boxes[node, 1] = ly
        boxes[node, 2] = hx
        boxes[node, 3] = hy
        if e - s <= leaf_size:
            nodes[node, 2] = s
            nodes[node, 3] = e - s
            continue
        axis = 0 if (chx - clx) >= (chy - cly) else 1
        keys = np.empty(e - s)
        for k in range(s, e):
            keys[k - s] = disks[perm[k], axis]
        order = np.argsort(keys, kind="mergesort")
        seg = perm[s:e].copy()
        for k in range(e - s):
            perm[s + k] = seg[order[k]]
        mid = s + (e - s) // 2
        left = n_nodes
        right = n_nodes + 1
        n_nodes += 2
        nodes[node, 0] = left
        nodes[node, 1] = right
        nodes[node, 3] = 0
        work[top, 0] = left
        work[top, 1] = s
        work[top, 2] = mid
        top += 1
        work[top, 0] = right
        work[top, 1] = mid
        work[top, 2] = e
        top += 1
    return boxes[:n_nodes].copy(), nodes[:n_nodes].copy(), perm


@njit(cache=True, nogil=True, inline="always")
def _box_dist(boxes, node, px, pxl, py):
    dx = max((boxes[node, 0] - px) - pxl, 0.0, (px - boxes[node, 2]) + pxl)
    dy = max(boxes[node, 1] - py, 0.0, py - boxes[node, 3])
    return np.sqrt(dx * dx + dy * dy)


@njit(cache=True, nogil=True)
def nearest_surface(px, pxl, py, bound, disks, boxes, nodes, perm, stack):
    """Smallest ``|p - c| - r`` over disks, if below ``bound``.

    Returns ``(bound, -1)`` when no disk surface is closer than ``bound``.
    Exact for points outside every disk; for a point inside the union the
    search stops early and the result is merely some negative value.
    ``stack`` is caller-provided scratch of length ``STACK_DEPTH``.
    """
    best = bound
    best_i = -1
    if disks.shape[0] == 0:
        return best, best_i
    top = 0
    stack[0] = 0
    top = 1
    while top > 0:
        top -= 1
        node = stack[top]
        if _box_dist(boxes, node, px, pxl, py) >= best:
            continue
        cnt = nodes[node, 3]
        if cnt > 0:
            s = nodes[node, 2]
            for k in range(s, s + cnt):
                i = perm[k]
                dx = (px - disks[i, 0]) + (pxl - disks[i, 3])
                dy = py - disks[i, 1]
                d = np.sqrt(dx * dx + dy * dy) - disks[i, 2]
                if d < best:
                    best = d
                    best_i = i
        else:
            a = nodes[node, 0]
            b = nodes[node, 1]
            da = _box_dist(boxes, a, px, pxl, py)
            db = _box_dist(boxes, b, px, pxl, py)
            # push the farther child first so the nearer one is popped next
            if da <= db:
                if db < best:
                    stack[top] = b
                    top += 1
                if da < best:
                    stack[top] = a
                    top += 1
            else:
                if da < best:
                    stack[top] = a
                    top += 1
                if db < best:
                    stack[top] = b
                    top += 1
    return best, best_i


@njit(cache=True, nogil=True)
def nearest_surface_brute(px, pxl, py, disks):
    best = np.inf
    best_i = -1
    for i in range(disks.shape[0]):
        dx = (px - disks[i, 0]) + (pxl - disks[i, 3])
        d = np.sqrt(dx * dx + (py - disks[i, 1]) ** 2) - disks[i, 2]
        if d < best:
            best = d
            best_i = i
    return best, best_i


@dataclass(frozen=True)
class DiskIndex:
    disks: np.ndarray
    boxes: np.ndarray
    nodes: np.ndarray
    perm: np.ndarray

    @classmethod
    def build(cls, disks: np.ndarray) -> "DiskIndex":
        disks = np.asarray(disks, dtype=np.float64)
        if disks.ndim == 2 and disks.shape[1] == 3:
            disks = np.column_stack([disks, np.zeros(len(disks))])
        disks = np.ascontiguousarray(disks.reshape(-1, 4))
        boxes, nodes, perm = _build(disks, LEAF_SIZE)
        return cls(disks, boxes, nodes, perm)

    def nearest(self, x: float, y: float, bound: float = np.inf, x_lo: float = 0.0) -> tuple[float, int]:
        stack = np.empty(STACK_DEPTH, dtype=np.int64)
        d, i = nearest_surface(float(x), float(x_lo), float(y), float(bound), self.disks, self.boxes, self.nodes,
                               self.perm, stack)
        return float(d), int(i)
