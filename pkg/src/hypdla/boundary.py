"""Exposed boundary of a union of radius-2 hyperbolic balls.

Each ball is a Euclidean disk in the chart. The boundary of the union is
a set of circular arcs: every owner circle minus the angular intervals
covered by the other disks. Angles are Euclidean angles about the disk's
Euclidean center, in ``[0, 2pi)``; an exposed piece that wraps through 0 is
stored as two arcs. Disk tuples are ``(cx, cy, r, cx_lo)`` with a
double-double abscissa.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.integrate import quad

from .errors import DegenerateBoundary, EmptyAggregate
from .geometry import EuclidDisk, HalfPlanePoint
from .spatial import dd_add, two_sum

TWO_PI = 2.0 * math.pi
TANGENT_TOL = 1e-12
MIN_ARC = 1e-13

# geom columns
CX, CY, RAD, T0, T1, YMIN, CXL = range(7)
NCOL = 7


@dataclass(frozen=True)
class Arc:
    owner: int
    disk: EuclidDisk
    theta0: float
    theta1: float
    hyp_len: float

    def point(self, theta: float) -> tuple[float, float]:
        return self.disk.cx + self.disk.r * math.cos(theta), self.disk.cy + self.disk.r * math.sin(theta)


@dataclass(frozen=True)
class ArcSet:
    owner: np.ndarray  # (m,) int64
    geom: np.ndarray  # (m, 7) cx, cy, r, theta0, theta1, ymin, cx_lo
    hyp_len: np.ndarray  # (m,)
    cdf: np.ndarray  # (m,) prefix sums of hyp_len

    @property
    def total_hyp_len(self) -> float:
        return float(self.cdf[-1]) if len(self.cdf) else 0.0

    def __len__(self) -> int:
        return len(self.owner)

    @property
    def arcs(self) -> list[Arc]:
        return [
            Arc(int(o), EuclidDisk(g[CX], g[CY], g[RAD], g[CXL]), float(g[T0]), float(g[T1]), float(h))
            for o, g, h in zip(self.owner, self.geom, self.hyp_len)
        ]

    @classmethod
    def from_arrays(cls, owner, geom, hyp_len) -> "ArcSet":
        owner = np.ascontiguousarray(owner, dtype=np.int64)
        geom = np.ascontiguousarray(geom, dtype=np.float64).reshape(-1, NCOL)
        hyp_len = np.ascontiguousarray(hyp_len, dtype=np.float64)
        return cls(owner, geom, hyp_len, np.cumsum(hyp_len))


# ---------------------------------------------------------------------------
# circle/disk clipping


def cover_interval(ci, cj):
    """Angular interval of circle ``ci`` lying strictly inside disk ``cj``.

    Returns ``None`` (no cover), ``"full"`` or ``(a, b)`` with ``a`` in
    ``[0, 2pi)`` and ``b - a`` in ``(0, 2pi)``; ``b`` may exceed ``2pi``.
    """
    xi, yi, ri = ci[:3]
    xj, yj, rj = cj[:3]
    dx = (xj - xi) + ((cj[3] if len(cj) > 3 else 0.0) - (ci[3] if len(ci) > 3 else 0.0))
    d = math.hypot(dx, yj - yi)
    if d >= (ri + rj) * (1.0 - TANGENT_TOL):
        return None
    if d + ri <= rj:
        return "full"
    if d + rj <= ri:
        return None
    cos_a = (d * d + ri * ri - rj * rj) / (2.0 * d * ri)
    alpha = math.acos(min(1.0, max(-1.0, cos_a)))
    if alpha <= 0.0:
        return None
    phi = math.atan2(yj - yi, dx)
    a = (phi - alpha) % TWO_PI
    return a, a + 2.0 * alpha


def _split(cover):
    a, b = cover
    if b <= TWO_PI:
        return [(a, b)]
    return [(a, TWO_PI), (0.0, b - TWO_PI)]


def subtract_intervals(exposed, cover):
    """``exposed`` minus one cover interval (as returned by cover_interval)."""
    if cover is None:
        return exposed
    if cover == "full":
        return []
    out = exposed
    for a, b in _split(cover):
        nxt = []
        for s, e in out:
            if b <= s or a >= e:
                nxt.append((s, e))
                continue
            if s < a and a - s > MIN_ARC:
                nxt.append((s, a))
            if b < e and e - b > MIN_ARC:
                nxt.append((b, e))
        out = nxt
    return out


def union_measure(covers) -> float:
    """Total angular measure of a union of cover intervals."""
    pieces = []
    for c in covers:
        if c is None:
            continue
        if c == "full":
            return TWO_PI
        pieces.extend(_split(c))
    pieces.sort()
    total = 0.0
    cur_s = cur_e = None
    for s, e in pieces:
        if cur_e is None or s > cur_e:
            if cur_e is not None:
                total += cur_e - cur_s
            cur_s, cur_e = s, e
        else:
            cur_e = max(cur_e, e)
    if cur_e is not None:
        total += cur_e - cur_s
    return total


def arc_ymin(cy: float, r: float, t0: float, t1: float) -> float:
    y = min(cy + r * math.sin(t0), cy + r * math.sin(t1))
    # lowest point of the circle sits at 3pi/2
    if t0 <= 1.5 * math.pi <= t1:
        y = cy - r
    return y


def arc_hyp_length(arc_or_disk, theta0: float | None = None, theta1: float | None = None) -> float:
    """Hyperbolic length ``∫ r / (cy + r sin t) dt`` of a chart arc.

    Accepts an :class:`Arc`, or a disk plus an angular interval.
    """
    if isinstance(arc_or_disk, Arc):
        disk, theta0, theta1 = arc_or_disk.disk, arc_or_disk.theta0, arc_or_disk.theta1
    else:
        disk = arc_or_disk
    if theta1 <= theta0:
        return 0.0
    # integrand depends only on r/cy, so normalise for conditioning
    k = disk.r / disk.cy
    val, _ = quad(lambda t: k / (1.0 + k * math.sin(t)), theta0, theta1, epsrel=1e-11, epsabs=0.0, limit=200)
    return val


def _arc_rows(disk, pieces):
    cx, cy, r = disk[:3]
    cxl = disk[3] if len(disk) > 3 else 0.0
    rows = []
    lens = []
    for a, b in pieces:
        rows.append((cx, cy, r, a, b, arc_ymin(cy, r, a, b), cxl))
        lens.append(arc_hyp_length(EuclidDisk(cx, cy, r), a, b))
    return rows, lens


def exposed_arcs(aggregate) -> ArcSet:
    """From-scratch boundary of ``B(A)`` for anything exposing ``.disks``.

    ``disks`` is an ``(n, 3)`` or ``(n, 4)`` array of radius-2 ball images.
    """
    disks = _as4(aggregate.disks)
    n = len(disks)
    if n == 0:
        raise EmptyAggregate("aggregate has no particles")
    owners, rows, lens = [], [], []
    for i in range(n):
        ci = tuple(disks[i])
        d = np.hypot((disks[:, 0] - ci[0]) + (disks[:, 3] - ci[3]), disks[:, 1] - ci[1])
        near = np.flatnonzero(d < disks[:, 2] + ci[2])
        covers = [cover_interval(ci, tuple(disks[j])) for j in near if j != i]
        exposed = _complement(covers)
        r, ln = _arc_rows(ci, exposed)
        owners.extend([i] * len(r))
        rows.extend(r)
        lens.extend(ln)
    return ArcSet.from_arrays(owners, np.array(rows).reshape(-1, NCOL), lens)


def _as4(disks):
    disks = np.asarray(disks, dtype=float)
    if disks.ndim == 2 and disks.shape[1] == 3:
        disks = np.column_stack([disks, np.zeros(len(disks))])
    return disks.reshape(-1, 4)


def _complement(covers):
    exposed = [(0.0, TWO_PI)]
    for c in covers:
        exposed = subtract_intervals(exposed, c)
        if not exposed:
            break
    return exposed


# ---------------------------------------------------------------------------
# sampling


@njit(cache=True, nogil=True)
def sample_arc_point(geom, cdf, rng):
    """Length-uniform boundary point: returns ``(arc, theta, qx, qx_lo, qy)``."""
    m = cdf.shape[0]
    total = cdf[m - 1]
    u = rng.random() * total
    i = np.searchsorted(cdf, u, side="right")
    if i >= m:
        i = m - 1
    cx = geom[i, 0]
    cy = geom[i, 1]
    r = geom[i, 2]
    t0 = geom[i, 3]
    t1 = geom[i, 4]
    ymin = geom[i, 5]
    while True:
        th = t0 + (t1 - t0) * rng.random()
        if th <= t0 or th >= t1:
            continue
        y = cy + r * np.sin(th)
        if rng.random() * y <= ymin:
            qx, e = two_sum(cx, r * np.cos(th))
            qx, qxl = dd_add(qx, e, geom[i, 6])
            return i, th, qx, qxl, y


def sample_boundary_uniform(arcs: ArcSet, rng: np.random.Generator):
    """Draw ``(point, owner, outward unit normal)`` with density ∝ hyperbolic length."""
    if len(arcs) == 0 or not arcs.total_hyp_len > 1e-300:
        raise DegenerateBoundary("exposed boundary has zero length")
    i, th, qx, qxl, qy = sample_arc_point(arcs.geom, arcs.cdf, rng)
    return HalfPlanePoint(qx, qy, qxl), int(arcs.owner[i]), (math.cos(th), math.sin(th))


# ---------------------------------------------------------------------------
# incremental maintenance for the growth loop


class BoundaryTracker:
    """Keeps the exposed arcs up to date as disks are appended.

    Only owners whose disks overlap the new disk are re-clipped. Arc data
    live in flat slot arrays; stale slots are masked and periodically
    compacted. :meth:`arcset` always returns arcs in canonical
    ``(owner, theta0)`` order, so sampling depends only on the disk set,
    not on insertion history.
    """

    def __init__(self):
        self._disks = np.empty((16, 4))
        self._n = 0
        self._exposed: list[list[tuple[float, float]]] = []
        self._slots: list[list[int]] = []
        self._owner = np.empty(64, dtype=np.int64)
        self._geom = np.empty((64, NCOL))
        self._len = np.empty(64)
        self._alive = np.zeros(64, dtype=bool)
        self._used = 0
        self._cache: ArcSet | None = None

    def __len__(self) -> int:
        return self._n

    def add(self, disk) -> list[int]:
        """Insert a disk ``(cx, cy, r[, cx_lo])``; returns the owners that were re-clipped."""
        disk = tuple(float(v) for v in disk)
        if len(disk) == 3:
            disk = disk + (0.0,)
        if self._n == len(self._disks):
            self._disks = np.concatenate([self._disks, np.empty_like(self._disks)])
        k = self._n
        prev = self._disks[:k]
        d = np.hypot((prev[:, 0] - disk[0]) + (prev[:, 3] - disk[3]), prev[:, 1] - disk[1])
        near = np.flatnonzero(d < prev[:, 2] + disk[2])
        self._disks[k] = disk
        self._n += 1
        self._exposed.append([])
        self._slots.append([])

        covers = []
        touched = []
        for j in near:
            j = int(j)
            cj = tuple(self._disks[j])
            covers.append(cover_interval(disk, cj))
            if self._exposed[j]:
                new = subtract_intervals(self._exposed[j], cover_interval(cj, disk))
                if new != self._exposed[j]:
                    self._set_arcs(j, new)
                    touched.append(j)
        self._set_arcs(k, _complement(covers))
        touched.append(k)
        self._cache = None
        return touched

    def _set_arcs(self, owner: int, pieces):
        for s in self._slots[owner]:
            self._alive[s] = False
        self._exposed[owner] = pieces
        rows, lens = _arc_rows(tuple(self._disks[owner]), pieces)
        need = self._used + len(rows)
        if need > len(self._alive):
            self._compact(extra=len(rows))
        slots = []
        for row, ln in zip(rows, lens):
            s = self._used
            self._owner[s] = owner
            self._geom[s] = row
            self._len[s] = ln
            self._alive[s] = True
            self._used += 1
            slots.append(s)
        self._slots[owner] = slots

    def _compact(self, extra: int):
        live = np.flatnonzero(self._alive[: self._used])
        cap = max(64, 2 * (len(live) + extra))
        owner = np.empty(cap, dtype=np.int64)
        geom = np.empty((cap, NCOL))
        ln = np.empty(cap)
        alive = np.zeros(cap, dtype=bool)
        m = len(live)
        owner[:m] = self._owner[live]
        geom[:m] = self._geom[live]
        ln[:m] = self._len[live]
        alive[:m] = True
        remap = np.full(self._used, -1, dtype=np.int64)
        remap[live] = np.arange(m)
        self._slots = [[int(remap[s]) for s in slots] for slots in self._slots]
        self._owner, self._geom, self._len, self._alive = owner, geom, ln, alive
        self._used = m

    def exposed_intervals(self, owner: int) -> list[tuple[float, float]]:
        return list(self._exposed[owner])

    def arcset(self) -> ArcSet:
        if self._n == 0:
            raise EmptyAggregate("aggregate has no particles")
        if self._cache is None:
            live = np.flatnonzero(self._alive[: self._used])
            order = np.lexsort((self._geom[live, T0], self._owner[live]))
            sel = live[order]
            self._cache = ArcSet.from_arrays(self._owner[sel], self._geom[sel], self._len[sel])
        return self._cache
