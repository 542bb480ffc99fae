"""The growing set of particle centers and its derived caches."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boundary import ArcSet, BoundaryTracker
from .errors import EmptyAggregate, InvariantViolation
from .geometry import HalfPlanePoint, hyp_distance_xy
from .spatial import DiskIndex

PARTICLE_RADIUS = 1.0
ATTACH_RADIUS = 2.0  # radius of the balls whose union is B(A)
TANGENCY_TOL = 1e-9

_COSH2 = math.cosh(ATTACH_RADIUS)
_SINH2 = math.sinh(ATTACH_RADIUS)


@dataclass(frozen=True)
class Particle:
    center: HalfPlanePoint
    birth_index: int
    birth_time: float
    parent: int | None


class Aggregate:
    """Ordered particle list with radius-2 disk images and lazy indices.

    ``fixture=True`` skips the tangency/non-overlap checks so that
    hand-built sets (the spiral) can reuse the measurement code.
    """

    def __init__(self, origin: HalfPlanePoint, *, fixture: bool = False):
        self.origin = origin
        self.fixture = fixture
        self.particles: list[Particle] = []
        self._xy = np.empty((64, 2))
        self._xlo = np.empty(64)
        self._disks = np.empty((64, 4))
        self._tracker = BoundaryTracker()
        self._index: DiskIndex | None = None
        self._bound_radius = 0.0
        self.add(origin, parent=None, birth_time=0.0)

    # -- basic accessors ---------------------------------------------------

    def __len__(self) -> int:
        return len(self.particles)

    @property
    def centers(self) -> np.ndarray:
        """``(n, 2)`` view of chart coordinates (high word of x)."""
        return self._xy[: len(self.particles)]

    @property
    def centers_lo(self) -> np.ndarray:
        """Low words of the center abscissas."""
        return self._xlo[: len(self.particles)]

    @property
    def disks(self) -> np.ndarray:
        """``(n, 4)`` view of the radius-2 ball images: ``cx, cy, r, cx_lo``."""
        return self._disks[: len(self.particles)]

    @property
    def bound_radius(self) -> float:
        """Radius of a hyperbolic ball about the origin containing ``B(A)``."""
        return self._bound_radius + ATTACH_RADIUS

    @property
    def floor_level(self) -> float:
        """Lowest chart height reached by any radius-2 disk."""
        d = self.disks
        return float(np.min(d[:, 1] - d[:, 2]))

    # -- mutation ----------------------------------------------------------

    def add(self, center: HalfPlanePoint, parent: int | None, birth_time: float, check: bool = True) -> int:
        n = len(self.particles)
        if check and not self.fixture and n > 0:
            self._check_new(center, parent, birth_time, n)
        if n == len(self._xy):
            self._xy = np.concatenate([self._xy, np.empty_like(self._xy)])
            self._xlo = np.concatenate([self._xlo, np.empty_like(self._xlo)])
            self._disks = np.concatenate([self._disks, np.empty_like(self._disks)])
        self._xy[n] = (center.x, center.y)
        self._xlo[n] = center.x_lo
        self._disks[n] = (center.x, center.y * _COSH2, center.y * _SINH2, center.x_lo)
        self.particles.append(Particle(center, n, float(birth_time), parent))
        self._index = None
        d0 = hyp_distance_xy(self.origin.x, self.origin.y, center.x, center.y, self.origin.x_lo, center.x_lo)
        self._bound_radius = max(self._bound_radius, float(d0))
        return n

    def _check_new(self, center: HalfPlanePoint, parent, birth_time: float, n: int):
        if parent is None or not 0 <= parent < n:
            raise InvariantViolation(f"parent {parent} is not an earlier particle", n)
        if not birth_time > self.particles[-1].birth_time:
            raise InvariantViolation("birth times must strictly increase", n)
        prev = self.centers
        d = hyp_distance_xy(prev[:, 0], prev[:, 1], center.x, center.y, self.centers_lo, center.x_lo)
        if abs(d[parent] - ATTACH_RADIUS) > TANGENCY_TOL:
            raise InvariantViolation(f"distance {d[parent]!r} to parent {parent} is not 2", n)
        j = int(np.argmin(d))
        if d[j] < ATTACH_RADIUS - TANGENCY_TOL:
            raise InvariantViolation(f"overlaps particle {j} at distance {d[j]!r}", n)

    # -- derived structures ------------------------------------------------

    def arcset(self) -> ArcSet:
        if not self.particles:
            raise EmptyAggregate("aggregate has no particles")
        t = self._tracker
        for i in range(len(t), len(self.particles)):
            t.add(self._disks[i])
        return t.arcset()

    def index(self) -> DiskIndex:
        if self._index is None:
            self._index = DiskIndex.build(self.disks.copy())
        return self._index

    def copy(self) -> "Aggregate":
        other = Aggregate.__new__(Aggregate)
        other.origin = self.origin
        other.fixture = self.fixture
        other.particles = list(self.particles)
        other._xy = self._xy.copy()
        other._xlo = self._xlo.copy()
        other._disks = self._disks.copy()
        other._tracker = BoundaryTracker()
        other._index = None
        other._bound_radius = self._bound_radius
        return other

    @classmethod
    def from_particles(cls, particles, *, fixture: bool = False, check: bool = True) -> "Aggregate":
        particles = list(particles)
        if not particles:
            raise EmptyAggregate("no particles")
        agg = cls(particles[0].center, fixture=fixture)
        for p in particles[1:]:
            agg.add(p.center, p.parent, p.birth_time, check=check)
        return agg

    @classmethod
    def from_centers(cls, centers, *, fixture: bool = True) -> "Aggregate":
        """Chain-parented aggregate from raw ``(x, y)`` pairs, birth time = index."""
        centers = [c if isinstance(c, HalfPlanePoint) else HalfPlanePoint(float(c[0]), float(c[1])) for c in centers]
        if not centers:
            raise EmptyAggregate("no particles")
        agg = cls(centers[0], fixture=fixture)
        for i, c in enumerate(centers[1:], start=1):
            agg.add(c, i - 1, float(i), check=not fixture)
        return agg

    def validate(self):
        """Re-check every growth invariant; raises :class:`InvariantViolation`."""
        ps = self.particles
        if not ps:
            raise EmptyAggregate("no particles")
        if ps[0].center != self.origin or ps[0].parent is not None or ps[0].birth_time != 0.0:
            raise InvariantViolation("first particle must be the origin at time 0 without parent", 0)
        xy = self.centers
        lo = self.centers_lo
        for i in range(1, len(ps)):
            p = ps[i]
            if p.birth_index != i:
                raise InvariantViolation(f"birth index {p.birth_index} != {i}", i)
            if not p.birth_time > ps[i - 1].birth_time:
                raise InvariantViolation("birth times must strictly increase", i)
            if self.fixture:
                continue
            if p.parent is None or not 0 <= p.parent < i:
                raise InvariantViolation(f"parent {p.parent} is not an earlier particle", i)
            d = hyp_distance_xy(xy[:i, 0], xy[:i, 1], xy[i, 0], xy[i, 1], lo[:i], lo[i])
            if abs(d[p.parent] - ATTACH_RADIUS) > TANGENCY_TOL:
                raise InvariantViolation(f"distance {d[p.parent]!r} to parent {p.parent} is not 2", i)
            j = int(np.argmin(d))
            if d[j] < ATTACH_RADIUS - TANGENCY_TOL:
                raise InvariantViolation(f"overlaps particle {j} at distance {d[j]!r}", i)
