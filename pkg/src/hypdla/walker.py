"""Brownian escape probes by walk-on-spheres in the half-plane chart.

Hyperbolic Brownian motion and chart Brownian motion trace the same paths
up to a time change, and only hitting locations matter here, so the walker
is a plain Euclidean walk-on-spheres. The absorbing set is the union of the
radius-2 disks plus the ideal boundary (the line ``y = 0`` and the point at
infinity). Each step jumps uniformly onto the largest circle that avoids
both, i.e. radius ``min(distance to nearest disk, y)``. The abscissa is
carried as a double-double ``(x, xl)`` so deep branches stay resolved.

Termination rules, checked before every jump:

* hit      -- distance to the nearest disk below ``hit_shell * y``
              (a hyperbolic shell of roughly constant width ``hit_shell``);
* escaped  -- ``y`` below ``floor_shell`` times the lowest disk bottom, or
              hyperbolic distance from the aggregate's bounding ball above
              ``far_cutoff``;
* budget   -- ``max_steps`` jumps without a decision.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from numba import njit

from .boundary import sample_arc_point
from .errors import StartBelowFloor, StartInsideAggregate
from .geometry import HalfPlanePoint
from .rng import generator
from .spatial import STACK_DEPTH, dd_add, nearest_surface, nearest_surface_brute

ESCAPED, HIT, EXHAUSTED, VIOLATION = 0, 1, 2, 3


class OutcomeKind(enum.IntEnum):
    ESCAPED = ESCAPED
    HIT_AGGREGATE = HIT
    BUDGET_EXHAUSTED = EXHAUSTED


@dataclass(frozen=True)
class ProbeParams:
    eps_offset: float = 1e-2
    hit_shell: float = 1e-3
    floor_shell: float = 1e-4
    far_cutoff: float = 15.0
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not 0 < self.eps_offset <= 0.05:
            raise ValueError(f"eps_offset must lie in (0, 0.05], got {self.eps_offset}")
        if not 0 < self.hit_shell <= 0.1 * self.eps_offset * (1 + 1e-12):
            raise ValueError("hit_shell must satisfy 0 < hit_shell <= 0.1 * eps_offset")
        if not 0 < self.floor_shell < 1:
            raise ValueError("floor_shell must lie in (0, 1)")
        if self.far_cutoff < 10:
            raise ValueError("far_cutoff must be >= 10")
        if self.max_steps < 10_000:
            raise ValueError("max_steps must be >= 1e4")

    def with_eps(self, eps: float) -> "ProbeParams":
        """Same parameters at offset ``eps``, keeping ``hit_shell / eps_offset`` fixed."""
        return replace(self, eps_offset=eps, hit_shell=self.hit_shell * eps / self.eps_offset)


@dataclass(frozen=True)
class ProbeOutcome:
    kind: OutcomeKind
    steps: int
    end: tuple[float, float]


# ---------------------------------------------------------------------------
# kernels


@njit(cache=True, nogil=True)
def walk(x, xl, y, disks, boxes, nodes, perm, stack, floor_y, hit_shell, bx, by, cosh_far, max_steps, debug, rng):
    steps = 0
    while True:
        if steps >= max_steps:
            return EXHAUSTED, steps, x, xl, y
        d, j = nearest_surface(x, xl, y, y, disks, boxes, nodes, perm, stack)
        if j >= 0 and d < hit_shell * y:
            return HIT, steps, x, xl, y
        if y < floor_y:
            return ESCAPED, steps, x, xl, y
        if 1.0 + ((x - bx) ** 2 + (y - by) ** 2) / (2.0 * y * by) > cosh_far:
            return ESCAPED, steps, x, xl, y
        a = 2.0 * np.pi * rng.random()
        x, xl = dd_add(x, xl, d * np.cos(a))
        y += d * np.sin(a)
        steps += 1
        if debug:
            dd, _ = nearest_surface_brute(x, xl, y, disks)
            if dd < -1e-12 * y or y <= 0.0:
                return VIOLATION, steps, x, xl, y


@njit(cache=True, nogil=True)
def probe_block(
    n, geom, cdf, eps, disks, boxes, nodes, perm, floor_y, hit_shell, bx, by, cosh_far, max_steps, rng,
    out_arc, out_theta, out_kind, out_steps, out_relaunch,
):
    """``n`` length-uniform boundary probes; exhausted walks are relaunched from the same start."""
    stack = np.empty(STACK_DEPTH, dtype=np.int64)
    for k in range(n):
        i, th, qx, qxl, qy = sample_arc_point(geom, cdf, rng)
        sx, sxl = dd_add(qx, qxl, eps * qy * np.cos(th))
        sy = qy + eps * qy * np.sin(th)
        relaunch = 0
        while True:
            kind, steps, _, _, _ = walk(sx, sxl, sy, disks, boxes, nodes, perm, stack, floor_y, hit_shell, bx, by,
                                     cosh_far, max_steps, False, rng)
            if kind != EXHAUSTED:
                break
            relaunch += 1
        out_arc[k] = i
        out_theta[k] = th
        out_kind[k] = kind
        out_steps[k] = steps
        out_relaunch[k] = relaunch


@njit(cache=True, nogil=True)
def attach_block(
    n, geom, cdf, eps, disks, boxes, nodes, perm, floor_y, hit_shell, bx, by, cosh_far, max_steps, rng,
):
    """Run up to ``n`` rejection trials; stop at the first escape.

    Returns ``(k, arc, theta, qx, qx_lo, qy, exhausted)``; ``k = -1`` if no
    trial escaped. Exhausted trials are discarded.
    """
    stack = np.empty(STACK_DEPTH, dtype=np.int64)
    exhausted = 0
    for k in range(n):
        i, th, qx, qxl, qy = sample_arc_point(geom, cdf, rng)
        sx, sxl = dd_add(qx, qxl, eps * qy * np.cos(th))
        sy = qy + eps * qy * np.sin(th)
        kind, steps, _, _, _ = walk(sx, sxl, sy, disks, boxes, nodes, perm, stack, floor_y, hit_shell, bx, by,
                                    cosh_far, max_steps, False, rng)
        if kind == ESCAPED:
            return k, i, th, qx, qxl, qy, exhausted
        if kind == EXHAUSTED:
            exhausted += 1
    return -1, -1, 0.0, 0.0, 0.0, 0.0, exhausted


# ---------------------------------------------------------------------------
# python surface


@dataclass(frozen=True)
class WalkDomain:
    """Frozen snapshot of everything a walker needs about an aggregate."""

    disks: np.ndarray
    boxes: np.ndarray
    nodes: np.ndarray
    perm: np.ndarray
    floor_y: float
    bx: float
    by: float
    cosh_far: float
    params: ProbeParams

    @classmethod
    def of(cls, aggregate, params: ProbeParams) -> "WalkDomain":
        idx = aggregate.index()
        return cls(
            idx.disks, idx.boxes, idx.nodes, idx.perm,
            params.floor_shell * aggregate.floor_level,
            aggregate.origin.x, aggregate.origin.y,
            math.cosh(aggregate.bound_radius + params.far_cutoff),
            params,
        )

    def walk_args(self):
        p = self.params
        return (self.disks, self.boxes, self.nodes, self.perm, self.floor_y, p.hit_shell,
                self.bx, self.by, self.cosh_far, p.max_steps)


def launch_point(q: HalfPlanePoint, normal, eps: float) -> HalfPlanePoint:
    """Offset ``q`` by hyperbolic length ``eps`` (to first order) along ``normal``."""
    nx, ny = normal
    x, xl = dd_add(q.x, q.x_lo, eps * q.y * nx)
    return HalfPlanePoint(x, q.y + eps * q.y * ny, xl)


def escape_probe(start: HalfPlanePoint, aggregate, params: ProbeParams, rng: np.random.Generator,
                 debug: bool = False, domain: WalkDomain | None = None) -> ProbeOutcome:
    dom = domain if domain is not None else WalkDomain.of(aggregate, params)
    d, j = nearest_surface_brute(start.x, start.x_lo, start.y, dom.disks)
    if d < 0:
        raise StartInsideAggregate(f"start ({start.x}, {start.y}) lies inside disk {j}")
    if start.y < dom.floor_y:
        raise StartBelowFloor(f"start height {start.y} is below the floor {dom.floor_y}")
    disks, boxes, nodes, perm, floor_y, hit_shell, bx, by, cosh_far, max_steps = dom.walk_args()
    stack = np.empty(STACK_DEPTH, dtype=np.int64)
    kind, steps, x, xl, y = walk(start.x, start.x_lo, start.y, disks, boxes, nodes, perm, stack, floor_y,
                                 hit_shell, bx, by, cosh_far, max_steps, debug, rng)
    if kind == VIOLATION:
        raise AssertionError(f"walk-on-spheres step left the domain at ({x}, {y}) after {steps} steps")
    return ProbeOutcome(OutcomeKind(kind), int(steps), (float(x + xl), float(y)))


def batch_probes(starts, aggregate, params: ProbeParams, master_seed, n_threads_hint: int = 1) -> list[ProbeOutcome]:
    """Probe every start; probe ``i`` draws from substream ``i`` of ``master_seed``."""
    starts = list(starts)
    if not starts:
        return []
    dom = WalkDomain.of(aggregate, params)

    def one(i):
        try:
            return escape_probe(starts[i], aggregate, params, generator(master_seed, i), domain=dom)
        except (StartInsideAggregate, StartBelowFloor) as exc:
            raise type(exc)(f"probe {i}: {exc}") from exc

    if n_threads_hint <= 1:
        return [one(i) for i in range(len(starts))]
    with ThreadPoolExecutor(max_workers=n_threads_hint) as pool:
        return list(pool.map(one, range(len(starts))))


@dataclass
class ProbeBatch:
    """Per-probe results of length-uniform boundary probing."""

    arc: np.ndarray
    theta: np.ndarray
    kind: np.ndarray
    steps: np.ndarray
    relaunch: np.ndarray

    @property
    def escaped(self) -> np.ndarray:
        return self.kind == ESCAPED


BLOCK = 4096


def boundary_probes(aggregate, n: int, params: ProbeParams, seed, threads: int = 1, arcs=None) -> ProbeBatch:
    """Launch ``n`` probes from length-uniform boundary points.

    Probes are split into fixed blocks of :data:`BLOCK`; block ``b`` uses
    substream ``b`` of ``seed``, so the result is independent of ``threads``.
    """
    arcs = arcs if arcs is not None else aggregate.arcset()
    dom = WalkDomain.of(aggregate, params)
    args = dom.walk_args()
    out = ProbeBatch(np.empty(n, np.int64), np.empty(n), np.empty(n, np.int64), np.empty(n, np.int64),
                     np.empty(n, np.int64))
    blocks = [(b, b * BLOCK, min(n, (b + 1) * BLOCK)) for b in range((n + BLOCK - 1) // BLOCK)]

    def run(block):
        b, s, e = block
        probe_block(e - s, arcs.geom, arcs.cdf, params.eps_offset, *args, generator(seed, b),
                    out.arc[s:e], out.theta[s:e], out.kind[s:e], out.steps[s:e], out.relaunch[s:e])

    if threads <= 1:
        for blk in blocks:
            run(blk)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, blocks))
    return out
