"""Harmonic measure of ``B(A)``: capacity estimates and attachment sampling.

The escape density at a boundary point is ``lim (1/eps) P(escape from eps
off the boundary)``. Sampling a point uniformly in hyperbolic length and
keeping it iff a probe launched ``eps`` outside it escapes therefore draws
from the normalised harmonic measure, and the acceptance rate times
``length / eps`` estimates its total mass, the capacity.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DegenerateBoundary, EmptyAggregate, NoAcceptanceWithinBudget
from .geometry import HalfPlanePoint, hyp_distance_xy
from .rng import child, generator
from .spatial import STACK_DEPTH, nearest_surface_brute
from .walker import ESCAPED, HIT, ProbeParams, WalkDomain, attach_block, boundary_probes, walk

ATTACH_BLOCK = 128
MAX_TRIALS = 10_000_000
TIE_TOL = 1e-9


@dataclass(frozen=True)
class CapacityEstimate:
    value: float
    stderr: float
    n_probes: int
    eps_used: float
    accepted: int = 0
    relaunched: int = 0
    # escape-rate ratio p(eps)/eps over p(eps/10)/(eps/10), when diagnostics are on
    richardson: float | None = None


@dataclass(frozen=True)
class Attachment:
    point: HalfPlanePoint
    owner: int
    trials: int
    exhausted: int
    theta: float


def _check(aggregate):
    if len(aggregate) == 0:
        raise EmptyAggregate("aggregate has no particles")
    arcs = aggregate.arcset()
    if len(arcs) == 0 or not arcs.total_hyp_len > 1e-300:
        raise DegenerateBoundary("exposed boundary has zero length")
    return arcs


def _estimate(aggregate, arcs, n, params, seed, threads):
    batch = boundary_probes(aggregate, n, params, seed, threads=threads, arcs=arcs)
    k = int(np.count_nonzero(batch.escaped))
    p = k / n
    scale = arcs.total_hyp_len / params.eps_offset
    return scale * p, scale * math.sqrt(p * (1 - p) / n), k, int(batch.relaunch.sum())


def estimate_capacity(aggregate, n_probes: int, params: ProbeParams, seed, threads: int = 1,
                      diagnostics: bool = False) -> CapacityEstimate:
    if n_probes < 1000:
        raise ValueError("n_probes must be >= 1000")
    arcs = _check(aggregate)
    value, se, k, rel = _estimate(aggregate, arcs, n_probes, params, child(seed, 0), threads)
    ratio = None
    if diagnostics:
        fine = params.with_eps(params.eps_offset / 10)
        v2, _, k2, _ = _estimate(aggregate, arcs, n_probes, fine, child(seed, 1), threads)
        ratio = value / v2 if v2 > 0 else math.inf
    return CapacityEstimate(value, se, n_probes, params.eps_offset, k, rel, ratio)


def sample_attachment(aggregate, params: ProbeParams, seed, threads: int = 1,
                      max_trials: int = MAX_TRIALS) -> Attachment:
    """First-success rejection draw from the harmonic measure on ``∂B(A)``.

    Trials run in fixed blocks of :data:`ATTACH_BLOCK`; block ``b`` draws from
    substream ``b``. Waves of ``threads`` blocks run concurrently and the
    lowest-index success wins, so the result does not depend on ``threads``.
    """
    arcs = _check(aggregate)
    dom = WalkDomain.of(aggregate, params)
    args = dom.walk_args()
    eps = params.eps_offset

    def run(b):
        return attach_block(ATTACH_BLOCK, arcs.geom, arcs.cdf, eps, *args, generator(seed, b))

    n_blocks = (max_trials + ATTACH_BLOCK - 1) // ATTACH_BLOCK
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        exhausted = 0
        b = 0
        while b < n_blocks:
            wave = range(b, min(b + max(1, threads), n_blocks))
            results = list(pool.map(run, wave)) if pool else [run(i) for i in wave]
            for blk, (k, i, th, qx, qxl, qy, ex) in zip(wave, results):
                exhausted += ex
                if k >= 0:
                    q = HalfPlanePoint(qx, qy, qxl)
                    owner = _tie_break(aggregate, int(arcs.owner[i]), q)
                    return Attachment(q, owner, blk * ATTACH_BLOCK + k + 1, exhausted, th)
            b = wave.stop
    finally:
        if pool:
            pool.shutdown()
    raise NoAcceptanceWithinBudget(f"no escaping probe in {max_trials} trials")


def _tie_break(aggregate, owner: int, q: HalfPlanePoint) -> int:
    xy = aggregate.centers
    d = hyp_distance_xy(xy[:, 0], xy[:, 1], q.x, q.y, aggregate.centers_lo, q.x_lo)
    close = np.flatnonzero(np.abs(d - 2.0) <= TIE_TOL)
    return int(min(owner, close.min())) if len(close) else owner


def sample_attachment_from_pole(aggregate, pole: HalfPlanePoint, params: ProbeParams,
                                rng: np.random.Generator, max_walks: int = 100_000) -> tuple[HalfPlanePoint, int]:
    """BIASED comparison tool: hitting point of a walker released from ``pole``.

    This is the harmonic measure seen from one particular point, which
    depends on that point; it is not the growth law and is kept only to
    contrast against :func:`sample_attachment`.
    """
    dom = WalkDomain.of(aggregate, params)
    disks, boxes, nodes, perm, floor_y, hit_shell, bx, by, cosh_far, max_steps = dom.walk_args()
    stack = np.empty(STACK_DEPTH, dtype=np.int64)
    for _ in range(max_walks):
        kind, _, x, xl, y = walk(pole.x, pole.x_lo, pole.y, disks, boxes, nodes, perm, stack, floor_y,
                                 hit_shell, bx, by, cosh_far, max_steps, False, rng)
        if kind == HIT:
            _, j = nearest_surface_brute(x, xl, y, disks)
            cx, cy, r, cxl = disks[j]
            dx = (x - cx) + (xl - cxl)
            s = r / math.hypot(dx, y - cy)
            return HalfPlanePoint.from_exact(Fraction(cx) + Fraction(cxl) + Fraction(dx * s), cy + (y - cy) * s), int(j)
        if kind != ESCAPED:
            continue
    raise NoAcceptanceWithinBudget(f"no walker from the pole hit the aggregate in {max_walks} walks")
