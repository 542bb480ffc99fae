import math

import numpy as np
import pytest
from scipy import stats

from hypdla import suites
from hypdla.aggregate import Aggregate
from hypdla.boundary import (TWO_PI, BoundaryTracker, arc_hyp_length, cover_interval, exposed_arcs,
                             sample_boundary_uniform)
from hypdla.errors import DegenerateBoundary
from hypdla.geometry import EuclidDisk, HalfPlanePoint, hyp_ball_to_disk, hyp_distance, polar_point

# 2 pi sinh r, mpmath at 30 digits
CIRC_2 = 22.7882360257757509
CIRC_1 = 7.38400687288264535

O = HalfPlanePoint(0.0, 1.0)


def test_single_particle_full_circle():
    arcs = exposed_arcs(Aggregate(O))
    assert len(arcs) == 1 and arcs.owner[0] == 0
    assert arcs.geom[0, 3] == pytest.approx(0.0, abs=1e-15) and arcs.geom[0, 4] == pytest.approx(TWO_PI)
    assert arcs.total_hyp_len == pytest.approx(CIRC_2, rel=1e-12)


def test_disjoint_pair_two_full_circles():
    far = Aggregate.from_centers([O, polar_point(O, 4.5, 0.3)])
    arcs = exposed_arcs(far)
    assert sorted(arcs.owner.tolist()) == [0, 1]
    assert arcs.total_hyp_len == pytest.approx(2 * CIRC_2, rel=1e-10)


def test_tangent_pair_partial_circles():
    pair = Aggregate.from_centers([O, polar_point(O, 2.0, 1.0)])
    arcs = exposed_arcs(pair)
    for k in (0, 1):
        ang = np.sum(arcs.geom[arcs.owner == k, 4] - arcs.geom[arcs.owner == k, 3])
        assert 0 < ang < TWO_PI - 1e-3


def test_pair_against_membership_oracle():
    rep = suites.boundary_suite(oracle_points=1_000_000, draws=10)
    chk = {c.name: c for c in rep.checks}["pair_membership_oracle"]
    assert chk.passed, chk.line()


def test_arc_lengths():
    d = hyp_ball_to_disk(O, 2.0)
    assert arc_hyp_length(d, 1.0, 1.0) == 0.0
    rng = np.random.default_rng(0)
    for _ in range(5):
        c = HalfPlanePoint(rng.normal() * 3, 10 ** rng.uniform(-2, 2))
        assert arc_hyp_length(hyp_ball_to_disk(c, 1.0), 0.0, TWO_PI) == pytest.approx(CIRC_1, rel=1e-8)


def test_arc_length_additive():
    d = hyp_ball_to_disk(HalfPlanePoint(0.2, 0.7), 2.0)
    whole = arc_hyp_length(d, 0.3, 5.0)
    assert arc_hyp_length(d, 0.3, 2.0) + arc_hyp_length(d, 2.0, 5.0) == pytest.approx(whole, rel=1e-12)


def test_tracker_matches_from_scratch_clipping():
    agg = suites._grown(3, 80)
    inc = agg.arcset()
    full = exposed_arcs(agg)
    assert np.array_equal(inc.owner, full.owner)
    assert np.allclose(inc.geom, full.geom, rtol=0, atol=1e-12)


def test_tracker_reports_touched_owners():
    t = BoundaryTracker()
    d0 = hyp_ball_to_disk(O, 2.0)
    d1 = hyp_ball_to_disk(polar_point(O, 2.0, 0.5), 2.0)
    d2 = hyp_ball_to_disk(polar_point(O, 30.0, 0.5), 2.0)
    t.add((d0.cx, d0.cy, d0.r))
    assert set(t.add((d1.cx, d1.cy, d1.r))) >= {0, 1}
    assert set(t.add((d2.cx, d2.cy, d2.r))) == {2}


def test_tangent_disks_do_not_cover():
    a = EuclidDisk(0.0, 1.0, 1.0)
    b = EuclidDisk(2.0, 1.0, 1.0)
    assert cover_interval((a.cx, a.cy, a.r), (b.cx, b.cy, b.r)) is None


def test_sampled_points_lie_on_owner_circle():
    agg = suites._grown(1, 30)
    arcs = agg.arcset()
    rng = np.random.default_rng(1)
    for _ in range(2000):
        q, owner, (nx, ny) = sample_boundary_uniform(arcs, rng)
        assert hyp_distance(q, agg.particles[owner].center) == pytest.approx(2.0, abs=1e-9)
        assert math.hypot(nx, ny) == pytest.approx(1.0)
        d = [hyp_distance(q, p.center) for p in agg.particles]
        assert min(d) >= 2 - 1e-9


def test_degenerate_arcset_raises():
    from hypdla.boundary import ArcSet

    empty = ArcSet.from_arrays(np.empty(0), np.empty((0, 7)), np.empty(0))
    with pytest.raises(DegenerateBoundary):
        sample_boundary_uniform(empty, np.random.default_rng(0))


def test_boundary_battery_passes():
    rep = suites.boundary_suite(oracle_points=200_000)
    assert rep.passed, rep.text()


def test_mirror_pair_x_symmetry():
    agg = Aggregate.from_centers([HalfPlanePoint(-1.5, 1.0), HalfPlanePoint(1.5, 1.0)])
    arcs = agg.arcset()
    rng = np.random.default_rng(9)
    xs = np.array([sample_boundary_uniform(arcs, rng)[0].x for _ in range(100_000)])
    assert stats.ks_2samp(xs, -xs).pvalue > 1e-3
