import math

import numpy as np
import pytest

from hypdla import suites
from hypdla.aggregate import Aggregate
from hypdla.errors import InsufficientData
from hypdla.geometry import HalfPlanePoint, ball_volume, hyp_ball_to_disk, hyp_distance
from hypdla.growth import GrowthConfig, run
from hypdla.observables import (DensityProfile, StatsSeries, calibrate_reach_radius, density_profile, frame_stats,
                                hit_frequency, lemma_suites, spiral_fixture, stats_series, target_distances,
                                tau_crossings, y_l_minus, y_l_plus)

P = HalfPlanePoint
FIVE_SINH_1 = 5.87600596821900728  # mpmath


def test_frame_single():
    f = frame_stats(Aggregate(P(0, 1)))
    assert (f.X, f.Y, f.tildeY, f.R, f.front_indices) == (0.0, 1.0, 1.0, 0.0, (0,))


def test_frame_three_points():
    A = Aggregate.from_centers([P(0, 1), P(3, 1), P(0, 5)])
    f = frame_stats(A)
    assert (f.X, f.Y) == (3.0, 5.0)
    assert 5 * math.sinh(1) == pytest.approx(FIVE_SINH_1, rel=1e-15)
    assert 2 in f.front_indices and 0 not in f.front_indices
    assert f.tildeY == 5.0


def test_y_l_markers():
    A = Aggregate.from_centers([P(0, 1), P(3, 1), P(-2, 4)])
    assert y_l_plus(A, 10.0) is None
    assert y_l_plus(A, 1.0) == 1.0
    assert y_l_minus(A, -1.0) == 4.0
    assert y_l_minus(A, -10.0) is None


def test_front_criterion_brute_force():
    rng = np.random.default_rng(0)
    t = np.linspace(0, 2 * np.pi, 4001)
    for _ in range(1000):
        n = rng.integers(1, 8)
        pts = [P(0.0, 1.0)] + [P(float(rng.normal() * 3), float(10 ** rng.uniform(-1, 1))) for _ in range(n)]
        A = Aggregate.from_centers(pts)
        f = frame_stats(A)
        brute = []
        for i, p in enumerate(pts):
            d = hyp_ball_to_disk(p, 1.0)
            # the extreme |x| of the disk image sits at t = 0 or pi, both on the grid
            if np.max(np.abs(d.cx + d.r * np.cos(t))) >= f.X:
                brute.append(i)
        assert tuple(brute) == f.front_indices


def test_series_matches_frames():
    rec = run(GrowthConfig(n_particles=120, seed=3))
    s = stats_series(rec)
    for k in (0, 1, 50, 119):
        f = frame_stats(rec.to_aggregate(k + 1))
        assert (s.X[k], s.Y[k], s.tildeY[k]) == (f.X, f.Y, f.tildeY)
        assert s.R[k] == f.R
        assert s.frame(k).R == f.R


def test_series_csv_header():
    rec = run(GrowthConfig(n_particles=5, seed=3))
    lines = stats_series(rec).to_csv().splitlines()
    assert lines[0] == "step,t,n,X,Y,tildeY,R"
    assert len(lines) == 6


def test_tau_crossings():
    s = StatsSeries(np.arange(5.0), np.array([0.0, 0.5, 1.2, 1.9, 4.5]), np.ones(5), np.ones(5))
    assert tau_crossings(s, 1.0) == [(0, 2, 1.2), (1, 4, 4.5), (2, 4, 4.5)]
    assert tau_crossings(s, 100.0) == []
    with pytest.raises(ValueError):
        tau_crossings(s, 0.0)


def test_density_profile_naive_scan():
    rec = run(GrowthConfig(n_particles=150, seed=9))
    A = rec.to_aggregate()
    radii = [0.0, 1.0, 2.0, 3.5, 6.0]
    prof = density_profile(A, radii=radii)
    d = [hyp_distance(A.origin, p.center) for p in A.particles]
    for R, c in zip(radii, prof.counts):
        assert c == sum(x <= R + 1e-9 for x in d)
    assert prof.counts[0] == 1 and math.isinf(prof.ratios[0])
    assert prof.volumes[2] == pytest.approx(ball_volume(2.0))
    assert prof.to_csv().splitlines()[0] == "R,count,volume,ratio"


def test_density_max_ratio_window():
    prof = DensityProfile(np.array([0.0, 2.0, 4.0]), np.array([1, 5, 9]), np.array([0, 1, 1.0]),
                          np.array([np.inf, 5.0, 9.0]))
    assert prof.max_ratio(2.0, 3.0) == 5.0
    assert prof.max_ratio(2.0) == 9.0


def test_spiral_zero_turns():
    sp = spiral_fixture(0.0)
    assert len(sp) == 1 and sp.particles[0].center == P(0, 1)


def test_spiral_spacing_and_decay():
    sp = spiral_fixture(0.8)
    c = [p.center for p in sp.particles]
    gaps = [hyp_distance(a, b) for a, b in zip(c, c[1:])]
    assert max(gaps) <= 1.9 + 1e-9
    prof = density_profile(sp, radii=[6.0, 12.0])
    assert prof.ratios[1] < prof.ratios[0]


def test_reach_helpers():
    d = np.array([[0.5, 3.0], [2.0, 7.0]])
    assert hit_frequency(d, 2.0) == 0.5
    assert calibrate_reach_radius(d, [1.0, 2.0, 3.0, 8.0], target=0.75) == 3.0
    A = Aggregate(P(0, 1))
    assert np.allclose(target_distances(A), 8.0)


def test_lemma_suites_need_data():
    rec = run(GrowthConfig(n_particles=20, seed=1))
    with pytest.raises(InsufficientData):
        lemma_suites([rec])


@pytest.mark.slow
def test_lemma_suites_on_ensemble(ensemble):
    recs = ensemble("main", 30, 2000)
    pilot = ensemble("pilot", 20, 2000)
    rep = suites.lemmas_suite(recs, pilot, n_particles=2000)
    print(rep.text())
    names = {c.name for c in rep.checks}
    assert {"x_growth.slope_positive", "x_growth.permuted_control_null"} <= names
    assert {c.name: c for c in rep.checks}["x_growth.permuted_control_null"].passed
