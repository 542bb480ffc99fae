"""Exit criteria. Each test prints one PASS/FAIL line, repeated in the terminal summary.

Ensemble criteria reuse cached run records (``$HYPDLA_CACHE`` or
``tests/.cache``); on a cold cache the runs are grown first, which takes
roughly half an hour on one core. Runtime limits exclude that growth.
"""

import time

import pytest

from hypdla import suites

from conftest import record_acceptance

pytestmark = pytest.mark.acceptance


def _report(number, title, rep, names=None, runtime=None, limit=None):
    checks = [c for c in rep.checks if names is None or c.name in names]
    ok = all(c.passed for c in checks)
    parts = [f"{c.name}={'ok' if c.passed else 'FAILED'}({c.line().split('value=', 1)[1]})" for c in checks]
    if runtime is not None:
        fast = limit is None or runtime < limit
        ok = ok and fast
        parts.append(f"runtime={runtime:.1f}s" + (f" (limit {limit:.0f}s)" if limit else ""))
    record_acceptance(f"[{'PASS' if ok else 'FAIL'}] criterion {number} {title}: " + "; ".join(parts))
    return ok


def _timed(fn, *args, **kw):
    t = time.perf_counter()
    rep = fn(*args, **kw)
    return rep, time.perf_counter() - t


def test_criterion_1_geometry_battery():
    rep, dt = _timed(suites.geometry_suite, cases=100_000)
    names = {"ball_sandwich.inner", "ball_sandwich.outer", "isometry_invariance", "circumference_quadrature"}
    assert _report(1, "geometry battery", rep, names, dt, 10.0), rep.text()


def test_criterion_2_walker_correctness():
    rep, dt = _timed(suites.walker_suite, chi_probes=100_000, eps_probes=(1_000_000, 10_000_000))
    names = {"escape_angle_uniform_chi2", "eps_linearity"}
    assert _report(2, "walker correctness", rep, names, dt, 120.0), rep.text()


def test_criterion_3_capacity_invariance():
    rep, dt = _timed(suites.capacity_suite, probes=400_000)
    names = {"isometric_placements_agree", "far_pair_additivity"}
    assert _report(3, "capacity invariance", rep, names, dt, 120.0), rep.text()


def test_criterion_4_growth_law():
    rep, dt = _timed(suites.growth_suite, n_particles=1000, thread_hints=(1, 8))
    assert _report(4, "growth law", rep, None, dt, 1800.0), rep.text()


def test_criterion_5_contraction(ensemble):
    pilot = ensemble("pilot", 20, 2000)
    recs = ensemble("main", 100, 2000)
    rep = suites.theorem4_suite(recs, pilot, X0=1.0, factor=0.95)
    assert _report(5, "contraction of R at dyadic X crossings", rep), rep.text()


def test_criterion_6_positive_density(ensemble):
    pilot = ensemble("pilot", 20, 2000)
    recs = ensemble("main", 30, 2000)
    rep = suites.density_suite(recs, pilot, r_max=12.0)
    assert _report(6, "positive density vs spiral", rep), rep.text()


def test_criterion_7_distant_ball_reachability(ensemble):
    pilot = ensemble("pilot", 20, 3000)
    recs = ensemble("main", 100, 3000)
    rep = suites.reach_suite(recs, pilot, distance=8.0, directions=8)
    assert _report(7, "distant-ball reachability", rep), rep.text()


def test_criterion_8_clock():
    rep = suites.clock_suite(steps=1000)
    assert _report(8, "continuous-time clock", rep), rep.text()
