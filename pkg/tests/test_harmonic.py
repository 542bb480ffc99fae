import numpy as np
import pytest
from scipy import stats

from hypdla import suites
from hypdla.aggregate import Aggregate
from hypdla.errors import DegenerateBoundary, NoAcceptanceWithinBudget
from hypdla.geometry import HalfPlanePoint, HypIsometry, hyp_distance, isometry_apply, polar_coords
from hypdla.harmonic import estimate_capacity, sample_attachment, sample_attachment_from_pole
from hypdla.rng import child, generator
from hypdla.walker import ProbeParams

CAP_SINGLE = 23.0709826611595430  # 2 pi / (-ln tanh 1), mpmath
O = HalfPlanePoint(0.0, 1.0)


def test_single_capacity_near_closed_form():
    # probe bias from the hit shell is a few percent at the default eps
    est = estimate_capacity(Aggregate(O), 400_000, ProbeParams(), child(1))
    assert abs(est.value - CAP_SINGLE) / CAP_SINGLE < 0.06
    assert est.stderr < 0.02 * est.value


def test_capacity_needs_probes():
    with pytest.raises(ValueError):
        estimate_capacity(Aggregate(O), 10, ProbeParams(), child(0))


def test_attachment_is_tangent_and_outside():
    A = suites._grown(8, 40)
    for i in range(200):
        att = sample_attachment(A, ProbeParams(), child(3, i))
        d = np.array([hyp_distance(att.point, p.center) for p in A.particles])
        assert d.min() >= 2 - 1e-9
        assert d[att.owner] == pytest.approx(2.0, abs=1e-9)
        assert att.trials >= 1


def test_attachment_thread_hint_invariant():
    A = suites._grown(9, 30)
    for i in range(20):
        a = sample_attachment(A, ProbeParams(), child(4, i), threads=1)
        b = sample_attachment(A, ProbeParams(), child(4, i), threads=8)
        assert a == b


def test_budget_exhaustion_raises():
    with pytest.raises(NoAcceptanceWithinBudget):
        sample_attachment(Aggregate(O), ProbeParams(), child(0), max_trials=1)


def test_empty_boundary_is_degenerate():
    class Stub:
        def __len__(self):
            return 1

        def arcset(self):
            from hypdla.boundary import ArcSet

            return ArcSet.from_arrays(np.empty(0), np.empty((0, 7)), np.empty(0))

    with pytest.raises(DegenerateBoundary):
        sample_attachment(Stub(), ProbeParams(), child(0))


def _angle_functional(A, seed, n):
    out = []
    for i in range(n):
        att = sample_attachment(A, ProbeParams(), child(seed, i))
        out.append(polar_coords(A.particles[att.owner].center, att.point)[1])
    return np.array(out)


def test_isometry_pushes_attachment_law_forward():
    A = suites._grown(10, 5)
    T = HypIsometry(3.7, 0.02, False)
    B = Aggregate.from_particles(
        [type(p)(isometry_apply(T, p.center), p.birth_index, p.birth_time, p.parent) for p in A.particles])
    a = _angle_functional(A, 20, 1000)
    b = _angle_functional(B, 21, 1000)
    assert stats.ks_2samp(a, b).pvalue > 1e-3


@pytest.mark.slow
def test_acceptance_rate_linear_in_eps():
    A = suites._grown(11, 10)
    p = ProbeParams()
    hi = estimate_capacity(A, 500_000, p, child(12, 0))
    lo = estimate_capacity(A, 5_000_000, p.with_eps(1e-3), child(12, 1))
    # capacity = L * p / eps, so p(eps) / p(eps/10) = 10 * Cap_hi / Cap_lo
    ratio = 10 * hi.value / lo.value
    assert 9 <= ratio <= 11


def test_pole_tool_is_labelled_and_tangent():
    A = suites._grown(13, 10)
    q, j = sample_attachment_from_pole(A, HalfPlanePoint(0.0, 50.0), ProbeParams(), generator(14))
    assert hyp_distance(q, A.particles[j].center) == pytest.approx(2.0, abs=1e-9)


@pytest.mark.slow
def test_harmonic_battery():
    rep = suites.harmonic_suite()
    print(rep.text())
    assert rep.passed, rep.text()
