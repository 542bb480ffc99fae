import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from hypdla.spatial import DiskIndex, dd_add, nearest_surface_brute, two_sum


def _disks(rng, n):
    cx = rng.normal(size=n) * 20
    cy = 10 ** rng.uniform(-2, 2, n)
    r = cy * rng.uniform(0.1, 0.9, n)
    return np.column_stack([cx, cy, r])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 400), st.integers(0, 2**32 - 1))
def test_nearest_matches_brute_force(n, seed):
    rng = np.random.default_rng(seed)
    idx = DiskIndex.build(_disks(rng, n))
    for _ in range(20):
        x, y = rng.normal() * 30, 10 ** rng.uniform(-3, 3)
        d, i = idx.nearest(x, y)
        db, ib = nearest_surface_brute(x, 0.0, y, idx.disks)
        if db >= 0:
            assert abs(d - db) <= 1e-12 * (1 + db)
        else:
            assert d < 0


def test_bound_prunes_but_keeps_answers_inside_it():
    rng = np.random.default_rng(5)
    idx = DiskIndex.build(_disks(rng, 300))
    for _ in range(200):
        x, y = rng.normal() * 30, 10 ** rng.uniform(-3, 3)
        db, _ = nearest_surface_brute(x, 0.0, y, idx.disks)
        d, _ = idx.nearest(x, y, bound=y)
        if db < 0:
            assert d < 0
        elif db < y:
            assert d == db
        else:
            assert d == y


def test_two_sum_is_exact():
    s, e = two_sum(1e16, 1.0)
    assert s == 1e16 and e == 1.0
    hi, lo = dd_add(1e16, 1.0, 1.0)
    assert hi + (lo - 2.0) == 1e16 and lo == 2.0 or hi == 1e16 + 2.0
