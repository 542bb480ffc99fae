import math
import re

import numpy as np
import pytest

from hypdla.aggregate import Aggregate
from hypdla.geometry import HalfPlanePoint, polar_point
from hypdla.growth import GrowthConfig, run
from hypdla.render import RenderOptions, chart_circles, circumcircle, render_svg

TANH_HALF = 0.462117157260009759  # mpmath


@pytest.fixture(scope="module")
def big():
    return run(GrowthConfig(n_particles=1000, seed=0)).to_aggregate()


def test_single_particle_disc_image():
    c = chart_circles(Aggregate(HalfPlanePoint(0.0, 1.0)), "disc", 1.0)
    assert c[0] == pytest.approx([0.0, 0.0, TANH_HALF], abs=1e-15)
    svg = render_svg(Aggregate(HalfPlanePoint(0.0, 1.0))).decode()
    circles = re.findall(r'<circle cx="([\d.]+)" cy="([\d.]+)" r="([\d.]+)"', svg)
    # boundary of the disc, then the one particle centered on it
    assert len(circles) == 3 and circles[2][:2] == circles[0][:2]


def test_off_center_ball_is_not_centered_on_image_of_center():
    p = polar_point(HalfPlanePoint(0.0, 1.0), 3.0, 0.4)
    A = Aggregate.from_centers([HalfPlanePoint(0.0, 1.0), p])
    u, v, r = chart_circles(A, "disc", 1.0)[1]
    w = (complex(p.x, p.y) - 1j) / (complex(p.x, p.y) + 1j)
    assert abs(complex(u, v) - w) > 1e-3
    # but the image circle passes at hyperbolic distance 1 on both sides along the ray
    assert abs(complex(u, v)) - r == pytest.approx(math.tanh(1.0), abs=1e-12)
    assert abs(complex(u, v)) + r == pytest.approx(math.tanh(2.0), abs=1e-12)


def test_deterministic_bytes(big):
    a = render_svg(big, RenderOptions(highlight="front"), {"run": 1})
    b = render_svg(big, RenderOptions(highlight="front"), {"run": 1})
    assert a == b and b"<desc>" in a


def test_containment_in_unit_disc(big):
    c = chart_circles(big, "disc", 1.0)
    assert np.all(np.hypot(c[:, 0], c[:, 1]) + c[:, 2] <= 1 + 1e-9)


def test_tangent_balls_render_tangent(big):
    c = chart_circles(big, "disc", 1.0)
    worst = 0.0
    for p in big.particles[1:]:
        a, b = c[p.birth_index], c[p.parent]
        worst = max(worst, abs(math.hypot(a[0] - b[0], a[1] - b[1]) - (a[2] + b[2])))
    assert worst <= 1e-6


def test_halfplane_chart_and_edges(big):
    svg = render_svg(big, RenderOptions(chart="halfplane", highlight="parent_edges", width_px=400))
    assert svg.count(b"<line") >= len(big) - 1
    assert b'width="400"' in svg


def test_circumcircle():
    c, r = circumcircle(1 + 0j, 1j, -1 + 0j)
    assert abs(c) < 1e-15 and r == pytest.approx(1.0)


def test_option_validation():
    for kw in ({"chart": "klein"}, {"highlight": "all"}, {"radius_shown": 3}, {"width_px": 10}):
        with pytest.raises(ValueError):
            RenderOptions(**kw)
