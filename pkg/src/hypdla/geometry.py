"""Hyperbolic geometry in the Poincaré upper half-plane.

Points are stored in the half-plane chart ``{(x, y): y > 0}``. Hyperbolic
balls are carried around as their Euclidean images (a hyperbolic circle is a
Euclidean circle in this chart, with a shifted center), which turns every
collision and clipping question into plain circle arithmetic.

The chart resolves hyperbolic distance only to about ``ulp(x) / y``, which
for a point at distance ``D`` from ``(0, 1)`` is roughly ``e^D * 1e-16``.
Aggregates reach ``D ~ 30``, so the abscissa carries an optional low-order
word ``x_lo`` (the exact value is ``x + x_lo``) and every coordinate
difference is taken as ``(x1 - x2) + (x1_lo - x2_lo)``. Heights keep full
relative precision in a single double and need no such treatment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


def split_exact(v) -> tuple[float, float]:
    """Round an exact rational to a normalised ``(hi, lo)`` double pair."""
    hi = float(v)
    return hi, float(v - Fraction(hi))


@dataclass(frozen=True, slots=True)
class HalfPlanePoint:
    x: float
    y: float
    x_lo: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.x_lo)):
            raise ValueError(f"non-finite coordinates ({self.x}, {self.y})")
        if self.y <= 0.0:
            raise ValueError(f"half-plane points need y > 0, got y={self.y}")

    def __iter__(self):
        yield self.x
        yield self.y

    @property
    def x_exact(self) -> Fraction:
        return Fraction(self.x) + Fraction(self.x_lo)

    @classmethod
    def from_exact(cls, x, y: float) -> "HalfPlanePoint":
        hi, lo = split_exact(Fraction(x))
        return cls(hi, float(y), lo)


@dataclass(frozen=True, slots=True)
class EuclidDisk:
    cx: float
    cy: float
    r: float
    cx_lo: float = 0.0

    def contains(self, x: float, y: float, tol: float = 0.0) -> bool:
        return math.hypot(x - self.cx, y - self.cy) <= self.r + tol


@dataclass(frozen=True, slots=True)
class HypIsometry:
    """Axis-preserving isometry ``(x, y) -> (beta*s*x + alpha, beta*y)``.

    ``s`` is -1 when ``reflect`` is set (reflection about the y axis is
    applied first), +1 otherwise.
    """

    alpha: float = 0.0
    beta: float = 1.0
    reflect: bool = False

    def __post_init__(self):
        if not (self.beta > 0.0 and math.isfinite(self.beta) and math.isfinite(self.alpha)):
            raise ValueError(f"invalid isometry alpha={self.alpha} beta={self.beta}")

    @property
    def sign(self) -> float:
        return -1.0 if self.reflect else 1.0

    def compose(self, inner: "HypIsometry") -> "HypIsometry":
        """Return ``self ∘ inner`` (``inner`` is applied first)."""
        return HypIsometry(
            alpha=self.beta * self.sign * inner.alpha + self.alpha,
            beta=self.beta * inner.beta,
            reflect=self.reflect != inner.reflect,
        )

    def inverse(self) -> "HypIsometry":
        # x' = b s x + a  =>  x = s (x' - a) / b
        return HypIsometry(alpha=-self.sign * self.alpha / self.beta, beta=1.0 / self.beta, reflect=self.reflect)

    def apply_xy(self, x, y):
        """Vectorised form of :func:`isometry_apply` on raw (double) coordinates."""
        return self.beta * self.sign * x + self.alpha, self.beta * y


IDENTITY = HypIsometry()


def arcosh1p(w):
    """``Arcosh(1 + w)`` for ``w >= 0``, accurate down to ``w -> 0``.

    Uses ``cosh d = 1 + 2 sinh^2(d/2)``, so no cancellation occurs near the
    diagonal and no series fallback is needed.
    """
    return 2.0 * np.arcsinh(np.sqrt(0.5 * w))


def hyp_distance(p: HalfPlanePoint, q: HalfPlanePoint) -> float:
    dx = (q.x - p.x) + (q.x_lo - p.x_lo)
    w = (dx * dx + (q.y - p.y) ** 2) / (2.0 * p.y * q.y)
    return 2.0 * math.asinh(math.sqrt(0.5 * w))


def hyp_distance_xy(px, py, qx, qy, px_lo=0.0, qx_lo=0.0):
    """Broadcasting hyperbolic distance on raw chart coordinates."""
    dx = (qx - px) + (qx_lo - px_lo)
    w = (dx * dx + (qy - py) ** 2) / (2.0 * py * qy)
    return arcosh1p(w)


def isometry_apply(t: HypIsometry, p: HalfPlanePoint) -> HalfPlanePoint:
    x = Fraction(t.beta) * int(t.sign) * p.x_exact + Fraction(t.alpha)
    return HalfPlanePoint.from_exact(x, t.beta * p.y)


def isometry_between(p: HalfPlanePoint, q: HalfPlanePoint) -> HypIsometry:
    """The dilation+shift taking ``p`` to ``q``."""
    beta = q.y / p.y
    return HypIsometry(alpha=q.x - beta * p.x, beta=beta)


def hyp_ball_to_disk(c: HalfPlanePoint, rho: float) -> EuclidDisk:
    if rho < 0:
        raise ValueError("radius must be non-negative")
    return EuclidDisk(c.x, c.y * math.cosh(rho), c.y * math.sinh(rho), c.x_lo)


def to_disc_model(p: HalfPlanePoint) -> tuple[float, float]:
    """Cayley map ``w = (z - i)/(z + i)``; sends ``(0, 1)`` to the disc center."""
    z = complex(p.x, p.y)
    w = (z - 1j) / (z + 1j)
    return w.real, w.imag


def from_disc_model(u: float, v: float) -> HalfPlanePoint:
    w = complex(u, v)
    if abs(w) >= 1.0:
        raise ValueError("point is not inside the unit disc")
    z = 1j * (1 + w) / (1 - w)
    return HalfPlanePoint(z.real, z.imag)


def to_disc_xy(x, y):
    """Vectorised Cayley map on chart coordinate arrays."""
    z = np.asarray(x) + 1j * np.asarray(y)
    w = (z - 1j) / (z + 1j)
    return w.real, w.imag


# Directions are the tangent angle at the origin, counterclockwise from +x in
# the half-plane chart, so theta = pi/2 points straight up. In the Cayley disc
# chart centered at the origin that direction sits at angle theta - pi/2.


def polar_point(origin: HalfPlanePoint, R: float, theta: float) -> HalfPlanePoint:
    if R < 0:
        raise ValueError("R must be non-negative")
    if R == 0:
        return origin
    # Cayley image of w = tanh(R/2) e^{i psi}, written without 1 - tanh cancellation
    psi = theta - 0.5 * math.pi
    t = math.tanh(0.5 * R)
    one_minus_t = 2.0 / (math.exp(R) + 1.0)
    den = one_minus_t**2 + 4.0 * t * math.sin(0.5 * psi) ** 2
    zx = -2.0 * t * math.sin(psi) / den
    zy = 1.0 / (math.cosh(0.5 * R) ** 2 * den)
    x = origin.x_exact + Fraction(origin.y) * Fraction(zx)
    return HalfPlanePoint.from_exact(x, origin.y * zy)


def polar_coords(origin: HalfPlanePoint, p: HalfPlanePoint) -> tuple[float, float]:
    """Inverse of :func:`polar_point`: ``(R, theta)`` with ``theta`` in ``[0, 2pi)``."""
    x = ((p.x - origin.x) + (p.x_lo - origin.x_lo)) / origin.y
    y = p.y / origin.y
    z = complex(x, y)
    w = (z - 1j) / (z + 1j)
    theta = (math.atan2(w.imag, w.real) + 0.5 * math.pi) % (2 * math.pi)
    return hyp_distance(origin, p), theta


def polar_angles_xy(ox: float, oy: float, x, y):
    """Vectorised direction angle of chart points seen from ``(ox, oy)``."""
    u, v = to_disc_xy((np.asarray(x) - ox) / oy, np.asarray(y) / oy)
    return np.mod(np.arctan2(v, u) + 0.5 * np.pi, 2 * np.pi)


def ball_volume(R):
    """Hyperbolic area of a metric ball of radius ``R``."""
    return 2.0 * np.pi * (np.cosh(R) - 1.0)
