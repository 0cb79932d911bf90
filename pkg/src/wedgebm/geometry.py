"""Wedge geometry: polar points, image isometries, folding and decorrelation.

A wedge <alpha_minus, alpha_plus> is the set of points whose polar angle lies
between the two ray angles. All samplers and densities work in "standard"
coordinates where the driving noise is a standard planar Brownian motion; a
correlated problem (marginal scales sigma1, sigma2, correlation rho, boundary
line y = a x) is brought to standard coordinates by `decorrelate`.
"""

import math
from dataclasses import dataclass
from enum import Enum

# Absolute angular tolerance for membership tests at the rays. Boundary
# classification inside the samplers never relies on this; they carry exact
# ray tags instead.
ANGLE_TOL = 1e-12

# How close an opening must be to pi/m to be treated as exactly pi/m.
PI_OVER_M_TOL = 1e-9

TWO_PI = 2.0 * math.pi


class Side(Enum):
    """Which boundary ray: MINUS is the lower ray, PLUS the upper."""

    MINUS = "minus"
    PLUS = "plus"


class RegionCase(Enum):
    """The four planar regions cut out by the x-axis and the line y = a x.

    AND_* are intersections of half-planes (openings below pi), OR_* are
    unions (openings above pi). The POS/NEG suffix is the sign of the slope.
    """

    AND_POS = "and_pos"  # {y >= 0} and {y <= a x},  a > 0
    AND_NEG = "and_neg"  # {y >= 0} and {y >= a x},  a < 0
    OR_POS = "or_pos"    # {y >= 0} or  {y >= a x},  a > 0
    OR_NEG = "or_neg"    # {y >= 0} or  {y <= a x},  a < 0


@dataclass(frozen=True)
class PolarPoint:
    r: float
    theta: float

    def __post_init__(self):
        if not (self.r >= 0.0 and math.isfinite(self.r)):
            raise ValueError(f"radius must be finite and nonnegative, got {self.r}")
        if not math.isfinite(self.theta):
            raise ValueError(f"angle must be finite, got {self.theta}")

    def cartesian(self):
        return (self.r * math.cos(self.theta), self.r * math.sin(self.theta))

    @staticmethod
    def from_cartesian(x, y):
        """Polar representation with the angle normalized to [0, 2 pi)."""
        r = math.hypot(x, y)
        theta = math.atan2(y, x) % TWO_PI
        return PolarPoint(r, theta)


@dataclass(frozen=True)
class WedgeSpec:
    alpha_minus: float
    alpha_plus: float

    def __post_init__(self):
        if not (0.0 <= self.alpha_minus < self.alpha_plus <= TWO_PI):
            raise ValueError(
                f"need 0 <= alpha_minus < alpha_plus <= 2 pi, got "
                f"({self.alpha_minus}, {self.alpha_plus})")

    @property
    def opening(self):
        return self.alpha_plus - self.alpha_minus

    def contains_angle(self, theta, tol=ANGLE_TOL):
        return self.alpha_minus - tol <= theta <= self.alpha_plus + tol

    def contains(self, point, tol=ANGLE_TOL):
        if point.r == 0.0:
            return True
        return self.contains_angle(point.theta, tol)

    def pi_over_m(self):
        """The integer m with opening == pi/m, or None if there is none."""
        m = round(math.pi / self.opening)
        if m >= 1 and abs(self.opening - math.pi / m) <= PI_OVER_M_TOL:
            return m
        return None


def require_pi_over_m(wedge):
    m = wedge.pi_over_m()
    if m is None:
        raise ValueError(
            f"wedge opening {wedge.opening} is not of the form pi/m")
    return m


def image_angle(k, theta, wedge):
    """Angle of the k-th image of (r, theta) in the 2m-sector tiling.

    For a pi/m wedge the plane is tiled by 2m copies of the wedge; the k-th
    isometry is a rotation for even k and a reflection for odd k. Returns
    the image angle modulo 2 pi.
    """
    m = require_pi_over_m(wedge)
    if not 0 <= k < 2 * m:
        raise ValueError(f"image index {k} outside 0..{2 * m - 1}")
    alpha = wedge.opening
    if k % 2 == 0:
        ang = theta + k * alpha
    else:
        ang = (k + 1) * alpha - theta + 2.0 * wedge.alpha_minus
    return ang % TWO_PI


def fold_into_wedge(theta_tilde, wedge):
    """Mirror an angle back into the wedge across whichever ray it crossed.

    The input must lie within one opening of the wedge (the folding step of
    the reflected sampler never produces anything further out).
    """
    lo = wedge.alpha_minus
    hi = wedge.alpha_plus
    opening = hi - lo
    if theta_tilde < lo - opening - ANGLE_TOL or theta_tilde > hi + opening + ANGLE_TOL:
        raise ValueError(
            f"angle {theta_tilde} too far outside wedge ({lo}, {hi}) to fold once")
    if theta_tilde < lo:
        return 2.0 * lo - theta_tilde
    if theta_tilde > hi:
        return 2.0 * hi - theta_tilde
    return theta_tilde


# ---------------------------------------------------------------------------
# decorrelation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorrelatedSetup:
    """A correlated problem in user coordinates.

    The driving noise has marginal scales (sigma1, sigma2) and correlation
    rho; the domain is one of the four regions bounded by the x-axis and the
    line y = slope * x; the process starts at x0 with constant drift b.
    """

    sigma1: float
    sigma2: float
    rho: float
    slope: float
    region_case: RegionCase
    x0: tuple
    drift: tuple = (0.0, 0.0)

    def __post_init__(self):
        if not (self.sigma1 > 0 and self.sigma2 > 0):
            raise ValueError("sigma1 and sigma2 must be positive")
        if not -1.0 < self.rho < 1.0:
            raise ValueError(f"rho must be in (-1, 1), got {self.rho}")
        if self.slope == 0.0:
            raise ValueError("slope 0 reduces to a one-dimensional problem; not supported")
        positive = self.region_case in (RegionCase.AND_POS, RegionCase.OR_POS)
        if positive != (self.slope > 0):
            raise ValueError(f"slope sign does not match {self.region_case}")
        if not self.region_contains(self.x0):
            raise ValueError(f"start {self.x0} outside region {self.region_case}")

    def region_contains(self, point):
        x, y = point
        a = self.slope
        case = self.region_case
        if case is RegionCase.AND_POS:
            return y >= 0 and y <= a * x
        if case is RegionCase.AND_NEG:
            return y >= 0 and y >= a * x
        if case is RegionCase.OR_POS:
            return y >= 0 or y >= a * x
        return y >= 0 or y <= a * x

    def covariance_factor(self):
        """Upper-triangular sigma with sigma sigma^T = [[s1^2, rho s1 s2], ...]."""
        s1, s2, rho = self.sigma1, self.sigma2, self.rho
        return ((s1 * math.sqrt(1.0 - rho * rho), s1 * rho), (0.0, s2))


@dataclass(frozen=True)
class DecorrelatedProblem:
    wedge: WedgeSpec
    start: PolarPoint
    forward_map: tuple  # 2x2, rows as tuples; applies to user coordinates
    degenerate: bool
    drift: tuple = (0.0, 0.0)

    def apply(self, point):
        (a, b), (c, d) = self.forward_map
        x, y = point
        return (a * x + b * y, c * x + d * y)

    def inverse(self, point):
        (a, b), (c, d) = self.forward_map
        det = a * d - b * c
        x, y = point
        return ((d * x - b * y) / det, (-c * x + a * y) / det)


def decorrelate(setup):
    """Map a correlated setup to a standard-Brownian wedge problem.

    Applying sigma^{-1} leaves the x-axis in place and sends the line
    y = slope * x to a line of slope a' = a s1 sqrt(1-rho^2)/(s2 - a s1 rho).
    The region becomes the wedge <0, alpha'> with

        intersection cases: alpha' = atan(a')        (a' > 0)
                            alpha' = pi + atan(a')   (a' < 0)
        union cases:        the same plus pi,

    where a sign change of s2 - a s1 rho swaps which branch applies. When
    s2 - a s1 rho = 0 the mapped second ray is vertical: alpha' = pi/2
    (intersection) or 3 pi/2 (union), and the degenerate flag is set so the
    caller knows the quarter-plane product structure applies.
    """
    s1, s2, rho = setup.sigma1, setup.sigma2, setup.rho
    a = setup.slope
    root = math.sqrt(1.0 - rho * rho)
    den = s2 - a * s1 * rho
    union = setup.region_case in (RegionCase.OR_POS, RegionCase.OR_NEG)
    degenerate = den == 0.0
    if degenerate:
        base = math.pi / 2.0
    else:
        a_prime = a * s1 * root / den
        base = math.atan(a_prime)
        if a_prime < 0:
            base += math.pi
    alpha_prime = base + (math.pi if union else 0.0)
    # sigma^{-1} for the upper-triangular factor
    inv = ((1.0 / (s1 * root), -rho / (s2 * root)), (0.0, 1.0 / s2))
    x, y = setup.x0
    u = inv[0][0] * x + inv[0][1] * y
    v = inv[1][0] * x + inv[1][1] * y
    start = PolarPoint.from_cartesian(u, v)
    wedge = WedgeSpec(0.0, alpha_prime)
    if not wedge.contains(start, tol=1e-9):
        raise ValueError("mapped start falls outside the mapped wedge; "
                         "inconsistent setup")
    bx, by = setup.drift
    drift = (inv[0][0] * bx + inv[0][1] * by, inv[1][0] * bx + inv[1][1] * by)
    return DecorrelatedProblem(wedge=wedge, start=start, forward_map=inv,
                               degenerate=degenerate, drift=drift)
