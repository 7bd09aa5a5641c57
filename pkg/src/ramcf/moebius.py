"""Moebius transformations of the closed upper half-plane.

A transformation is stored as a real 2x2 matrix with positive
determinant, normalized to det = 1 with the first nonzero entry (in
row-major order) positive, so equal projective classes have equal
entries.  Boundary points of the half-plane are mpmath reals with
``INF`` (mpmath's +inf) as the single point at infinity; the boundary
circle metric is the angular distance between Cayley-transform images,
which makes infinity an ordinary point.
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mp, mpf, mpc, sqrt, atan2, acos, cos, sin, pi

from .errors import (
    NonPositiveCoefficient,
    NonPositiveDeterminant,
    NotElliptic,
    NotHyperbolic,
    OutOfRange,
    PoleDerivative,
)
from .precision import as_scalar

INF = mp.inf


def is_inf(x) -> bool:
    return x == mp.inf or x == mp.ninf


def as_boundary(x):
    """Coerce to a boundary point: a finite mpf, or INF (signs of
    infinity are identified -- the boundary is a circle)."""
    if isinstance(x, str) and x.strip().lower() in ("inf", "-inf", "+inf", "oo"):
        return INF
    if is_inf(x):
        return INF
    return as_scalar(x)


def cayley_angle(x) -> mpf:
    """Angle in (-pi, pi] of the Cayley image (x - i)/(x + i) on the
    unit circle.  Infinity maps to the circle point 1 (angle 0) and 0
    maps to -1 (angle pi)."""
    if is_inf(x):
        return mpf(0)
    return atan2(-2 * x, x * x - 1)


def angle_distance(t1, t2) -> mpf:
    d = abs(t1 - t2)
    tau = 2 * pi
    d = d % tau
    return d if d <= pi else tau - d


def chordal_distance(x, y) -> mpf:
    """Angular distance on the Cayley circle, range [0, pi]."""
    return angle_distance(cayley_angle(as_boundary(x)), cayley_angle(as_boundary(y)))


def boundary_from_angle(theta) -> mpf:
    """Inverse of cayley_angle: theta = 0 is infinity, theta = pi is 0."""
    theta = as_scalar(theta)
    if abs(sin(theta / 2)) == 0:
        return INF
    return -cos(theta / 2) / sin(theta / 2)


def angles_diameter(angles) -> mpf:
    """Diameter (max pairwise angular distance) of circle points given
    by their angles.  If all points fit in an arc of length <= pi the
    diameter equals the arc span; otherwise fall back to pairwise max."""
    pts = sorted(angles)
    if len(pts) < 2:
        return mpf(0)
    tau = 2 * pi
    gaps = [pts[i + 1] - pts[i] for i in range(len(pts) - 1)]
    gaps.append(tau - (pts[-1] - pts[0]))
    span = tau - max(gaps)
    if span <= pi:
        return span
    best = mpf(0)
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d = angle_distance(pts[i], pts[j])
            if d > best:
                best = d
    return best


def boundary_diameter(points) -> mpf:
    return angles_diameter([cayley_angle(as_boundary(p)) for p in points])


class MoebiusMap:
    """Normalized projective matrix [[m11, m12], [m21, m22]] acting as
    x -> (m11*x + m12) / (m21*x + m22)."""

    __slots__ = ("m11", "m12", "m21", "m22")

    def __init__(self, m11, m12, m21, m22, _normalized=False):
        if _normalized:
            self.m11, self.m12, self.m21, self.m22 = m11, m12, m21, m22
            return
        a, b, c, d = (as_scalar(m11), as_scalar(m12), as_scalar(m21), as_scalar(m22))
        det = a * d - b * c
        if not det > 0:
            raise NonPositiveDeterminant(f"determinant {det} must be positive")
        s = sqrt(det)
        a, b, c, d = a / s, b / s, c / s, d / s
        for entry in (a, b, c, d):
            if entry != 0:
                if entry < 0:
                    a, b, c, d = -a, -b, -c, -d
                break
        self.m11, self.m12, self.m21, self.m22 = a, b, c, d

    @classmethod
    def identity(cls) -> "MoebiusMap":
        one, zero = mpf(1), mpf(0)
        return cls(one, zero, zero, one, _normalized=True)

    @property
    def entries(self):
        return (self.m11, self.m12, self.m21, self.m22)

    @property
    def det(self) -> mpf:
        return self.m11 * self.m22 - self.m12 * self.m21

    @property
    def trace(self) -> mpf:
        return self.m11 + self.m22

    def compose(self, other: "MoebiusMap") -> "MoebiusMap":
        """self after other: (self.compose(other))(x) = self(other(x)).

        The product is renormalized to det = 1 while the recomputed
        determinant is numerically trustworthy.  Deeply contracted
        products are projectively near rank-1 and their determinant
        drowns in cancellation; those are rescaled by the largest entry
        instead, which preserves the projective action exactly.
        """
        a, b, c, d = self.entries
        e, f, g, h = other.entries
        n11 = a * e + b * g
        n12 = a * f + b * h
        n21 = c * e + d * g
        n22 = c * f + d * h
        det = n11 * n22 - n12 * n21
        top = max(abs(n11), abs(n12), abs(n21), abs(n22))
        if det > top * top * mpf(2) ** (40 - mp.prec):
            s = sqrt(det)
            n11, n12, n21, n22 = n11 / s, n12 / s, n21 / s, n22 / s
        else:
            n11, n12, n21, n22 = n11 / top, n12 / top, n21 / top, n22 / top
        for entry in (n11, n12, n21, n22):
            if entry != 0:
                if entry < 0:
                    n11, n12, n21, n22 = -n11, -n12, -n21, -n22
                break
        return MoebiusMap(n11, n12, n21, n22, _normalized=True)

    def __matmul__(self, other):
        return self.compose(other)

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.m22, -self.m12, -self.m21, self.m11)

    def __call__(self, x):
        """Projective action on the boundary circle; total on R u {inf}."""
        if is_inf(x):
            if self.m21 == 0:
                return INF
            return self.m11 / self.m21
        x = as_scalar(x)
        den = self.m21 * x + self.m22
        if den == 0:
            return INF
        return (self.m11 * x + self.m12) / den

    def apply_interior(self, z):
        """Action on a point of the closed upper half-plane (mpc with
        im >= 0).  A boundary pole maps to INF, matching the boundary
        action; rounding never produces im < 0."""
        if is_inf(z):
            return self(INF)
        z = mpc(z)
        den = self.m21 * z + self.m22
        if den == 0:
            return INF
        w = (self.m11 * z + self.m12) / den
        if w.imag < 0:
            w = mpc(w.real, 0)
        return w

    def pole(self):
        """Preimage of infinity."""
        if self.m21 == 0:
            return INF
        return -self.m22 / self.m21

    def power(self, n: int) -> "MoebiusMap":
        """n-fold composition (n >= 0) by repeated squaring, with
        renormalization at every multiply."""
        if n < 0:
            raise OutOfRange("power requires n >= 0")
        result = MoebiusMap.identity()
        base = self
        while n:
            if n & 1:
                result = result.compose(base)
            n >>= 1
            if n:
                base = base.compose(base)
        return result

    def distance_to(self, other: "MoebiusMap") -> mpf:
        """Max entrywise difference; meaningful because normalization
        makes the projective representative unique."""
        return max(abs(a - b) for a, b in zip(self.entries, other.entries))

    def is_identity(self, tol=None) -> bool:
        if tol is None:
            tol = mpf(2) ** (20 - mp.prec)
        return self.distance_to(MoebiusMap.identity()) <= tol

    def __repr__(self):
        return (
            f"MoebiusMap([[{self.m11}, {self.m12}], [{self.m21}, {self.m22}]])"
        )


def compose(first: MoebiusMap, second: MoebiusMap) -> MoebiusMap:
    return first.compose(second)


def power(m: MoebiusMap, n: int) -> MoebiusMap:
    return m.power(n)


def cf_map(b) -> MoebiusMap:
    """The continued-fraction building block z -> -b/(z + 1), i.e. the
    projective class of [[0, -b], [1, 1]].  Requires b > 0 (the map
    preserves the upper half-plane only then)."""
    b = as_scalar(b)
    if not b > 0:
        raise NonPositiveCoefficient(f"coefficient must be positive, got {b}")
    one = mpf(1)
    return MoebiusMap(mpf(0), -b, one, one)


@dataclass(frozen=True)
class MapClass:
    """Classification of a normalized Moebius map.

    kind is one of 'identity', 'elliptic', 'parabolic', 'hyperbolic'.
    Elliptic maps carry the rotation number in (0, 1/2]; hyperbolic
    maps carry attractor, repeller and the multiplier mu in (0, 1)
    (the derivative at the attractor).
    """

    kind: str
    rotation_number: object = None
    attractor: object = None
    repeller: object = None
    multiplier: object = None

    @property
    def is_elliptic(self):
        return self.kind == "elliptic"

    @property
    def is_hyperbolic(self):
        return self.kind == "hyperbolic"

    @property
    def is_parabolic(self):
        return self.kind == "parabolic"

    @property
    def is_identity(self):
        return self.kind == "identity"


def default_eps_class() -> mpf:
    # separates genuine parabolicity from rounding at any precision
    return mpf(2) ** -(mp.prec // 2)


def classify(m: MoebiusMap, eps_class=None) -> MapClass:
    """Trace classification of a det-1 map: |tr| < 2 elliptic,
    |tr| > 2 hyperbolic, within eps_class of 2 parabolic (identity when
    the off-diagonal entries vanish as well)."""
    if eps_class is None:
        eps_class = default_eps_class()
    t = abs(m.trace)
    if (
        abs(m.m12) <= eps_class
        and abs(m.m21) <= eps_class
        and abs(t - 2) <= eps_class
    ):
        return MapClass("identity")
    if t < 2 - eps_class:
        rho = acos(t / 2) / pi
        return MapClass("elliptic", rotation_number=rho)
    if t > 2 + eps_class:
        att, rep, mu = hyperbolic_fixed_points(m, _checked=True)
        return MapClass("hyperbolic", attractor=att, repeller=rep, multiplier=mu)
    return MapClass("parabolic")


def derivative_at(m: MoebiusMap, x) -> mpf:
    """Derivative det/(m21*x + m22)^2 in the finite chart; at infinity
    the chart u = 1/x gives det/m11^2.  Raises at the pole."""
    if is_inf(x):
        if m.m11 == 0:
            raise PoleDerivative("chart at infinity is singular (m11 = 0)")
        return m.det / (m.m11 * m.m11)
    x = as_scalar(x)
    den = m.m21 * x + m.m22
    if den == 0:
        raise PoleDerivative(f"{x} is the pole of the map")
    return m.det / (den * den)


def hyperbolic_fixed_points(m: MoebiusMap, _checked=False):
    """Attractor, repeller and multiplier of a hyperbolic map.

    Fixed points solve m21*x^2 + (m22 - m11)*x - m12 = 0 (one of them
    is infinity when m21 = 0); the attractor is the fixed point with
    |derivative| < 1 and the multiplier is that derivative.
    """
    if not _checked:
        t = abs(m.trace)
        if not t > 2 + default_eps_class():
            raise NotHyperbolic(f"|trace| = {t} is not > 2")
    if m.m21 == 0:
        pts = [INF, m.m12 / (m.m11 - m.m22)]
    else:
        diff = m.m11 - m.m22
        disc = diff * diff + 4 * m.m21 * m.m12
        root = sqrt(disc)
        pts = [(diff + root) / (2 * m.m21), (diff - root) / (2 * m.m21)]
    d0 = derivative_at(m, pts[0])
    d1 = derivative_at(m, pts[1])
    if abs(d0) < 1:
        return pts[0], pts[1], d0
    return pts[1], pts[0], d1


def elliptic_fixed_point(a) -> mpc:
    """Interior fixed point c(a) = -1/2 + i*sqrt(4a - 1)/2 of the map
    z -> -a/(z + 1); defined for a > 1/4."""
    a = as_scalar(a)
    if not a > mpf(1) / 4:
        raise NotElliptic(f"a must exceed 1/4, got {a}")
    return mpc(mpf(-1) / 2, sqrt(4 * a - 1) / 2)


def rotation_number(a) -> mpf:
    """Rotation number of z -> -a/(z+1) for a > 1/4: arccos(1/(2*sqrt a))/pi,
    a strictly increasing bijection (1/4, inf) -> (0, 1/2)."""
    a = as_scalar(a)
    if not a > mpf(1) / 4:
        raise NotElliptic(f"a must exceed 1/4, got {a}")
    return acos(1 / (2 * sqrt(a))) / pi


def inverse_rotation_number(rho) -> mpf:
    """Inverse of rotation_number: a = 1/(4*cos^2(pi*rho)) for rho in (0, 1/2)."""
    rho = as_scalar(rho)
    if not (0 < rho < mpf(1) / 2):
        raise OutOfRange(f"rotation number must lie in (0, 1/2), got {rho}")
    c = cos(pi * rho)
    return 1 / (4 * c * c)
