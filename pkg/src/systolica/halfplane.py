"""Upper half-plane model of the hyperbolic plane.

Points carry Euclidean coordinates (x, y) with y > 0, tangent vectors are
(dx, dy) pairs based at a point, and geodesics are half-circles centered
on the real axis or vertical rays.  Everything here is closed-form; no
iteration, no linear algebra.

Orientation conventions (these propagate through the whole package):
a quarter turn means rotating a tangent vector by +pi/2 counterclockwise
in the (dx, dy) chart, which is also a hyperbolic rotation because the
model is conformal.  Oriented angles are counterclockwise-positive.
"""

import math

from .errors import DegenerateConfigurationError, NoPerpendicularError

# Points this close to the real axis (or below) are rejected: the model
# degenerates and every formula loses all precision there anyway.
YMIN = 1e-12

# Relative x-difference below which two points are considered vertically
# aligned.  Beyond this the circle-center formula divides by ~0 and the
# "circle" is numerically a vertical line.
VERTICAL_EPS = 1e-13

# Tangent directions this close to straight up/down are snapped to a
# vertical geodesic.  A direction that is vertical up to roundoff would
# otherwise produce a circle of radius ~1/slope whose point arithmetic
# cancels catastrophically; honest directions essentially never fall in
# (1e-13, 1e-9), but quarter-turns of computed tangents land there all
# the time when the true side is vertical.
DIRECTION_SNAP = 1e-9

# Relative margin for deciding that two geodesics touch at infinity
# (asymptotic) rather than admitting a common perpendicular.
ASYMPTOTIC_EPS = 1e-12


class HPoint:
    """A point x + iy of the open upper half-plane."""

    __slots__ = ("x", "y")

    def __init__(self, x, y):
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError("point coordinates must be finite")
        if y < YMIN:
            raise ValueError(f"point must lie in the upper half-plane (y={y!r})")
        self.x = float(x)
        self.y = float(y)

    @property
    def z(self):
        return complex(self.x, self.y)

    def __repr__(self):
        return f"HPoint({self.x!r}, {self.y!r})"


class HTangent:
    """A tangent vector (dx, dy) based at an HPoint."""

    __slots__ = ("base", "dx", "dy")

    def __init__(self, base, dx, dy):
        self.base = base
        self.dx = float(dx)
        self.dy = float(dy)

    @property
    def w(self):
        return complex(self.dx, self.dy)

    def scaled(self, a):
        return HTangent(self.base, a * self.dx, a * self.dy)

    def __repr__(self):
        return f"HTangent({self.base!r}, {self.dx!r}, {self.dy!r})"


def inner(u, v):
    """Hyperbolic inner product of two tangents at the same base point."""
    y = u.base.y
    return (u.dx * v.dx + u.dy * v.dy) / (y * y)


def norm(u):
    return math.hypot(u.dx, u.dy) / u.base.y


def rotate_quarter(u):
    """Rotate a tangent by +pi/2 (counterclockwise)."""
    return HTangent(u.base, -u.dy, u.dx)


def rotate_tangent(u, phi):
    c, s = math.cos(phi), math.sin(phi)
    return HTangent(u.base, c * u.dx - s * u.dy, s * u.dx + c * u.dy)


def oriented_angle(u, v):
    """Counterclockwise angle from u to v, in (-pi, pi]."""
    cross = u.dx * v.dy - u.dy * v.dx
    dot = u.dx * v.dx + u.dy * v.dy
    return math.atan2(cross, dot)


def cosh_dist(p, q):
    dx, dy = p.x - q.x, p.y - q.y
    return 1.0 + (dx * dx + dy * dy) / (2.0 * p.y * q.y)


def dist(p, q):
    """Hyperbolic distance between two points."""
    c = cosh_dist(p, q)
    return math.acosh(c) if c > 1.0 else 0.0


class HIsometry:
    """Orientation-preserving isometry, a real Moebius map z -> (az+b)/(cz+d).

    The matrix is normalized to determinant one on construction; a
    non-positive determinant is rejected rather than silently flipped.
    """

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d):
        det = a * d - b * c
        if not math.isfinite(det) or det <= 0.0:
            raise ValueError(f"matrix must have positive determinant (det={det!r})")
        s = math.sqrt(det)
        self.a, self.b, self.c, self.d = a / s, b / s, c / s, d / s

    @classmethod
    def identity(cls):
        return cls(1.0, 0.0, 0.0, 1.0)

    def apply(self, p):
        den = self.c * p.z + self.d
        z = (self.a * p.z + self.b) / den
        return HPoint(z.real, z.imag)

    def push(self, u):
        """Pushforward of a tangent vector (derivative of the Moebius map)."""
        den = self.c * u.base.z + self.d
        w = u.w / (den * den)
        return HTangent(self.apply(u.base), w.real, w.imag)

    def inverse(self):
        return HIsometry(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other):
        return HIsometry(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __repr__(self):
        return f"HIsometry({self.a:.6g}, {self.b:.6g}, {self.c:.6g}, {self.d:.6g})"


class HGeodesic:
    """An oriented complete geodesic, parametrized at unit speed.

    Circles store (center, radius, rightward) and use the parameter
    sigma with point (c + r*tanh(sigma), r*sech(sigma)); verticals store
    (x0, upward) with point (x0, exp(sigma)).  The arclength s relates to
    sigma by sigma = sigma0 + dir*s, so s = 0 marks a chosen base point.
    """

    __slots__ = ("kind", "c", "r", "x0", "dir", "sigma0")

    def __init__(self, kind, c=0.0, r=1.0, x0=0.0, direction=1.0, sigma0=0.0):
        if kind not in ("circle", "vertical"):
            raise ValueError(f"unknown geodesic kind {kind!r}")
        if kind == "circle" and r <= 0.0:
            raise ValueError("circle radius must be positive")
        self.kind = kind
        self.c = float(c)
        self.r = float(r)
        self.x0 = float(x0)
        self.dir = 1.0 if direction >= 0 else -1.0
        self.sigma0 = float(sigma0)

    def _sigma(self, s):
        return self.sigma0 + self.dir * s

    def point_at(self, s):
        sg = self._sigma(s)
        if self.kind == "vertical":
            return HPoint(self.x0, math.exp(sg))
        return HPoint(self.c + self.r * math.tanh(sg), self.r / math.cosh(sg))

    def tangent_at(self, s):
        """Unit tangent in the direction of increasing s."""
        p = self.point_at(s)
        if self.kind == "vertical":
            return HTangent(p, 0.0, self.dir * p.y)
        sg = self._sigma(s)
        sech = 1.0 / math.cosh(sg)
        return HTangent(p, self.dir * p.y * sech, -self.dir * p.y * math.tanh(sg))

    def endpoints(self):
        """Boundary endpoints (backward, forward); math.inf encodes infinity."""
        if self.kind == "vertical":
            return (self.x0, math.inf) if self.dir > 0 else (math.inf, self.x0)
        if self.dir > 0:
            return (self.c - self.r, self.c + self.r)
        return (self.c + self.r, self.c - self.r)

    def param_of(self, p):
        """Arclength s with point_at(s) = p, for a point on the geodesic."""
        if self.kind == "vertical":
            sg = math.log(p.y)
        else:
            sg = _sigma_on_circle(self.c, self.r, p)
        return self.dir * (sg - self.sigma0)

    def standard_map(self):
        """Isometry taking the upward imaginary axis onto this geodesic.

        Forward direction is preserved; the arclength origin is not.
        """
        back, fwd = self.endpoints()
        if fwd == math.inf:
            return HIsometry(1.0, self.x0, 0.0, 1.0)
        if back == math.inf:
            return HIsometry(self.x0, -1.0, 1.0, 0.0)
        if fwd > back:
            return HIsometry(fwd, back, 1.0, 1.0)
        return HIsometry(fwd, -back, 1.0, -1.0)

    def project(self, p):
        """Orthogonal projection: returns (foot point, distance to p)."""
        w = self.standard_map().inverse().apply(p)
        foot_std = HPoint(0.0, math.hypot(w.x, w.y))
        d = math.asinh(abs(w.x) / w.y)
        return self.standard_map().apply(foot_std), d

    def side_of(self, p):
        """+1 if p lies to the left of the oriented geodesic, -1 right, 0 on it."""
        if self.kind == "vertical":
            v = (p.x - self.x0) * (-self.dir)
        else:
            v = self.dir * ((p.x - self.c) ** 2 + p.y * p.y - self.r * self.r)
        return (v > 0) - (v < 0)

    def __repr__(self):
        if self.kind == "vertical":
            arrow = "up" if self.dir > 0 else "down"
            return f"HGeodesic(vertical x0={self.x0:.6g}, {arrow})"
        arrow = "right" if self.dir > 0 else "left"
        return f"HGeodesic(circle c={self.c:.6g}, r={self.r:.6g}, {arrow})"


def vertical_geodesic(x0, upward=True):
    return HGeodesic("vertical", x0=x0, direction=1.0 if upward else -1.0)


def circle_geodesic(c, r, rightward=True):
    return HGeodesic("circle", c=c, r=r, direction=1.0 if rightward else -1.0)


def _sigma_on_circle(c, r, p):
    """Arclength-style parameter of a point on the circle (c, r).

    Equals atanh((x-c)/r) but written as a logarithm choosing the branch
    that avoids cancellation, so it stays finite and accurate when the
    point sits near either end of the circle.
    """
    d = p.x - c
    if d >= 0.0:
        return math.log((r + d) / p.y)
    return -math.log((r - d) / p.y)


def geodesic_through(p, q):
    """The geodesic through two distinct points, oriented p -> q, s=0 at p."""
    scale = max(abs(p.x), abs(q.x), p.y, q.y)
    if abs(p.x - q.x) <= VERTICAL_EPS * scale:
        if abs(p.y - q.y) <= VERTICAL_EPS * scale:
            raise DegenerateConfigurationError("geodesic through coincident points")
        d = 1.0 if q.y > p.y else -1.0
        return HGeodesic("vertical", x0=p.x, direction=d, sigma0=math.log(p.y))
    c = (p.x * p.x + p.y * p.y - q.x * q.x - q.y * q.y) / (2.0 * (p.x - q.x))
    r = math.hypot(p.x - c, p.y)
    d = 1.0 if q.x > p.x else -1.0
    return HGeodesic("circle", c=c, r=r, direction=d,
                     sigma0=_sigma_on_circle(c, r, p))


def geodesic_from_direction(p, u):
    """The geodesic through the base of u in the direction of u, s=0 there."""
    n = math.hypot(u.dx, u.dy)
    if n == 0.0:
        raise DegenerateConfigurationError("zero tangent vector has no direction")
    if abs(u.dx) <= DIRECTION_SNAP * n:
        d = 1.0 if u.dy > 0 else -1.0
        return HGeodesic("vertical", x0=p.x, direction=d, sigma0=math.log(p.y))
    c = p.x + p.y * (u.dy / u.dx)
    r = math.hypot(p.x - c, p.y)
    d = 1.0 if u.dx > 0 else -1.0
    return HGeodesic("circle", c=c, r=r, direction=d,
                     sigma0=_sigma_on_circle(c, r, p))


def unit_toward(p, q):
    """Unit tangent at p pointing toward q."""
    return geodesic_through(p, q).tangent_at(0.0)


def exp_point(u, t=1.0):
    """Walk distance t*|u| from the base of u in the direction of u."""
    return geodesic_from_direction(u.base, u).point_at(t * norm(u))


def angle_data(p, q, u):
    """Angle at p between the direction toward q and the tangent u.

    Returns (psi, sign): psi in [0, pi] is the unoriented angle, sign is
    +1 when u sits counterclockwise from the direction toward q, -1
    clockwise, 0 when aligned.  Raises if p and q coincide or u vanishes.
    """
    if math.hypot(u.dx, u.dy) == 0.0:
        raise DegenerateConfigurationError("angle of a zero vector is undefined")
    e = unit_toward(p, q)  # raises DegenerateConfigurationError if p == q
    a = oriented_angle(e, u)
    return abs(a), (a > 0) - (a < 0)


def translate_along(g, t):
    """Isometry translating by length t along g (forward for t > 0).

    Fixes g setwise; a point at distance rho from g moves by a length
    whose cosh-factor is cosh(rho), the usual hyperbolic spreading.
    """
    s = g.standard_map()
    e = math.exp(t / 2.0)
    return (s @ HIsometry(e, 0.0, 0.0, 1.0 / e)) @ s.inverse()


def rotate_about(p, phi):
    """Isometry rotating tangents at p by +phi (counterclockwise)."""
    sy = math.sqrt(p.y)
    m = HIsometry(sy, p.x / sy, 0.0, 1.0 / sy)
    c, s = math.cos(phi / 2.0), math.sin(phi / 2.0)
    return (m @ HIsometry(c, s, -s, c)) @ m.inverse()


def killing_vector(g, p):
    """Value at p of the Killing field generating translation along g.

    This is d/dt [translate_along(g, t)(p)] at t = 0, in closed form.
    """
    s = g.standard_map()
    # generator X = S diag(1/2, -1/2) S^{-1}; flow z' = b + (a - d) z - c z^2
    a = 0.5 * (s.a * s.d + s.b * s.c)
    b = -s.a * s.b
    c = s.c * s.d
    v = b + 2.0 * a * p.z - c * p.z * p.z
    return HTangent(p, v.real, v.imag)


def _circle_circle_point(c1, r1, c2, r2):
    """Upper intersection point of two circles centered on the real axis."""
    x = (r1 * r1 - r2 * r2 - c1 * c1 + c2 * c2) / (2.0 * (c2 - c1))
    ysq = r1 * r1 - (x - c1) * (x - c1)
    if ysq <= 0.0:
        raise DegenerateConfigurationError("circles do not meet in the upper half-plane")
    return HPoint(x, math.sqrt(ysq))


def intersection_point(g, h):
    """The intersection point of two geodesics, if there is exactly one."""
    if g.kind == "vertical" and h.kind == "vertical":
        raise DegenerateConfigurationError("vertical geodesics never cross")
    if g.kind == "vertical" or h.kind == "vertical":
        v, c = (g, h) if g.kind == "vertical" else (h, g)
        ysq = c.r * c.r - (v.x0 - c.c) * (v.x0 - c.c)
        if ysq <= 0.0:
            raise DegenerateConfigurationError("geodesics do not cross")
        return HPoint(v.x0, math.sqrt(ysq))
    if abs(g.c - h.c) <= VERTICAL_EPS * max(g.r, h.r, abs(g.c), abs(h.c)):
        raise DegenerateConfigurationError("concentric geodesics do not cross")
    return _circle_circle_point(g.c, g.r, h.c, h.r)


class CommonPerpendicular:
    """The common perpendicular segment between two disjoint geodesics."""

    __slots__ = ("foot_first", "foot_second", "length")

    def __init__(self, foot_first, foot_second, length):
        self.foot_first = foot_first
        self.foot_second = foot_second
        self.length = float(length)

    def __iter__(self):
        return iter((self.foot_first, self.foot_second, self.length))

    def __repr__(self):
        return (f"CommonPerpendicular({self.foot_first!r}, "
                f"{self.foot_second!r}, length={self.length:.12g})")


def common_perpendicular(g, h):
    """Common perpendicular of two disjoint geodesics.

    Returns a CommonPerpendicular with the foot on g first.  Raises
    NoPerpendicularError when the geodesics intersect, are asymptotic
    (shared boundary endpoint, e.g. any two verticals), or coincide.
    """
    if g.kind == "vertical" and h.kind == "vertical":
        raise NoPerpendicularError("two verticals share the endpoint at infinity")

    if g.kind == "vertical" or h.kind == "vertical":
        swap = g.kind != "vertical"
        v, c = (h, g) if swap else (g, h)
        gap = abs(v.x0 - c.c)
        if gap <= c.r * (1.0 + ASYMPTOTIC_EPS):
            if gap >= c.r * (1.0 - ASYMPTOTIC_EPS):
                raise NoPerpendicularError("vertical is asymptotic to the half-circle")
            raise NoPerpendicularError("vertical crosses the half-circle")
        r0 = math.sqrt((v.x0 - c.c) ** 2 - c.r * c.r)
        foot_v = HPoint(v.x0, r0)
        foot_c = _circle_circle_point(v.x0, r0, c.c, c.r)
        d = dist(foot_v, foot_c)
        if swap:
            return CommonPerpendicular(foot_c, foot_v, d)
        return CommonPerpendicular(foot_v, foot_c, d)

    scale = max(g.r, h.r, abs(g.c), abs(h.c))
    if abs(g.c - h.c) <= VERTICAL_EPS * scale:
        if abs(g.r - h.r) <= VERTICAL_EPS * scale:
            raise NoPerpendicularError("geodesics coincide")
        # concentric half-circles: the perpendicular is the vertical ray
        return CommonPerpendicular(
            HPoint(g.c, g.r), HPoint(h.c, h.r), abs(math.log(g.r / h.r))
        )
    delta = ((g.c - h.c) ** 2 - g.r * g.r - h.r * h.r) / (2.0 * g.r * h.r)
    if abs(delta) <= 1.0 + ASYMPTOTIC_EPS:
        if abs(delta) >= 1.0 - ASYMPTOTIC_EPS:
            raise NoPerpendicularError("geodesics are asymptotic")
        raise NoPerpendicularError("geodesics intersect")
    c0 = (g.r * g.r - h.r * h.r + h.c * h.c - g.c * g.c) / (2.0 * (h.c - g.c))
    r0 = math.sqrt(max((c0 - g.c) ** 2 - g.r * g.r, 0.0))
    foot_g = _circle_circle_point(c0, r0, g.c, g.r)
    foot_h = _circle_circle_point(c0, r0, h.c, h.r)
    return CommonPerpendicular(foot_g, foot_h, dist(foot_g, foot_h))


def dist_to_geodesic(p, g):
    """Distance from a point to a complete geodesic, in closed form."""
    if g.kind == "vertical":
        return math.asinh(abs(p.x - g.x0) / p.y)
    pw = (p.x - g.c) ** 2 + p.y * p.y - g.r * g.r
    return math.asinh(abs(pw) / (2.0 * g.r * p.y))
