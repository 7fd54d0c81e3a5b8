"""Closed-form hyperbolic trigonometry for right-angled figures.

Every function here is a single formula; the geometric content (which
pentagon, which Lambert quadrilateral, which pair of polygon sides) is
spelled out in the docstring and verified against explicitly constructed
half-plane figures in the test suite.
"""

import math

from .errors import DegenerateConfigurationError, NoPentagonError

# Arguments to acosh this far below 1 are treated as genuinely degenerate
# rather than roundoff.
ACOSH_SLACK = 1e-10

# Arguments within this band above 1 are treated as touching (result 0).
ACOSH_TOUCH = 1e-14


def guarded_acosh(x: float) -> float:
    """acosh with an explicit policy at the boundary of its domain.

    Below 1 - ACOSH_SLACK the configuration is degenerate and raising is
    the only honest answer; within the roundoff band around 1 the figure
    is touching and the length is 0.
    """
    if x < 1.0 - ACOSH_SLACK:
        raise DegenerateConfigurationError(
            f"acosh argument {x!r} is below 1: the configuration degenerates"
        )
    if x < 1.0 + ACOSH_TOUCH:
        return 0.0
    return math.acosh(x)


def pentagon_perpendicular(a: float, b: float) -> float:
    """Side of a right-angled pentagon opposite to the adjacent pair (a, b).

    Equivalently: the common perpendicular between the two sides that
    extend a and b.  Exists only when sinh(a) sinh(b) > 1; below that
    threshold the five right angles cannot close up.
    """
    if a <= 0 or b <= 0:
        raise ValueError("pentagon sides must be positive")
    s = math.sinh(a) * math.sinh(b)
    if s <= 1.0 + ACOSH_TOUCH:
        raise NoPentagonError(
            f"no right-angled pentagon with adjacent sides {a!r}, {b!r} "
            f"(sinh*sinh = {s!r} <= 1)"
        )
    return math.acosh(s)


def trirectangle_center(h_side: float, n: int) -> float:
    """Center-to-side distance of a semi-regular right-angled 2n-gon.

    In the Lambert quadrilateral cut from the polygon by its center, the
    perpendicular feet and a vertex, the acute angle at the center is
    pi/n and cosh(center distance) * sin(pi/n) = cosh(h_side), where
    h_side is half the length of a side of the *other* type.
    """
    if n < 3:
        raise ValueError(f"need n >= 3 sides of each type, got n={n}")
    if h_side <= 0:
        raise ValueError("half-side must be positive")
    return math.acosh(math.cosh(h_side) / math.sin(math.pi / n))


def diagonal_same_type(h1: float, k: float, n: int) -> float:
    """Common perpendicular between two same-type sides, k slots apart.

    Both sides lie at distance h1 from the center with an angle 2*pi*k/n
    between their perpendicular feet; the half-length sits in a Lambert
    quadrilateral with acute angle pi*k/n, giving
    2*acosh(cosh(h1) sin(k pi / n)).  At k = 1 this is exactly the length
    of the in-between side of the other type, and by the symmetry of sin
    the value at k = n-1 repeats it; the strict diagonals are k in
    2..n-2.
    """
    if n < 3:
        raise ValueError(f"need n >= 3, got n={n}")
    if not 1 <= k <= n - 1 or k != int(k):
        raise ValueError(f"slot count k must be an integer in 1..n-1, got {k!r}")
    if h1 <= 0:
        raise ValueError("center distance must be positive")
    return 2.0 * guarded_acosh(math.cosh(h1) * math.sin(k * math.pi / n))


def diagonal_mixed_type(h1: float, h2: float, k: float, n: int) -> float:
    """Arc between a side of each type, k slots apart (k odd), crossing
    the polygon and continuing symmetrically across the far side.

    The in-polygon perpendicular between geodesics at distances h1, h2
    from the center with angle k*pi/n between their feet has
    cosh = sinh(h1) sinh(h2) - cosh(h1) cosh(h2) cos(k pi / n); the full
    arc doubles it.  k = 1 is excluded: adjacent sides meet at a vertex.
    """
    if n < 3:
        raise ValueError(f"need n >= 3, got n={n}")
    if k != int(k) or int(k) % 2 == 0 or not 3 <= k <= 2 * n - 3:
        raise ValueError(f"slot count k must be odd in 3..2n-3, got {k!r}")
    if h1 <= 0 or h2 <= 0:
        raise ValueError("center distances must be positive")
    arg = (math.sinh(h1) * math.sinh(h2)
           - math.cosh(h1) * math.cosh(h2) * math.cos(k * math.pi / n))
    return 2.0 * guarded_acosh(arg)


def semiregular_partner(l1: float, n: int) -> float:
    """The other alternating side length of a semi-regular right-angled
    2n-gon: sinh(l1/2) sinh(l2/2) = cos(pi/n) solved for l2.

    Involutive in l1 <-> l2 for fixed n.
    """
    if n < 3:
        raise ValueError(f"a right-angled polygon needs 2n >= 6 sides, got n={n}")
    if l1 <= 0:
        raise ValueError("side length must be positive")
    return 2.0 * math.asinh(math.cos(math.pi / n) / math.sinh(l1 / 2.0))


def equilateral_angle(x: float) -> float:
    """Interior angle of the equilateral hyperbolic triangle with side x.

    Strictly decreasing from pi/3 (Euclidean limit) to 0, equal to
    2*arcsin(1 / (2 cosh(x/2))).
    """
    if x <= 0:
        raise ValueError("side length must be positive")
    return 2.0 * math.asin(1.0 / (2.0 * math.cosh(x / 2.0)))
