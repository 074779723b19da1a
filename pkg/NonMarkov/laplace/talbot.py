import math

import mpmath
from numpy.polynomial import polynomial as P

from NonMarkov.errors import ValidationError
from NonMarkov.laplace.rational import RationalFunction
from NonMarkov.settings import TALBOT_DEGREE

__all__ = ["talbot_inverse", "contour_degree"]

# left half plane poles are enclosed when they sit below this contour angle
ENCLOSED_ANGLE = 0.4 * math.pi
# other poles: angle at most 1/2, where theta cot(theta) > 0.9 keeps the contour right of them
RIGHT_HALF_ANGLE = 0.5


def contour_degree(r: RationalFunction, t: float, degree: int = TALBOT_DEGREE) -> int:
    '''
    Number of nodes for which the fixed Talbot contour at time t encloses
    every pole of r.

    mpmath places the contour u(theta) = (2M / 5t) (theta cot(theta) + i theta),
    so its scale grows with M / t. A pole p = x + iy is reached at
    theta = 5ty / 2M; keeping theta below ENCLOSED_ANGLE (x < 0) or
    RIGHT_HALF_ANGLE (x >= 0, where the contour is also right of x) puts the
    pole inside. Never less than degree.
    '''
    if r.den.degree < 1:
        return degree
    needed = 0.0
    for pole in P.polyroots(r.den.coeffs):
        if pole.real < 0:
            needed = max(needed, abs(pole.imag) / ENCLOSED_ANGLE)
        else:
            needed = max(needed, (abs(pole.imag) + pole.real) / RIGHT_HALF_ANGLE)
    return max(degree, int(math.ceil(2.5 * needed * t)))


def talbot_inverse(r: RationalFunction, t: float, degree: int = TALBOT_DEGREE) -> float:
    '''
    Numerical inverse Laplace transform of r at t, by the fixed Talbot contour.

    Needs no partial fractions or residues, so it is independent of
    inverse_laplace and serves as its check. The pole locations only set the
    number of contour nodes (see contour_degree), which grows with t.
    Accurate to about 1e-10 for rational transforms.

    Parameters:
        r:
            Strictly proper rational function of u.
        t:
            Time, t > 0.
        degree:
            Minimum number of contour nodes.
    '''
    if t <= 0:
        raise ValidationError("Talbot requires t > 0")
    if not r.is_strictly_proper:
        raise ValidationError("improper rational function")
    nodes = contour_degree(r, t, degree)
    with mpmath.workdps(nodes):
        value = mpmath.invertlaplace(r.eval_mp, mpmath.mpf(t), method="talbot", degree=nodes)
        return float(mpmath.re(value))
