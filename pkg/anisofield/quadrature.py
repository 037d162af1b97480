"""
    anisofield.quadrature
    ---------------------

    Desingularized quadrature rules for integrands built from generalized
    homogeneous kernels.

    Integrals over the plane are written in the generalized polar
    coordinates ``w = (s1 (r p)**(1/q1), s2 (r (1 - p))**(1/q2))`` where
    ``rho(w) = r``. The Jacobian is ``r**(Q-1) p**(1/q1-1) (1-p)**(1/q2-1) /
    (q1 q2)``; the ``p``-endpoint factors are absorbed by Gauss-Jacobi rules
    and the radial singularities by power substitutions. Every rule is
    evaluated at a sequence of orders until two successive results agree.

    :copyright: (c) 2026, anisofield authors.
    :license: BSD, see LICENSE for details.
"""

import dataclasses
import functools
import logging
import typing

import numpy as np
from numpy.polynomial import legendre, polynomial
from scipy import special

from anisofield import errors
from anisofield.kernel import AngularSpec


__all__ = [
    "HomogeneousKernel",
    "LEVELS",
    "PiecewisePolynomial",
    "angular_panels",
    "convolve_at",
    "exterior_integral",
    "gauss_jacobi",
    "gauss_legendre",
    "integrate_power",
    "refine",
]

logger = logging.getLogger(__name__)

LEVELS = (8, 12, 16, 24, 32, 48)

# Octaves resolved by plain Gauss-Legendre panels on each side of the
# characteristic radius before the power substitutions take over.
_OCTAVES = 6
_QUADRANTS = ((1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0))


@functools.lru_cache(maxsize=None)
def gauss_legendre(n):
    return legendre.leggauss(n)


@functools.lru_cache(maxsize=None)
def gauss_jacobi(n, alpha, beta):
    """Nodes and weights for ``(1 - x)**alpha (1 + x)**beta`` on ``[-1, 1]``."""

    return special.roots_jacobi(n, alpha, beta)


def _gl_panel(a, b, n):
    x, w = gauss_legendre(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


@dataclasses.dataclass(frozen=True)
class HomogeneousKernel:
    """``L(u) / rho(u)`` with exponents ``(q1, q2)``."""

    q1: float
    q2: float
    angular: AngularSpec = AngularSpec.constant(1.0)

    @property
    def Q(self):
        return 1.0 / self.q1 + 1.0 / self.q2

    def radial(self, points):
        return np.abs(points[..., 0]) ** self.q1 + np.abs(points[..., 1]) ** self.q2

    def angular_at(self, points, radial=None):
        if radial is None:
            radial = self.radial(points)
        z = points[..., 0] / radial ** (1.0 / self.q1)
        return self.angular.evaluate(z, points[..., 1] >= 0.0)

    def __call__(self, points):
        radial = self.radial(points)
        return self.angular_at(points, radial) / radial


def refine(evaluate, levels=LEVELS, rtol=1e-4, what="integral"):
    """Evaluate ``evaluate(n)`` at increasing orders until it settles.

    Returns ``(value, relative_change)`` of the first order whose result
    differs from the previous one by at most ``rtol``.
    """

    previous = None
    change = np.inf
    for n in levels:
        value = np.asarray(evaluate(n), dtype=float)
        if previous is not None:
            scale = np.maximum(np.abs(value), np.finfo(float).tiny)
            change = float(np.max(np.abs(value - previous) / scale))
            logger.debug("%s at order %d: relative change '%s'", what, n, change)
            if change <= rtol:
                return (float(value) if value.ndim == 0 else value), change
        previous = value

    raise errors.QuadratureNotConverged(
        "%s did not converge to relative '%s' (last change '%s')" % (what, rtol, change),
        last_estimate=previous.tolist(),
        last_change=change,
    )


def angular_panels(q1, q2, split, n):
    """Gauss-Jacobi nodes in ``p`` with the full ``p`` Jacobian folded in."""

    b1 = 1.0 / q1 - 1.0
    b2 = 1.0 / q2 - 1.0

    x, w = gauss_jacobi(n, 0.0, b1)
    p_left = 0.5 * split * (x + 1.0)
    w_left = (0.5 * split) ** (b1 + 1.0) * w * (1.0 - p_left) ** b2

    x, w = gauss_jacobi(n, b2, 0.0)
    p_right = split + 0.5 * (1.0 - split) * (x + 1.0)
    w_right = (0.5 * (1.0 - split)) ** (b2 + 1.0) * w * p_right ** b1

    p = np.concatenate([p_left, p_right])
    return p, np.concatenate([w_left, w_right]) / (q1 * q2)


def _sphere_nodes(q1, q2, target, n):
    """Unit-sphere nodes of all four quadrants, split at the ray of ``target``."""

    nodes, weights = [], []
    radial = abs(target[0]) ** q1 + abs(target[1]) ** q2
    for s1, s2 in _QUADRANTS:
        split = 0.5
        if radial > 0 and s1 * target[0] >= 0 and s2 * target[1] >= 0:
            ray = abs(target[0]) ** q1 / radial
            if 0.02 < ray < 0.98:
                split = ray
        p, w = angular_panels(q1, q2, split, n)
        nodes.append(np.stack([s1 * p ** (1.0 / q1), s2 * (1.0 - p) ** (1.0 / q2)], axis=-1))
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def _radial_panels(R, Q, n):
    """Radial nodes and weights for the near (``r**(Q-2) dr``) and far
    (``r**(Q-3) dr``) forms, split at ``R``."""

    inner = R * 2.0 ** -_OCTAVES
    outer = R * 2.0 ** _OCTAVES
    x, w = gauss_legendre(n)
    t = 0.5 * (x + 1.0)

    # r = inner * t**m flattens r**(Q-2) dr to a constant weight.
    m = 1.0 / (Q - 1.0)
    near_r = [inner * t ** m]
    near_w = [np.full(n, inner ** (Q - 1.0) * m) * 0.5 * w]
    for j in range(_OCTAVES):
        r, wr = _gl_panel(inner * 2.0 ** j, inner * 2.0 ** (j + 1), n)
        near_r.append(r)
        near_w.append(wr * r ** (Q - 2.0))

    far_r, far_w = [], []
    for j in range(_OCTAVES):
        r, wr = _gl_panel(R * 2.0 ** j, R * 2.0 ** (j + 1), n)
        far_r.append(r)
        far_w.append(wr * r ** (Q - 3.0))
    # r = outer * t**(-mu) flattens r**(Q-3) dr.
    mu = 1.0 / (2.0 - Q)
    far_r.append(outer * t ** -mu)
    far_w.append(np.full(n, outer ** (Q - 2.0) * mu) * 0.5 * w)

    return (
        (np.concatenate(near_r), np.concatenate(near_w)),
        (np.concatenate(far_r), np.concatenate(far_w)),
    )


def _half_convolution(v, singular, regular, n):
    """``int singular(w) regular(w + v) omega(w) dw`` with the partition
    weight ``omega = rho(w+v)**2 / (rho(w)**2 + rho(w+v)**2)``."""

    q1, q2, Q = singular.q1, singular.q2, singular.Q
    R = float(regular.radial(np.asarray(v)))
    sphere, w_sphere = _sphere_nodes(q1, q2, (-v[0], -v[1]), n)
    L_sphere = singular.angular_at(sphere, np.ones(len(sphere)))
    (near_r, near_w), (far_r, far_w) = _radial_panels(R, Q, n)

    # Near form: points are formed directly.
    w1 = sphere[None, :, 0] * near_r[:, None] ** (1.0 / q1)
    w2 = sphere[None, :, 1] * near_r[:, None] ** (1.0 / q2)
    shifted = np.stack([w1 + v[0], w2 + v[1]], axis=-1)
    radial = regular.radial(shifted)
    omega = 1.0 / (1.0 + (near_r[:, None] / radial) ** 2)
    g = regular.angular_at(shifted, radial) * omega / radial
    total = near_w @ g @ (w_sphere * L_sphere)

    # Far form: the shift is scaled onto the unit sphere instead.
    s1 = sphere[None, :, 0] + v[0] * far_r[:, None] ** (-1.0 / q1)
    s2 = sphere[None, :, 1] + v[1] * far_r[:, None] ** (-1.0 / q2)
    shifted = np.stack([s1, s2], axis=-1)
    radial = regular.radial(shifted)
    omega = 1.0 / (1.0 + radial ** -2.0)
    g = regular.angular_at(shifted, radial) * omega / radial
    total += far_w @ g @ (w_sphere * L_sphere)
    return total


def convolve_at(v, first, second, rtol=1e-4, levels=LEVELS):
    """``int first(w) second(w + v) dw`` for a nonzero ``v``.

    A partition of unity separates the singularities at ``w = 0`` and
    ``w = -v``; each piece is integrated in polar coordinates centred at its
    own singularity. Returns ``(value, relative_change)``.
    """

    v = np.asarray(v, dtype=float)
    if not np.any(v):
        raise errors.SingularOrigin("the convolution of two kernels diverges at v = 0")
    if (first.q1, first.q2) != (second.q1, second.q2):
        raise ValueError("convolved kernels must share their exponents")

    def evaluate(n):
        return _half_convolution(v, first, second, n) + _half_convolution(
            -v, second, first, n
        )

    return refine(evaluate, levels, rtol, what="convolution at v = %s" % v.tolist())


def _perimeter_panels(ridges, n, grading):
    """Nodes on the boundary of ``[-1, 1]**2`` graded towards ridge crossings."""

    x, w = gauss_legendre(n)
    points, weights = [], []
    # Each side: a fixed coordinate (index, sign) and a free coordinate.
    for fixed, sign in ((0, 1.0), (1, 1.0), (0, -1.0), (1, -1.0)):
        free = 1 - fixed
        marks = [-1.0, 1.0]
        for d in ridges:
            d = np.asarray(d, dtype=float) / np.max(np.abs(d))
            for end in (d, -d):
                if abs(end[fixed] - sign) < 1e-12:
                    c = end[free]
                    marks.append(c)
                    marks.extend(c + s * 2.0 ** -j for j in range(1, grading + 1) for s in (-1, 1))
        marks = np.unique(np.clip(marks, -1.0, 1.0))
        for a, b in zip(marks[:-1], marks[1:]):
            if b - a < 1e-15:
                continue
            half = 0.5 * (b - a)
            ell = a + half * (x + 1.0)
            side = np.empty((n, 2))
            side[:, fixed] = sign
            side[:, free] = ell
            points.append(side)
            weights.append(half * w)
    return np.concatenate(points), np.concatenate(weights)


def exterior_integral(
    f, radius, ridges=(), decay=1.0, rtol=1e-3, levels=(6, 8, 12, 16, 24), grading=10
):
    """``int_{|u|_inf > radius} f(u) du`` for an integrand decaying at infinity.

    ``f`` maps points of shape ``(..., 2)`` to values. ``ridges`` lists
    directions along which ``f`` decays slowly or has kinks; the boundary
    nodes are graded towards them. ``decay`` is the exponent ``a`` with
    ``s * int f(s w) dw ~ s**(-1-a)`` used to flatten the outer tail.
    """

    def evaluate(n):
        perimeter, w_perimeter = _perimeter_panels(ridges, n, grading)
        x, w = gauss_legendre(n)
        radii, w_radii = [], []
        for j in range(_OCTAVES):
            s, ws = _gl_panel(radius * 2.0 ** j, radius * 2.0 ** (j + 1), n)
            radii.append(s)
            w_radii.append(ws * s)
        outer = radius * 2.0 ** _OCTAVES
        t = 0.5 * (x + 1.0)
        s = outer * t ** (-1.0 / decay)
        radii.append(s)
        w_radii.append(0.5 * w * (outer / decay) * t ** (-1.0 / decay - 1.0) * s)
        radii = np.concatenate(radii)
        w_radii = np.concatenate(w_radii)

        values = f(radii[:, None, None] * perimeter[None, :, :])
        return w_radii @ values @ w_perimeter

    value, _ = refine(evaluate, levels, rtol, what="exterior integral beyond %s" % radius)
    return value


def integrate_power(poly, a, b, beta):
    """``int_a^b poly(s) |s|**(-beta) ds`` exactly, for ``[a, b]`` on one side of 0.

    ``poly`` is a coefficient sequence in increasing degree.
    """

    if a < 0 < b:
        raise ValueError("panel '[%s, %s]' straddles the origin" % (a, b))
    coefficients = np.asarray(poly, dtype=float)
    if b <= 0:
        # Reflect: s -> -s turns the panel into [-b, -a].
        coefficients = coefficients * (-1.0) ** np.arange(len(coefficients))
        a, b = -b, -a
    total = 0.0
    for k, c in enumerate(coefficients):
        e = k + 1.0 - beta
        total += c * (b ** e - a ** e) / e
    return total


class PiecewisePolynomial(typing.NamedTuple):
    """Polynomials on consecutive panels ``[breaks[i], breaks[i+1]]``."""

    breaks: np.ndarray
    coefficients: typing.List[np.ndarray]

    def integrate_power(self, beta):
        return sum(
            integrate_power(c, a, b, beta)
            for a, b, c in zip(self.breaks[:-1], self.breaks[1:], self.coefficients)
        )

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        values = np.zeros_like(s)
        last = len(self.coefficients) - 1
        for i, (a, b, c) in enumerate(zip(self.breaks[:-1], self.breaks[1:], self.coefficients)):
            mask = (s >= a) & ((s < b) | ((i == last) & (s == b)))
            values[mask] = polynomial.polyval(s[mask], c)
        return values
