"""Covariance evaluators of the limit families.

All families with a rank-one defining matrix ``d e^T`` reduce to a
one-dimensional integral of a piecewise polynomial overlap profile against a
power of ``|s|``, which is evaluated in closed form. ``Vt00`` is integrated
numerically in generalized polar coordinates.
"""

import functools
import logging
import math

import numpy as np
from numpy.polynomial import polynomial
from scipy import integrate, special

from anisofield import errors
from anisofield.convolution import conv_asymptotic
from anisofield.params import Family, Region, classify_regime
from anisofield.quadrature import (
    HomogeneousKernel,
    PiecewisePolynomial,
    angular_panels,
    convolve_at,
    gauss_jacobi,
    gauss_legendre,
    refine,
)
from anisofield.limits.abc import LimitFamily


logger = logging.getLogger(__name__)

_REGION_FAMILIES = {
    Region.R_BOTH_GT: {Family.VT00, Family.VT11, Family.VT20, Family.VT21, Family.VT22},
    Region.R_MIXED_12: {Family.VT00, Family.VT11, Family.V01, Family.V11, Family.V21},
    Region.R_BOTH_LT: {Family.VT00, Family.V01, Family.V11, Family.V21, Family.V22},
    Region.EQ_SMALL: {Family.VT02, Family.VT0, Family.VT01},
    Region.EQ_LARGE: {Family.V10, Family.V0, Family.V20},
}


def overlap(tau, x, y):
    """Length of ``(0, x] & (tau, tau + y]``."""

    tau = np.asarray(tau, dtype=float)
    return np.clip(np.minimum(x, tau + y) - np.maximum(0.0, tau), 0.0, None)


def _ramps(x, y):
    # overlap(., x, y) == sum of w * (tau - p)_+ over these (p, w).
    return ((-y, 1.0), (x - y, -1.0), (0.0, -1.0), (x, 1.0))


def power_pair_integral(x, y, beta):
    """``int overlap(t, x, y) |t|**-beta dt`` for ``beta < 1``."""

    norm = (1.0 - beta) * (2.0 - beta)
    return sum(w * abs(p) ** (2.0 - beta) for p, w in _ramps(x, y)) / norm


def _power_quadrature(profile, breaks, beta, n=6):
    """``int profile(s) |s|**-beta ds`` with ``profile`` polynomial between ``breaks``."""

    breaks = np.unique(np.concatenate([np.asarray(breaks, dtype=float), [0.0]]))
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        if a == 0.0:
            x, w = gauss_jacobi(n, 0.0, -beta)
            nodes = 0.5 * b * (x + 1.0)
            weights = (0.5 * b) ** (1.0 - beta) * w
        elif b == 0.0:
            x, w = gauss_jacobi(n, -beta, 0.0)
            nodes = a + 0.5 * (-a) * (x + 1.0)
            weights = (0.5 * (-a)) ** (1.0 - beta) * w
        else:
            x, w = gauss_legendre(n)
            nodes = a + 0.5 * (b - a) * (x + 1.0)
            weights = 0.5 * (b - a) * w * np.abs(nodes) ** (-beta)
        total += float(np.sum(weights * profile(nodes)))
    return total


class _FrameKernel:
    """User kernel seen from canonical kernel coordinates."""

    def __init__(self, kernel, frame):
        self._kernel = kernel
        self._frame = frame

    def __call__(self, points):
        return self._kernel(self._frame.to_canonical_u(points))


class _ModelFamily(LimitFamily):
    def __init__(self, family, regime, params, hurst_pair=None, rtol=1e-4):
        super().__init__(family, regime, hurst_pair)
        self.params = params
        self.rtol = rtol
        self.kernel = HomogeneousKernel(params.q1, params.q2, params.angular)
        self.det_factor = 1.0 / abs(float(np.linalg.det(params.matrix)))

    @property
    def canonical_B(self):
        return self.frame.matrix

    @property
    def exponents(self):
        return self.regime.canonical_exponents

    @functools.lru_cache(maxsize=None)
    def convolution_at(self, d):
        """``(a * a)(d)`` at a canonical point ``d``."""

        point = self.frame.to_canonical_u(np.asarray(d, dtype=float))
        value, _ = convolve_at(point, self.kernel, self.kernel, rtol=self.rtol)
        return value


class TildeRankOneFamily(_ModelFamily):
    """Families ``Vt`` with defining matrix ``d e^T``.

    ``Cov = |det B|**-1 c(d) int Lambda_e(s) |s|**-beta ds`` where
    ``Lambda_e`` is the density of ``e . (t - s)`` for ``t``, ``s`` uniform on
    the two rectangles and ``c = a * a`` is homogeneous of degree ``-beta``
    along ``d``.
    """

    def __init__(self, family, regime, params, d, e, hurst_pair=None, rtol=1e-4):
        super().__init__(family, regime, params, hurst_pair, rtol)
        self.d = tuple(float(v) for v in d)
        self.e = tuple(float(v) for v in e)
        if not any(self.d) or not any(self.e):
            raise errors.FamilyNotDefinedInRegion(
                "family '%s' degenerates to zero for B = '%s'" % (family.value, params.B)
            )

        exps = self.exponents
        if self.d[0] == 0.0:
            self.beta = exps.q_tilde2
        elif self.d[1] == 0.0 or exps.q1 == exps.q2:
            self.beta = exps.q_tilde1
        else:
            raise errors.FamilyNotDefinedInRegion(
                "direction '%s' is not homogeneous for q1 != q2" % (self.d,)
            )
        if not self.beta < 1.0:
            raise errors.FamilyNotDefinedInRegion(
                "family '%s' needs q~ < 1, got '%s'" % (family.value, self.beta)
            )

    @property
    def matrix(self):
        return np.outer(self.d, self.e)

    @property
    def prefactor(self):
        return self.det_factor * self.convolution_at(self.d)

    def _axis(self):
        e1, e2 = self.e
        if e2 == 0.0:
            return 0
        if e1 == 0.0:
            return 1
        return None

    def canonical_covariance(self, x, y):
        beta = self.beta
        j = self._axis()
        if j is not None:
            o = 1 - j
            scale = abs(self.e[j]) ** (-beta)
            integral = x[o] * y[o] * scale * power_pair_integral(x[j], y[j], beta)
        else:
            e1, e2 = self.e
            norm = (1.0 - beta) * (2.0 - beta) * (3.0 - beta) * (4.0 - beta) * e1 ** 2 * e2 ** 2
            integral = sum(
                w1 * w2 * abs(e1 * p1 + e2 * p2) ** (4.0 - beta)
                for p1, w1 in _ramps(x[0], y[0])
                for p2, w2 in _ramps(x[1], y[1])
            ) / norm
        return self.prefactor * integral

    def _profile(self, x, y):
        """Density of ``e . tau`` with breakpoints."""

        j = self._axis()
        if j is not None:
            o = 1 - j
            ej = self.e[j]

            def profile(s):
                return x[o] * y[o] * overlap(s / ej, x[j], y[j]) / abs(ej)

            return profile, [ej * p for p, _ in _ramps(x[j], y[j])]

        e1, e2 = self.e
        first = [p for p, _ in _ramps(x[0], y[0])]
        second = [p for p, _ in _ramps(x[1], y[1])]

        def density(s):
            breaks = np.unique(
                np.clip(first + [(s - e2 * r) / e1 for r in second], -y[0], x[0])
            )
            total = 0.0
            for a, b in zip(breaks[:-1], breaks[1:]):
                tau, w = gauss_legendre(3)
                tau = a + 0.5 * (b - a) * (tau + 1.0)
                values = overlap(tau, x[0], y[0]) * overlap((s - e1 * tau) / e2, x[1], y[1])
                total += 0.5 * (b - a) * float(np.dot(w, values))
            return total / abs(e2)

        def profile(s):
            return np.array([density(v) for v in np.atleast_1d(s)])

        return profile, [e1 * p + e2 * r for p in first for r in second]

    def canonical_covariance_by_quadrature(self, x, y):
        profile, breaks = self._profile(x, y)
        return self.prefactor * _power_quadrature(profile, breaks, self.beta)


class RankOneFamily(_ModelFamily):
    """Families ``V`` with defining matrix ``d e^T``.

    The kernel integrated over the lines ``{e . t = s}`` is ``A(+-) |s|**-kappa``
    and ``Cov = |det B|**-2 K int |s|**(1 - 2 kappa) l1(d1 s) l2(d2 s) ds``
    with ``K = (A+^2 + A-^2) B(1 - kappa, 2 kappa - 1) + A+ A- B(1 - kappa, 1 - kappa)``.
    """

    def __init__(self, family, regime, params, d, e, hurst_pair=None, rtol=1e-4):
        super().__init__(family, regime, params, hurst_pair, rtol)
        self.d = tuple(float(v) for v in d)
        self.e = tuple(float(v) for v in e)

        exps = self.exponents
        if self.e[1] == 0.0:
            self.kappa = exps.q1 * (1.0 - 1.0 / exps.q2)
        elif self.e[0] == 0.0:
            self.kappa = exps.q2 * (1.0 - 1.0 / exps.q1)
        elif exps.q1 == exps.q2:
            self.kappa = exps.q1 - 1.0
        else:
            raise errors.FamilyNotDefinedInRegion(
                "direction '%s' is not homogeneous for q1 != q2" % (self.e,)
            )
        if not 0.5 < self.kappa < 1.0:
            raise errors.FamilyNotDefinedInRegion(
                "family '%s' needs 1/2 < kappa < 1, got '%s'" % (family.value, self.kappa)
            )

    @property
    def matrix(self):
        return np.outer(self.d, self.e)

    def line_integral(self, sign):
        """``int a(t) delta(e . t - sign) dt``."""

        e = np.asarray(self.e)
        length = float(np.hypot(*e))
        base = sign * e / length ** 2
        normal = np.array([-e[1], e[0]]) / length
        kernel = _FrameKernel(self.kernel, self.frame)

        def integrand(xi):
            return float(kernel(base + xi * normal))

        crossings = sorted({-base[i] / normal[i] for i in range(2) if normal[i] != 0.0})
        edges = [-np.inf] + crossings + [np.inf]
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            value, error = integrate.quad(integrand, a, b, epsabs=0.0, epsrel=self.rtol, limit=200)
            if error > 10.0 * self.rtol * abs(value) and error > 1e-14:
                raise errors.QuadratureNotConverged(
                    "line integral of the kernel did not converge",
                    last_estimate=value,
                    last_change=error,
                )
            total += value
        return total / length

    @functools.cached_property
    def prefactor(self):
        kappa = self.kappa
        plus, minus = self.line_integral(1.0), self.line_integral(-1.0)
        constant = (plus ** 2 + minus ** 2) * special.beta(1.0 - kappa, 2.0 * kappa - 1.0)
        constant += plus * minus * special.beta(1.0 - kappa, 1.0 - kappa)
        return self.det_factor ** 2 * constant

    def _breaks(self, x, y):
        breaks = []
        for i in range(2):
            if self.d[i] != 0.0:
                breaks.extend(p / self.d[i] for p, _ in _ramps(x[i], y[i]))
        return breaks

    def _profile(self, x, y):
        d1, d2 = self.d

        def profile(s):
            s = np.asarray(s, dtype=float)
            return overlap(d1 * s, x[0], y[0]) * overlap(d2 * s, x[1], y[1])

        return profile

    def canonical_covariance(self, x, y):
        breaks = np.unique(self._breaks(x, y) + [0.0])
        pieces = []
        for a, b in zip(breaks[:-1], breaks[1:]):
            # Each factor is linear between breaks: fit its two end values.
            nodes = np.array([a, b])
            factors = [overlap(self.d[i] * nodes, x[i], y[i]) for i in range(2)]
            lines = [polynomial.polyfit(nodes, f, 1) for f in factors]
            pieces.append(polynomial.polymul(*lines))
        product = PiecewisePolynomial(breaks, pieces)
        return self.prefactor * product.integrate_power(2.0 * self.kappa - 1.0)

    def canonical_covariance_by_quadrature(self, x, y):
        profile = self._profile(x, y)
        return self.prefactor * _power_quadrature(
            profile, self._breaks(x, y), 2.0 * self.kappa - 1.0
        )


class PolarTildeFamily(_ModelFamily):
    """``Vt00``: diagonal defining matrix, integrated in polar coordinates.

    ``Cov = |det B|**-1 |b11 b22|**-1 int l1(v1 / b11) l2(v2 / b22) c(v) dv``
    over ``rho~``-polar coordinates, with ``c`` interpolated from a tabulated
    convolution.
    """

    levels = (16, 32, 64, 128)

    def __init__(self, family, regime, params, conv=None, table_nodes=33, rtol=1e-3):
        super().__init__(family, regime, params, None, rtol)
        self._conv = conv
        self.table_nodes = table_nodes

    @property
    def conv(self):
        if self._conv is None:
            self._conv = conv_asymptotic(
                self.kernel, self.kernel, self.params.B, nodes=self.table_nodes
            )
        return self._conv

    @property
    def matrix(self):
        B = self.canonical_B
        return np.diag([B[0, 0], B[1, 1]])

    def canonical_covariance(self, x, y):
        B = self.canonical_B
        b11, b22 = B[0, 0], B[1, 1]
        exps = self.exponents
        qt1, qt2 = exps.q_tilde1, exps.q_tilde2
        power = 1.0 / qt1 + 1.0 / qt2 - 1.0
        conv, frame = self.conv, self.frame

        def quadrant(s1, s2, n):
            a1 = max(s1 * b11 * x[0], -s1 * b11 * y[0]) ** qt1
            a2 = max(s2 * b22 * x[1], -s2 * b22 * y[1]) ** qt2
            p, wp = angular_panels(qt1, qt2, a1 / (a1 + a2), n)
            radius = np.minimum(a1 / p, a2 / (1.0 - p))
            s, ws = gauss_legendre(n)
            s, ws = 0.5 * (s + 1.0), 0.5 * ws
            r = radius[:, None] * s[None, :] ** (1.0 / power)
            v = np.stack(
                [
                    s1 * (r * p[:, None]) ** (1.0 / qt1),
                    s2 * (r * (1.0 - p[:, None])) ** (1.0 / qt2),
                ],
                axis=-1,
            )
            values = conv.c(frame.to_canonical_u(v)) * r
            values *= overlap(v[..., 0] / b11, x[0], y[0]) * overlap(v[..., 1] / b22, x[1], y[1])
            scale = radius ** power / power
            return float(np.sum(wp[:, None] * ws[None, :] * scale[:, None] * values))

        def evaluate(n):
            return sum(quadrant(s1, s2, n) for s1 in (1.0, -1.0) for s2 in (1.0, -1.0))

        what = "%s covariance" % self.family.value
        value, _ = refine(evaluate, self.levels, self.rtol, what=what)
        return self.det_factor * value / abs(b11 * b22)


def _definitions(B, det):
    (b11, b12), (b21, b22) = B
    return {
        Family.VT22: ((0.0, b22), (0.0, 1.0)),
        Family.VT21: ((0.0, b21), (1.0, 0.0)),
        Family.VT11: ((b11, 0.0), (1.0, 0.0)),
        Family.VT20: ((0.0, 1.0), (b21, b22)),
        Family.VT02: ((b12, b22), (0.0, 1.0)),
        Family.VT01: ((b11, b21), (1.0, 0.0)),
        Family.V11: ((1.0, 0.0), (b22 / det, 0.0)),
        Family.V21: ((0.0, 1.0), (-b21 / det, 0.0)),
        Family.V22: ((0.0, 1.0), (0.0, b11 / det)),
        Family.V01: ((b22 / det, -b21 / det), (1.0, 0.0)),
        Family.V10: ((1.0, 0.0), (b22 / det, -b12 / det)),
        Family.V20: ((0.0, 1.0), (-b21 / det, b11 / det)),
    }


def _hurst_pairs(exps):
    Ht1, Ht2, H1, H2 = exps.H_tilde1, exps.H_tilde2, exps.H1, exps.H2
    return {
        Family.VT22: (1.0, Ht2),
        Family.VT21: (Ht2, 1.0),
        Family.VT11: (Ht1, 1.0),
        Family.VT02: (1.0, Ht1),
        Family.VT01: (Ht1, 1.0),
        Family.V11: (H1, 0.5),
        Family.V21: (0.5, H1),
        Family.V22: (0.5, H2),
        Family.V10: (H1, 0.5),
        Family.V20: (0.5, H1),
    }


def limit_family(family, params, regime=None, conv=None, table_nodes=33, rtol=1e-4):
    """Build the evaluator of ``family`` for the model ``params``."""

    family = Family(family)
    regime = classify_regime(params) if regime is None else regime
    exps = regime.canonical_exponents
    if exps.q1 == exps.q2:
        region = Region.EQ_SMALL if exps.q1 < 1.5 else Region.EQ_LARGE
    elif exps.Q_tilde1 > 1.0:
        region = Region.R_BOTH_GT
    elif exps.Q_tilde2 > 1.0:
        region = Region.R_MIXED_12
    else:
        region = Region.R_BOTH_LT

    if family not in _REGION_FAMILIES[region]:
        raise errors.FamilyNotDefinedInRegion(
            "family '%s' is not defined in region '%s'" % (family.value, region.value),
            family=family.value,
            region=region.value,
        )
    if family in (Family.VT0, Family.V0):
        raise errors.UnsupportedFamily(
            "covariance of the well-balanced family '%s' is not implemented" % family.value,
            family=family.value,
        )
    if family is Family.VT00:
        return PolarTildeFamily(family, regime, params, conv=conv, table_nodes=table_nodes)

    B = regime.frame.matrix
    d, e = _definitions(B, float(np.linalg.det(B)))[family]
    hurst = _hurst_pairs(exps).get(family)
    if family in (Family.VT20, Family.V01):
        hurst = None
    cls = TildeRankOneFamily if family.tilde else RankOneFamily
    family_obj = cls(family, regime, params, d, e, hurst_pair=hurst, rtol=rtol)
    logger.debug("built limit family '%s' in region '%s'", family.value, region.value)
    return family_obj


def sigma_constant(family, params=None, regime=None, **options):
    """Variance constant ``E|V(1, 1)|**2`` of a family."""

    if not isinstance(family, LimitFamily):
        family = limit_family(family, params, regime=regime, **options)
    value = family.sigma2
    if not (math.isfinite(value) and value > 0.0):
        raise errors.QuadratureNotConverged(
            "variance constant of '%s' is not positive: '%s'" % (family.family.value, value),
            last_estimate=value,
            last_change=math.nan,
        )
    return value
