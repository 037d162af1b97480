"""
    anisofield.kernel
    -----------------

    Radial function, angular functions, the asymptotic kernel and the
    moving-average coefficients of the linear field, together with the polar
    representation of generalized homogeneous functions.

    Every evaluator accepts either a single 2-vector or an array of shape
    ``(..., 2)`` and returns a float or an array of matching leading shape.

    :copyright: (c) 2026, anisofield authors.
    :license: BSD, see LICENSE for details.
"""

import dataclasses
import logging
import typing

import numpy as np
from numpy.polynomial import polynomial
from scipy import interpolate, special

from anisofield import errors


__all__ = [
    "AngularSpec",
    "KernelContext",
    "a_inf",
    "angular_L",
    "coeff_b",
    "coefficient_window",
    "integrability_sequence",
    "norm_equivalence_bounds",
    "polar_decompose",
    "radial_integral",
    "rho",
    "triangle_exponent",
]

logger = logging.getLogger(__name__)

TABLE_NODES = 1025
_ENDPOINT_TOL = 1e-12


def _as_points(u):
    points = np.asarray(u, dtype=float)
    if points.shape[-1:] != (2,):
        raise ValueError("expected 2-vectors, got shape '%s'" % (points.shape,))
    return points


def _unwrap(values, points):
    """Return a float for a single point and the array otherwise."""

    return float(values) if points.ndim == 1 else values


def rho(u, q1, q2):
    """Radial function ``|u1|**q1 + |u2|**q2``."""

    points = _as_points(u)
    values = np.abs(points[..., 0]) ** q1 + np.abs(points[..., 1]) ** q2
    return _unwrap(values, points)


@dataclasses.dataclass(frozen=True)
class AngularSpec:
    """Pair of continuous functions ``L+`` and ``L-`` on ``[-1, 1]``.

    ``kind`` is one of ``constant`` (``plus`` holds the single value),
    ``poly`` (coefficients in increasing degree) or ``table`` (values on a
    uniform grid of ``[-1, 1]``, interpolated linearly).
    """

    kind: str
    plus: typing.Tuple[float, ...]
    minus: typing.Tuple[float, ...]

    def __post_init__(self):
        if self.kind not in {"constant", "poly", "table"}:
            raise errors.InvalidAngularSpec(
                "unknown angular function kind: '%s'" % self.kind
            )
        if not self.plus or not self.minus:
            raise errors.InvalidAngularSpec("angular function data is empty")
        if self.kind == "table" and min(len(self.plus), len(self.minus)) < 2:
            raise errors.InvalidAngularSpec("a table needs at least two nodes")
        if not np.all(np.isfinite(self.plus + self.minus)):
            raise errors.InvalidAngularSpec("angular function values must be finite")

        ends = np.array([-1.0, 1.0])
        mismatch = np.abs(self._branch(self.plus, ends) - self._branch(self.minus, ends))
        scale = max(1.0, float(np.max(np.abs(self._branch(self.plus, ends)))))
        if np.any(mismatch > _ENDPOINT_TOL * scale):
            raise errors.InvalidAngularSpec(
                "L+ and L- must agree at z = -1 and z = 1, mismatch: '%s'"
                % mismatch.tolist(),
            )

    @classmethod
    def constant(cls, value=1.0):
        return cls("constant", (float(value),), (float(value),))

    @classmethod
    def poly(cls, plus, minus=None):
        plus = tuple(float(c) for c in plus)
        return cls("poly", plus, tuple(float(c) for c in minus) if minus is not None else plus)

    @classmethod
    def table(cls, plus, minus=None):
        plus = tuple(float(v) for v in plus)
        return cls("table", plus, tuple(float(v) for v in minus) if minus is not None else plus)

    @classmethod
    def from_samples(cls, z, plus, minus, nodes=TABLE_NODES):
        """Resample branch samples at abscissae ``z`` onto a uniform table.

        The samples must cover both endpoints. Endpoint values of the two
        branches describe the same points and are averaged.
        """

        z = np.asarray(z, dtype=float)
        plus = np.array(plus, dtype=float)
        minus = np.array(minus, dtype=float)
        if z[0] != -1.0 or z[-1] != 1.0:
            raise errors.InvalidAngularSpec("samples must include z = -1 and z = 1")
        for end in (0, -1):
            plus[end] = minus[end] = 0.5 * (plus[end] + minus[end])

        grid = np.linspace(-1.0, 1.0, nodes)
        return cls.table(
            interpolate.CubicSpline(z, plus)(grid),
            interpolate.CubicSpline(z, minus)(grid),
        )

    @classmethod
    def from_config(cls, config):
        kind = config.get("kind", "constant")
        if kind == "constant":
            return cls.constant(config.get("value", 1.0))
        factory = {"poly": cls.poly, "table": cls.table}.get(kind)
        if factory is None:
            raise errors.InvalidAngularSpec("unknown angular function kind: '%s'" % kind)
        return factory(config["plus"], config.get("minus"))

    def as_config(self):
        if self.kind == "constant":
            return {"kind": "constant", "value": self.plus[0]}
        return {"kind": self.kind, "plus": list(self.plus), "minus": list(self.minus)}

    def _branch(self, data, z):
        if self.kind == "constant":
            return np.full(np.shape(z), data[0])
        if self.kind == "poly":
            return polynomial.polyval(z, np.asarray(data))
        return np.interp(z, np.linspace(-1.0, 1.0, len(data)), np.asarray(data))

    def evaluate(self, z, upper):
        """Evaluate ``L+`` where ``upper`` holds and ``L-`` elsewhere."""

        z = np.clip(np.asarray(z, dtype=float), -1.0, 1.0)
        return np.where(upper, self._branch(self.plus, z), self._branch(self.minus, z))

    def sup(self):
        """Supremum of ``|L+|`` and ``|L-|`` over ``[-1, 1]``."""

        if self.kind == "table":
            return float(np.max(np.abs(self.plus + self.minus)))
        grid = np.linspace(-1.0, 1.0, TABLE_NODES)
        return float(
            max(np.max(np.abs(self._branch(d, grid))) for d in (self.plus, self.minus))
        )

    @property
    def is_constant(self):
        return self.kind == "constant"


def _angular_values(points, spec, q1, q2):
    # The caller guarantees that no point is the origin.
    radial = np.abs(points[..., 0]) ** q1 + np.abs(points[..., 1]) ** q2
    z = points[..., 0] / radial ** (1.0 / q1)
    return spec.evaluate(z, points[..., 1] >= 0.0)


def _a_inf(points, q1, q2, spec):
    """Unchecked asymptotic kernel, origin maps to infinity."""

    radial = np.abs(points[..., 0]) ** q1 + np.abs(points[..., 1]) ** q2
    with np.errstate(divide="ignore", invalid="ignore"):
        z = points[..., 0] / radial ** (1.0 / q1)
        return spec.evaluate(z, points[..., 1] >= 0.0) / radial


def _check_nonzero(points):
    if np.any(np.all(points == 0.0, axis=-1)):
        raise errors.SingularOrigin("the angular function is undefined at u = 0")


def angular_L(u, spec, q1, q2):
    """Angular function ``L(u)`` with ``z = u1 / rho(u)**(1/q1)``."""

    points = _as_points(u)
    _check_nonzero(points)
    return _unwrap(_angular_values(points, spec, q1, q2), points)


@dataclasses.dataclass(frozen=True)
class KernelContext:
    """Immutable view of the model parameters used on hot paths."""

    q1: float
    q2: float
    B: typing.Tuple[typing.Tuple[float, float], typing.Tuple[float, float]]
    angular: AngularSpec = AngularSpec.constant(1.0)
    b0: float = 0.0
    M: int = 64

    @classmethod
    def from_params(cls, params, M=None):
        return cls(
            q1=params.q1,
            q2=params.q2,
            B=params.B,
            angular=params.angular,
            b0=params.b0,
            M=params.M if M is None else int(M),
        )

    @property
    def matrix(self):
        return np.array(self.B, dtype=float)

    @property
    def det(self):
        return float(np.linalg.det(self.matrix))

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


def a_inf(u, ctx):
    """Asymptotic kernel ``L(u) / rho(u)``."""

    points = _as_points(u)
    _check_nonzero(points)
    return _unwrap(_a_inf(points, ctx.q1, ctx.q2, ctx.angular), points)


def coeff_b(t, ctx):
    """Moving-average coefficient ``b(t) = a_inf(B t)``, ``b(0) = b0``."""

    points = _as_points(t)
    mapped = points @ ctx.matrix.T
    origin = np.all(points == 0.0, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = _a_inf(mapped, ctx.q1, ctx.q2, ctx.angular)
    values = np.where(origin, ctx.b0, values)
    return _unwrap(values, points)


def coefficient_window(ctx, radius):
    """Coefficients on ``|t|_inf <= radius``, indexed ``[t1 + radius, t2 + radius]``."""

    if radius == 0:
        return np.array([[ctx.b0]])
    axis = np.arange(-radius, radius + 1, dtype=float)
    grid = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1)
    return coeff_b(grid, ctx)


def polar_decompose(h, q1, q2, nodes=TABLE_NODES, test_rays=64, rtol=1e-8, seed=0):
    """Recover the angular functions of a generalized homogeneous ``h``.

    ``h`` maps an array of points ``(..., 2)`` to values. Homogeneity
    ``lam * h(lam**(1/q1) t1, lam**(1/q2) t2) == h(t)`` is checked on random
    rays before tabulating ``L+-(z) = h(z, +-(1 - |z|**q1)**(1/q2))``.
    """

    rng = np.random.default_rng(seed)
    z = rng.uniform(-1.0, 1.0, test_rays)
    sign = rng.choice([-1.0, 1.0], test_rays)
    sphere = np.stack([z, sign * (1.0 - np.abs(z) ** q1) ** (1.0 / q2)], axis=-1)
    reference = np.asarray(h(sphere), dtype=float)

    for lam in (1e-2, 0.5, 3.0, 1e2):
        scaled = sphere * np.array([lam ** (1.0 / q1), lam ** (1.0 / q2)])
        deviation = np.abs(lam * np.asarray(h(scaled)) - reference)
        if np.any(deviation > rtol * np.maximum(np.abs(reference), 1.0)):
            raise errors.InconsistentHomogeneity(
                "function is not generalized homogeneous with q = ('%s', '%s')" % (q1, q2),
                scale=lam,
                max_deviation=float(deviation.max()),
            )

    grid = np.linspace(-1.0, 1.0, nodes)
    height = (1.0 - np.abs(grid) ** q1) ** (1.0 / q2)
    plus = np.asarray(h(np.stack([grid, height], axis=-1)), dtype=float)
    minus = np.asarray(h(np.stack([grid, -height], axis=-1)), dtype=float)
    # Both branches pass through (+-1, 0); the lower one must reuse those values.
    minus[[0, -1]] = plus[[0, -1]]
    return AngularSpec.table(plus, minus)


def triangle_exponent(q1, q2):
    """Exponent ``q`` for which ``rho**(1/q)`` satisfies the triangle inequality."""

    return max(q1, q2, 1.0)


def norm_equivalence_bounds(q1, q2, scales=(1e-3, 1.0, 1e3), samples=4096, seed=0):
    """Empirical constants of ``C1 rho**(1/q1) <= N(u) <= C2 rho**(1/q1)``.

    ``N(u) = (u1**2 + |u2|**(2 q2 / q1))**(1/2)``. One ``(C1, C2)`` pair is
    returned per scale; the ratio is generalized invariant so the pairs only
    differ by rounding.
    """

    rng = np.random.default_rng(seed)
    z = rng.uniform(-1.0, 1.0, samples)
    sign = rng.choice([-1.0, 1.0], samples)
    sphere = np.stack([z, sign * (1.0 - np.abs(z) ** q1) ** (1.0 / q2)], axis=-1)

    bounds = []
    for lam in scales:
        points = sphere * np.array([lam ** (1.0 / q1), lam ** (1.0 / q2)])
        norm = np.sqrt(points[:, 0] ** 2 + np.abs(points[:, 1]) ** (2.0 * q2 / q1))
        ratio = norm / rho(points, q1, q2) ** (1.0 / q1)
        bounds.append((float(ratio.min()), float(ratio.max())))
    return bounds


def radial_integral(q1, q2, kind):
    """Closed forms of ``int_{rho<1} rho**-1`` and ``int_{rho>=1} rho**-2``."""

    Q = 1.0 / q1 + 1.0 / q2
    sphere = 4.0 * special.beta(1.0 / q1, 1.0 / q2) / (q1 * q2)
    if kind == "local":
        return sphere / (Q - 1.0) if Q > 1.0 else np.inf
    if kind == "tail":
        return sphere / (2.0 - Q) if Q < 2.0 else np.inf
    raise ValueError("unknown integral kind: '%s'" % kind)


def integrability_sequence(q1, q2, kind, levels=6):
    """Nested-grid quadratures of the local or tail radial integral.

    ``local`` integrates ``rho**-1`` over ``{rho < 1}`` with midpoint grids of
    ``64 * 2**j`` cells per unit; ``tail`` integrates ``rho**-2`` over
    ``{rho >= 1}`` on boxes of growing extent ``4**(j+1)``. Both sequences are
    Cauchy exactly when the integral is finite.
    """

    values = []
    if kind == "local":
        for level in range(levels):
            cells = 64 * 2 ** level
            mid = (np.arange(cells) + 0.5) / cells
            u1, u2 = np.meshgrid(mid, mid, indexing="ij", sparse=True)
            radial = u1 ** q1 + u2 ** q2
            integrand = np.where(radial < 1.0, 1.0 / radial, 0.0)
            values.append(4.0 * float(integrand.sum()) / cells ** 2)
        return values

    if kind == "tail":
        extents = [4.0 ** (level + 1) for level in range(levels)]
        # One geometric grid serves every extent, so the sequence is nested.
        inner = np.linspace(0.0, 1.0, 129)
        outer = np.geomspace(1.0, extents[-1], 64 * levels + 1)
        edges = np.concatenate([inner, outer[1:]])
        mid = 0.5 * (edges[1:] + edges[:-1])
        width = np.diff(edges)
        u1, u2 = np.meshgrid(mid, mid, indexing="ij", sparse=True)
        radial = u1 ** q1 + u2 ** q2
        integrand = np.where(radial >= 1.0, radial ** -2.0, 0.0) * np.outer(width, width)
        for extent in extents:
            inside = mid <= extent
            values.append(4.0 * float(integrand[np.ix_(inside, inside)].sum()))
        return values

    raise ValueError("unknown integral kind: '%s'" % kind)
