"""
    anisofield.axis
    ---------------

    Dependence axis of decaying lattice functions from directional decay
    exponents: along the axis the function decays at the slowest power rate.

    :copyright: (c) 2026, anisofield authors.
    :license: BSD, see LICENSE for details.
"""

import concurrent.futures
import dataclasses
import logging
import math
import typing

import numpy as np
from scipy import optimize

from anisofield import errors
from anisofield.kernel import coeff_b


__all__ = [
    "AxisEstimate",
    "DEFAULT_RADII",
    "angle_between",
    "coefficient_evaluator",
    "covariance_evaluator",
    "decay_exponent",
    "far_field_gap",
    "find_axis",
    "predicted_axis",
]

logger = logging.getLogger(__name__)

DEFAULT_RADII = tuple(np.logspace(3.0, 4.0, 8))
MARGIN = 0.1


def coefficient_evaluator(ctx):
    def evaluate(t):
        return coeff_b(np.asarray(t, dtype=float), ctx)

    return evaluate


def covariance_evaluator(oracle, surrogate=True):
    """``r_X`` at lattice lags.

    With ``surrogate`` the far-field form stands in for lags outside the
    oracle window; otherwise every lag is summed on the lattice.
    """

    def evaluate(lags):
        lags = np.asarray(lags, dtype=int)
        values = np.empty(len(lags))
        far = np.max(np.abs(lags), axis=-1) > oracle.window
        if oracle.far_field is None or not surrogate:
            far[:] = False
        if np.any(far):
            values[far] = oracle.far_field.lattice(lags[far])
        if np.any(~far):
            values[~far] = oracle.values([tuple(k) for k in lags[~far]])
        return values

    return evaluate


def _unit(c):
    c = np.asarray(c, dtype=float)
    length = float(np.hypot(*c))
    if length == 0.0:
        raise errors.ConfigError("direction must be nonzero")
    return c / length


def far_field_gap(oracle, direction, radii):
    """Largest ``|r_X / far field - 1|`` at ``floor(r d)`` along ``{c . t = 0}``."""

    c = _unit(direction)
    d = np.array([-c[1], c[0]])
    lags = np.floor(np.asarray(radii, dtype=float)[:, None] * d[None, :]).astype(int)
    lattice = covariance_evaluator(oracle, surrogate=False)(lags)
    asymptotic = oracle.far_field.lattice(lags)
    gap = float(np.max(np.abs(lattice / asymptotic - 1.0)))
    logger.info("lattice against far field along '%s': '%s'", tuple(c), gap)
    return gap


def decay_exponent(g, direction, radii=DEFAULT_RADII, min_largest_radius=1e3):
    """Decay exponent of ``g`` along the line ``{t : c . t = 0}``.

    ``g`` is evaluated at ``floor(r d)`` for the unit vector ``d`` spanning
    the line; the exponent is the slope of ``log(1/|g|)`` against ``log|t|``
    over the upper half of ``radii``.
    """

    radii = np.asarray(radii, dtype=float)
    if len(radii) < 2 or np.any(np.diff(radii) <= 0):
        raise errors.ConfigError("radii must be increasing with at least two values")
    if radii[-1] < min_largest_radius:
        raise errors.ConfigError(
            "largest radius '%s' is below '%s'" % (radii[-1], min_largest_radius)
        )

    c = _unit(direction)
    d = np.array([-c[1], c[0]])
    points = np.floor(radii[:, None] * d[None, :])
    values = np.asarray(g(points), dtype=float)

    if np.all(values == 0.0):
        raise errors.ZeroValue("function vanishes at all points along '%s'" % (tuple(c),))
    signs = np.sign(values[values != 0.0])
    if np.any(signs != signs[0]):
        logger.warning("sign changes along direction '%s'; using |g|", tuple(c))

    upper = slice(len(radii) // 2, None)
    keep = values[upper] != 0.0
    norms = np.hypot(points[upper, 0], points[upper, 1])[keep]
    logs = -np.log(np.abs(values[upper][keep]))
    if len(norms) < 2:
        raise errors.ZeroValue("too few nonzero values along '%s'" % (tuple(c),))
    slope, _ = np.polyfit(np.log(norms), logs, 1)
    return float(slope)


def _normal(theta):
    # Line direction (cos, sin); normal with nonnegative second component.
    a = np.array([-math.sin(theta), math.cos(theta)])
    if a[1] < 0 or (a[1] == 0 and a[0] < 0):
        a = -a
    return a


def angle_between(a, b):
    """Angle in degrees between the lines with normals ``a`` and ``b``."""

    a, b = _unit(a), _unit(b)
    cosine = min(1.0, abs(float(np.dot(a, b))))
    return math.degrees(math.acos(cosine))


def predicted_axis(q1, q2, B):
    """Normal of the dependence axis of ``b``: the row of ``B`` of the larger ``q``."""

    if q1 == q2:
        return None
    B = np.asarray(B, dtype=float)
    row = B[1] if q1 < q2 else B[0]
    normal = _unit(row)
    return -normal if normal[1] < 0 or (normal[1] == 0 and normal[0] < 0) else normal


@dataclasses.dataclass
class AxisEstimate:
    direction: np.ndarray
    angle: float
    on_axis_exponent: float
    off_axis_exponent: float
    scan: typing.List[typing.Tuple[float, float]]
    prediction: typing.Optional[np.ndarray] = None

    @property
    def prediction_error(self):
        if self.prediction is None:
            return None
        return angle_between(self.direction, self.prediction)

    def as_dict(self):
        report = {
            "direction": [float(v) for v in self.direction],
            "angle": self.angle,
            "on_axis_exponent": self.on_axis_exponent,
            "off_axis_exponent": self.off_axis_exponent,
        }
        if self.prediction is not None:
            report["prediction"] = [float(v) for v in self.prediction]
            report["prediction_error_degrees"] = self.prediction_error
        return report


def find_axis(
    g,
    n_directions=16,
    radii=DEFAULT_RADII,
    margin=MARGIN,
    prediction=None,
    min_largest_radius=1e3,
    threads=1,
):
    """Scan line directions on the half circle and refine the slowest one."""

    if n_directions < 16:
        raise errors.ConfigError("need at least 16 directions, got %d" % n_directions)

    def exponent(theta):
        return decay_exponent(g, _normal(theta), radii, min_largest_radius)

    angles = np.pi * np.arange(n_directions) / n_directions
    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as executor:
            exponents = np.array(list(executor.map(exponent, angles)))
    else:
        exponents = np.array([exponent(theta) for theta in angles])
    for theta, value in zip(angles, exponents):
        logger.info("direction %.2f deg: exponent '%s'", math.degrees(theta), value)

    best = int(np.argmin(exponents))
    median = float(np.median(exponents))
    if median - exponents[best] < margin:
        raise errors.NoSeparation(
            "no dependence axis: min exponent '%s' within '%s' of the median '%s'"
            % (exponents[best], margin, median),
            minimum=float(exponents[best]),
            median=median,
        )

    step = np.pi / n_directions
    result = optimize.minimize_scalar(
        exponent,
        bounds=(angles[best] - step, angles[best] + step),
        method="bounded",
        options={"xatol": 1e-4},
    )
    theta = float(result.x) if result.fun <= exponents[best] else float(angles[best])
    on_axis = min(float(result.fun), float(exponents[best]))

    return AxisEstimate(
        direction=_normal(theta),
        angle=math.degrees(theta) % 180.0,
        on_axis_exponent=on_axis,
        off_axis_exponent=median,
        scan=[(math.degrees(t), float(v)) for t, v in zip(angles, exponents)],
        prediction=None if prediction is None else _unit(prediction),
    )
