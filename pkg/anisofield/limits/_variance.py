"""Exact variances and covariances of rectangle partial sums."""

import logging

import numpy as np

from anisofield import errors
from anisofield.convolution import TRUNCATION_LIMIT
from anisofield.synth import PartialSumSpec


logger = logging.getLogger(__name__)

_CHUNK = 1 << 21
DENSE_LAGS = 1 << 24
METHODS = ("auto", "dense", "coarse")


def _counts(n_x, n_y, lags):
    """``#{t in 1..n_x : t + k in 1..n_y}`` for each lag ``k``."""

    return np.clip(np.minimum(n_x, n_y - lags) - np.maximum(0, -lags), 0, None).astype(float)


def _cell_moments(n_x, n_y, lo, hi):
    """Sums of ``c(k)`` and ``k c(k)`` over the integer cells ``[lo, hi]``.

    ``c`` is the lag count of :func:`_counts`, which rises with slope one,
    stays at ``min(n_x, n_y)`` and falls with slope one.
    """

    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    m = float(min(n_x, n_y))
    pieces = (
        (-n_x + 1.0, m - n_x, float(n_x), 1.0),
        (m - n_x + 1.0, n_y - m, m, 0.0),
        (n_y - m + 1.0, n_y - 1.0, float(n_y), -1.0),
    )
    weight = np.zeros(np.broadcast(lo, hi).shape)
    moment = np.zeros_like(weight)
    for start, stop, alpha, beta in pieces:
        a, b = np.maximum(lo, start), np.minimum(hi, stop)
        n = np.maximum(b - a + 1.0, 0.0)
        centre = 0.5 * (a + b)
        first = n * centre
        second = n * centre ** 2 + n * (n ** 2 - 1.0) / 12.0
        weight += alpha * n + beta * first
        moment += alpha * first + beta * second
    return weight, moment


def _axis_cells(window, level):
    """One axis of the ring ``window 2**(level-1) < |k|_inf <= window 2**level``.

    Cells have width ``2**(level-1)``; ``outer`` marks the cells beyond the
    inner square. The lag zero is a cell of its own.
    """

    width = 1 << (level - 1)
    radius = window * width
    index = np.arange(2 * window)
    lo = np.concatenate([-2 * radius + width * index, [0], 1 + width * index])
    hi = np.concatenate([-2 * radius + width * (index + 1) - 1, [0], width * (index + 1)])
    outer = np.concatenate([index < window, [False], index >= window])
    return lo, hi, outer


def _dense_covariance(oracle, sides_x, sides_y):
    (nx1, nx2), (ny1, ny2) = sides_x, sides_y
    k1 = np.arange(-nx1 + 1, ny1)
    k2_max = max(nx2, ny2) - 1
    c1 = _counts(nx1, ny1, k1)
    c2 = _counts(nx2, ny2, np.arange(-k2_max, k2_max + 1))

    rows = max(1, _CHUNK // (2 * k2_max + 1))
    value = bound = 0.0
    for start in range(0, len(k1), rows):
        chunk = slice(start, start + rows)
        values, bounds = oracle.lag_rows(k1[chunk], k2_max)
        value += float(c1[chunk] @ (values @ c2))
        bound += float(c1[chunk] @ (bounds @ c2))
    return value, bound


def _coarse_covariance(oracle, sides_x, sides_y):
    """Exact window plus far-field rings summed over coarsening cells.

    Ring ``j`` covers ``K 2**(j-1) < |k|_inf <= K 2**j`` with cells of width
    ``2**(j-1)``, each evaluated at its count-weighted centroid, so every
    cell is at least ``K`` widths away from the origin.
    """

    (nx1, nx2), (ny1, ny2) = sides_x, sides_y
    K = oracle.window
    extent = max(nx1, nx2, ny1, ny2) - 1

    near = np.arange(-K, K + 1)
    values, bounds = oracle.lag_rows(near, K)
    c1, c2 = _counts(nx1, ny1, near), _counts(nx2, ny2, near)
    value = float(c1 @ values @ c2)
    bound = float(c1 @ bounds @ c2)

    level, cells = 1, 0
    while K * (1 << (level - 1)) < extent:
        lo, hi, outer = _axis_cells(K, level)
        w1, m1 = _cell_moments(nx1, ny1, lo, hi)
        w2, m2 = _cell_moments(nx2, ny2, lo, hi)
        keep = (outer[:, None] | outer[None, :]) & (w1[:, None] > 0.0) & (w2[None, :] > 0.0)
        i, j = np.nonzero(keep)
        centres = np.stack([m1[i] / w1[i], m2[j] / w2[j]], axis=-1)
        value += float(np.sum(w1[i] * w2[j] * oracle.far_field.lattice(centres)))
        cells += len(i)
        level += 1
    logger.debug("coarse lag sum over %d rings and %d cells", level - 1, cells)
    return value, bound


def rectangle_covariance(oracle, sides_x, sides_y, method="auto"):
    """``Cov(S_x, S_y)`` and its truncation bound for integer rectangle sides.

    ``dense`` sums every lag. ``coarse`` sums the exact window lag by lag and
    the far field over cells that widen with the distance, which keeps the
    cost logarithmic in the sides; it needs an oracle with a far field.
    ``auto`` picks ``coarse`` when a far field exists and the dense sum
    would visit more than ``DENSE_LAGS`` lags.
    """

    (nx1, nx2), (ny1, ny2) = sides_x, sides_y
    if min(nx1, nx2, ny1, ny2) < 1:
        raise errors.ConfigError(
            "rectangles must be nonempty, got sides '%s' and '%s'" % (sides_x, sides_y)
        )
    if method not in METHODS:
        raise errors.ConfigError(
            "unknown summation method '%s', expected one of %s" % (method, list(METHODS))
        )
    if method == "coarse" and (oracle.far_field is None or oracle.window < 1):
        raise errors.ConfigError("coarse summation needs a far field and a nonempty window")
    if method == "auto":
        lags = (nx1 + ny1 - 1) * (2 * max(nx2, ny2) - 1)
        method = "coarse" if oracle.far_field is not None and lags > DENSE_LAGS else "dense"

    if method == "coarse":
        value, bound = _coarse_covariance(oracle, sides_x, sides_y)
    else:
        value, bound = _dense_covariance(oracle, sides_x, sides_y)

    if bound > TRUNCATION_LIMIT * abs(value):
        raise errors.TruncationDominates(
            "truncation bound '%s' exceeds %d%% of the covariance '%s'"
            % (bound, 100 * TRUNCATION_LIMIT, value),
            value=value,
            tail_bound=bound,
        )
    return value, bound


def exact_cross_covariance(oracle, lam, gamma, x, y, with_bound=False):
    """``Cov(S_{lambda,gamma}(x), S_{lambda,gamma}(y))`` by weighted lag sums."""

    spec = PartialSumSpec(lam, gamma, (x, y))
    value, bound = rectangle_covariance(oracle, spec.sides(x), spec.sides(y))
    return (value, bound) if with_bound else value


def exact_variance(oracle, lam, gamma, x, with_bound=False):
    """``Var S_{lambda,gamma}(x)``."""

    return exact_cross_covariance(oracle, lam, gamma, x, x, with_bound=with_bound)


def brute_force_covariance(oracle, sides_x, sides_y):
    """``sum_{t, s} r(s - t)`` over all index pairs; small rectangles only."""

    total = 0.0
    for t1 in range(1, sides_x[0] + 1):
        for t2 in range(1, sides_x[1] + 1):
            for s1 in range(1, sides_y[0] + 1):
                for s2 in range(1, sides_y[1] + 1):
                    total += oracle.value((s1 - t1, s2 - t2))
    return total
