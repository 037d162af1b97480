"""
    anisofield.convolution
    ----------------------

    Autocovariance ``r_X = b * b`` of the linear field and its continuous
    asymptotics.

    :class:`CovarianceOracle` evaluates truncated lattice sums, either one lag
    at a time by direct summation or over a whole window by FFT, optionally
    corrected by the integral of the neglected exterior and extended beyond
    the window by an attached :class:`AsymptoticConv`.

    :copyright: (c) 2026, anisofield authors.
    :license: BSD, see LICENSE for details.
"""

import concurrent.futures
import dataclasses
import logging
import math
import threading
import typing

import numpy as np
from scipy import fft as sp_fft, interpolate, signal

from anisofield import errors
from anisofield.kernel import AngularSpec, coeff_b, coefficient_window
from anisofield.quadrature import HomogeneousKernel, convolve_at, exterior_integral


__all__ = [
    "AsymptoticConv",
    "ConvComparison",
    "CovarianceOracle",
    "conv_asymptotic",
    "covariance_rX",
    "directional_lags",
    "lattice_conv_vs_asymptotic",
]

logger = logging.getLogger(__name__)

TRUNCATION_LIMIT = 0.1
# Relative accuracy credited to an applied tail correction.
TAIL_TRUST = 0.05
# Nodes per axis of the spline that spreads the tail over the window.
TAIL_NODES = 9
MEMORY_LIMIT = 2 * 1024 ** 3
_CHUNK = 1 << 22


@dataclasses.dataclass(frozen=True)
class AsymptoticConv:
    """``rho~(v)**-1 L~(v)``: continuous convolution of two kernels.

    ``angular`` tabulates the convolution on the ``rho~``-unit sphere; the
    angular function of the covariance asymptotics is ``det_factor *
    angular``.
    """

    q_tilde1: float
    q_tilde2: float
    angular: AngularSpec
    det_factor: float
    B: typing.Tuple[typing.Tuple[float, float], typing.Tuple[float, float]]

    def rho_tilde(self, v):
        v = np.asarray(v, dtype=float)
        return np.abs(v[..., 0]) ** self.q_tilde1 + np.abs(v[..., 1]) ** self.q_tilde2

    def _angular(self, v, radial):
        z = v[..., 0] / radial ** (1.0 / self.q_tilde1)
        return self.angular.evaluate(z, v[..., 1] >= 0.0)

    def LTilde(self, v):
        v = np.asarray(v, dtype=float)
        return self.det_factor * self._angular(v, self.rho_tilde(v))

    def c(self, v):
        """Continuous convolution ``(a1 * a2)(v)``."""

        v = np.asarray(v, dtype=float)
        radial = self.rho_tilde(v)
        return self._angular(v, radial) / radial

    def evaluate(self, v):
        return self.det_factor * self.c(v)

    def lattice(self, k):
        """Asymptotic covariance at lattice lags ``k``."""

        k = np.asarray(k, dtype=float)
        return self.evaluate(k @ np.array(self.B, dtype=float).T)


def _map(fn, items, threads):
    if threads and threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as executor:
            return list(executor.map(fn, items))
    return [fn(item) for item in items]


def conv_asymptotic(a1, a2, B, nodes=33, rtol=1e-4, threads=1):
    """Tabulate the convolution of two homogeneous kernels on the unit sphere."""

    if (a1.q1, a1.q2) != (a2.q1, a2.q2):
        raise ValueError("convolved kernels must share their exponents")
    Q = a1.Q
    if not 1.0 < Q < 2.0:
        raise errors.OutOfRegion("convolution requires 1 < Q < 2, got Q = '%s'" % Q)

    qt1, qt2 = a1.q1 * (2.0 - Q), a1.q2 * (2.0 - Q)
    z = -np.cos(np.pi * np.arange(nodes) / (nodes - 1))
    z[0], z[-1] = -1.0, 1.0
    height = (1.0 - np.abs(z) ** qt1) ** (1.0 / qt2)

    def convolution(point):
        value, _ = convolve_at(point, a1, a2, rtol=rtol)
        return value

    upper = np.array(_map(convolution, list(np.stack([z, height], axis=-1)), threads))
    if a1 == a2:
        # c(v) = c(-v), so the lower branch is the reflected upper branch.
        lower = upper[::-1].copy()
    else:
        lower = np.array(_map(convolution, list(np.stack([z, -height], axis=-1)), threads))

    B = np.asarray(B, dtype=float)
    logger.info("tabulated convolution asymptotics on %d nodes", nodes)
    return AsymptoticConv(
        q_tilde1=qt1,
        q_tilde2=qt2,
        angular=AngularSpec.from_samples(z, upper, lower),
        det_factor=1.0 / abs(np.linalg.det(B)),
        B=tuple(tuple(float(v) for v in row) for row in B),
    )


def _fft_bytes(*sizes):
    return 48 * int(np.prod([sp_fft.next_fast_len(s) for s in sizes]))


class CovarianceOracle:
    """Deterministic evaluator of ``r_X(k)``.

    In the default mode ``r_X(k)`` is the symmetrized truncated sum
    ``(S(k) + S(-k)) / 2`` with ``S(k) = sum_{|u|_inf <= M} b(u) b(u + k)``,
    plus (with ``tail_correction``) the integral of ``a(Bu) a(B(u + k))`` over
    ``|u|_inf > M + 1/2``. With ``field_consistent`` it is ``b_M * b_M``, the
    exact covariance of a field synthesized with truncation radius ``M``.
    """

    def __init__(
        self,
        ctx,
        M=None,
        window=32,
        tail_correction=True,
        far_field=None,
        field_consistent=False,
        memory_limit=MEMORY_LIMIT,
    ):
        self.ctx = ctx
        self.M = ctx.M if M is None else int(M)
        self.window = int(window)
        self.tail_correction = bool(tail_correction) and not field_consistent
        self.far_field = far_field
        self.field_consistent = bool(field_consistent)
        self.memory_limit = memory_limit
        if self.field_consistent:
            self.window = min(self.window, 2 * self.M)

        self._cache = {}
        self._lock = threading.RLock()
        self._truncated = None
        self._tail = None
        self._tail_abs = None
        self._far_field_error = None

        exps_Q = 1.0 / ctx.q1 + 1.0 / ctx.q2
        self._kernel = HomogeneousKernel(ctx.q1, ctx.q2, ctx.angular)
        self._decay = min(ctx.q1, ctx.q2) * (2.0 - exps_Q)

    @property
    def support(self):
        """Largest ``|k|_inf`` with a possibly nonzero covariance, or ``None``."""

        return 2 * self.M if self.field_consistent else None

    # -- direct summation ---------------------------------------------------

    def _one_sided(self, k):
        """``sum_{|u|_inf <= M} b(u) b(u + k)`` accumulated in row chunks."""

        M = self.M
        axis = np.arange(-M, M + 1, dtype=float)
        rows = max(1, _CHUNK // len(axis))
        total = 0.0
        for start in range(-M, M + 1, rows):
            u1 = np.arange(start, min(start + rows, M + 1), dtype=float)
            u = np.stack(np.meshgrid(u1, axis, indexing="ij"), axis=-1)
            shifted = u + np.asarray(k, dtype=float)
            weights = coeff_b(u, self.ctx) * coeff_b(shifted, self.ctx)
            if self.field_consistent:
                inside = np.all(np.abs(shifted) <= M, axis=-1)
                weights = np.where(inside, weights, 0.0)
            total += float(weights.sum())
        return total

    def direct(self, k):
        """Truncated covariance at one lag, without any tail correction."""

        k = tuple(int(v) for v in k)
        if self.field_consistent:
            return self._one_sided(k)
        return 0.5 * (self._one_sided(k) + self._one_sided((-k[0], -k[1])))

    # -- tail ---------------------------------------------------------------

    def _exterior(self, k, absolute=False):
        B = self.ctx.matrix
        shift = np.asarray(k, dtype=float)
        kernel = self._kernel

        def integrand(u):
            values = kernel(u @ B.T) * kernel((u + shift) @ B.T)
            return np.abs(values) if absolute else values

        ridges = [(-B[0, 1], B[0, 0]), (-B[1, 1], B[1, 0])]
        return exterior_integral(integrand, self.M + 0.5, ridges=ridges, decay=self._decay)

    def _tail_pair(self, k, absolute=False):
        minus = (-k[0], -k[1])
        return 0.5 * (self._exterior(k, absolute) + self._exterior(minus, absolute))

    def tail(self, k):
        """Applied tail correction at lag ``k``."""

        if not self.tail_correction:
            return 0.0
        return self._tail_pair(tuple(int(v) for v in k))

    def tail_bound(self, k):
        """Estimated absolute truncation error at lag ``k``."""

        if self.field_consistent:
            return 0.0
        k = tuple(int(v) for v in k)
        if self.tail_correction:
            return TAIL_TRUST * abs(self.tail(k))
        return self._tail_pair(k, absolute=True)

    # -- single lags --------------------------------------------------------

    def value(self, k):
        """Covariance at one lag, cached."""

        k = tuple(int(v) for v in k)
        key = min(k, (-k[0], -k[1]))
        with self._lock:
            cached = self._cache.get(key)
        if cached is not None:
            return cached[0]

        support = self.support
        if support is not None and max(abs(k[0]), abs(k[1])) > support:
            value, bound = 0.0, 0.0
        elif self._truncated is not None and max(abs(k[0]), abs(k[1])) <= self.window:
            K = self.window
            value = float(self.table()[k[0] + K, k[1] + K])
            bound = float(self.tail_bounds()[k[0] + K, k[1] + K])
        else:
            value = self.direct(k) + self.tail(k)
            bound = self.tail_bound(k)

        if bound > TRUNCATION_LIMIT * abs(value):
            raise errors.TruncationDominates(
                "truncation bound '%s' exceeds %d%% of r_X%s = '%s' (M = %d)"
                % (bound, 100 * TRUNCATION_LIMIT, k, value, self.M),
                lag=list(k),
                value=value,
                tail_bound=bound,
            )
        with self._lock:
            self._cache[key] = (value, bound)
        return value

    def values(self, lags, threads=1):
        return np.array(_map(self.value, [tuple(k) for k in lags], threads))

    # -- windows ------------------------------------------------------------

    def _check_memory(self, *sizes):
        needed = _fft_bytes(*sizes)
        if needed > self.memory_limit:
            raise errors.AllocationTooLarge(
                "FFT workspace of '%s' bytes exceeds the limit '%s'" % (needed, self.memory_limit),
                needed=needed,
                limit=self.memory_limit,
            )

    def truncated_table(self):
        """Truncated covariance over ``|k|_inf <= window`` by FFT correlation."""

        with self._lock:
            if self._truncated is not None:
                return self._truncated
            M, K = self.M, self.window
            small = coefficient_window(self.ctx, M)
            if self.field_consistent:
                self._check_memory(2 * (2 * M + 1), 2 * (2 * M + 1))
                full = signal.fftconvolve(small, small[::-1, ::-1], mode="full")
                table = full[2 * M - K : 2 * M + K + 1, 2 * M - K : 2 * M + K + 1]
            else:
                size = 2 * (M + K) + 1
                self._check_memory(size + 2 * M, size + 2 * M)
                big = coefficient_window(self.ctx, M + K)
                table = signal.fftconvolve(big, small[::-1, ::-1], mode="valid")
                table = 0.5 * (table + table[::-1, ::-1])
            self._truncated = table
            logger.info("computed covariance window |k| <= %d with M = %d", K, M)
            return table

    def _tail_grid(self, absolute):
        K = self.window
        nodes = np.unique(np.round(np.linspace(-K, K, TAIL_NODES)).astype(int))
        n = len(nodes)
        grid = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                # The symmetrized tail is even in k.
                if (i, j) <= (n - 1 - i, n - 1 - j):
                    value = self._tail_pair((nodes[i], nodes[j]), absolute)
                    grid[i, j] = grid[n - 1 - i, n - 1 - j] = value
        full = np.arange(-K, K + 1)
        if len(nodes) == 1:
            return np.full((1, 1), grid[0, 0])
        degree = min(3, len(nodes) - 1)
        spline = interpolate.RectBivariateSpline(nodes, nodes, grid, kx=degree, ky=degree)
        return spline(full, full)

    def tail_table(self):
        with self._lock:
            if self._tail is None:
                K = self.window
                if self.tail_correction:
                    self._tail = self._tail_grid(absolute=False)
                else:
                    self._tail = np.zeros((2 * K + 1, 2 * K + 1))
            return self._tail

    def tail_bounds(self):
        """Per-lag truncation bounds over the window."""

        with self._lock:
            if self._tail_abs is None:
                K = self.window
                if self.field_consistent:
                    self._tail_abs = np.zeros((2 * K + 1, 2 * K + 1))
                elif self.tail_correction:
                    self._tail_abs = TAIL_TRUST * np.abs(self.tail_table())
                else:
                    self._tail_abs = self._tail_grid(absolute=True)
            return self._tail_abs

    def table(self):
        """Covariance over ``|k|_inf <= window``, tail correction included."""

        with self._lock:
            return self.truncated_table() + self.tail_table()

    def ensure_window(self, extent):
        """Grow the window to ``extent`` when no far field covers larger lags."""

        with self._lock:
            if extent <= self.window or self.far_field is not None:
                return
            if self.support is not None:
                extent = min(extent, self.support)
                if extent <= self.window:
                    return
            logger.info("growing covariance window from %d to %d", self.window, extent)
            self.window = int(extent)
            self._truncated = self._tail = self._tail_abs = None
            self._far_field_error = None
            self._cache.clear()

    # -- far field ----------------------------------------------------------

    @property
    def far_field_error(self):
        """Largest relative gap between window rim and far field."""

        if self.far_field is None:
            return None
        with self._lock:
            if self._far_field_error is None:
                K = self.window
                table = self.table()
                rim = np.concatenate(
                    [
                        np.stack([np.full(2 * K + 1, s * K), np.arange(-K, K + 1)], axis=-1)
                        for s in (-1, 1)
                    ]
                    + [
                        np.stack([np.arange(-K, K + 1), np.full(2 * K + 1, s * K)], axis=-1)
                        for s in (-1, 1)
                    ]
                )
                exact = table[rim[:, 0] + K, rim[:, 1] + K]
                asymptotic = self.far_field.lattice(rim)
                self._far_field_error = float(np.max(np.abs(exact / asymptotic - 1.0)))
                logger.info("far field rim discrepancy: '%s'", self._far_field_error)
            return self._far_field_error

    def lag_rows(self, k1_values, k2_max):
        """Covariance rows ``r(k1, k2)`` for ``k2`` in ``[-k2_max, k2_max]``.

        Returns ``(values, bounds)`` where ``bounds`` are truncation bounds
        (zero outside the exact window).
        """

        k1_values = np.asarray(k1_values, dtype=int)
        k2 = np.arange(-k2_max, k2_max + 1)
        values = np.zeros((len(k1_values), len(k2)))
        bounds = np.zeros_like(values)

        if self.far_field is None:
            self.ensure_window(max(int(np.max(np.abs(k1_values), initial=0)), k2_max))
        else:
            lags = np.stack(np.meshgrid(k1_values, k2, indexing="ij"), axis=-1)
            with np.errstate(divide="ignore", invalid="ignore"):
                values = self.far_field.lattice(lags)
            values[~np.isfinite(values)] = 0.0

        K = self.window
        table, tail = self.table(), self.tail_bounds()
        near = np.abs(k1_values) <= K
        columns = slice(max(0, k2_max - K), k2_max + min(K, k2_max) + 1)
        table_columns = slice(K - min(K, k2_max), K + min(K, k2_max) + 1)
        values[near, columns] = table[k1_values[near] + K, table_columns]
        bounds[near, columns] = tail[k1_values[near] + K, table_columns]
        return values, bounds

    def table_rows(self):
        """``(k1, k2, value, tail_bound)`` over the window, for export."""

        K = self.window
        table, bounds = self.table(), self.tail_bounds()
        for i in range(2 * K + 1):
            for j in range(2 * K + 1):
                yield i - K, j - K, float(table[i, j]), float(bounds[i, j])


def covariance_rX(k, oracle):
    """Autocovariance ``r_X(k)`` of the field described by ``oracle``."""

    return oracle.value(k)


def directional_lags(directions, magnitudes):
    """Lattice lags ``round(m d / |d|_inf)`` grouped by direction index."""

    lags = []
    for index, d in enumerate(directions):
        d = np.asarray(d, dtype=float)
        d = d / np.max(np.abs(d))
        for m in magnitudes:
            lags.append((index, tuple(int(v) for v in np.round(m * d))))
    return lags


@dataclasses.dataclass
class ConvComparison:
    rows: typing.List[dict]

    def max_error(self, threshold=0.0):
        errs = [row["rel_error"] for row in self.rows if row["rho_tilde"] >= threshold]
        return max(errs) if errs else math.nan

    def decreasing(self):
        """Per direction: whether errors decrease with ``rho~`` overall."""

        trend = {}
        for direction in sorted({row["direction"] for row in self.rows}):
            errs = [
                row["rel_error"]
                for row in sorted(self.rows, key=lambda r: r["rho_tilde"])
                if row["direction"] == direction
            ]
            trend[direction] = errs[-1] < errs[0]
        return trend


def lattice_conv_vs_asymptotic(oracle, conv, test_lags, threads=1):
    """Relative errors of the asymptotic form against lattice covariances.

    ``test_lags`` is a sequence of ``(direction, k)`` pairs as produced by
    :func:`directional_lags`.
    """

    test_lags = list(test_lags)
    B = np.array(conv.B, dtype=float)
    lags = [k for _, k in test_lags]
    lattice = oracle.values(lags, threads=threads)

    rows = []
    for (direction, k), value in zip(test_lags, lattice):
        asymptotic = float(conv.lattice(np.asarray(k)))
        rows.append(
            {
                "direction": direction,
                "k1": k[0],
                "k2": k[1],
                "rho_tilde": float(conv.rho_tilde(B @ np.asarray(k, dtype=float))),
                "lattice": float(value),
                "asymptotic": asymptotic,
                "rel_error": abs(float(value) / asymptotic - 1.0),
            }
        )
    rows.sort(key=lambda r: (r["direction"], r["rho_tilde"]))
    return ConvComparison(rows)
