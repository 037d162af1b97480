"""
    anisofield.synth
    ----------------

    Sample paths of the truncated linear field ``X(t) = sum_s b(t - s) e(s)``
    on finite grids, and partial sums over anisotropic rectangles.

    :copyright: (c) 2026, anisofield authors.
    :license: BSD, see LICENSE for details.
"""

import concurrent.futures
import dataclasses
import logging
import math
import typing

import numpy as np
from scipy import fft as sp_fft, signal

from anisofield import errors
from anisofield.kernel import KernelContext, coefficient_window
from anisofield.params import Innovation


__all__ = [
    "LatticeField",
    "MonteCarloResult",
    "PartialSumSpec",
    "default_truncation",
    "draw_innovations",
    "monte_carlo_partial_sums",
    "normalize",
    "partial_sums",
    "rectangle_sum",
    "sample_field",
    "synthesize_direct",
]

logger = logging.getLogger(__name__)

MEMORY_LIMIT = 2 * 1024 ** 3
_SNAP = 1e-9


def default_truncation(n1, n2):
    return 8 * max(n1, n2)


def _generator(seed, replicate):
    # Philox is counter based: every replicate gets its own independent stream.
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(replicate),))
    return np.random.Generator(np.random.Philox(sequence))


def draw_innovations(shape, seed, replicate=0, innovation=Innovation.GAUSSIAN):
    """I.i.d. innovations with mean 0 and variance 1."""

    rng = _generator(seed, replicate)
    innovation = Innovation.parse(innovation)
    if innovation is Innovation.GAUSSIAN:
        return rng.standard_normal(shape)
    if innovation is Innovation.RADEMACHER:
        return rng.integers(0, 2, size=shape).astype(float) * 2.0 - 1.0
    return rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), size=shape)


@dataclasses.dataclass(frozen=True)
class LatticeField:
    """Realized field, ``values[i, j] = X(i + 1, j + 1)``."""

    values: np.ndarray
    seed: int
    ctx: KernelContext
    M: int
    replicate: int = 0
    innovation: Innovation = Innovation.GAUSSIAN

    @property
    def shape(self):
        return self.values.shape

    def metadata(self):
        n1, n2 = self.values.shape
        return {
            "n1": n1,
            "n2": n2,
            "dtype": "<f8",
            "order": "row-major",
            "seed": self.seed,
            "replicate": self.replicate,
            "M": self.M,
            "innovation": self.innovation.value,
            "q1": self.ctx.q1,
            "q2": self.ctx.q2,
            "B": [list(row) for row in self.ctx.B],
            "b0": self.ctx.b0,
        }


def _check_allocation(n1, n2, M, memory_limit):
    padded = [sp_fft.next_fast_len(n + 4 * M) for n in (n1, n2)]
    needed = 8 * (n1 + 2 * M) * (n2 + 2 * M) + 48 * padded[0] * padded[1]
    if needed > memory_limit:
        raise errors.AllocationTooLarge(
            "synthesis of a %dx%d field with M = %d needs '%s' bytes, limit is '%s'"
            % (n1, n2, M, needed, memory_limit),
            needed=needed,
            limit=memory_limit,
        )


def sample_field(
    ctx,
    n1,
    n2,
    seed,
    M=None,
    replicate=0,
    innovation=Innovation.GAUSSIAN,
    memory_limit=MEMORY_LIMIT,
    threads=1,
):
    """Synthesize ``X`` on ``{1..n1} x {1..n2}`` by zero-padded FFT convolution."""

    if n1 < 1 or n2 < 1:
        raise errors.ConfigError("grid sides must be positive, got '%sx%s'" % (n1, n2))
    M = ctx.M if M is None else int(M)
    _check_allocation(n1, n2, M, memory_limit)

    noise = draw_innovations((n1 + 2 * M, n2 + 2 * M), seed, replicate, innovation)
    window = coefficient_window(ctx, M)
    with sp_fft.set_workers(max(1, int(threads))):
        values = signal.fftconvolve(noise, window, mode="valid")

    logger.debug("synthesized %dx%d field, M = %d, replicate %d", n1, n2, M, replicate)
    return LatticeField(
        values=values,
        seed=int(seed),
        ctx=ctx,
        M=M,
        replicate=int(replicate),
        innovation=Innovation.parse(innovation),
    )


def synthesize_direct(ctx, innovations, M):
    """Reference moving average by explicit shifted sums, no FFT."""

    window = coefficient_window(ctx, M)
    n1 = innovations.shape[0] - 2 * M
    n2 = innovations.shape[1] - 2 * M
    values = np.zeros((n1, n2))
    for i in range(2 * M + 1):
        for j in range(2 * M + 1):
            # X(t) picks e(t - d) for d = (i - M, j - M).
            rows = slice(2 * M - i, 2 * M - i + n1)
            cols = slice(2 * M - j, 2 * M - j + n2)
            values += window[i, j] * innovations[rows, cols]
    return values


def _side(value):
    nearest = round(value)
    if abs(value - nearest) <= _SNAP * max(1.0, abs(value)):
        return int(nearest)
    return int(math.floor(value))


@dataclasses.dataclass(frozen=True)
class PartialSumSpec:
    """Rectangles ``(0, lambda x1] x (0, lambda**gamma x2]``."""

    lam: float
    gamma: float
    x_points: typing.Tuple[typing.Tuple[float, float], ...]

    def __post_init__(self):
        if not (self.lam > 0 and self.gamma > 0):
            raise errors.ConfigError(
                "lambda and gamma must be positive, got '%s' and '%s'" % (self.lam, self.gamma)
            )
        points = tuple(tuple(float(v) for v in x) for x in self.x_points)
        if any(v < 0 for x in points for v in x):
            raise errors.ConfigError("x points must lie in the positive quadrant")
        object.__setattr__(self, "x_points", points)

    def sides(self, x):
        return _side(self.lam * x[0]), _side(self.lam ** self.gamma * x[1])

    def all_sides(self):
        return [self.sides(x) for x in self.x_points]


def _cumulative(values):
    table = np.zeros((values.shape[0] + 1, values.shape[1] + 1))
    table[1:, 1:] = values.cumsum(axis=0).cumsum(axis=1)
    return table


def rectangle_sum(values, lower, upper, table=None):
    """Sum of ``X`` over ``(lower, upper]`` in grid coordinates."""

    table = _cumulative(values) if table is None else table
    (a1, a2), (c1, c2) = lower, upper
    return table[c1, c2] - table[a1, c2] - table[c1, a2] + table[a1, a2]


def partial_sums(field, spec):
    """``S_{lambda,gamma}(x)`` for every ``x`` of ``spec``."""

    values = field.values if isinstance(field, LatticeField) else np.asarray(field)
    sides = spec.all_sides()
    for (n1, n2), x in zip(sides, spec.x_points):
        if n1 > values.shape[0] or n2 > values.shape[1]:
            raise errors.RectangleExceedsGrid(
                "rectangle '%sx%s' for x = '%s' exceeds the %dx%d grid"
                % (n1, n2, x, values.shape[0], values.shape[1]),
                x=list(x),
                sides=[n1, n2],
            )
    table = _cumulative(values)
    return np.array([rectangle_sum(values, (0, 0), s, table) for s in sides])


def normalize(S, H, lam):
    return np.asarray(S, dtype=float) / float(lam) ** H


@dataclasses.dataclass
class MonteCarloResult:
    samples: np.ndarray
    covariance: np.ndarray
    standard_error: np.ndarray

    @property
    def replicates(self):
        return self.samples.shape[0]


def monte_carlo_partial_sums(
    ctx,
    spec,
    H,
    replicates,
    seed,
    M=None,
    innovation=Innovation.GAUSSIAN,
    memory_limit=MEMORY_LIMIT,
    threads=1,
):
    """Normalized partial sums over independent replicate fields."""

    sides = np.array(spec.all_sides())
    n1, n2 = max(1, int(sides[:, 0].max())), max(1, int(sides[:, 1].max()))

    def replicate(index):
        field = sample_field(
            ctx,
            n1,
            n2,
            seed,
            M=M,
            replicate=index,
            innovation=innovation,
            memory_limit=memory_limit,
        )
        return normalize(partial_sums(field, spec), H, spec.lam)

    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as executor:
            samples = np.array(list(executor.map(replicate, range(replicates))))
    else:
        samples = np.array([replicate(index) for index in range(replicates)])

    products = samples[:, :, None] * samples[:, None, :]
    covariance = products.mean(axis=0)
    spread = ((products - covariance) ** 2).mean(axis=0)
    logger.info("drew %d replicate fields of size %dx%d", replicates, n1, n2)
    return MonteCarloResult(
        samples=samples,
        covariance=covariance,
        standard_error=np.sqrt(spread / replicates),
    )
