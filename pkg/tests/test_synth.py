import math

import numpy as np
import pytest

from anisofield import errors
from anisofield.convolution import CovarianceOracle
from anisofield.limits import exact_variance
from anisofield.params import Innovation
from anisofield.synth import (
    LatticeField,
    PartialSumSpec,
    default_truncation,
    draw_innovations,
    monte_carlo_partial_sums,
    normalize,
    partial_sums,
    rectangle_sum,
    sample_field,
    synthesize_direct,
)


def test_fft_field_matches_direct_sums(make_ctx):
    ctx = make_ctx(M=8, b0=0.4)
    field = sample_field(ctx, 16, 16, seed=11, replicate=2)
    noise = draw_innovations((32, 32), 11, replicate=2)

    assert field.shape == (16, 16)
    np.testing.assert_allclose(field.values, synthesize_direct(ctx, noise, 8), atol=1e-10)


def test_rectangular_grid_matches_direct_sums(make_ctx):
    ctx = make_ctx(M=3)
    field = sample_field(ctx, 5, 9, seed=4, innovation="rademacher")
    noise = draw_innovations((11, 15), 4, innovation=Innovation.RADEMACHER)

    np.testing.assert_allclose(field.values, synthesize_direct(ctx, noise, 3), atol=1e-10)


def test_sample_field_is_reproducible(make_ctx):
    ctx = make_ctx(M=6)
    first = sample_field(ctx, 12, 10, seed=5)
    second = sample_field(ctx, 12, 10, seed=5)
    other = sample_field(ctx, 12, 10, seed=5, replicate=1)

    np.testing.assert_array_equal(first.values, second.values)
    assert not np.array_equal(first.values, other.values)


def test_sample_field_threads_agree(make_ctx):
    ctx = make_ctx(M=6)

    np.testing.assert_allclose(
        sample_field(ctx, 20, 20, seed=3, threads=2).values,
        sample_field(ctx, 20, 20, seed=3).values,
        atol=1e-12,
    )


def test_sample_field_uses_context_truncation(make_ctx):
    field = sample_field(make_ctx(M=5), 4, 4, seed=0)

    assert field.M == 5
    assert sample_field(make_ctx(M=5), 4, 4, seed=0, M=2).M == 2


def test_sample_field_rejects_empty_grid(make_ctx):
    with pytest.raises(errors.ConfigError):
        sample_field(make_ctx(), 0, 4, seed=0)


def test_sample_field_allocation_limit(make_ctx):
    with pytest.raises(errors.AllocationTooLarge) as excinfo:
        sample_field(make_ctx(M=8), 16, 16, seed=0, memory_limit=1000)

    assert excinfo.value.details["limit"] == 1000
    assert excinfo.value.exit_status == 3


def test_field_metadata(make_ctx):
    field = sample_field(make_ctx(M=4), 3, 7, seed=9, innovation="centered-uniform")
    metadata = field.metadata()

    assert isinstance(field, LatticeField)
    assert (metadata["n1"], metadata["n2"]) == (3, 7)
    assert metadata["innovation"] == Innovation.UNIFORM.value
    assert metadata["seed"] == 9
    assert metadata["B"] == [[1.0, 0.5], [0.7, 1.0]]


@pytest.mark.parametrize(
    "innovation", [Innovation.GAUSSIAN, Innovation.RADEMACHER, Innovation.UNIFORM]
)
def test_innovations_are_standardized(innovation):
    draws = draw_innovations((400, 500), seed=1, innovation=innovation)

    assert abs(draws.mean()) < 0.01
    assert draws.var() == pytest.approx(1.0, abs=0.02)


def test_innovation_supports():
    rademacher = draw_innovations(1000, seed=2, innovation=Innovation.RADEMACHER)
    uniform = draw_innovations(1000, seed=2, innovation=Innovation.UNIFORM)

    assert set(np.unique(rademacher)) == {-1.0, 1.0}
    assert np.all(np.abs(uniform) <= math.sqrt(3.0))


def test_default_truncation():
    assert default_truncation(64, 256) == 2048


@pytest.mark.parametrize(
    ["lam", "gamma", "x", "sides"],
    [
        pytest.param(4.0, 1.0, (1.0, 1.0), (4, 4), id="square"),
        pytest.param(2.0, 1.5, (1.0, 1.0), (2, 2), id="floor"),
        pytest.param(4.0, 0.5, (0.5, 1.5), (2, 3), id="shrinking"),
        pytest.param(10.0, 1.3, (0.3, 0.0), (3, 0), id="snapped"),
    ],
)
def test_partial_sum_sides(lam, gamma, x, sides):
    assert PartialSumSpec(lam, gamma, [x]).sides(x) == sides


@pytest.mark.parametrize(
    ["lam", "gamma", "points"],
    [
        pytest.param(0.0, 1.0, [(1.0, 1.0)], id="lambda"),
        pytest.param(2.0, -1.0, [(1.0, 1.0)], id="gamma"),
        pytest.param(2.0, 1.0, [(-1.0, 1.0)], id="negative_point"),
    ],
)
def test_partial_sum_spec_rejects(lam, gamma, points):
    with pytest.raises(errors.ConfigError):
        PartialSumSpec(lam, gamma, points)


def test_rectangle_sum():
    values = np.arange(30.0).reshape(5, 6)

    assert rectangle_sum(np.ones((5, 6)), (1, 2), (4, 6)) == 12.0
    assert rectangle_sum(values, (0, 0), (5, 6)) == values.sum()
    assert rectangle_sum(values, (2, 1), (3, 3)) == values[2, 1:3].sum()


def test_partial_sums():
    values = np.arange(1.0, 17.0).reshape(4, 4)
    spec = PartialSumSpec(2.0, 1.0, [(1.0, 1.0), (2.0, 0.5), (0.0, 1.0)])

    S = partial_sums(values, spec)

    assert S.tolist() == [values[:2, :2].sum(), values[:4, :1].sum(), 0.0]
    np.testing.assert_allclose(normalize(S, 0.5, 4.0), S / 2.0)


def test_partial_sums_rectangle_exceeds_grid():
    spec = PartialSumSpec(10.0, 1.0, [(1.0, 1.0)])

    with pytest.raises(errors.RectangleExceedsGrid) as excinfo:
        partial_sums(np.zeros((8, 8)), spec)

    assert excinfo.value.details["sides"] == [10, 10]
    assert excinfo.value.exit_status == 2


def test_monte_carlo_matches_exact_variance(make_ctx):
    ctx = make_ctx(M=4)
    spec = PartialSumSpec(4.0, 1.0, [(1.0, 1.0), (0.5, 1.0)])
    oracle = CovarianceOracle(ctx, field_consistent=True)

    result = monte_carlo_partial_sums(ctx, spec, H=0.0, replicates=400, seed=21)

    assert result.replicates == 400
    assert result.samples.shape == (400, 2)
    for index, x in enumerate(spec.x_points):
        exact = exact_variance(oracle, spec.lam, spec.gamma, x)
        observed = result.covariance[index, index]
        assert abs(observed - exact) <= 5.0 * result.standard_error[index, index]


def test_monte_carlo_threads_agree(make_ctx):
    ctx = make_ctx(M=3)
    spec = PartialSumSpec(3.0, 1.0, [(1.0, 1.0)])

    threaded = monte_carlo_partial_sums(ctx, spec, 0.5, replicates=6, seed=8, threads=3)
    serial = monte_carlo_partial_sums(ctx, spec, 0.5, replicates=6, seed=8)

    np.testing.assert_allclose(threaded.samples, serial.samples, atol=1e-12)


def test_sample_field_is_stationary(make_ctx):
    ctx = make_ctx(M=4)
    replicates = 300
    left, right = np.zeros(replicates), np.zeros(replicates)

    for replicate in range(replicates):
        values = sample_field(ctx, 24, 32, seed=17, replicate=replicate).values
        products = values[:-1, :-2] * values[1:, 2:]
        left[replicate] = products[:, :15].mean()
        right[replicate] = products[:, 15:].mean()

    difference = left - right
    pooled = 0.5 * (left + right)
    expected = CovarianceOracle(ctx, field_consistent=True).value((1, 2))

    assert abs(difference.mean()) <= 4.0 * difference.std(ddof=1) / math.sqrt(replicates)
    assert abs(pooled.mean() - expected) <= 4.0 * pooled.std(ddof=1) / math.sqrt(replicates)
