import numpy as np
import pytest

from anisofield import errors
from anisofield.kernel import (
    AngularSpec,
    KernelContext,
    a_inf,
    angular_L,
    coeff_b,
    coefficient_window,
    integrability_sequence,
    norm_equivalence_bounds,
    polar_decompose,
    radial_integral,
    rho,
    triangle_exponent,
)


@pytest.fixture(scope="function")
def poly_ctx(make_ctx):
    return make_ctx(angular=AngularSpec.poly([1.0, 0.5, 0.25]), b0=0.3)


def _random_points(rng, size, scale=10.0):
    return rng.uniform(-scale, scale, (size, 2))


def test_rho_single_and_batch():
    assert rho((2.0, -3.0), 1.0, 2.0) == 11.0
    assert rho(np.array([[1.0, 1.0], [0.0, 2.0]]), 1.2, 1.6).shape == (2,)


def test_rho_rejects_bad_shape():
    with pytest.raises(ValueError):
        rho((1.0, 2.0, 3.0), 1.2, 1.6)


@pytest.mark.parametrize(
    "angular",
    [
        pytest.param(AngularSpec.constant(2.0), id="constant"),
        pytest.param(AngularSpec.poly([1.0, 0.5, 0.25]), id="poly"),
        pytest.param(AngularSpec.table([1.0, 2.0, 1.5], [1.0, 0.5, 1.5]), id="table"),
    ],
)
def test_a_inf_generalized_homogeneous(make_ctx, angular):
    ctx = make_ctx(angular=angular)
    rng = np.random.default_rng(1)
    u = _random_points(rng, 10000)
    lam = rng.uniform(0.01, 100.0, 10000)
    scaled = u * np.stack([lam ** (1.0 / ctx.q1), lam ** (1.0 / ctx.q2)], axis=-1)

    np.testing.assert_allclose(lam * a_inf(scaled, ctx), a_inf(u, ctx), rtol=1e-12)


def test_a_inf_origin(poly_ctx):
    with pytest.raises(errors.SingularOrigin):
        a_inf((0.0, 0.0), poly_ctx)


def test_angular_L_on_the_sphere(poly_ctx):
    z = np.linspace(-0.9, 0.9, 7)
    height = (1.0 - np.abs(z) ** poly_ctx.q1) ** (1.0 / poly_ctx.q2)
    points = np.stack([z, height], axis=-1)

    np.testing.assert_allclose(
        angular_L(points, poly_ctx.angular, poly_ctx.q1, poly_ctx.q2),
        1.0 + 0.5 * z + 0.25 * z ** 2,
        rtol=1e-12,
    )


def test_coeff_b_matches_kernel(poly_ctx):
    t = np.array([[1.0, 2.0], [-3.0, 1.0], [5.0, -4.0]])

    np.testing.assert_allclose(coeff_b(t, poly_ctx), a_inf(t @ poly_ctx.matrix.T, poly_ctx))
    assert coeff_b((0.0, 0.0), poly_ctx) == 0.3


def test_coefficient_window(poly_ctx):
    window = coefficient_window(poly_ctx, 3)

    assert window.shape == (7, 7)
    assert window[3, 3] == 0.3
    assert window[4, 5] == pytest.approx(coeff_b((1.0, 2.0), poly_ctx))
    assert coefficient_window(poly_ctx, 0).tolist() == [[0.3]]


def test_kernel_context_replace(poly_ctx):
    other = poly_ctx.replace(M=32)

    assert other.M == 32
    assert other.q1 == poly_ctx.q1
    assert isinstance(other, KernelContext)
    assert poly_ctx.det == pytest.approx(1.0 - 0.35)


@pytest.mark.parametrize(
    ["kind", "plus", "minus"],
    [
        pytest.param("poly", [1.0, 0.0], [2.0, 0.0], id="endpoint_mismatch"),
        pytest.param("table", [1.0], [1.0], id="short_table"),
        pytest.param("spline", [1.0], [1.0], id="unknown_kind"),
        pytest.param("poly", [1.0, np.inf], [1.0, np.inf], id="not_finite"),
    ],
)
def test_angular_spec_rejects(kind, plus, minus):
    with pytest.raises(errors.InvalidAngularSpec):
        AngularSpec(kind, tuple(plus), tuple(minus))


def test_angular_spec_config_round_trip(config_fragment):
    spec = AngularSpec.from_config(
        config_fragment(
            """
            kind: table
            plus: [1.0, 2.0, 1.5]
            minus: [1.0, 0.5, 1.5]
            """
        )
    )

    assert spec.evaluate([0.0, 0.0], [True, False]).tolist() == [2.0, 0.5]
    assert spec.sup() == 2.0
    assert AngularSpec.from_config(spec.as_config()) == spec


def test_angular_spec_from_samples_smooth():
    z = -np.cos(np.pi * np.arange(17) / 16)
    z[0], z[-1] = -1.0, 1.0
    spec = AngularSpec.from_samples(z, 1.0 + z ** 2, 1.0 + z ** 2)
    grid = np.linspace(-1.0, 1.0, 11)

    assert spec.kind == "table"
    np.testing.assert_allclose(spec.evaluate(grid, True), 1.0 + grid ** 2, atol=1e-5)


@pytest.mark.parametrize(
    ["kind", "minus"],
    [
        pytest.param("poly", [2.5, 0.5, 0.0], id="poly"),
        pytest.param("table", [1.0, 2.0, 1.5], id="table"),
    ],
)
def test_angular_spec_accepts_arrays(kind, minus):
    factory = getattr(AngularSpec, kind)
    spec = factory(np.array([1.0, 0.5, 1.5]), np.array(minus))
    shared = factory(np.array([1.0, 0.5, 1.5]))

    assert spec.minus == tuple(minus)
    assert shared.minus == shared.plus == (1.0, 0.5, 1.5)


def test_angular_spec_from_samples_asymmetric():
    z = np.linspace(-1.0, 1.0, 9)
    spec = AngularSpec.from_samples(z, 2.0 + z - z ** 3, 2.5 - 0.5 * z ** 2, nodes=33)
    grid = np.linspace(-1.0, 1.0, 33)

    np.testing.assert_allclose(spec.evaluate(grid, True), 2.0 + grid - grid ** 3, atol=1e-10)
    np.testing.assert_allclose(spec.evaluate(grid, False), 2.5 - 0.5 * grid ** 2, atol=1e-10)


def test_polar_decompose_recovers_angular(poly_ctx):
    def h(points):
        return a_inf(np.asarray(points), poly_ctx)

    spec = polar_decompose(h, poly_ctx.q1, poly_ctx.q2, nodes=101)
    z = np.linspace(-1.0, 1.0, 101)

    np.testing.assert_allclose(spec.evaluate(z, True), 1.0 + 0.5 * z + 0.25 * z ** 2, rtol=1e-10)


def test_polar_decompose_rejects_non_homogeneous():
    def h(points):
        points = np.asarray(points)
        return 1.0 / (np.abs(points[..., 0]) + np.abs(points[..., 1]))

    with pytest.raises(errors.InconsistentHomogeneity):
        polar_decompose(h, 1.2, 1.6)


@pytest.mark.parametrize(["q1", "q2"], [(1.2, 1.6), (0.8, 2.5), (1.25, 1.25)])
def test_triangle_inequality(q1, q2):
    q = triangle_exponent(q1, q2)
    rng = np.random.default_rng(3)
    u, v = _random_points(rng, 10000), _random_points(rng, 10000)

    def norm(w):
        return rho(w, q1, q2) ** (1.0 / q)

    assert np.all(norm(u + v) <= (norm(u) + norm(v)) * (1.0 + 1e-12))


def test_norm_equivalence_scale_invariant():
    bounds = norm_equivalence_bounds(1.2, 1.6)

    for low, high in bounds:
        assert 0.0 < low <= high < np.inf
    np.testing.assert_allclose(bounds[0], bounds[-1], rtol=1e-9)


def test_radial_integral_divergence():
    assert np.isfinite(radial_integral(1.2, 1.6, "local"))
    assert np.isfinite(radial_integral(1.2, 1.6, "tail"))
    assert radial_integral(3.0, 3.0, "local") == np.inf
    assert radial_integral(0.8, 0.8, "tail") == np.inf
    with pytest.raises(ValueError):
        radial_integral(1.2, 1.6, "middle")


@pytest.mark.parametrize("kind", ["local", "tail"])
def test_integrability_sequence_settles(kind):
    values = integrability_sequence(1.2, 1.6, kind)
    steps = np.abs(np.diff(values))

    assert len(values) == 6
    assert steps[-1] < steps[0]


def test_integrability_tail_increases():
    values = integrability_sequence(1.2, 1.6, "tail")

    assert np.all(np.diff(values) > 0.0)
