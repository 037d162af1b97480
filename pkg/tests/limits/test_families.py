import numpy as np
import pytest
from scipy import integrate

from anisofield import errors
from anisofield.kernel import AngularSpec
from anisofield.limits import (
    fbs_covariance,
    limit_family,
    overlap,
    power_pair_integral,
    sigma_constant,
)
from anisofield.params import Family, ModelParams, classify_regime


POINTS = [(1.0, 1.0), (2.0, 3.0), (0.5, 2.0)]


@pytest.mark.parametrize(
    ["tau", "expected"],
    [
        pytest.param(0.5, 0.5, id="partial"),
        pytest.param(-2.0, 0.0, id="disjoint"),
        pytest.param(-0.5, 1.0, id="covering"),
        pytest.param(1.0, 0.0, id="touching"),
    ],
)
def test_overlap(tau, expected):
    assert overlap(tau, 1.0, 2.0) == pytest.approx(expected)


def test_power_pair_integral_without_power():
    assert power_pair_integral(2.0, 3.0, 0.0) == pytest.approx(6.0)


@pytest.mark.parametrize("beta", [0.3, 0.65, 0.9])
def test_power_pair_integral_matches_quadrature(beta):
    x, y = 1.5, 0.7

    def integrand(t):
        return float(overlap(t, x, y)) * abs(t) ** -beta

    expected = sum(
        integrate.quad(integrand, a, b, epsabs=0.0, epsrel=1e-12, limit=200)[0]
        for a, b in [(-y, 0.0), (0.0, x - y), (x - y, x)]
    )

    assert power_pair_integral(x, y, beta) == pytest.approx(expected, rel=1e-6)


@pytest.fixture(scope="module")
def incongruous():
    return ModelParams(
        q1=1.2, q2=1.6, B=((1.0, 0.5), (0.7, 1.0)), angular=AngularSpec.constant(1.0)
    )


@pytest.fixture(scope="module")
def mixed():
    return ModelParams(
        q1=1.1, q2=2.5, B=((1.0, 0.5), (0.7, 1.0)), angular=AngularSpec.constant(1.0)
    )


@pytest.mark.parametrize(
    ["family", "params"],
    [
        pytest.param(Family.VT22, "incongruous", id="Vt22"),
        pytest.param(Family.VT20, "incongruous", id="Vt20"),
        pytest.param(Family.V11, "mixed", id="V11"),
    ],
)
def test_closed_form_matches_quadrature(request, family, params):
    evaluator = limit_family(family, request.getfixturevalue(params))

    for x in POINTS:
        for y in POINTS:
            assert evaluator.covariance(x, y) == pytest.approx(
                evaluator.covariance_by_quadrature(x, y), rel=1e-8
            )


@pytest.mark.parametrize(
    ["family", "params"],
    [
        pytest.param(Family.VT22, "incongruous", id="Vt22"),
        pytest.param(Family.VT21, "incongruous", id="Vt21"),
        pytest.param(Family.V11, "mixed", id="V11"),
    ],
)
def test_sheet_families_follow_power_law(request, family, params):
    evaluator = limit_family(family, request.getfixturevalue(params))
    H1, H2 = evaluator.hurst_pair
    sigma2 = evaluator.sigma2

    assert sigma2 > 0.0
    for x in POINTS:
        for y in POINTS:
            assert evaluator.covariance(x, y) == pytest.approx(
                sigma2 * fbs_covariance(x, y, H1, H2), rel=1e-8
            )


def test_hurst_pairs_follow_classification(incongruous):
    regime = classify_regime(incongruous)

    assert limit_family(Family.VT22, incongruous).hurst_pair == regime.limit_plus.hurst_pair
    assert limit_family(Family.VT20, incongruous).hurst_pair is None


def test_covariance_matrix(incongruous):
    evaluator = limit_family(Family.VT22, incongruous)
    matrix = evaluator.covariance_matrix(POINTS)

    np.testing.assert_allclose(matrix, matrix.T)
    assert matrix[1, 2] == pytest.approx(evaluator.covariance(POINTS[1], POINTS[2]))
    assert np.linalg.eigvalsh(matrix).min() > 0.0


def test_sigma_constant(incongruous):
    expected = limit_family(Family.VT22, incongruous).sigma2

    assert sigma_constant("Vt22", incongruous) == pytest.approx(expected)
    assert sigma_constant(limit_family(Family.VT22, incongruous)) == pytest.approx(expected)


def test_polar_family_is_symmetric(incongruous):
    evaluator = limit_family(Family.VT00, incongruous, table_nodes=17)
    x, y = (1.0, 1.0), (0.5, 2.0)

    assert evaluator.variance(x) > 0.0
    assert evaluator.covariance(x, y) == pytest.approx(evaluator.covariance(y, x), rel=1e-6)
    np.testing.assert_allclose(evaluator.matrix, np.diag([1.0, 1.0]))


def test_family_not_defined_in_region(incongruous):
    with pytest.raises(errors.FamilyNotDefinedInRegion) as excinfo:
        limit_family(Family.V22, incongruous)

    assert excinfo.value.details["region"] == "R_BOTH_GT"
    assert excinfo.value.exit_status == 2


def test_family_degenerates_for_congruous_matrix(make_params):
    with pytest.raises(errors.FamilyNotDefinedInRegion):
        limit_family(Family.VT21, make_params(B=((1.0, 0.5), (0.0, 1.0))))


@pytest.mark.parametrize(
    ["q", "family"],
    [
        pytest.param(1.25, Family.VT0, id="Vt0"),
        pytest.param(1.75, Family.V0, id="V0"),
    ],
)
def test_well_balanced_families_unsupported(make_params, q, family):
    with pytest.raises(errors.UnsupportedFamily):
        limit_family(family, make_params(q1=q, q2=q))


def test_family_repr(incongruous):
    assert repr(limit_family(Family.VT22, incongruous)) == "<TildeRankOneFamily Vt22>"
