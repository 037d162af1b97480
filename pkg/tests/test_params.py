import numpy as np
import pytest

from anisofield import errors
from anisofield.params import (
    Family,
    Innovation,
    Region,
    canonical_frame,
    classify_regime,
    derive_exponents,
    scaling_exponent,
    theory_table,
)


def test_derive_exponents_reference():
    exps = derive_exponents(1.2, 1.6)

    assert exps.Q == pytest.approx(1.0 / 1.2 + 1.0 / 1.6)
    assert exps.q_tilde1 == pytest.approx(0.65)
    assert exps.q_tilde2 == pytest.approx(0.866667, abs=1e-6)
    assert exps.H_tilde1 == pytest.approx(0.675)
    assert exps.H_tilde2 == pytest.approx(0.566667, abs=1e-6)
    assert exps.H1 == pytest.approx(1.05)
    assert exps.H2 == pytest.approx(1.233333, abs=1e-6)
    assert exps.Q_tilde1 > 1.0
    assert exps.Q_tilde2 > 1.0


def test_derive_exponents_identities():
    rng = np.random.default_rng(7)
    checked = 0

    while checked < 500:
        q1, q2 = rng.uniform(0.5, 6.0, 2)
        try:
            exps = derive_exponents(q1, q2)
        except (errors.OutOfRegion, errors.BoundaryParameter):
            continue
        checked += 1

        Q = 1.0 / q1 + 1.0 / q2
        for q, qt, Ht, H in (
            (q1, exps.q_tilde1, exps.H_tilde1, exps.H1),
            (q2, exps.q_tilde2, exps.H_tilde2, exps.H2),
        ):
            assert abs(qt - q * (2.0 - Q)) <= 1e-12
            assert abs(Ht + q * (2.0 - Q) / 2.0 - 1.0) <= 1e-12
            assert abs(H - 0.5 - q * (Q - 1.0)) <= 1e-12


@pytest.mark.parametrize(
    ["q1", "q2", "error"],
    [
        pytest.param(0.8, 0.8, errors.OutOfRegion, id="Q_above_2"),
        pytest.param(3.0, 3.0, errors.OutOfRegion, id="Q_below_1"),
        pytest.param(-1.0, 1.5, errors.OutOfRegion, id="negative"),
        pytest.param(
            2.0 / (1.0 + 1e-8), 2.0 / (1.0 + 1e-8), errors.BoundaryParameter, id="Q_near_1"
        ),
    ],
)
def test_derive_exponents_rejects(q1, q2, error):
    with pytest.raises(error):
        derive_exponents(q1, q2)


def test_out_of_region_is_configuration_error():
    with pytest.raises(errors.OutOfRegion) as excinfo:
        derive_exponents(0.8, 0.8)

    assert excinfo.value.code == "OutOfRegion"
    assert excinfo.value.exit_status == 2
    assert isinstance(excinfo.value, ValueError)


def test_model_params_rejects_singular_matrix(make_params):
    with pytest.raises(errors.DegenerateMatrix):
        make_params(B=((1.0, 2.0), (0.5, 1.0)))


def test_model_params_from_config(config_fragment):
    from anisofield.params import ModelParams

    params = ModelParams.from_config(
        config_fragment(
            """
            q1: 1.2
            q2: 1.6
            B: [[1.0, 0.5], [0.7, 1.0]]
            angular: {kind: poly, plus: [1.0, 0.5]}
            innovation: centered-uniform
            M: 32
            """
        )
    )

    assert params.B == ((1.0, 0.5), (0.7, 1.0))
    assert params.innovation is Innovation.UNIFORM
    assert params.angular.kind == "poly"
    assert params.M == 32
    assert ModelParams.from_config(params.as_config()) == params


def test_innovation_unknown():
    with pytest.raises(errors.ConfigError):
        Innovation.parse("cauchy")


def test_classify_incongruous(make_params):
    regime = classify_regime(make_params())
    exps = regime.exponents

    assert regime.region is Region.R_BOTH_GT
    assert not regime.congruous
    assert regime.gamma0 == 1.0
    assert regime.limit_plus.family is Family.VT22
    assert regime.limit_plus.hurst_pair == (1.0, exps.H_tilde2)
    assert regime.limit_minus.family is Family.VT21
    assert regime.limit_minus.hurst_pair == (exps.H_tilde2, 1.0)
    assert regime.limit_crit.family is Family.VT20


def test_classify_congruous(make_params):
    regime = classify_regime(make_params(B=((1.0, 0.5), (0.0, 1.0))))

    assert regime.congruous
    assert regime.gamma0 == pytest.approx(0.75)
    assert regime.limit_plus.family is Family.VT22
    assert regime.limit_minus.family is Family.VT11
    assert regime.limit_crit.family is Family.VT00


def test_classify_mixed_region(make_params):
    regime = classify_regime(make_params(q1=1.1, q2=2.5))
    H1 = regime.exponents.H1

    assert regime.region is Region.R_MIXED_12
    assert regime.limit_plus.family is Family.V11
    assert regime.limit_crit.family is Family.V01
    assert scaling_exponent(regime, regime.exponents, 2.0) == pytest.approx(H1 + 1.0)
    assert scaling_exponent(regime, regime.exponents, 0.5) == pytest.approx(0.5 + 0.5 * H1)


@pytest.mark.parametrize(
    ["q", "region", "plus", "crit"],
    [
        pytest.param(1.25, Region.EQ_SMALL, Family.VT02, Family.VT0, id="small_q"),
        pytest.param(1.75, Region.EQ_LARGE, Family.V10, Family.V0, id="large_q"),
    ],
)
def test_classify_equal_exponents(make_params, q, region, plus, crit):
    regime = classify_regime(make_params(q1=q, q2=q))

    assert regime.region is region
    assert regime.gamma0 == 1.0
    assert regime.limit_plus.family is plus
    assert regime.limit_crit.family is crit


def test_classify_swapped_rows(make_params):
    direct = classify_regime(make_params())
    swapped = classify_regime(make_params(q1=1.6, q2=1.2, B=((0.7, 1.0), (1.0, 0.5))))

    assert swapped.frame.swapped_rows
    assert not swapped.frame.transposed
    assert swapped.gamma0 == direct.gamma0
    assert swapped.limit_plus == direct.limit_plus


def test_classify_transposed(make_params):
    regime = classify_regime(make_params(B=((1.0, 0.5), (1.0, 0.0))))
    exps = regime.exponents

    assert regime.frame.transposed
    assert regime.congruous
    assert regime.gamma0 == pytest.approx(4.0 / 3.0)
    assert regime.limit_plus.family is Family.VT11
    assert regime.limit_plus.hurst_pair == (1.0, exps.H_tilde1)
    assert regime.limit_minus.hurst_pair == (exps.H_tilde2, 1.0)


def test_canonical_frame_maps_points():
    frame = canonical_frame(1.2, 1.6, ((1.0, 0.5), (1.0, 0.0)))

    assert frame.to_canonical_x((1.0, 2.0)).tolist() == [2.0, 1.0]
    assert frame.to_canonical_u((1.0, 2.0)).tolist() == [1.0, 2.0]


@pytest.mark.parametrize(
    "B",
    [
        pytest.param(((1.0, 0.5), (0.7, 1.0)), id="incongruous"),
        pytest.param(((1.0, 0.5), (0.0, 1.0)), id="congruous"),
        pytest.param(((1.0, 0.5), (1.0, 0.0)), id="transposed"),
    ],
)
def test_scaling_exponent_continuous_at_transition(make_params, B):
    regime = classify_regime(make_params(B=B))
    exps = regime.exponents
    gamma0 = regime.gamma0

    below = scaling_exponent(regime, exps, gamma0 * (1.0 - 1e-9))
    above = scaling_exponent(regime, exps, gamma0 * (1.0 + 1e-9))

    assert abs(below - above) <= 1e-8


def test_scaling_exponent_incongruous_branches(make_params):
    regime = classify_regime(make_params())
    Ht2 = regime.exponents.H_tilde2

    assert scaling_exponent(regime, regime.exponents, 2.0) == pytest.approx(1.0 + 2.0 * Ht2)
    assert scaling_exponent(regime, regime.exponents, 0.5) == pytest.approx(0.5 + Ht2)


def test_scaling_exponent_rejects_foreign_exponents(make_params):
    regime = classify_regime(make_params())

    with pytest.raises(ValueError):
        scaling_exponent(regime, derive_exponents(1.1, 2.5), 1.0)


def test_theory_table_labels(make_params):
    regime = classify_regime(make_params())
    rows = theory_table(regime, regime.exponents, [0.5, 1.0, 2.0])

    assert [row["family"] for row in rows] == ["Vt21", "Vt20", "Vt22"]
    assert rows[1]["H"] == pytest.approx(1.0 + regime.exponents.H_tilde2)


def _expected_exponent(exps, congruous, gamma):
    if gamma >= (exps.q1 / exps.q2 if congruous else 1.0):
        if exps.Q_tilde1 > 1.0:
            return 1.0 + gamma * exps.H_tilde2
        return exps.H1 + 0.5 * gamma
    if exps.Q_tilde1 > 1.0:
        return (exps.H_tilde1 if congruous else exps.H_tilde2) + gamma
    if not congruous:
        return 0.5 + gamma * exps.H1
    if exps.Q_tilde2 > 1.0:
        return exps.H_tilde1 + gamma
    return 0.5 + gamma * exps.H2


def _expected_region(exps):
    if exps.Q_tilde1 > 1.0:
        return Region.R_BOTH_GT
    if exps.Q_tilde2 > 1.0:
        return Region.R_MIXED_12
    return Region.R_BOTH_LT


@pytest.mark.parametrize("congruous", [False, True], ids=["incongruous", "congruous"])
def test_scaling_exponent_random_parameters(make_params, congruous):
    rng = np.random.default_rng(23 if congruous else 29)
    gammas = np.linspace(0.05, 3.0, 50)
    checked = 0

    while checked < 200:
        Q = rng.uniform(1.02, 1.98)
        share = rng.uniform(0.52, 0.95)
        q1, q2 = 1.0 / (Q * share), 1.0 / (Q * (1.0 - share))
        b12, b21, b22 = rng.uniform(0.2, 1.5, 3) * rng.choice([-1.0, 1.0], 3)
        B = ((1.0, b12), (0.0 if congruous else b21, b22))
        try:
            regime = classify_regime(make_params(q1=q1, q2=q2, B=B))
        except (errors.BoundaryParameter, errors.DegenerateMatrix):
            continue
        checked += 1
        exps = regime.exponents
        gamma0 = regime.gamma0
        H = np.array([scaling_exponent(regime, exps, gamma) for gamma in gammas])

        assert regime.congruous is congruous
        assert regime.region is _expected_region(exps)
        assert gamma0 == pytest.approx(q1 / q2 if congruous else 1.0)
        np.testing.assert_allclose(
            H, [_expected_exponent(exps, congruous, gamma) for gamma in gammas], atol=1e-12
        )
        assert np.all(np.diff(H) > 0.0)
        assert abs(
            scaling_exponent(regime, exps, gamma0 * (1.0 - 1e-9))
            - scaling_exponent(regime, exps, gamma0 * (1.0 + 1e-9))
        ) <= 1e-8

        sides = ((gammas >= gamma0, regime.limit_plus), (gammas < gamma0, regime.limit_minus))
        for side, label in sides:
            first, second = label.hurst_pair
            np.testing.assert_allclose(H[side], first + gammas[side] * second, atol=1e-12)
            if side.sum() >= 3:
                np.testing.assert_allclose(np.diff(H[side], 2), 0.0, atol=1e-12)
