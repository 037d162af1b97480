"""
    anisofield.experiments
    ----------------------

    Experiment runners behind the command line. Run-scoped services (the
    resolved configuration, the artifact writer and the thread count) are
    injected into runners with picobox, so a runner only declares what it
    needs.

    :copyright: (c) 2026, anisofield authors.
    :license: BSD, see LICENSE for details.
"""

import dataclasses
import logging
import math
import typing

import numpy as np
import picobox

from anisofield import errors
from anisofield.axis import (
    angle_between,
    coefficient_evaluator,
    covariance_evaluator,
    far_field_gap,
    find_axis,
    predicted_axis,
)
from anisofield.config import model_params
from anisofield.convolution import CovarianceOracle, conv_asymptotic
from anisofield.io import ArtifactWriter
from anisofield.kernel import KernelContext
from anisofield.limits import (
    exact_variance,
    estimate_H_curve,
    limit_covariance_check,
    limit_family,
    sigma_constant,
)
from anisofield.params import classify_regime, scaling_exponent, theory_table
from anisofield.quadrature import HomogeneousKernel
from anisofield.synth import (
    PartialSumSpec,
    default_truncation,
    monte_carlo_partial_sums,
    sample_field,
)


__all__ = [
    "Check",
    "Outcome",
    "RUNNERS",
    "error_report",
    "run",
]

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-12
IMPROVING_FRACTION = 7.0 / 9.0
SCAN_POINT = (1.0, 1.0)
POWER_LAW_POINTS = ((1.0, 1.0), (2.0, 3.0), (0.5, 2.0))

_injector = picobox.Stack()


@dataclasses.dataclass
class Check:
    name: str
    value: typing.Any
    limit: typing.Any
    passed: bool

    def as_dict(self):
        return dataclasses.asdict(self)


def _at_most(name, value, limit):
    value = float(value)
    return Check(name, value, limit, bool(value <= limit))


def _within(name, value, interval):
    value = float(value)
    low, high = interval
    return Check(name, value, list(interval), bool(low <= value <= high))


@dataclasses.dataclass
class Outcome:
    measured: dict
    checks: typing.List[Check]

    @property
    def passed(self):
        return all(check.passed for check in self.checks)


@_injector.pass_("config")
@_injector.pass_("threads")
def _oracle(params, config, threads):
    settings = config["oracle"]
    far_field = None
    if settings["far_field"] and not settings["field_consistent"]:
        kernel = HomogeneousKernel(params.q1, params.q2, params.angular)
        far_field = conv_asymptotic(
            kernel,
            kernel,
            params.B,
            nodes=settings["table_nodes"],
            rtol=config["quadrature"]["rtol"],
            threads=threads,
        )
    return CovarianceOracle(
        KernelContext.from_params(params, M=settings["M"]),
        window=settings["window"],
        tail_correction=settings["tail_correction"],
        far_field=far_field,
        field_consistent=settings["field_consistent"],
        memory_limit=config["synthesis"]["memory_limit"],
    )


@_injector.pass_("config")
@_injector.pass_("artifacts")
def run_exponents(params, regime, config, artifacts):
    exps = params.exponents
    Q = exps.Q
    table = theory_table(regime, exps, config["grids"]["gamma"])
    artifacts.csv("theory.csv", table, ["gamma", "H", "family"])

    q = (exps.q1, exps.q2)
    q_tilde = (exps.q_tilde1, exps.q_tilde2)
    H_tilde = (exps.H_tilde1, exps.H_tilde2)
    H = (exps.H1, exps.H2)
    gamma0 = regime.gamma0
    plus, minus = regime.limit_plus.hurst_pair, regime.limit_minus.hurst_pair
    checks = [
        _at_most(
            "q_tilde_identity",
            max(abs(q_tilde[i] - q[i] * (2.0 - Q)) for i in range(2)),
            IDENTITY_TOL,
        ),
        _at_most(
            "H_tilde_identity",
            max(abs(H_tilde[i] + 0.5 * q[i] * (2.0 - Q) - 1.0) for i in range(2)),
            IDENTITY_TOL,
        ),
        _at_most(
            "H_identity",
            max(abs(H[i] - 0.5 - q[i] * (Q - 1.0)) for i in range(2)),
            IDENTITY_TOL,
        ),
        _at_most(
            "H_continuity",
            abs((plus[0] + gamma0 * plus[1]) - (minus[0] + gamma0 * minus[1])),
            IDENTITY_TOL,
        ),
    ]
    return Outcome(measured={"theory": table}, checks=checks)


@_injector.pass_("config")
@_injector.pass_("artifacts")
@_injector.pass_("threads")
def run_simulate(params, regime, config, artifacts, threads):
    synthesis = config["synthesis"]
    n1, n2 = synthesis["n"]
    seed = config["seed"]
    M = synthesis.get("M", default_truncation(n1, n2))
    ctx = KernelContext.from_params(params, M=M)

    field = sample_field(
        ctx,
        n1,
        n2,
        seed,
        M=M,
        innovation=params.innovation,
        memory_limit=synthesis["memory_limit"],
        threads=threads,
    )
    artifacts.field("field.bin", field)

    lam, gamma = synthesis["lambda"], synthesis["gamma"]
    spec = PartialSumSpec(lam, gamma, config["grids"]["x_points"])
    sides = np.array(spec.all_sides())
    mc_M = synthesis.get("M", default_truncation(int(sides[:, 0].max()), int(sides[:, 1].max())))
    H = scaling_exponent(regime, params.exponents, gamma)
    result = monte_carlo_partial_sums(
        KernelContext.from_params(params, M=mc_M),
        spec,
        H,
        config["replicates"],
        seed,
        M=mc_M,
        innovation=params.innovation,
        memory_limit=synthesis["memory_limit"],
        threads=threads,
    )
    artifacts.csv(
        "partial_sums.csv",
        (
            {"replicate": r, "x1": x[0], "x2": x[1], "value": float(result.samples[r, i])}
            for r in range(result.replicates)
            for i, x in enumerate(spec.x_points)
        ),
        ["replicate", "x1", "x2", "value"],
    )

    oracle = CovarianceOracle(
        KernelContext.from_params(params, M=mc_M),
        window=config["oracle"]["window"],
        field_consistent=True,
        memory_limit=synthesis["memory_limit"],
    )
    limit = config["tolerances"]["mc_se"]
    rows, checks = [], []
    for i, x in enumerate(spec.x_points):
        exact = exact_variance(oracle, lam, gamma, x) / lam ** (2.0 * H)
        empirical = float(result.covariance[i, i])
        stderr = float(result.standard_error[i, i])
        z = abs(empirical - exact) / stderr if stderr > 0 else math.inf
        rows.append(
            {"x": list(x), "exact": exact, "monte_carlo": empirical, "standard_error": stderr}
        )
        checks.append(_at_most("mc_variance%s" % (x,), z, limit))

    measured = {
        "field": {
            "n1": n1,
            "n2": n2,
            "M": M,
            "mean": float(np.mean(field.values)),
            "variance": float(np.var(field.values)),
        },
        "monte_carlo": {"lambda": lam, "gamma": gamma, "H": H, "M": mc_M, "variances": rows},
    }
    return Outcome(measured=measured, checks=checks)


@_injector.pass_("config")
@_injector.pass_("artifacts")
@_injector.pass_("threads")
def run_scaling_scan(params, regime, config, artifacts, threads):
    oracle = _oracle(params)
    grids = config["grids"]
    report = estimate_H_curve(
        oracle,
        grids["gamma"],
        grids["lambda"],
        x=SCAN_POINT,
        regime=regime,
        seed=config["seed"],
        threads=threads,
    )
    artifacts.csv("scan.csv", report.cells(), ["gamma", "lambda", "variance", "tail_bound"])
    artifacts.csv(
        "slopes.csv", report.slope_rows(), ["gamma", "H_hat", "H_stderr", "H_tail", "H_theory"]
    )

    tolerances = config["tolerances"]
    checks = [_at_most("slope", np.max(np.abs(report.residuals)), tolerances["slope"])]
    if report.kink is not None:
        checks.append(_within("kink", report.kink.gamma0, tolerances["kink"]))

    measured = report.as_dict()
    measured["far_field_error"] = oracle.far_field_error
    return Outcome(measured=measured, checks=checks)


@_injector.pass_("config")
@_injector.pass_("artifacts")
def run_limit_check(params, regime, config, artifacts):
    oracle = _oracle(params)
    grids = config["grids"]
    gamma = grids["limit_gamma"]
    results = [
        limit_covariance_check(
            oracle, regime, gamma, lam, grids["x_points"], params=params, conv=oracle.far_field
        )
        for lam in sorted(grids["limit_lambda"])
    ]
    artifacts.csv(
        "limit.csv",
        (dict(row, **{"lambda": result.lam}) for result in results for row in result.rows()),
        ["lambda", "x1", "x2", "y1", "y2", "normalized", "limit", "deviation"],
    )

    last = results[-1]
    checks = [_at_most("limit_deviation", last.max_deviation, config["tolerances"]["limit"])]
    if len(results) > 1:
        upper = np.triu_indices(len(last.x_points))
        improving = results[-1].deviations[upper] < results[0].deviations[upper]
        checks.append(
            Check(
                "improving_fraction",
                float(np.mean(improving)),
                IMPROVING_FRACTION,
                bool(np.mean(improving) >= IMPROVING_FRACTION - 1e-12),
            )
        )

    measured = {
        "gamma": gamma,
        "family": last.family,
        "H": last.H,
        "max_deviation": {str(result.lam): result.max_deviation for result in results},
    }
    return Outcome(measured=measured, checks=checks)


def _axis_scan(name, g, prediction, expected, settings, tolerances, threads):
    """Run one direction scan; ``expected`` is ``None`` for an isotropic model."""

    try:
        estimate = find_axis(
            g,
            n_directions=settings["n_directions"],
            radii=settings["radii"],
            margin=settings["margin"],
            prediction=prediction,
            threads=threads,
        )
    except errors.NoSeparation as exc:
        if expected is not None:
            raise
        return None, [Check("%s_no_separation" % name, exc.details, None, True)]

    if expected is None:
        return estimate, [Check("%s_no_separation" % name, estimate.as_dict(), None, False)]
    on, off = expected
    limit = tolerances["exponent"]
    checks = [
        _at_most("%s_on_axis_exponent" % name, abs(estimate.on_axis_exponent - on), limit),
        _at_most("%s_off_axis_exponent" % name, abs(estimate.off_axis_exponent - off), limit),
    ]
    if prediction is not None:
        checks.append(
            _at_most(
                "%s_axis_degrees" % name, estimate.prediction_error, tolerances["axis_degrees"]
            )
        )
    return estimate, checks


@_injector.pass_("config")
@_injector.pass_("artifacts")
@_injector.pass_("threads")
def run_axis(params, regime, config, artifacts, threads):
    settings, tolerances = config["axis"], config["tolerances"]
    exps = params.exponents
    prediction = predicted_axis(params.q1, params.q2, params.B)
    isotropic = params.q1 == params.q2

    b_expected = None if isotropic else (min(exps.q1, exps.q2), max(exps.q1, exps.q2))
    r_expected = None if isotropic else (
        min(exps.q_tilde1, exps.q_tilde2),
        max(exps.q_tilde1, exps.q_tilde2),
    )

    ctx = KernelContext.from_params(params)
    oracle = _oracle(params)
    b_estimate, checks = _axis_scan(
        "b", coefficient_evaluator(ctx), prediction, b_expected, settings, tolerances, threads
    )
    r_estimate, r_checks = _axis_scan(
        "r",
        covariance_evaluator(oracle),
        prediction,
        r_expected,
        settings,
        tolerances,
        threads,
    )
    checks.extend(r_checks)

    measured = {"prediction": None if prediction is None else prediction.tolist()}
    measured["r_source"] = "lattice" if oracle.far_field is None else "far-field"
    if oracle.far_field is not None:
        # The r scan reads the far field beyond the window; compare it with
        # lattice sums along the estimated axis and across it.
        normal = np.array([0.0, 1.0]) if r_estimate is None else r_estimate.direction
        lines = (("on_axis", normal), ("off_axis", np.array([-normal[1], normal[0]])))
        gaps = {}
        for name, line in lines:
            gaps[name] = far_field_gap(oracle, line, settings["lattice_radii"])
            checks.append(_at_most("r_lattice_%s" % name, gaps[name], tolerances["conv"]))
        measured["r_lattice_gap"] = gaps

    for name, estimate in (("b", b_estimate), ("r", r_estimate)):
        rows = [] if estimate is None else [{"angle": a, "exponent": e} for a, e in estimate.scan]
        artifacts.csv("axis_%s.csv" % name, rows, ["angle", "exponent"])
        measured[name] = None if estimate is None else estimate.as_dict()
    if b_estimate is not None and r_estimate is not None:
        gap = angle_between(b_estimate.direction, r_estimate.direction)
        measured["b_r_degrees"] = gap
        checks.append(_at_most("b_r_axis_degrees", gap, tolerances["axis_degrees"]))
    return Outcome(measured=measured, checks=checks)


@_injector.pass_("config")
@_injector.pass_("artifacts")
def run_sigma(params, regime, config, artifacts):
    labels = (
        ("plus", regime.limit_plus),
        ("minus", regime.limit_minus),
        ("critical", regime.limit_crit),
    )
    tolerance = config["tolerances"]["sigma"]
    rows, checks = [], []
    for role, label in labels:
        row = {"role": role, "family": label.family.value}
        row.update(sigma2=math.nan, spread=math.nan)
        try:
            family = limit_family(
                label.family,
                params,
                regime=regime,
                table_nodes=config["oracle"]["table_nodes"],
                rtol=config["quadrature"]["rtol"],
            )
            row["sigma2"] = sigma_constant(family)
        except errors.UnsupportedFamily:
            logger.warning("no covariance evaluator for '%s'", label.family.value)
            row["status"] = "unsupported"
            rows.append(row)
            continue
        row["status"] = "ok"

        if family.hurst_pair is not None:
            H1, H2 = family.hurst_pair
            ratios = np.array(
                [
                    family.covariance_by_quadrature(x, x)
                    / (x[0] ** (2.0 * H1) * x[1] ** (2.0 * H2))
                    for x in POWER_LAW_POINTS
                ]
            )
            row["spread"] = float(np.max(np.abs(ratios / ratios[0] - 1.0)))
            checks.append(_at_most("power_law_%s" % label.family.value, row["spread"], tolerance))
        rows.append(row)

    artifacts.csv("sigma.csv", rows, ["role", "family", "sigma2", "spread", "status"])
    return Outcome(measured={"families": rows}, checks=checks)


RUNNERS = {
    "exponents": run_exponents,
    "simulate": run_simulate,
    "scaling-scan": run_scaling_scan,
    "limit-check": run_limit_check,
    "axis": run_axis,
    "sigma": run_sigma,
}


def _version():
    from anisofield import __version__

    return __version__


def _provenance(config):
    return {
        "seed": config.get("seed"),
        "M": {
            "model": config.get("model", {}).get("M"),
            "oracle": config.get("oracle", {}).get("M"),
            "synthesis": config.get("synthesis", {}).get("M"),
        },
        "version": _version(),
        "preset": config.get("preset"),
    }


def error_report(exc, config=None, written=()):
    """Structured report of a run aborted by ``exc``."""

    return {
        "status": "error",
        "experiment": (config or {}).get("experiment"),
        "error": exc.as_dict(),
        "exit_status": exc.exit_status,
        "config": config,
        "provenance": _provenance(config or {}),
        "artifacts": list(written),
        "incomplete": True,
    }


def run(config):
    """Run the experiment of a resolved configuration and write its report."""

    name = config["experiment"]
    artifacts = ArtifactWriter(config["output"])
    logger.info("running experiment '%s' into '%s'", name, config["output"])

    try:
        params = model_params(config)
        regime = classify_regime(params)
        with _injector.push(picobox.Box(), chain=True) as box:
            box.put("config", config)
            box.put("artifacts", artifacts)
            box.put("threads", config["threads"])
            outcome = RUNNERS[name](params, regime)
    except errors.AnisofieldError as exc:
        artifacts.json("report.json", error_report(exc, config, artifacts.written))
        raise

    report = {
        "status": "pass" if outcome.passed else "fail",
        "experiment": name,
        "config": config,
        "provenance": _provenance(config),
        "exponents": params.exponents.as_dict(),
        "regime": regime.as_dict(),
        "theory": theory_table(regime, params.exponents, config["grids"]["gamma"]),
        "measured": outcome.measured,
        "checks": [check.as_dict() for check in outcome.checks],
        "artifacts": list(artifacts.written),
        "incomplete": False,
    }
    artifacts.json("report.json", report)
    for check in outcome.checks:
        if not check.passed:
            logger.warning(
                "check '%s' failed: '%s' against '%s'", check.name, check.value, check.limit
            )
    return outcome
