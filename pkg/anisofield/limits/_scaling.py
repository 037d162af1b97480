"""Scaling exponent estimation, kink detection and limit covariance checks."""

import concurrent.futures
import dataclasses
import logging
import typing

import numpy as np
from scipy import stats

from anisofield import errors
from anisofield.params import scaling_exponent
from anisofield.limits._families import limit_family
from anisofield.limits._fbs import fbs_covariance
from anisofield.limits._variance import exact_cross_covariance, exact_variance


logger = logging.getLogger(__name__)


@dataclasses.dataclass
class KinkFit:
    gamma0: float
    intercept: float
    slope: float
    slope_change: float
    rss: float
    interval: typing.Tuple[float, float] = (float("nan"), float("nan"))

    def predict(self, gammas):
        gammas = np.asarray(gammas, dtype=float)
        return (
            self.intercept
            + self.slope * gammas
            + self.slope_change * np.clip(gammas - self.gamma0, 0.0, None)
        )


def _two_segment(gammas, values, candidates):
    best = None
    for candidate in candidates:
        design = np.column_stack(
            [np.ones_like(gammas), gammas, np.clip(gammas - candidate, 0.0, None)]
        )
        coefficients, *_ = np.linalg.lstsq(design, values, rcond=None)
        rss = float(np.sum((design @ coefficients - values) ** 2))
        if best is None or rss < best[0]:
            best = (rss, candidate, coefficients)
    rss, candidate, (intercept, slope, change) = best
    return KinkFit(float(candidate), float(intercept), float(slope), float(change), rss)


def fit_kink(gammas, values, resolution=400, bootstrap=200, seed=0):
    """Continuous two-segment linear fit; break point by grid search.

    The confidence interval comes from a residual bootstrap.
    """

    gammas = np.asarray(gammas, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(gammas) < 4:
        raise errors.ConfigError("kink fit needs at least 4 gamma values, got %d" % len(gammas))
    candidates = np.linspace(gammas.min(), gammas.max(), resolution + 2)[1:-1]
    fit = _two_segment(gammas, values, candidates)

    if bootstrap:
        fitted = fit.predict(gammas)
        residuals = values - fitted
        rng = np.random.default_rng(seed)
        draws = [
            _two_segment(gammas, fitted + rng.choice(residuals, len(residuals)), candidates).gamma0
            for _ in range(bootstrap)
        ]
        fit.interval = tuple(float(v) for v in np.percentile(draws, [2.5, 97.5]))
    return fit


@dataclasses.dataclass
class ScalingReport:
    gamma_grid: typing.List[float]
    lambda_grid: typing.List[float]
    variances: np.ndarray
    tail_bounds: np.ndarray
    H_hat: np.ndarray
    H_stderr: np.ndarray
    H_tail: np.ndarray
    kink: typing.Optional[KinkFit] = None
    theory: typing.Optional[np.ndarray] = None

    @property
    def slopes(self):
        return 2.0 * self.H_hat

    @property
    def residuals(self):
        if self.theory is None:
            return None
        return self.H_hat - self.theory

    def cells(self):
        for i, gamma in enumerate(self.gamma_grid):
            for j, lam in enumerate(self.lambda_grid):
                yield {
                    "gamma": gamma,
                    "lambda": lam,
                    "variance": float(self.variances[i, j]),
                    "tail_bound": float(self.tail_bounds[i, j]),
                }

    def slope_rows(self):
        for i, gamma in enumerate(self.gamma_grid):
            row = {
                "gamma": gamma,
                "H_hat": float(self.H_hat[i]),
                "H_stderr": float(self.H_stderr[i]),
                "H_tail": float(self.H_tail[i]),
            }
            if self.theory is not None:
                row["H_theory"] = float(self.theory[i])
            yield row

    def as_dict(self):
        report = {
            "gamma_grid": list(self.gamma_grid),
            "lambda_grid": list(self.lambda_grid),
            "H_hat": self.H_hat.tolist(),
            "H_stderr": self.H_stderr.tolist(),
            "H_tail": self.H_tail.tolist(),
        }
        if self.kink is not None:
            report["kink"] = {"gamma0": self.kink.gamma0, "interval": list(self.kink.interval)}
        if self.theory is not None:
            report["H_theory"] = self.theory.tolist()
            report["max_abs_residual"] = float(np.max(np.abs(self.residuals)))
        return report


def estimate_H_curve(
    oracle,
    gamma_grid,
    lambda_grid,
    x=(1.0, 1.0),
    regime=None,
    bootstrap=200,
    seed=0,
    threads=1,
):
    """Fit ``log Var S_{lambda,gamma}(x)`` against ``log lambda`` for every gamma."""

    gamma_grid = [float(g) for g in gamma_grid]
    lambda_grid = [float(v) for v in lambda_grid]
    if not gamma_grid or len(lambda_grid) < 2:
        raise errors.ConfigError("need a nonempty gamma grid and at least two lambda values")
    if any(b <= a for a, b in zip(lambda_grid, lambda_grid[1:])):
        raise errors.ConfigError("lambda grid must be increasing: '%s'" % lambda_grid)

    cells = [(g, lam) for g in gamma_grid for lam in lambda_grid]

    def variance(cell):
        gamma, lam = cell
        logger.info("variance at gamma = '%s', lambda = '%s'", gamma, lam)
        return exact_variance(oracle, lam, gamma, x, with_bound=True)

    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as executor:
            results = list(executor.map(variance, cells))
    else:
        results = [variance(cell) for cell in cells]

    shape = (len(gamma_grid), len(lambda_grid))
    variances = np.array([value for value, _ in results]).reshape(shape)
    bounds = np.array([bound for _, bound in results]).reshape(shape)

    log_lambda = np.log(lambda_grid)
    H_hat, H_stderr, H_tail = [], [], []
    for row in np.log(variances):
        fit = stats.linregress(log_lambda, row)
        H_hat.append(0.5 * fit.slope)
        H_stderr.append(0.5 * fit.stderr)
        H_tail.append(0.5 * (row[-1] - row[-2]) / (log_lambda[-1] - log_lambda[-2]))

    report = ScalingReport(
        gamma_grid=gamma_grid,
        lambda_grid=lambda_grid,
        variances=variances,
        tail_bounds=bounds,
        H_hat=np.array(H_hat),
        H_stderr=np.array(H_stderr),
        H_tail=np.array(H_tail),
    )
    if len(gamma_grid) >= 4:
        report.kink = fit_kink(gamma_grid, report.H_hat, bootstrap=bootstrap, seed=seed)
        logger.info("kink estimate gamma0 = '%s'", report.kink.gamma0)
    if regime is not None:
        report.theory = np.array(
            [scaling_exponent(regime, regime.exponents, g) for g in gamma_grid]
        )
    return report


@dataclasses.dataclass
class LimitCheck:
    gamma: float
    lam: float
    H: float
    family: str
    x_points: typing.List[typing.Tuple[float, float]]
    normalized: np.ndarray
    limit: np.ndarray

    @property
    def deviations(self):
        return np.abs(self.normalized / self.limit - 1.0)

    @property
    def max_deviation(self):
        return float(np.max(self.deviations))

    def rows(self):
        for i, x in enumerate(self.x_points):
            for j, y in enumerate(self.x_points):
                yield {
                    "x1": x[0],
                    "x2": x[1],
                    "y1": y[0],
                    "y2": y[1],
                    "normalized": float(self.normalized[i, j]),
                    "limit": float(self.limit[i, j]),
                    "deviation": float(self.deviations[i, j]),
                }


def limit_covariance_check(oracle, regime, gamma, lam, x_points, params=None, conv=None):
    """Normalized partial-sum covariances against the limit covariance."""

    params = oracle.ctx if params is None else params
    x_points = [tuple(float(v) for v in x) for x in x_points]
    H = scaling_exponent(regime, regime.exponents, gamma)

    if gamma > regime.gamma0:
        label = regime.limit_plus
    elif gamma < regime.gamma0:
        label = regime.limit_minus
    else:
        label = regime.limit_crit
    family = limit_family(label.family, params, regime=regime, conv=conv)

    if label.hurst_pair is not None:
        sigma2 = family.sigma2
        H1, H2 = label.hurst_pair
        limit = np.array(
            [[sigma2 * fbs_covariance(x, y, H1, H2) for y in x_points] for x in x_points]
        )
    else:
        limit = family.covariance_matrix(x_points)

    n = len(x_points)
    normalized = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            value = exact_cross_covariance(oracle, lam, gamma, x_points[i], x_points[j])
            normalized[i, j] = normalized[j, i] = value / lam ** (2.0 * H)

    check = LimitCheck(gamma, lam, H, label.family.value, x_points, normalized, limit)
    logger.info(
        "limit check '%s' at gamma = '%s', lambda = '%s': max deviation '%s'",
        label.family.value,
        gamma,
        lam,
        check.max_deviation,
    )
    return check
