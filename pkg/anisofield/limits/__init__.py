"""Scaling limits: families, variance oracles and H(gamma) estimation."""

from . import abc
from ._families import limit_family, overlap, power_pair_integral, sigma_constant
from ._fbs import fbs_covariance, fbs_covariance_matrix, fbs_sample
from ._scaling import (
    KinkFit,
    LimitCheck,
    ScalingReport,
    estimate_H_curve,
    fit_kink,
    limit_covariance_check,
)
from ._variance import (
    brute_force_covariance,
    exact_cross_covariance,
    exact_variance,
    rectangle_covariance,
)


__all__ = [
    "abc",
    "KinkFit",
    "LimitCheck",
    "ScalingReport",
    "brute_force_covariance",
    "estimate_H_curve",
    "exact_cross_covariance",
    "exact_variance",
    "fbs_covariance",
    "fbs_covariance_matrix",
    "fbs_sample",
    "fit_kink",
    "limit_covariance_check",
    "limit_family",
    "overlap",
    "power_pair_integral",
    "rectangle_covariance",
    "sigma_constant",
]
