"""
Statistics Module for Simpson Scan
Tail probabilities, Wald tests and multiple-comparison adjustment
"""

import math

import numpy as np
from scipy.special import erfc, gammaincc, ndtri

from src.models.logistic import FitStatus
from src.utils.errors import DegenerateFit, DomainError

# Smallest positive double; keeps p-values inside (0, 1]
_P_FLOOR = np.nextafter(0.0, 1.0)


def chi2_sf(x, df):
    """
    Upper tail probability of a chi-squared distribution

    Args:
        x (float): Statistic value, >= 0
        df (int): Degrees of freedom, >= 1

    Returns:
        float: P[chi2(df) > x] = Q(df / 2, x / 2)
    """
    if not math.isfinite(df) or df < 1 or int(df) != df:
        raise DomainError(f"chi2_sf: df must be an integer >= 1, got {df}")
    if math.isnan(x) or x < 0:
        raise DomainError(f"chi2_sf: x must be >= 0, got {x}")
    if x == 0:
        return 1.0
    return float(min(max(gammaincc(df / 2.0, x / 2.0), 0.0), 1.0))


def normal_two_sided_p(z):
    """Two-sided standard normal p-value of a z statistic"""
    return float(max(min(erfc(abs(z) / math.sqrt(2.0)), 1.0), _P_FLOOR))


def wald_z(fit):
    """z statistic beta / se_beta (0 when the standard error is unusable)"""
    if fit.status is FitStatus.DEGENERATE_CONSTANT_Y:
        raise DegenerateFit("constant-outcome fit has no slope to test")
    if fit.beta == 0 or not math.isfinite(fit.se_beta) or not fit.se_beta > 0:
        return 0.0
    return fit.beta / fit.se_beta


def wald_p(fit):
    """
    Two-sided Wald p-value of the slope

    Args:
        fit (LogisticFit): Non-degenerate fit

    Returns:
        float: p-value in (0, 1]
    """
    return normal_two_sided_p(wald_z(fit))


def wald_ci(fit, level=0.95):
    """
    Wald confidence interval for the slope

    Args:
        fit (LogisticFit): Fitted model
        level (float): Coverage, in (0, 1)

    Returns:
        tuple: (low, high); unbounded when the standard error is
    """
    if not 0 < level < 1:
        raise DomainError(f"confidence level must be in (0, 1), got {level}")
    if not math.isfinite(fit.se_beta):
        return float("-inf"), float("inf")
    half = float(ndtri(0.5 + level / 2.0)) * fit.se_beta
    return fit.beta - half, fit.beta + half


def benjamini_hochberg(p_values):
    """
    Benjamini-Hochberg step-up adjustment

    Args:
        p_values (array-like): Raw p-values

    Returns:
        ndarray: Adjusted q-values in the input order
    """
    p = np.asarray(p_values, dtype=np.float64)
    m = len(p)
    if m == 0:
        return p.copy()
    order = np.argsort(p, kind="mergesort")
    ranked = p[order] * m / np.arange(1, m + 1)
    ranked = np.minimum.accumulate(ranked[::-1])[::-1]
    q = np.empty(m)
    q[order] = np.clip(ranked, 0.0, 1.0)
    return np.maximum(q, p)
