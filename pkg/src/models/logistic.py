"""
Logistic Model Module for Simpson Scan
Maximum-likelihood logistic trend fits by iteratively reweighted least squares
"""

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logit

from src.utils.console import get_logger
from src.utils.errors import ConfigError, EmptyInput, LengthMismatch

logger = get_logger(__name__)


class FitStatus(enum.Enum):
    """How a fit ended"""
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    DEGENERATE_CONSTANT_Y = "degenerate_constant_y"
    RIDGE_BOUNDED = "ridge_bounded"


@dataclass(frozen=True)
class FitConfig:
    """Solver controls"""
    max_iter: int = 100
    loglik_tol: float = 1e-10
    ridge: float = 1e-8
    prob_clamp: float = 1e-12

    def __post_init__(self):
        for name in ("max_iter", "loglik_tol", "ridge", "prob_clamp"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"fit.{name} must be positive, got {getattr(self, name)}")
        if self.prob_clamp >= 0.5:
            raise ConfigError(f"fit.prob_clamp must be below 0.5, got {self.prob_clamp}")


@dataclass(frozen=True)
class LogisticFit:
    """Fitted intercept and slope with diagnostics"""
    alpha: float
    beta: float
    loglik: float
    n: int
    se_alpha: float
    se_beta: float
    iterations: int
    status: FitStatus

    @property
    def converged(self):
        return self.status is FitStatus.CONVERGED


def _check_pair(x, y, minimum):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) != len(y):
        raise LengthMismatch(f"x has {len(x)} values, y has {len(y)}")
    if len(y) < minimum:
        raise EmptyInput(f"need at least {minimum} observations, got {len(y)}")
    return x, y


def _loglik_eta(eta, y, prob_clamp):
    p = np.clip(expit(eta), prob_clamp, 1.0 - prob_clamp)
    q = np.clip(expit(-eta), prob_clamp, 1.0 - prob_clamp)
    return float(np.sum(y * np.log(p) + (1.0 - y) * np.log(q)))


def log_likelihood(alpha, beta, x, y, prob_clamp=1e-12):
    """
    Bernoulli log-likelihood of a logistic model

    Args:
        alpha (float): Intercept
        beta (float): Slope
        x (array-like): Covariate values
        y (array-like): 0/1 outcomes
        prob_clamp (float): Predicted probabilities are kept in [c, 1 - c]

    Returns:
        float: Log-likelihood, always <= 0
    """
    x, y = _check_pair(x, y, 0)
    return min(_loglik_eta(alpha + beta * x, y, prob_clamp), 0.0)


def _clamped_mean(y, prob_clamp=1e-12):
    """Mean of y kept inside [prob_clamp, 1 - prob_clamp]"""
    return float(np.clip(np.mean(y), prob_clamp, 1.0 - prob_clamp))


def null_loglik(y, prob_clamp=1e-12):
    """
    Log-likelihood of the constant model p = mean(y)

    Args:
        y (array-like): 0/1 outcomes
        prob_clamp (float): Probability clamp

    Returns:
        float: Log-likelihood of the intercept-only model
    """
    y = np.asarray(y, dtype=np.float64)
    if len(y) == 0:
        raise EmptyInput("null_loglik needs at least one observation")
    p = _clamped_mean(y, prob_clamp)
    ones = float(np.sum(y))
    return min(ones * np.log(p) + (len(y) - ones) * np.log1p(-p), 0.0)


def deviance(loglik_full, loglik_null):
    """
    Deviance between a full model and a nested null model

    Args:
        loglik_full (float): Log-likelihood of the full model
        loglik_null (float): Log-likelihood of the nested model

    Returns:
        float: 2 * (full - null), clamped at 0
    """
    value = 2.0 * (loglik_full - loglik_null)
    if value < 0:
        if value < -1e-9:
            logger.warning(f"Negative deviance {value:.3g} clamped to 0")
        return 0.0
    return float(value)


def constant_fit(x, y, fit_config=None):
    """
    Fit for a constant outcome: beta = 0 and alpha = logit of the clamped mean

    Args:
        x (array-like): Covariate values
        y (array-like): Constant 0/1 outcomes (at least one)
        fit_config (FitConfig): Supplies the probability clamp

    Returns:
        LogisticFit: Fit with status DEGENERATE_CONSTANT_Y
    """
    config = fit_config or FitConfig()
    x, y = _check_pair(x, y, 1)
    alpha = float(logit(_clamped_mean(y, config.prob_clamp)))
    return LogisticFit(alpha=alpha, beta=0.0,
                       loglik=log_likelihood(alpha, 0.0, x, y, config.prob_clamp), n=len(y),
                       se_alpha=float("nan"), se_beta=float("nan"),
                       iterations=0, status=FitStatus.DEGENERATE_CONSTANT_Y)


def _is_separable(z, y):
    ones = z[y == 1]
    zeros = z[y == 0]
    return ones.min() >= zeros.max() or zeros.min() >= ones.max()


def _standard_errors(z, p, mu, scale):
    w = p * (1.0 - p)
    info = np.array([[w.sum(), (w * z).sum()],
                     [(w * z).sum(), (w * z * z).sum()]])
    det = np.linalg.det(info)
    if not np.isfinite(det) or det <= 1e-12 * max(info[0, 0] * info[1, 1], 1e-300):
        return float("inf"), float("inf")
    cov = np.linalg.inv(info)
    # back to the original x scale: beta = b / s, alpha = a - b * mu / s
    jac = np.array([[1.0, -mu / scale], [0.0, 1.0 / scale]])
    cov = jac @ cov @ jac.T
    return float(np.sqrt(max(cov[0, 0], 0.0))), float(np.sqrt(max(cov[1, 1], 0.0)))


def _score_small(gradient, z, n, tol=1e-6):
    """First-order condition on the scaled covariate: both score components near zero"""
    reach = max(float(np.max(np.abs(z))), 1.0)
    return abs(gradient[0]) <= tol * n and abs(gradient[1]) <= tol * n * reach


def fit_logistic(x, y, fit_config=None):
    """
    Fit P(y = 1 | x) = logistic(alpha + beta * x) by maximum likelihood

    The fit runs Newton/IRLS on a centred and scaled copy of x, with the ridge
    added to the Hessian diagonal. Separable data are fitted with the ridge as
    a penalty on the slope so the estimates stay finite.

    Args:
        x (array-like): Covariate values
        y (array-like): 0/1 outcomes
        fit_config (FitConfig): Solver controls; defaults apply when None

    Returns:
        LogisticFit: Estimates on the original x scale
    """
    config = fit_config or FitConfig()
    x, y = _check_pair(x, y, 2)
    n = len(y)
    clamp = config.prob_clamp

    ybar = float(np.mean(y))
    if ybar in (0.0, 1.0):
        return constant_fit(x, y, config)

    mu = float(np.mean(x))
    scale = float(np.std(x))
    constant_x = not scale > 0
    if constant_x:
        scale = 1.0
    z = (x - mu) / scale
    separable = not constant_x and _is_separable(z, y)
    penalty = config.ridge if separable else 0.0

    def objective(theta):
        return _loglik_eta(theta[0] + theta[1] * z, y, clamp) - 0.5 * penalty * theta[1] ** 2

    def score(theta):
        residual = y - expit(theta[0] + theta[1] * z)
        return np.array([residual.sum(), (residual * z).sum() - penalty * theta[1]])

    theta = np.array([float(logit(ybar)), 0.0])
    current = objective(theta)
    status = FitStatus.MAX_ITER
    iterations = 0
    for iterations in range(1, config.max_iter + 1):
        p = expit(theta[0] + theta[1] * z)
        w = p * (1.0 - p)
        gradient = score(theta)
        hessian = np.array([[w.sum(), (w * z).sum()],
                            [(w * z).sum(), (w * z * z).sum() + penalty]])
        hessian += config.ridge * np.eye(2)
        step = np.linalg.solve(hessian, gradient)

        # step halving keeps the objective non-decreasing
        accepted = False
        for _ in range(60):
            candidate = theta + step
            value = objective(candidate)
            if np.isfinite(value) and value >= current - 1e-14 * max(1.0, abs(current)):
                accepted = True
                break
            step = step / 2.0
        if not accepted:
            # no uphill step left; only a zero score counts as the optimum
            if _score_small(gradient, z, n):
                status = FitStatus.CONVERGED
            else:
                logger.debug(f"IRLS step halving stalled at iteration {iterations} on n={n}")
            break

        change = value - current
        theta = candidate
        current = value
        if abs(change) < config.loglik_tol and (separable or _score_small(score(theta), z, n)):
            status = FitStatus.CONVERGED
            break

    if separable:
        status = FitStatus.RIDGE_BOUNDED
    elif status is FitStatus.MAX_ITER and iterations == config.max_iter:
        logger.debug(f"IRLS hit max_iter={config.max_iter} on n={n}")

    a, b = float(theta[0]), float(theta[1])
    beta = b / scale
    alpha = a - beta * mu
    p = expit(a + b * z)
    se_alpha, se_beta = _standard_errors(z, p, mu, scale)
    return LogisticFit(alpha=alpha, beta=beta,
                       loglik=min(_loglik_eta(a + b * z, y, clamp), 0.0), n=n,
                       se_alpha=se_alpha, se_beta=se_beta,
                       iterations=iterations, status=status)
