"""
Models Package Initialization
Logistic trend fits and the tests built on them
"""

from src.models.logistic import (
    FitConfig, FitStatus, LogisticFit, constant_fit, deviance, fit_logistic,
    log_likelihood, null_loglik
)
from src.models.stats import (
    benjamini_hochberg, chi2_sf, normal_two_sided_p, wald_ci, wald_p, wald_z
)
