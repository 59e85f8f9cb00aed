"""
Detector Module for Simpson Scan
Runs the disaggregation method over every ordered pair of covariates:
partition the conditioning covariate, fit aggregate and subgroup trends,
test them, flag trend reversals and rank by pseudo-R^2
"""

import enum
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from src.data.dataset import pair_view
from src.models.logistic import (
    FitConfig, FitStatus, constant_fit, deviance, fit_logistic, null_loglik
)
from src.models.stats import benjamini_hochberg, chi2_sf, wald_p
from src.partition.partition_engine import PartitionConfig, build_partition
from src.utils.console import get_logger, progress
from src.utils.errors import ConfigError, ConstantOutcome, EmptyInput, TooFewCovariates

logger = get_logger(__name__)

REVERSAL_DENOMINATORS = ("all", "significant")
SUBGROUP_TESTS = ("wald", "deviance")


class Sign(enum.Enum):
    """Direction of a fitted slope"""
    POS = "pos"
    NEG = "neg"
    ZERO = "zero"

    @classmethod
    def of(cls, value):
        if value > 0:
            return cls.POS
        if value < 0:
            return cls.NEG
        return cls.ZERO


class SkipReason(enum.Enum):
    """Why a pair produced no result"""
    TOO_FEW_ROWS = "too_few_rows"
    CONSTANT_OUTCOME = "constant_outcome"
    SINGLE_BIN = "single_bin"


@dataclass(frozen=True)
class ScanConfig:
    """Everything a scan needs besides the data"""
    alpha_level: float = 0.05
    partition: PartitionConfig = field(default_factory=PartitionConfig)
    fit: FitConfig = field(default_factory=FitConfig)
    top_k: int = None
    require_reversal: bool = False
    bh_correction: bool = False
    reversal_denominator: str = "all"
    subgroup_test: str = "wald"
    workers: int = 1
    progress: bool = False

    def __post_init__(self):
        if not 0 < self.alpha_level < 1:
            raise ConfigError(f"alpha_level must be in (0, 1), got {self.alpha_level}")
        if self.top_k is not None and self.top_k < 0:
            raise ConfigError(f"top_k must be >= 0, got {self.top_k}")
        if self.reversal_denominator not in REVERSAL_DENOMINATORS:
            raise ConfigError(f"reversal_denominator must be one of {REVERSAL_DENOMINATORS}")
        if self.subgroup_test not in SUBGROUP_TESTS:
            raise ConfigError(f"subgroup_test must be one of {SUBGROUP_TESTS}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")

    @classmethod
    def from_dict(cls, config):
        """
        Build a ScanConfig from the sectioned config dict

        Args:
            config (dict): Sections "scan", "partition" and "fit"

        Returns:
            ScanConfig: Validated configuration
        """
        scan = dict(config.get("scan", {}))
        try:
            return cls(partition=PartitionConfig(**config.get("partition", {})),
                       fit=FitConfig(**config.get("fit", {})), **scan)
        except TypeError as e:
            raise ConfigError(f"unknown configuration key: {e}") from None

    def to_dict(self):
        """Config echo for reports (worker count and progress are excluded)"""
        return {
            "scan": {
                "alpha_level": self.alpha_level,
                "top_k": self.top_k,
                "require_reversal": self.require_reversal,
                "bh_correction": self.bh_correction,
                "reversal_denominator": self.reversal_denominator,
                "subgroup_test": self.subgroup_test,
            },
            "partition": {
                "max_bins": self.partition.max_bins,
                "min_bin_size": self.partition.min_bin_size,
                "min_gain": self.partition.min_gain,
            },
            "fit": {
                "max_iter": self.fit.max_iter,
                "loglik_tol": self.fit.loglik_tol,
                "ridge": self.fit.ridge,
                "prob_clamp": self.fit.prob_clamp,
            },
        }


@dataclass(frozen=True)
class SubgroupTrend:
    """Trend fitted inside one bin"""
    bin: object
    fit: object
    beta_p: float
    significant: bool
    sign: Sign
    deviance: float


@dataclass(frozen=True)
class DisaggregationResult:
    """Outcome of the method for one (x_j, x_c) pair"""
    x_j: str
    x_c: str
    n: int
    aggregate_fit: object
    aggregate_p: float
    aggregate_deviance: float
    partition: object
    subgroup_trends: tuple
    disagg_deviance: float
    disagg_p: float
    simpson_flag: bool
    pseudo_r2: float
    disagg_p_adjusted: float = None

    @property
    def n_bins(self):
        return len(self.subgroup_trends)

    @property
    def aggregate_sign(self):
        return Sign.of(self.aggregate_fit.beta)

    @property
    def sort_key(self):
        return (-self.pseudo_r2, self.x_j, self.x_c)


@dataclass(frozen=True)
class SkippedPair:
    """A pair that could not be evaluated"""
    x_j: str
    x_c: str
    n: int
    reason: SkipReason


@dataclass(frozen=True)
class ScanReport:
    """Significant disaggregations ranked by pseudo-R^2"""
    fingerprint: str
    config: dict
    results: tuple
    skipped: tuple
    pairs_examined: int
    pairs_evaluated: int

    @property
    def pairs_skipped(self):
        return len(self.skipped)

    @property
    def pairs_significant(self):
        return len(self.results)


def _is_constant(y):
    return len(y) == 0 or y.min() == y.max()


def aggregate_trend(view, config=None):
    """
    Fit the trend on all rows of a pair and test it against the global mean

    Args:
        view (PairView): Rows of the pair
        config (ScanConfig): Scan configuration

    Returns:
        tuple: (LogisticFit, aggregate_p, aggregate_deviance)
    """
    config = config or ScanConfig()
    if view.n < 2:
        raise EmptyInput(f"pair ({view.x_j_name}, {view.x_c_name}) has {view.n} rows")
    if _is_constant(view.y):
        raise ConstantOutcome(f"outcome is constant on pair ({view.x_j_name}, {view.x_c_name})")
    fit = fit_logistic(view.x_j, view.y, config.fit)
    dev = deviance(fit.loglik, null_loglik(view.y, config.fit.prob_clamp))
    return fit, chi2_sf(dev, 1), dev


def _subgroup_trend(subgroup, x, y, config):
    if _is_constant(y):
        fit = constant_fit(x, y, config.fit)
    else:
        fit = fit_logistic(x, y, config.fit)
    if fit.status is FitStatus.DEGENERATE_CONSTANT_Y:
        return SubgroupTrend(bin=subgroup, fit=fit, beta_p=1.0, significant=False,
                             sign=Sign.ZERO, deviance=0.0)
    dev = deviance(fit.loglik, null_loglik(y, config.fit.prob_clamp))
    if config.subgroup_test == "deviance":
        p = chi2_sf(dev, 1)
    else:
        p = wald_p(fit)
    return SubgroupTrend(bin=subgroup, fit=fit, beta_p=p,
                         significant=bool(p < config.alpha_level and fit.converged),
                         sign=Sign.of(fit.beta), deviance=dev)


def disaggregated_trends(view, partition, config=None):
    """
    Fit one trend per bin and test them against the bin-mean model

    Args:
        view (PairView): Rows of the pair
        partition (Partition): Partition built on this pair's x_c
        config (ScanConfig): Scan configuration

    Returns:
        tuple: (list of SubgroupTrend, disagg_deviance, disagg_p)
    """
    config = config or ScanConfig()
    trends = []
    for subgroup in partition.bins:
        rows = subgroup.members
        trends.append(_subgroup_trend(subgroup, view.x_j[rows], view.y[rows], config))
    total = float(sum(t.deviance for t in trends))
    return trends, total, chi2_sf(total, len(partition.bins))


def detect_reversal(aggregate_fit, aggregate_p, subgroup_trends, alpha_level,
                    denominator="all"):
    """
    Apply the majority trend-reversal rule

    Args:
        aggregate_fit (LogisticFit): Fit on the aggregate data
        aggregate_p (float): Its deviance-test p-value
        subgroup_trends (sequence): SubgroupTrend per bin
        alpha_level (float): Significance level
        denominator (str): "all" subgroups or only "significant" ones

    Returns:
        bool: True when more than half of the subgroups significantly oppose
            the significant aggregate trend
    """
    if not aggregate_p < alpha_level:
        return False
    aggregate_sign = Sign.of(aggregate_fit.beta)
    if aggregate_sign is Sign.ZERO:
        return False
    opposite = Sign.NEG if aggregate_sign is Sign.POS else Sign.POS
    against = sum(1 for t in subgroup_trends if t.significant and t.sign is opposite)
    if denominator == "significant":
        total = sum(1 for t in subgroup_trends if t.significant)
    else:
        total = len(subgroup_trends)
    return total > 0 and against > total / 2.0


def pseudo_r2(subgroup_trends, view, prob_clamp=1e-12):
    """
    McFadden pseudo-R^2 of the disaggregated model against the global mean

    Args:
        subgroup_trends (sequence): SubgroupTrend per bin
        view (PairView): Rows of the pair
        prob_clamp (float): Probability clamp used by the fits

    Returns:
        float: 1 - sum(bin log-likelihoods) / null log-likelihood, in [0, 1]
    """
    if _is_constant(view.y):
        raise ConstantOutcome(f"outcome is constant on pair ({view.x_j_name}, {view.x_c_name})")
    null = null_loglik(view.y, prob_clamp)
    full = sum(t.fit.loglik for t in subgroup_trends)
    return float(min(max(1.0 - full / null, 0.0), 1.0))


def evaluate_pair(dataset, x_j, x_c, config=None, partitions=None):
    """
    Run the whole method on one ordered pair

    Args:
        dataset (Dataset): Source data
        x_j (str): Trend covariate
        x_c (str): Conditioning covariate
        config (ScanConfig): Scan configuration
        partitions (PartitionCache): Optional cache shared across pairs

    Returns:
        DisaggregationResult or SkippedPair
    """
    config = config or ScanConfig()
    view = pair_view(dataset, x_j, x_c)
    if view.n < 2:
        return SkippedPair(x_j, x_c, view.n, SkipReason.TOO_FEW_ROWS)
    if _is_constant(view.y):
        return SkippedPair(x_j, x_c, view.n, SkipReason.CONSTANT_OUTCOME)

    if partitions is not None:
        partition = partitions.get(view, config.partition)
    else:
        partition = build_partition(view.x_c, view.y, config.partition, covariate=x_c)
    if partition.n_bins < 2:
        return SkippedPair(x_j, x_c, view.n, SkipReason.SINGLE_BIN)

    aggregate_fit, aggregate_p, aggregate_dev = aggregate_trend(view, config)
    trends, disagg_dev, disagg_p = disaggregated_trends(view, partition, config)
    flag = detect_reversal(aggregate_fit, aggregate_p, trends, config.alpha_level,
                           config.reversal_denominator)
    return DisaggregationResult(
        x_j=x_j, x_c=x_c, n=view.n,
        aggregate_fit=aggregate_fit, aggregate_p=aggregate_p,
        aggregate_deviance=aggregate_dev, partition=partition,
        subgroup_trends=tuple(trends), disagg_deviance=disagg_dev,
        disagg_p=disagg_p, simpson_flag=flag,
        pseudo_r2=pseudo_r2(trends, view, config.fit.prob_clamp))


class PartitionCache:
    """
    Partitions keyed by conditioning covariate and surviving rows, so pairs
    that share x_c and have the same missing-data pattern build it once
    """

    def __init__(self):
        self._partitions = {}
        self._lock = threading.Lock()

    def get(self, view, partition_config):
        key = (view.x_c_name, view.rows.tobytes())
        with self._lock:
            cached = self._partitions.get(key)
        if cached is None:
            cached = build_partition(view.x_c, view.y, partition_config, covariate=view.x_c_name)
            with self._lock:
                cached = self._partitions.setdefault(key, cached)
        return cached


def _ordered_pairs(names):
    return [(x_j, x_c) for x_j in names for x_c in names if x_j != x_c]


def scan(dataset, config=None):
    """
    Evaluate every ordered covariate pair and keep the significant ones

    Args:
        dataset (Dataset): Source data
        config (ScanConfig): Scan configuration

    Returns:
        ScanReport: Significant disaggregations sorted by
            (-pseudo_r2, x_j, x_c), plus skipped pairs and counts
    """
    config = config or ScanConfig()
    names = dataset.covariate_names
    if len(names) < 2:
        raise TooFewCovariates(f"a scan needs at least 2 covariates, got {len(names)}")

    pairs = _ordered_pairs(names)
    partitions = PartitionCache()
    logger.info(f"Scanning {len(pairs)} ordered pairs over {dataset.n_rows} rows")

    def evaluate(pair):
        return evaluate_pair(dataset, pair[0], pair[1], config, partitions)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            outcomes = list(progress(executor.map(evaluate, pairs), total=len(pairs),
                                     description="pairs", enabled=config.progress))
    else:
        outcomes = [evaluate(pair) for pair in progress(pairs, total=len(pairs),
                                                        description="pairs",
                                                        enabled=config.progress)]

    evaluated = [o for o in outcomes if isinstance(o, DisaggregationResult)]
    skipped = [o for o in outcomes if isinstance(o, SkippedPair)]
    for s in skipped:
        logger.debug(f"Skipped ({s.x_j}, {s.x_c}): {s.reason.value}")

    if config.bh_correction and evaluated:
        adjusted = benjamini_hochberg([r.disagg_p for r in evaluated])
        evaluated = [replace(r, disagg_p_adjusted=float(q)) for r, q in zip(evaluated, adjusted)]

    results = []
    for result in evaluated:
        p = result.disagg_p_adjusted if config.bh_correction else result.disagg_p
        if not p < config.alpha_level:
            continue
        if config.require_reversal and not result.simpson_flag:
            continue
        results.append(result)
    results.sort(key=lambda r: r.sort_key)

    logger.info(f"{len(results)} significant disaggregations, {len(skipped)} pairs skipped")
    return ScanReport(fingerprint=dataset.fingerprint(), config=config.to_dict(),
                      results=tuple(results), skipped=tuple(skipped),
                      pairs_examined=len(pairs), pairs_evaluated=len(evaluated))


def best_conditioning(report):
    """
    Best conditioning covariate for each trend covariate

    Args:
        report (ScanReport): Scan output

    Returns:
        dict: x_j -> the reported DisaggregationResult with the highest pseudo-R^2
    """
    best = {}
    for result in report.results:
        # results are already ranked, so the first hit per x_j wins
        best.setdefault(result.x_j, result)
    return dict(sorted(best.items()))
