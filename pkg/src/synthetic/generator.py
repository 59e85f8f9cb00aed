"""
Synthetic Data Module for Simpson Scan
Generates datasets with planted subgroup trends and known ground truth.

Random draws come from numpy's PCG64 bit generator (np.random.default_rng),
seeded with the spec's integer seed, so a seed fully determines the output.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import pandas as pd
from scipy.optimize import brentq
from scipy.special import expit, logit

from src.data.dataset import ColumnRole, ColumnSpec, Dataset
from src.utils.console import get_logger
from src.utils.errors import InvalidSpec

logger = get_logger(__name__)

OUTCOME = "y"
TREND = "x_j"
GROUP = "x_c"
NOISE_DISTRIBUTIONS = ("uniform", "normal")

# Group index jitter stays strictly inside (-0.25, 0.25) so midpoints separate groups
_JITTER = 0.25


@dataclass(frozen=True)
class PlantedGroup:
    """One subgroup with its own logistic trend"""
    size: int
    alpha: float
    beta: float
    x_center: float
    x_spread: float


@dataclass(frozen=True)
class PlantedSpec:
    """Full recipe for a synthetic dataset"""
    groups: tuple
    noise_count: int = 0
    noise_distribution: str = "uniform"
    seed: int = 0

    def __post_init__(self):
        if len(self.groups) < 1:
            raise InvalidSpec("spec needs at least one group")
        for index, group in enumerate(self.groups):
            if int(group.size) != group.size or group.size < 1:
                raise InvalidSpec(f"group {index}: size must be a positive integer")
            if not group.x_spread > 0:
                raise InvalidSpec(f"group {index}: x_spread must be > 0")
            values = (group.alpha, group.beta, group.x_center, group.x_spread)
            if not np.all(np.isfinite(values)):
                raise InvalidSpec(f"group {index}: parameters must be finite")
        if int(self.noise_count) != self.noise_count or self.noise_count < 0:
            raise InvalidSpec("noise count must be a non-negative integer")
        if self.noise_distribution not in NOISE_DISTRIBUTIONS:
            raise InvalidSpec(f"noise distribution must be one of {NOISE_DISTRIBUTIONS}")
        if int(self.seed) != self.seed:
            raise InvalidSpec("seed must be an integer")

    @property
    def n_rows(self):
        return sum(g.size for g in self.groups)


@dataclass(frozen=True)
class GroundTruth:
    """
    What was planted, plus the pooled trend found by the grid oracle.

    The oracle runs on first access to pooled_alpha or pooled_beta and is
    cached, so generate itself never pays for it.
    """
    groups: tuple
    outcome: str = OUTCOME
    x_j: str = TREND
    x_c: str = GROUP
    noise: tuple = field(default_factory=tuple)
    pooled_x: np.ndarray = field(default=None, repr=False, compare=False)
    pooled_y: np.ndarray = field(default=None, repr=False, compare=False)

    @cached_property
    def pooled_fit(self):
        y = self.pooled_y
        if y.min() == y.max():
            return float(logit(np.clip(y.mean(), 1e-12, 1 - 1e-12))), 0.0
        alpha, beta, _ = oracle_fit(self.pooled_x, y)
        return alpha, beta

    @property
    def pooled_alpha(self):
        return self.pooled_fit[0]

    @property
    def pooled_beta(self):
        return self.pooled_fit[1]

    def to_dict(self):
        return {
            "outcome": self.outcome,
            "x_j": self.x_j,
            "x_c": self.x_c,
            "noise": list(self.noise),
            "groups": [{"alpha": a, "beta": b} for a, b in self.groups],
            "pooled_alpha": self.pooled_alpha,
            "pooled_beta": self.pooled_beta,
            "reversal_planted": reversal_planted(self),
        }


def spec_from_dict(data):
    """
    Parse a generator spec from its JSON form

    Args:
        data (dict): {"seed", "groups": [{"size", "alpha", "beta", "x_center",
            "x_spread"}], "noise": {"count", "distribution"}}

    Returns:
        PlantedSpec: Validated spec
    """
    if not isinstance(data, dict):
        raise InvalidSpec("spec must be a JSON object")
    try:
        groups = tuple(PlantedGroup(size=int(g["size"]), alpha=float(g["alpha"]),
                                    beta=float(g["beta"]), x_center=float(g["x_center"]),
                                    x_spread=float(g["x_spread"]))
                       for g in data.get("groups", []))
        noise = data.get("noise", {}) or {}
        return PlantedSpec(groups=groups, noise_count=int(noise.get("count", 0)),
                           noise_distribution=noise.get("distribution", "uniform"),
                           seed=int(data.get("seed", 0)))
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidSpec(f"bad spec field: {e}") from None


def group_mean(alpha, beta, center, spread):
    """
    Expected outcome of a group whose x is uniform on [center - spread, center + spread]

    Uses the closed form of the integral of the logistic curve (softplus).
    """
    if beta == 0:
        return float(expit(alpha))
    high = np.logaddexp(0.0, alpha + beta * (center + spread))
    low = np.logaddexp(0.0, alpha + beta * (center - spread))
    return float((high - low) / (2.0 * spread * beta))


def alpha_for_mean(mean_y, beta, center, spread):
    """
    Intercept that gives a planted group the expected outcome mean_y

    Args:
        mean_y (float): Target mean, strictly inside (0, 1)
        beta (float): Group slope
        center (float): Centre of the group's x range
        spread (float): Half-width of the group's x range

    Returns:
        float: alpha with group_mean(alpha, beta, center, spread) == mean_y
    """
    if not 0.0 < mean_y < 1.0:
        raise InvalidSpec(f"target mean must be inside (0, 1), got {mean_y}")
    if not spread > 0:
        raise InvalidSpec(f"x_spread must be > 0, got {spread}")
    # group_mean is increasing in alpha; this bracket puts every p on one side of mean_y
    start = float(logit(mean_y)) - beta * center
    reach = abs(beta) * spread + 10.0
    return float(brentq(lambda a: group_mean(a, beta, center, spread) - mean_y,
                        start - reach, start + reach, xtol=1e-14))


def two_group_paradox_spec(n_total=10000, seed=0, noise_count=3, x_spread=3.5):
    """
    Two groups with the same negative slope whose pooled trend is positive

    The default spread lets the groups' x_j ranges overlap, so x_j alone does
    not identify the group and the group covariate stays the best conditioning
    variable for x_j.

    Args:
        n_total (int): Rows, split evenly between the groups
        seed (int): Random seed
        noise_count (int): Independent noise covariates to append
        x_spread (float): Half-width of each group's x_j range

    Returns:
        PlantedSpec: Groups centred at 0 and 4 with beta = -1 and expected
            outcomes of exactly 0.2 and 0.8
    """
    beta = -1.0
    groups = []
    for index, (center, mean_y) in enumerate(((0.0, 0.2), (4.0, 0.8))):
        size = n_total // 2 + (n_total % 2 if index == 0 else 0)
        alpha = alpha_for_mean(mean_y, beta, center, x_spread)
        groups.append(PlantedGroup(size=size, alpha=alpha, beta=beta,
                                   x_center=center, x_spread=x_spread))
    return PlantedSpec(groups=tuple(groups), noise_count=noise_count, seed=seed)


def oracle_fit(x, y, prob_clamp=1e-12, grid=21, rounds=18):
    """
    Maximize the logistic log-likelihood by repeated grid refinement

    Slow and derivative-free; used as an independent check on IRLS.

    Args:
        x (array-like): Covariate values
        y (array-like): 0/1 outcomes (not constant)
        prob_clamp (float): Probability clamp
        grid (int): Points per axis per round
        rounds (int): Refinement rounds

    Returns:
        tuple: (alpha, beta, loglik)
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    mu = float(x.mean())
    scale = float(x.std()) or 1.0
    z = (x - mu) / scale

    total_y = float(y.sum())
    total_yz = float(y @ z)

    def loglik(a, b):
        # sum(y * eta) - sum(softplus(eta)); one row of the grid at a time bounds memory
        values = a[:, None] * total_y + b[None, :] * total_yz
        for i, intercept in enumerate(a):
            values[i] -= np.logaddexp(0.0, intercept + b[:, None] * z[None, :]).sum(axis=1)
        return values

    center = np.array([float(logit(np.clip(y.mean(), prob_clamp, 1 - prob_clamp))), 0.0])
    width = np.array([8.0, 8.0])
    offsets = np.linspace(-1.0, 1.0, grid)
    done = 0
    moves = 0
    while done < rounds:
        a = center[0] + width[0] * offsets
        b = center[1] + width[1] * offsets
        values = loglik(a, b)
        i, j = np.unravel_index(np.argmax(values), values.shape)
        center = np.array([a[i], b[j]])
        if (i in (0, grid - 1) or j in (0, grid - 1)) and moves < 50:
            # optimum outside the window; move it without shrinking
            moves += 1
            continue
        width = width * 4.0 / (grid - 1)
        done += 1
    beta = center[1] / scale
    alpha = center[0] - beta * mu
    eta = center[0] + center[1] * z
    p = np.clip(expit(eta), prob_clamp, 1.0 - prob_clamp)
    q = np.clip(expit(-eta), prob_clamp, 1.0 - prob_clamp)
    return float(alpha), float(beta), float(np.sum(y * np.log(p) + (1.0 - y) * np.log(q)))


def generate(spec):
    """
    Draw a dataset from a planted spec

    Args:
        spec (PlantedSpec): Generator recipe

    Returns:
        tuple: (Dataset, GroundTruth)
    """
    if not isinstance(spec, PlantedSpec):
        raise InvalidSpec("generate expects a PlantedSpec")
    rng = np.random.default_rng(spec.seed)

    x_parts, y_parts, group_parts = [], [], []
    for index, group in enumerate(spec.groups):
        x = rng.uniform(group.x_center - group.x_spread, group.x_center + group.x_spread,
                        group.size)
        y = (rng.random(group.size) < expit(group.alpha + group.beta * x)).astype(np.int8)
        jitter = rng.uniform(-_JITTER, _JITTER, group.size)
        x_parts.append(x)
        y_parts.append(y)
        group_parts.append(index + jitter)

    n = spec.n_rows
    if spec.noise_distribution == "normal":
        noise = rng.standard_normal((n, spec.noise_count))
    else:
        noise = rng.random((n, spec.noise_count))
    order = rng.permutation(n)

    x_j = np.concatenate(x_parts)[order]
    x_c = np.concatenate(group_parts)[order]
    y = np.concatenate(y_parts)[order]
    noise_names = tuple(f"noise_{k + 1}" for k in range(spec.noise_count))

    covariates = {TREND: x_j, GROUP: x_c}
    for k, name in enumerate(noise_names):
        covariates[name] = noise[:, k]
    columns = [ColumnSpec(OUTCOME, ColumnRole.OUTCOME)]
    columns += [ColumnSpec(name, ColumnRole.COVARIATE) for name in (TREND, GROUP) + noise_names]
    dataset = Dataset(columns, y, covariates)

    truth = GroundTruth(groups=tuple((g.alpha, g.beta) for g in spec.groups),
                        noise=noise_names, pooled_x=x_j, pooled_y=y)
    logger.debug(f"Generated {n} rows from {len(spec.groups)} groups (seed {spec.seed})")
    return dataset, truth


def reversal_planted(ground_truth):
    """
    Whether the planted groups reverse the pooled trend

    Args:
        ground_truth (GroundTruth): Output of generate

    Returns:
        bool: True iff there are at least two groups and every group slope has
            the sign opposite to the pooled oracle slope
    """
    betas = [beta for _, beta in ground_truth.groups]
    if len(betas) < 2:
        return False
    pooled = np.sign(ground_truth.pooled_beta)
    if pooled == 0:
        return False
    return bool(all(np.sign(b) == -pooled for b in betas))


def write_csv(dataset, path):
    """
    Write a dataset in the loader's CSV format

    Args:
        dataset (Dataset): Dataset to write
        path (str): Destination file
    """
    frame = {dataset.outcome_name: dataset.outcome.astype(int)}
    for name in dataset.covariate_names:
        frame[name] = dataset.covariate(name)
    order = [c.name for c in dataset.columns if c.name in frame]
    pd.DataFrame(frame)[order].to_csv(path, index=False, float_format="%.17g",
                                      na_rep="", lineterminator="\n")
