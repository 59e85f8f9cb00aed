"""
Partition Engine Module for Simpson Scan
Greedy recursive binary splitting of a conditioning covariate so that the
bins explain as much of the outcome's variation as possible
"""

from dataclasses import dataclass, field

import numpy as np

from src.utils.console import get_logger
from src.utils.errors import ConfigError, EmptyInput, LengthMismatch, ZeroVariance

logger = get_logger(__name__)

# Gains closer than this are treated as equal (then the smaller split wins)
_TIE_TOLERANCE = 1e-13


@dataclass(frozen=True)
class PartitionConfig:
    """Search constraints for build_partition"""
    max_bins: int = 20
    min_bin_size: int = 100
    min_gain: float = 1e-12

    def __post_init__(self):
        if int(self.max_bins) != self.max_bins or self.max_bins < 1:
            raise ConfigError(f"max_bins must be an integer >= 1, got {self.max_bins}")
        if int(self.min_bin_size) != self.min_bin_size or self.min_bin_size < 1:
            raise ConfigError(f"min_bin_size must be an integer >= 1, got {self.min_bin_size}")
        if not self.min_gain >= 0:
            raise ConfigError(f"min_gain must be >= 0, got {self.min_gain}")


@dataclass(frozen=True)
class Bin:
    """
    One subgroup of a partition.

    lower is inclusive only for the first bin; upper is always inclusive.
    members are positions into the vectors the partition was built on.
    """
    lower: float
    upper: float
    count: int
    mean_y: float
    members: np.ndarray = field(repr=False, compare=False)


@dataclass(frozen=True)
class Partition:
    """Ordered binning of one covariate"""
    covariate: str
    splits: tuple
    bins: tuple
    sst: float
    r2: float
    r2_path: tuple = ()

    @property
    def n_bins(self):
        return len(self.bins)

    @property
    def n(self):
        return sum(b.count for b in self.bins)


def _as_vector(values, name):
    vector = np.asarray(values, dtype=np.float64)
    if vector.ndim != 1 or len(vector) == 0:
        raise EmptyInput(f"{name} must be a non-empty vector")
    return vector


def total_sum_of_squares(y):
    """
    Total sum of squares of the outcome

    Args:
        y (array-like): Outcome values

    Returns:
        float: sum((y - mean(y))^2), never negative
    """
    y = _as_vector(y, "y")
    return float(max(np.sum((y - y.mean()) ** 2), 0.0))


def sum_of_squares_decomposition(bins, y):
    """
    Split SST into its between-bin and within-bin parts

    Args:
        bins (sequence): Bins covering y
        y (array-like): Outcome vector the bins index into

    Returns:
        tuple: (between, within, sst)
    """
    y = _as_vector(y, "y")
    grand_mean = y.mean()
    between = 0.0
    within = 0.0
    for b in bins:
        values = y[b.members]
        between += b.count * (b.mean_y - grand_mean) ** 2
        within += float(np.sum((values - b.mean_y) ** 2))
    return between, within, total_sum_of_squares(y)


def partition_r2(bins, sst):
    """
    Fraction of SST explained by bin membership

    Args:
        bins (sequence): Bins covering the data
        sst (float): Total sum of squares of the same data

    Returns:
        float: Explained fraction, clamped to [0, 1]
    """
    if not sst > 0:
        raise ZeroVariance("outcome has zero total sum of squares; nothing to explain")
    counts = np.array([b.count for b in bins], dtype=np.float64)
    means = np.array([b.mean_y for b in bins], dtype=np.float64)
    grand_mean = np.sum(counts * means) / np.sum(counts)
    between = float(np.sum(counts * (means - grand_mean) ** 2))
    return float(min(max(between / sst, 0.0), 1.0))


def _scan_sorted(xs, ys, sst, min_bin_size):
    """
    Evaluate every feasible split of an x-sorted segment

    Returns:
        tuple: (left sizes, gains) of the feasible candidates, in ascending x order
    """
    m = len(xs)
    if m < 2 * min_bin_size:
        return np.empty(0, dtype=np.int64), np.empty(0)
    prefix = np.cumsum(ys)
    total = prefix[-1]
    k = np.arange(min_bin_size, m - min_bin_size + 1)
    k = k[xs[k - 1] < xs[k]]
    if len(k) == 0:
        return k, np.empty(0)
    left = prefix[k - 1]
    right = total - left
    gains = (left ** 2 / k + right ** 2 / (m - k) - total ** 2 / m) / sst
    return k, gains


def _midpoint(low, high):
    s = low + (high - low) / 2.0
    # keep membership unambiguous when the gap is one ulp
    return s if low <= s < high else low


def _best_in_segment(xs, ys, sst, config):
    k, gains = _scan_sorted(xs, ys, sst, config.min_bin_size)
    if len(k) == 0:
        return None
    best = gains.max()
    pick = int(np.flatnonzero(gains >= best - _TIE_TOLERANCE)[0])
    gain = float(max(gains[pick], 0.0))
    if gain <= config.min_gain:
        return None
    left_size = int(k[pick])
    return _midpoint(xs[left_size - 1], xs[left_size]), gain, left_size


def best_split(subgroup, x_c, y, sst, config):
    """
    Best single split of one bin

    Args:
        subgroup (Bin): Bin to split
        x_c (array-like): Conditioning covariate the bin indexes into
        y (array-like): Outcome the bin indexes into
        sst (float): Total sum of squares of the whole outcome
        config (PartitionConfig): Size and gain constraints

    Returns:
        tuple or None: (split_value, delta_r2), or None if no feasible split
            improves R^2 by more than min_gain
    """
    if not sst > 0:
        return None
    x_c = np.asarray(x_c, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    members = np.asarray(subgroup.members)
    order = np.argsort(x_c[members], kind="mergesort")
    sorted_rows = members[order]
    found = _best_in_segment(x_c[sorted_rows], y[sorted_rows], sst, config)
    if found is None:
        return None
    return found[0], found[1]


def _make_bin(rows, y, lower, upper):
    members = np.sort(rows)
    members.flags.writeable = False
    return Bin(lower=float(lower), upper=float(upper), count=len(members),
               mean_y=float(np.mean(y[members])), members=members)


def build_partition(x_c, y, config=None, covariate=""):
    """
    Greedy partition of x_c maximizing explained outcome variance

    Args:
        x_c (array-like): Conditioning covariate
        y (array-like): Outcome (0/1)
        config (PartitionConfig): Constraints; defaults apply when None
        covariate (str): Name recorded on the partition

    Returns:
        Partition: Bins in ascending x_c order
    """
    config = config or PartitionConfig()
    x_c = _as_vector(x_c, "x_c")
    y = _as_vector(y, "y")
    if len(x_c) != len(y):
        raise LengthMismatch(f"x_c has {len(x_c)} values, y has {len(y)}")

    order = np.argsort(x_c, kind="mergesort")
    xs = x_c[order]
    ys = y[order]
    sst = total_sum_of_squares(y)

    # segments are [start, end) ranges of the sorted order
    segments = [(0, len(xs))]
    splits = []
    r2_path = [0.0]
    cache = {}

    if sst > 0:
        while len(segments) < config.max_bins:
            best = None
            for index, (start, end) in enumerate(segments):
                if (start, end) not in cache:
                    cache[(start, end)] = _best_in_segment(xs[start:end], ys[start:end], sst, config)
                candidate = cache[(start, end)]
                if candidate is None:
                    continue
                split_value, gain, _ = candidate
                if (best is None or gain > best[1] + _TIE_TOLERANCE
                        or (gain >= best[1] - _TIE_TOLERANCE and split_value < best[0])):
                    best = (split_value, gain, index)
            if best is None:
                break
            split_value, gain, index = best
            start, end = segments[index]
            left_size = cache.pop((start, end))[2]
            segments[index:index + 1] = [(start, start + left_size), (start + left_size, end)]
            splits.insert(index, split_value)
            r2_path.append(min(r2_path[-1] + gain, 1.0))
            logger.debug(f"split {covariate or 'x_c'} at {split_value:.6g}, gain {gain:.3g}")

    bins = []
    for index, (start, end) in enumerate(segments):
        lower = splits[index - 1] if index > 0 else xs[start]
        upper = splits[index] if index < len(splits) else xs[end - 1]
        bins.append(_make_bin(order[start:end], y, lower, upper))

    r2 = partition_r2(bins, sst) if sst > 0 else 0.0
    return Partition(covariate=covariate, splits=tuple(float(s) for s in splits),
                     bins=tuple(bins), sst=sst, r2=r2, r2_path=tuple(r2_path))


def assign_bins(partition, values):
    """
    Bin index of each value under the partition's membership rule

    Args:
        partition (Partition): Partition to apply
        values (array-like): Values of the conditioning covariate

    Returns:
        ndarray: Integer bin index per value (bin k holds s_{k-1} < x <= s_k)
    """
    values = np.asarray(values, dtype=np.float64)
    return np.searchsorted(np.asarray(partition.splits, dtype=np.float64), values, side="left")
