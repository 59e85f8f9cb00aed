import os
import sys
import unittest

import numpy as np
from hypothesis import given, settings
import hypothesis.strategies as st

# Add the repo root to the path so we can import our modules
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.partition.partition_engine import (
    Bin, PartitionConfig, assign_bins, best_split, build_partition, partition_r2,
    sum_of_squares_decomposition, total_sum_of_squares
)
from src.utils.errors import ConfigError, LengthMismatch, ZeroVariance


def make_bin(members, x, y):
    members = np.asarray(members)
    return Bin(lower=float(np.min(x[members])), upper=float(np.max(x[members])),
               count=len(members), mean_y=float(np.mean(y[members])), members=members)


def brute_force_first_split(x, y, min_bin_size):
    """Every midpoint candidate scored by a direct two-bin R^2"""
    sst = float(np.sum((y - y.mean()) ** 2))
    values = np.unique(x)
    best = None
    for low, high in zip(values[:-1], values[1:]):
        s = low + (high - low) / 2.0
        left = y[x <= s]
        right = y[x > s]
        if len(left) < min_bin_size or len(right) < min_bin_size:
            continue
        between = (len(left) * (left.mean() - y.mean()) ** 2
                   + len(right) * (right.mean() - y.mean()) ** 2)
        gain = between / sst
        if best is None or gain > best[1] + 1e-13:
            best = (s, gain)
    return best


class TestSumsOfSquares(unittest.TestCase):
    """Total sum of squares and the partition R^2"""

    def test_total_sum_of_squares_examples(self):
        self.assertEqual(total_sum_of_squares([1, 1, 1]), 0.0)
        self.assertAlmostEqual(total_sum_of_squares([0, 1]), 0.5, places=12)
        self.assertAlmostEqual(total_sum_of_squares([0, 0, 1, 1, 1]), 1.2, places=12)

    def test_single_bin_explains_nothing(self):
        x = np.array([0.0, 1.0, 2.0, 3.0])
        y = np.array([0.0, 1.0, 1.0, 0.0])
        self.assertEqual(partition_r2([make_bin(range(4), x, y)], total_sum_of_squares(y)), 0.0)

    def test_perfect_separation(self):
        x = np.array([0.0, 0.0, 1.0, 1.0])
        y = np.array([0.0, 0.0, 1.0, 1.0])
        bins = [make_bin([0, 1], x, y), make_bin([2, 3], x, y)]
        self.assertAlmostEqual(partition_r2(bins, total_sum_of_squares(y)), 1.0, places=12)

    def test_equal_bin_means(self):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        y = np.array([0.0, 1.0, 0.0, 1.0])
        bins = [make_bin([0, 1], x, y), make_bin([2, 3], x, y)]
        self.assertAlmostEqual(partition_r2(bins, total_sum_of_squares(y)), 0.0, places=12)

    def test_zero_variance_rejected(self):
        x = np.array([1.0, 2.0])
        y = np.array([1.0, 1.0])
        with self.assertRaises(ZeroVariance):
            partition_r2([make_bin([0, 1], x, y)], 0.0)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(min_value=10, max_value=2000), st.integers(min_value=0, max_value=2**32 - 1),
           st.integers(min_value=1, max_value=20), st.integers(min_value=1, max_value=40))
    def test_sst_identity(self, n, seed, max_bins, min_bin_size):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=n).round(rng.integers(0, 3))
        y = (rng.random(n) < rng.random()).astype(float)
        partition = build_partition(x, y, PartitionConfig(max_bins=max_bins,
                                                          min_bin_size=min_bin_size))
        between, within, sst = sum_of_squares_decomposition(partition.bins, y)
        self.assertLessEqual(abs(between + within - sst), 1e-9 * max(sst, 1.0))


class TestBestSplit(unittest.TestCase):
    """Single-split search inside one bin"""

    def test_two_by_two_example(self):
        x = np.array([0.0, 0.0, 1.0, 1.0])
        y = np.array([0.0, 0.0, 1.0, 1.0])
        split = best_split(make_bin(range(4), x, y), x, y, total_sum_of_squares(y),
                           PartitionConfig(min_bin_size=1))
        self.assertEqual(split[0], 0.5)
        self.assertAlmostEqual(split[1], 1.0, places=12)

    def test_constant_outcome_in_bin(self):
        x = np.arange(10.0)
        y = np.ones(10)
        self.assertIsNone(best_split(make_bin(range(10), x, y), x, y, 1.0,
                                     PartitionConfig(min_bin_size=1)))

    def test_bin_too_small_for_two_sides(self):
        x = np.arange(5.0)
        y = np.array([0.0, 1.0, 0.0, 1.0, 1.0])
        self.assertIsNone(best_split(make_bin(range(5), x, y), x, y, total_sum_of_squares(y),
                                     PartitionConfig(min_bin_size=3)))

    def test_matches_exhaustive_search(self):
        rng = np.random.default_rng(20240501)
        for _ in range(200):
            n = int(rng.integers(2, 501))
            x = rng.normal(size=n).round(int(rng.integers(0, 3)))
            y = (rng.random(n) < rng.random()).astype(float)
            min_bin_size = int(rng.integers(1, 6))
            if y.min() == y.max():
                continue
            expected = brute_force_first_split(x, y, min_bin_size)
            partition = build_partition(x, y, PartitionConfig(max_bins=2,
                                                              min_bin_size=min_bin_size))
            if expected is None or expected[1] <= 1e-12:
                self.assertEqual(partition.splits, ())
                continue
            self.assertEqual(partition.splits, (expected[0],))
            self.assertAlmostEqual(partition.r2_path[1], expected[1], delta=1e-12)


class TestBuildPartition(unittest.TestCase):
    """Greedy recursive partitioning"""

    def test_constant_outcome_gives_one_bin(self):
        partition = build_partition(np.arange(50.0), np.zeros(50), PartitionConfig(min_bin_size=1))
        self.assertEqual(partition.n_bins, 1)
        self.assertEqual(partition.r2, 0.0)
        self.assertEqual(partition.splits, ())

    def test_recovers_step_function(self):
        rng = np.random.default_rng(7)
        x = rng.uniform(0.0, 3.0, 300)
        y = (np.floor(x) == 1).astype(float)
        partition = build_partition(x, y, PartitionConfig(max_bins=3, min_bin_size=5))
        self.assertEqual(partition.n_bins, 3)
        self.assertAlmostEqual(partition.r2, 1.0, places=12)
        for split, step in zip(partition.splits, (1.0, 2.0)):
            self.assertGreater(split, x[x < step].max())
            self.assertLess(split, x[x >= step].min())

    def test_max_bins_two_gives_at_most_one_split(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=400)
        y = (rng.random(400) < 1 / (1 + np.exp(-3 * x))).astype(float)
        partition = build_partition(x, y, PartitionConfig(max_bins=2, min_bin_size=10))
        self.assertLessEqual(len(partition.splits), 1)

    def test_constraints_and_membership(self):
        rng = np.random.default_rng(11)
        x = rng.exponential(size=3000).round(2)
        y = (rng.random(3000) < np.clip(x / 4.0, 0.05, 0.95)).astype(float)
        config = PartitionConfig(max_bins=8, min_bin_size=100)
        partition = build_partition(x, y, config)
        self.assertLessEqual(partition.n_bins, 8)
        self.assertEqual(partition.n, 3000)
        self.assertEqual(list(partition.splits), sorted(partition.splits))
        labels = assign_bins(partition, x)
        for index, subgroup in enumerate(partition.bins):
            self.assertGreaterEqual(subgroup.count, 100)
            np.testing.assert_array_equal(labels[subgroup.members], index)
        self.assertEqual(sorted(np.concatenate([b.members for b in partition.bins])),
                         list(range(3000)))

    def test_r2_path_is_monotone(self):
        rng = np.random.default_rng(5)
        x = rng.uniform(0, 10, 2000)
        y = (rng.random(2000) < np.abs(np.sin(x))).astype(float)
        partition = build_partition(x, y, PartitionConfig(min_bin_size=50))
        self.assertEqual(partition.r2_path[0], 0.0)
        self.assertTrue(all(a <= b for a, b in zip(partition.r2_path, partition.r2_path[1:])))
        self.assertAlmostEqual(partition.r2_path[-1], partition.r2, delta=1e-9)
        self.assertEqual(len(partition.r2_path), partition.n_bins)

    def test_affine_invariance(self):
        rng = np.random.default_rng(13)
        x = rng.normal(size=1500)
        y = (rng.random(1500) < 1 / (1 + np.exp(-2 * x))).astype(float)
        config = PartitionConfig(min_bin_size=60)
        original = build_partition(x, y, config)
        moved = build_partition(2.5 * x + 7.0, y, config)
        self.assertEqual(original.n_bins, moved.n_bins)
        self.assertEqual(original.r2, moved.r2)
        for first, second in zip(original.bins, moved.bins):
            np.testing.assert_array_equal(first.members, second.members)

    def test_length_mismatch(self):
        with self.assertRaises(LengthMismatch):
            build_partition([1.0, 2.0], [0.0])

    def test_config_validation(self):
        with self.assertRaises(ConfigError):
            PartitionConfig(max_bins=0)
        with self.assertRaises(ConfigError):
            PartitionConfig(min_bin_size=0)


if __name__ == '__main__':
    unittest.main()
