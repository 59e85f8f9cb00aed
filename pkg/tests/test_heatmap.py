import json
import os
import sys
import tempfile
import unittest

import numpy as np
import pandas as pd

# Add the repo root to the path so we can import our modules
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.data.dataset import ColumnRole, ColumnSpec, Dataset, pair_view
from src.detection.detector import ScanConfig, evaluate_pair
from src.partition.partition_engine import PartitionConfig
from src.reporting.heatmap import build_heatmap, display_edges, emit_heatmap, heatmap_basename
from src.synthetic.generator import GROUP, TREND, generate, two_group_paradox_spec
from src.utils.errors import ConfigError


def evaluated(dataset, x_j, x_c, min_bin_size=50):
    config = ScanConfig(partition=PartitionConfig(min_bin_size=min_bin_size))
    return evaluate_pair(dataset, x_j, x_c, config), pair_view(dataset, x_j, x_c)


class TestDisplayEdges(unittest.TestCase):
    """x_j display binning"""

    def test_quantile_edges(self):
        edges = display_edges(np.arange(101.0), bins=4)
        np.testing.assert_allclose(edges, [0.0, 25.0, 50.0, 75.0, 100.0])

    def test_log_edges(self):
        edges = display_edges([1.0, 10.0, 100.0], bins=2, scale="log")
        np.testing.assert_allclose(edges, [1.0, 10.0, 100.0])

    def test_log_falls_back_for_non_positive_values(self):
        values = np.linspace(-1.0, 1.0, 21)
        with self.assertLogs("src.reporting.heatmap", level="WARNING"):
            edges = display_edges(values, bins=2, scale="log")
        np.testing.assert_allclose(edges, [-1.0, 0.0, 1.0])

    def test_repeated_values_collapse(self):
        self.assertEqual(list(display_edges(np.full(10, 3.0), bins=5)), [3.0])

    def test_invalid_arguments(self):
        with self.assertRaises(ConfigError):
            display_edges([1.0, 2.0], bins=0)
        with self.assertRaises(ConfigError):
            display_edges([1.0, 2.0], scale="linear")


class TestBuildHeatmap(unittest.TestCase):
    """Cell counts and means"""

    @classmethod
    def setUpClass(cls):
        cls.dataset, cls.truth = generate(two_group_paradox_spec(n_total=4000, seed=3, noise_count=0))
        cls.result, cls.view = evaluated(cls.dataset, TREND, GROUP)

    def test_counts_cover_every_row(self):
        grid = build_heatmap(self.result, self.view, bins=10)
        self.assertEqual(grid.shape, (self.result.n_bins, 10))
        self.assertEqual(int(grid.counts.sum()), self.view.n)
        for row, subgroup in enumerate(self.result.partition.bins):
            self.assertEqual(int(grid.counts[row].sum()), subgroup.count)
        self.assertEqual(len(grid.column_centers), 10)

    def test_row_means_follow_planted_groups(self):
        grid = build_heatmap(self.result, self.view, bins=10)
        y = self.view.y
        for row, subgroup in enumerate(self.result.partition.bins):
            weights = grid.counts[row]
            filled = weights > 0
            mean = np.sum(grid.means[row][filled] * weights[filled]) / weights.sum()
            self.assertAlmostEqual(mean, y[subgroup.members].mean(), delta=1e-12)
        low = [r for r, b in enumerate(self.result.partition.bins) if b.upper < 0.5]
        high = [r for r, b in enumerate(self.result.partition.bins) if b.upper > 0.5]
        self.assertTrue(low and high)
        self.assertLess(np.average([self.result.partition.bins[r].mean_y for r in low]), 0.5)
        self.assertGreater(np.average([self.result.partition.bins[r].mean_y for r in high]), 0.5)

    def test_empty_cells_are_nan(self):
        grid = build_heatmap(self.result, self.view, bins=20)
        empty = grid.counts == 0
        self.assertTrue(empty.any())
        self.assertTrue(np.isnan(grid.means[empty]).all())
        self.assertFalse(np.isnan(grid.means[~empty]).any())

    def test_single_x_j_value(self):
        y = np.tile([0, 1, 1, 0, 0], 40)
        x_c = np.repeat([0.0, 1.0], 100)
        y[:100] = 0
        y[100:160] = 1
        columns = [ColumnSpec("y", ColumnRole.OUTCOME), ColumnSpec("flat", ColumnRole.COVARIATE),
                   ColumnSpec("group", ColumnRole.COVARIATE)]
        dataset = Dataset(columns, y, {"flat": np.full(200, 2.0), "group": x_c})
        result, view = evaluated(dataset, "flat", "group", min_bin_size=10)
        grid = build_heatmap(result, view, bins=5)
        self.assertEqual(grid.shape, (2, 1))
        self.assertEqual(grid.column_centers, (2.0,))
        self.assertEqual(int(grid.counts.sum()), 200)


class TestEmitHeatmap(unittest.TestCase):
    """Heatmap files"""

    def test_basename(self):
        self.assertEqual(heatmap_basename(3, "age", "income"), "003_age__income")
        self.assertEqual(heatmap_basename(12, "a b", "c/d"), "012_a_b__c_d")

    def test_files_and_determinism(self):
        dataset, _ = generate(two_group_paradox_spec(n_total=3000, seed=8, noise_count=0))
        result, view = evaluated(dataset, TREND, GROUP)
        with tempfile.TemporaryDirectory() as tmp:
            first = os.path.join(tmp, "first")
            second = os.path.join(tmp, "second")
            grid = emit_heatmap(result, view, first, rank=1, bins=20)
            emit_heatmap(result, view, second, rank=1, bins=20)
            stem = heatmap_basename(1, TREND, GROUP)
            for suffix in ("_heatmap.csv", "_edges.json"):
                with open(os.path.join(first, stem + suffix), "rb") as f:
                    a = f.read()
                with open(os.path.join(second, stem + suffix), "rb") as f:
                    b = f.read()
                self.assertEqual(a, b)

            table = pd.read_csv(os.path.join(first, stem + "_heatmap.csv"))
            with open(os.path.join(first, stem + "_edges.json")) as f:
                edges = json.load(f)

        self.assertEqual(list(table.columns[:4]), ["block", "x_c_bin", "x_c_lower", "x_c_upper"])
        self.assertEqual(len(table), 2 * result.n_bins)
        counts = table[table["block"] == "count"].iloc[:, 4:].to_numpy()
        np.testing.assert_array_equal(counts, grid.counts)
        means = table[table["block"] == "mean"].iloc[:, 4:].to_numpy(dtype=float)
        np.testing.assert_array_equal(np.isnan(means), grid.counts == 0)
        self.assertEqual(edges["n"], view.n)
        self.assertEqual(edges["scale"], "quantile")
        self.assertEqual(len(edges["x_c_bins"]), result.n_bins)
        self.assertEqual(len(edges["x_j_centers"]), len(edges["x_j_edges"]) - 1)


if __name__ == '__main__':
    unittest.main()
