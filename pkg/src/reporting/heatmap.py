"""
Heatmap Module for Simpson Scan
Mean outcome per (x_c bin, x_j display bin) cell, written as figure data
"""

import io
import os
import re
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from src.utils.console import get_logger
from src.utils.errors import ConfigError, LengthMismatch
from src.utils.save_load import ensure_directory, write_json, write_output

logger = get_logger(__name__)

SCALES = ("quantile", "log")


@dataclass(frozen=True)
class HeatmapGrid:
    """
    Cell statistics for one disaggregation.

    Rows follow the partition bins of x_c; columns follow the display bins of
    x_j. Empty cells have count 0 and a NaN mean.
    """
    x_j: str
    x_c: str
    row_bounds: tuple
    column_edges: tuple
    scale: str
    means: np.ndarray = field(repr=False, compare=False)
    counts: np.ndarray = field(repr=False, compare=False)

    @property
    def shape(self):
        return self.counts.shape

    @property
    def column_centers(self):
        edges = self.column_edges
        if len(edges) == 1:
            return (edges[0],)
        return tuple((edges[i] + edges[i + 1]) / 2.0 for i in range(len(edges) - 1))


def display_edges(values, bins=20, scale="quantile"):
    """
    Column edges for the x_j axis

    Args:
        values (array-like): x_j values of the pair view
        bins (int): Requested number of display bins
        scale (str): "quantile" or "log"

    Returns:
        ndarray: Strictly increasing edges; a single edge when all values are equal
    """
    if int(bins) != bins or bins < 1:
        raise ConfigError(f"heatmap bins must be an integer >= 1, got {bins}")
    if scale not in SCALES:
        raise ConfigError(f"heatmap scale must be one of {SCALES}, got '{scale}'")
    values = np.asarray(values, dtype=np.float64)
    low, high = float(values.min()), float(values.max())
    if scale == "log":
        if low > 0:
            return np.unique(np.geomspace(low, high, int(bins) + 1))
        logger.warning("x_j has non-positive values; using quantile display bins")
    return np.unique(np.quantile(values, np.linspace(0.0, 1.0, int(bins) + 1)))


def build_heatmap(result, view, bins=20, scale="quantile"):
    """
    Tabulate outcome means over x_c bins and x_j display bins

    Args:
        result (DisaggregationResult): Evaluated pair
        view (PairView): The rows the result was computed on
        bins (int): Requested x_j display bins
        scale (str): "quantile" or "log"

    Returns:
        HeatmapGrid: Cell means and counts; counts sum to the view's n
    """
    partition = result.partition
    if partition.n != view.n:
        raise LengthMismatch(f"partition covers {partition.n} rows, pair view has {view.n}")

    edges = display_edges(view.x_j, bins, scale)
    n_columns = max(len(edges) - 1, 1)
    # right-closed display bins, matching the partition's membership rule
    columns = np.clip(np.searchsorted(edges[1:-1], view.x_j, side="left"), 0, n_columns - 1)

    counts = np.zeros((partition.n_bins, n_columns), dtype=np.int64)
    sums = np.zeros((partition.n_bins, n_columns))
    for row, subgroup in enumerate(partition.bins):
        members = subgroup.members
        counts[row] = np.bincount(columns[members], minlength=n_columns)
        sums[row] = np.bincount(columns[members], weights=view.y[members], minlength=n_columns)

    means = np.full(counts.shape, np.nan)
    filled = counts > 0
    means[filled] = sums[filled] / counts[filled]
    empty = int((~filled).sum())
    if empty:
        logger.debug(f"Heatmap ({result.x_j}, {result.x_c}): {empty} empty cells")

    means.flags.writeable = False
    counts.flags.writeable = False
    return HeatmapGrid(x_j=result.x_j, x_c=result.x_c,
                       row_bounds=tuple((b.lower, b.upper) for b in partition.bins),
                       column_edges=tuple(float(e) for e in edges), scale=scale,
                       means=means, counts=counts)


def _safe_name(name):
    return re.sub(r"[^A-Za-z0-9_.-]", "_", name) or "_"


def heatmap_basename(rank, x_j, x_c):
    """File stem for one result's heatmap files"""
    return f"{rank:03d}_{_safe_name(x_j)}__{_safe_name(x_c)}"


def _grid_csv(grid):
    header = ["block", "x_c_bin", "x_c_lower", "x_c_upper"]
    header += [f"x_j_bin_{k}" for k in range(grid.shape[1])]
    rows = []
    for block, matrix in (("mean", grid.means), ("count", grid.counts)):
        for index, (lower, upper) in enumerate(grid.row_bounds):
            row = [block, str(index), f"{lower:.6g}", f"{upper:.6g}"]
            for count, value in zip(grid.counts[index], matrix[index]):
                if block == "count":
                    row.append(str(int(value)))
                else:
                    row.append(f"{value:.6g}" if count > 0 else "")
            rows.append(row)
    buffer = io.StringIO()
    pd.DataFrame(rows, columns=header, dtype=str).to_csv(buffer, index=False,
                                                         lineterminator="\n")
    return buffer.getvalue()


def _edges_dict(grid, rank):
    return {
        "rank": rank,
        "x_j": grid.x_j,
        "x_c": grid.x_c,
        "scale": grid.scale,
        "n": int(grid.counts.sum()),
        "x_c_bins": [[float(lower), float(upper)] for lower, upper in grid.row_bounds],
        "x_j_edges": list(grid.column_edges),
        "x_j_centers": [float(c) for c in grid.column_centers],
    }


def emit_heatmap(result, view, directory, rank=1, bins=20, scale="quantile"):
    """
    Write a result's heatmap as CSV plus an edges sidecar

    Args:
        result (DisaggregationResult): Evaluated pair with at least two bins
        view (PairView): Rows the result was computed on
        directory (str): Output directory, created if missing
        rank (int): Position of the result in the report
        bins (int): Requested x_j display bins
        scale (str): "quantile" or "log"

    Returns:
        HeatmapGrid: The grid that was written
    """
    grid = build_heatmap(result, view, bins, scale)
    ensure_directory(directory)
    stem = os.path.join(directory, heatmap_basename(rank, result.x_j, result.x_c))
    write_output(_grid_csv(grid).encode("utf-8"), stem + "_heatmap.csv")
    write_json(_edges_dict(grid, rank), stem + "_edges.json")
    logger.info(f"Heatmap for ({result.x_j}, {result.x_c}) written to {stem}_heatmap.csv")
    return grid
