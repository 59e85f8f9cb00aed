"""
Partition Package Initialization
Variance-minimizing binning of a conditioning covariate
"""

from src.partition.partition_engine import (
    Bin, Partition, PartitionConfig, assign_bins, best_split, build_partition,
    partition_r2, sum_of_squares_decomposition, total_sum_of_squares
)
