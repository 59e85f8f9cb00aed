"""
Detection Package Initialization
Pair scanning, trend tests, reversal flags and pseudo-R^2 ranking
"""

from src.detection.detector import (
    DisaggregationResult, PartitionCache, ScanConfig, ScanReport, Sign, SkipReason,
    SkippedPair, SubgroupTrend, aggregate_trend, best_conditioning, detect_reversal,
    disaggregated_trends, evaluate_pair, pseudo_r2, scan
)
