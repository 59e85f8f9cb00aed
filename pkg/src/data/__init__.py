"""
Data Package Initialization
CSV loading and the immutable dataset model
"""

from src.data.dataset import ColumnRole, ColumnSpec, Dataset, PairView, load_csv, pair_view
