"""
Reporting Package Initialization
Report serialization and heatmap figure data
"""

from src.reporting.heatmap import (
    HeatmapGrid, build_heatmap, display_edges, emit_heatmap, heatmap_basename
)
from src.reporting.report import FORMATS, SCHEMA_VERSION, emit_report, report_rows
