"""
Report Module for Simpson Scan
Serializes a scan report as JSON, CSV or a markdown table
"""

import io
import json
import math

import pandas as pd

from src.detection.detector import best_conditioning
from src.models.stats import wald_ci
from src.utils.errors import UsageError

SCHEMA_VERSION = 1
FORMATS = ("json", "csv", "markdown")

TABLE_COLUMNS = ["rank", "pseudo_r2", "covariate", "conditioned_on", "agg_sign",
                 "aggregate_p", "disagg_p", "n_bins", "simpson_flag"]


def _number(value):
    """JSON-safe float: non-finite values become null"""
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def _short(value):
    """Six significant digits for text tables"""
    if value is None or not math.isfinite(value):
        return ""
    return f"{value:.6g}"


def _fit_dict(fit):
    low, high = wald_ci(fit)
    return {
        "alpha": _number(fit.alpha),
        "beta": _number(fit.beta),
        "se_alpha": _number(fit.se_alpha),
        "se_beta": _number(fit.se_beta),
        "beta_ci95": [_number(low), _number(high)],
        "loglik": _number(fit.loglik),
        "n": fit.n,
        "iterations": fit.iterations,
        "status": fit.status.value,
    }


def _result_dict(rank, result):
    partition = result.partition
    subgroups = []
    for index, trend in enumerate(result.subgroup_trends):
        entry = _fit_dict(trend.fit)
        entry.update({
            "bin": index,
            "lower": _number(trend.bin.lower),
            "upper": _number(trend.bin.upper),
            "count": trend.bin.count,
            "mean_y": _number(trend.bin.mean_y),
            "beta_p": _number(trend.beta_p),
            "significant": trend.significant,
            "sign": trend.sign.value,
            "deviance": _number(trend.deviance),
        })
        subgroups.append(entry)
    aggregate = _fit_dict(result.aggregate_fit)
    aggregate.update({
        "p": _number(result.aggregate_p),
        "deviance": _number(result.aggregate_deviance),
        "sign": result.aggregate_sign.value,
    })
    return {
        "rank": rank,
        "x_j": result.x_j,
        "x_c": result.x_c,
        "n": result.n,
        "pseudo_r2": _number(result.pseudo_r2),
        "simpson_flag": result.simpson_flag,
        "aggregate": aggregate,
        "disagg_deviance": _number(result.disagg_deviance),
        "disagg_p": _number(result.disagg_p),
        "disagg_p_adjusted": _number(result.disagg_p_adjusted),
        "n_bins": result.n_bins,
        "partition": {
            "splits": [_number(s) for s in partition.splits],
            "r2": _number(partition.r2),
            "r2_path": [_number(v) for v in partition.r2_path],
            "sst": _number(partition.sst),
        },
        "subgroups": subgroups,
    }


def _summary(report):
    return {
        "pairs_examined": report.pairs_examined,
        "pairs_evaluated": report.pairs_evaluated,
        "pairs_skipped": report.pairs_skipped,
        "pairs_significant": report.pairs_significant,
        "reversals": sum(1 for r in report.results if r.simpson_flag),
    }


def report_rows(report, top_k=None):
    """
    Ranked results limited to top_k

    Args:
        report (ScanReport): Scan output
        top_k (int): Row limit; falls back to the report's configured top_k

    Returns:
        list: (rank, DisaggregationResult) tuples
    """
    if top_k is None:
        top_k = report.config.get("scan", {}).get("top_k")
    results = report.results if top_k is None else report.results[:top_k]
    return list(enumerate(results, start=1))


def _table(report, top_k):
    with_q = report.config.get("scan", {}).get("bh_correction", False)
    columns = TABLE_COLUMNS + (["disagg_q"] if with_q else [])
    rows = []
    for rank, result in report_rows(report, top_k):
        row = [str(rank), f"{result.pseudo_r2:.4f}", result.x_j, result.x_c,
               result.aggregate_sign.value, _short(result.aggregate_p),
               _short(result.disagg_p), str(result.n_bins),
               "true" if result.simpson_flag else "false"]
        if with_q:
            row.append(_short(result.disagg_p_adjusted))
        rows.append(row)
    return columns, rows


def _emit_json(report, top_k):
    document = {
        "schema_version": SCHEMA_VERSION,
        "dataset_fingerprint": report.fingerprint,
        "config": report.config,
        "summary": _summary(report),
        "results": [_result_dict(rank, r) for rank, r in report_rows(report, top_k)],
        "best_conditioning": {
            x_j: {"x_c": r.x_c, "pseudo_r2": _number(r.pseudo_r2)}
            for x_j, r in best_conditioning(report).items()
        },
        "skipped": [{"x_j": s.x_j, "x_c": s.x_c, "n": s.n, "reason": s.reason.value}
                    for s in report.skipped],
    }
    return json.dumps(document, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _emit_csv(report, top_k):
    columns, rows = _table(report, top_k)
    buffer = io.StringIO()
    pd.DataFrame(rows, columns=columns, dtype=str).to_csv(buffer, index=False,
                                                          lineterminator="\n")
    return buffer.getvalue()


def _emit_markdown(report, top_k):
    columns, rows = _table(report, top_k)
    lines = ["| " + " | ".join(columns) + " |",
             "|" + "|".join("---" for _ in columns) + "|"]
    lines += ["| " + " | ".join(row) + " |" for row in rows]
    summary = _summary(report)
    lines.append("")
    lines.append(f"Examined {summary['pairs_examined']} ordered pairs: "
                 f"{summary['pairs_evaluated']} evaluated, {summary['pairs_skipped']} skipped, "
                 f"{summary['pairs_significant']} significant, {summary['reversals']} reversals.")
    return "\n".join(lines) + "\n"


def emit_report(report, format="json", top_k=None):
    """
    Serialize a scan report

    Args:
        report (ScanReport): Sorted scan output
        format (str): "json", "csv" or "markdown"
        top_k (int): Row limit; defaults to the report's configured top_k

    Returns:
        bytes: UTF-8 encoded report; identical reports give identical bytes
    """
    emitters = {"json": _emit_json, "csv": _emit_csv, "markdown": _emit_markdown}
    if format not in emitters:
        raise UsageError(f"unknown report format '{format}', expected one of {FORMATS}")
    return emitters[format](report, top_k).encode("utf-8")
