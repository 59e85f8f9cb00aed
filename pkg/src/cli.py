"""
Command-Line Module for Simpson Scan
Parses arguments, merges configuration and runs the scan and synth commands
"""

import argparse
import copy
import logging
import os
import sys
from dataclasses import replace

from src.data.dataset import load_csv, pair_view
from src.detection.detector import ScanConfig, scan
from src.reporting.heatmap import SCALES, emit_heatmap
from src.reporting.report import FORMATS, emit_report, report_rows
from src.synthetic.generator import (
    generate, spec_from_dict, two_group_paradox_spec, write_csv
)
from src.utils.console import configure_logging, get_logger
from src.utils.errors import ConfigError, DisaggregationError, FileError, UsageError
from src.utils.save_load import ensure_directory, load_json, write_json, write_output

logger = get_logger(__name__)

# Initialize default configuration
DEFAULT_CONFIG = {
    "scan": {
        "alpha_level": 0.05,
        "require_reversal": False,
        "bh_correction": False,
        "reversal_denominator": "all",  # Options: all, significant
        "subgroup_test": "wald",  # Options: wald, deviance
        "top_k": None,
        "workers": 1,
        "progress": True
    },
    "partition": {
        "max_bins": 20,
        "min_bin_size": 100,
        "min_gain": 1e-12
    },
    "fit": {
        "max_iter": 100,
        "loglik_tol": 1e-10,
        "ridge": 1e-8,
        "prob_clamp": 1e-12
    },
    "report": {
        "format": "json"  # Options: json, csv, markdown
    },
    "heatmap": {
        "bins": 20,
        "scale": "quantile"  # Options: quantile, log
    }
}


def _merge(base, override):
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def load_config(config_path):
    """
    Load configuration from a JSON file and merge it over the defaults

    Args:
        config_path (str): Path to configuration file

    Returns:
        dict: Configuration dictionary
    """
    config = load_json(config_path, ConfigError)
    if not isinstance(config, dict):
        raise ConfigError(f"'{config_path}' must hold a JSON object")
    for section in sorted(set(config) - set(DEFAULT_CONFIG)):
        logger.warning(f"Ignoring unknown config section '{section}' in {config_path}")
        config.pop(section)
    for section, values in config.items():
        if not isinstance(values, dict):
            raise ConfigError(f"config section '{section}' must be an object")
    return _merge(DEFAULT_CONFIG, config)


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting"""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def _name_list(text):
    return [name.strip() for name in text.split(",") if name.strip()]


def _bounded_int(minimum):
    def parse(text):
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got '{text}'") from None
        if value < minimum:
            raise argparse.ArgumentTypeError(f"must be >= {minimum}, got {value}")
        return value
    return parse


def _probability(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got '{text}'") from None
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"must be in (0, 1), got {value}")
    return value


def build_parser():
    """Argument parser for the scan and synth commands"""
    logging_flags = _Parser(add_help=False)
    level = logging_flags.add_mutually_exclusive_group()
    level.add_argument("--verbose", action="store_true", help="Debug logging")
    level.add_argument("--quiet", action="store_true", help="Warnings and errors only")

    parser = _Parser(prog="simpson-scan",
                     description="Simpson Scan: find trend reversals by disaggregating tabular data")
    commands = parser.add_subparsers(dest="command", metavar="{scan,synth}")
    commands.required = True

    scan_parser = commands.add_parser("scan", parents=[logging_flags],
                                      help="Scan every covariate pair of a CSV file")
    scan_parser.add_argument("--input", required=True, help="CSV file with a header row")
    scan_parser.add_argument("--outcome", required=True, help="Binary outcome column")
    scan_parser.add_argument("--include", type=_name_list, help="Comma-separated covariates to keep")
    scan_parser.add_argument("--exclude", type=_name_list, help="Comma-separated covariates to drop")
    scan_parser.add_argument("--config", help="Path to configuration file")
    scan_parser.add_argument("--min-bin-size", type=_bounded_int(1), help="Smallest bin (default 100)")
    scan_parser.add_argument("--max-bins", type=_bounded_int(1), help="Most bins per partition (default 20)")
    scan_parser.add_argument("--alpha", type=_probability, help="Significance level (default 0.05)")
    scan_parser.add_argument("--require-reversal", action="store_true", default=None,
                             help="Report only flagged reversals")
    scan_parser.add_argument("--bh", action="store_true", default=None,
                             help="Benjamini-Hochberg adjust the disaggregation p-values")
    scan_parser.add_argument("--top-k", type=_bounded_int(0), help="Report at most N rows")
    scan_parser.add_argument("--format", choices=FORMATS, help="Report format (default json)")
    scan_parser.add_argument("--out", help="Report file (default standard output)")
    scan_parser.add_argument("--heatmap-dir", help="Directory for heatmap files")
    scan_parser.add_argument("--heatmap-bins", type=_bounded_int(1), help="x_j display bins (default 20)")
    scan_parser.add_argument("--heatmap-scale", choices=SCALES, help="x_j display binning")
    scan_parser.add_argument("--workers", type=_bounded_int(1), help="Threads for the pair scan")
    scan_parser.add_argument("--reversal-denominator", choices=("all", "significant"),
                             help="Subgroups counted by the majority rule")
    scan_parser.add_argument("--subgroup-test", choices=("wald", "deviance"),
                             help="Test for subgroup slopes")
    scan_parser.add_argument("--no-progress", action="store_true", help="Hide the progress bar")

    synth_parser = commands.add_parser("synth", parents=[logging_flags],
                                       help="Write a synthetic dataset with a planted paradox")
    synth_parser.add_argument("--spec", help="Generator spec JSON (default: two-group paradox)")
    synth_parser.add_argument("--out", required=True, help="Destination CSV")
    synth_parser.add_argument("--seed", type=int, help="Override the spec's seed")
    return parser


def apply_overrides(config, args):
    """
    Copy command-line flags over a configuration dict

    Args:
        config (dict): Merged configuration
        args (argparse.Namespace): Parsed scan arguments

    Returns:
        dict: New configuration with flags applied
    """
    config = copy.deepcopy(config)
    overrides = {
        ("scan", "alpha_level"): args.alpha,
        ("scan", "require_reversal"): args.require_reversal,
        ("scan", "bh_correction"): args.bh,
        ("scan", "top_k"): args.top_k,
        ("scan", "workers"): args.workers,
        ("scan", "reversal_denominator"): args.reversal_denominator,
        ("scan", "subgroup_test"): args.subgroup_test,
        ("partition", "min_bin_size"): args.min_bin_size,
        ("partition", "max_bins"): args.max_bins,
        ("report", "format"): args.format,
        ("heatmap", "bins"): args.heatmap_bins,
        ("heatmap", "scale"): args.heatmap_scale,
    }
    for (section, key), value in overrides.items():
        if value is not None:
            config[section][key] = value
    if args.no_progress:
        config["scan"]["progress"] = False
    return config


def _check_output_config(config):
    if config["report"].get("format") not in FORMATS:
        raise ConfigError(f"report.format must be one of {FORMATS}")
    if config["heatmap"].get("scale") not in SCALES:
        raise ConfigError(f"heatmap.scale must be one of {SCALES}")
    bins = config["heatmap"].get("bins")
    if not isinstance(bins, int) or isinstance(bins, bool) or bins < 1:
        raise ConfigError(f"heatmap.bins must be an integer >= 1, got {bins}")


def run_scan(args):
    """Execute the scan command"""
    config = load_config(args.config) if args.config else copy.deepcopy(DEFAULT_CONFIG)
    config = apply_overrides(config, args)
    _check_output_config(config)
    scan_config = ScanConfig.from_dict(config)

    dataset = load_csv(args.input, {"outcome": args.outcome, "include": args.include,
                                    "exclude": args.exclude})
    logger.debug(repr(dataset))
    report = scan(dataset, scan_config)

    write_output(emit_report(report, config["report"]["format"]), args.out)
    if args.out:
        logger.info(f"Report written to {args.out}")

    if args.heatmap_dir:
        for rank, result in report_rows(report):
            view = pair_view(dataset, result.x_j, result.x_c)
            emit_heatmap(result, view, args.heatmap_dir, rank,
                         config["heatmap"]["bins"], config["heatmap"]["scale"])
    return 0


def run_synth(args):
    """Execute the synth command"""
    if args.spec:
        spec = spec_from_dict(load_json(args.spec, FileError))
    else:
        spec = two_group_paradox_spec()
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)

    dataset, truth = generate(spec)
    parent = os.path.dirname(args.out)
    if parent:
        ensure_directory(parent)
    try:
        write_csv(dataset, args.out)
    except OSError as e:
        raise FileError(f"cannot write '{args.out}': {e.strerror}") from None
    ground_truth = truth.to_dict()
    ground_truth["seed"] = spec.seed
    write_json(ground_truth, args.out + ".truth.json")
    logger.info(f"Wrote {dataset.n_rows} rows to {args.out} "
                f"(reversal planted: {ground_truth['reversal_planted']})")
    return 0


def run_cli(argv=None):
    """
    Run the command line

    Args:
        argv (list): Arguments without the program name (defaults to sys.argv)

    Returns:
        int: 0 on success, 1 on usage errors, 2 on data errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"{e}\n")
        return e.exit_code
    except SystemExit as e:
        # --help
        return e.code or 0

    if args.verbose:
        configure_logging(logging.DEBUG)
    elif args.quiet:
        configure_logging(logging.WARNING)
    else:
        configure_logging(logging.INFO)

    try:
        if args.command == "scan":
            return run_scan(args)
        return run_synth(args)
    except DisaggregationError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception:
        logger.exception("Unexpected error")
        return 2


def main():
    """Entry point for the simpson-scan command"""
    sys.exit(run_cli())
