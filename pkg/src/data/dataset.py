"""
Dataset Module for Simpson Scan
Loads a CSV into an immutable columnar dataset and builds per-pair row views
"""

import enum
import hashlib
import os
from dataclasses import dataclass

import numpy as np
import pandas as pd

from src.utils.console import get_logger
from src.utils.errors import (
    FileError, ParseError, SameColumn, SchemaError, UnknownColumn
)

logger = get_logger(__name__)

# Literal outcome encodings accepted by the loader
_OUTCOME_VALUES = {"0": 0, "1": 1, "false": 0, "true": 1}


class ColumnRole(enum.Enum):
    """Role a column plays in the analysis"""
    OUTCOME = "outcome"
    COVARIATE = "covariate"
    IGNORED = "ignored"


@dataclass(frozen=True)
class ColumnSpec:
    """Name and role of one column"""
    name: str
    role: ColumnRole


def _frozen(values, dtype):
    array = np.array(values, dtype=dtype, copy=True)
    array.flags.writeable = False
    return array


class Dataset:
    """
    Immutable table with one binary outcome and numeric covariates.
    Missing covariate cells are stored as NaN.
    """

    def __init__(self, columns, outcome, covariates):
        """
        Initialize a dataset

        Args:
            columns (list): ColumnSpec for every column of the source, in order
            outcome (array-like): 0/1 outcome vector
            covariates (dict): Covariate name -> vector of floats (NaN = missing)
        """
        outcome_specs = [c for c in columns if c.role is ColumnRole.OUTCOME]
        if len(outcome_specs) != 1:
            raise SchemaError(f"expected exactly one outcome column, got {len(outcome_specs)}")
        names = [c.name for c in columns]
        if any(not name for name in names):
            raise SchemaError("column names must be non-empty")
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate column names in {names}")

        raw = np.asarray(outcome)
        if raw.ndim != 1 or len(raw) < 1:
            raise SchemaError("dataset needs at least one row")
        # check before the int8 cast, which would truncate 0.7 to 0
        if raw.dtype.kind not in "biuf" or not np.isin(raw, (0, 1)).all():
            raise ParseError("outcome values must be 0 or 1", column=outcome_specs[0].name)
        y = _frozen(raw, np.int8)

        covariate_names = [c.name for c in columns if c.role is ColumnRole.COVARIATE]
        if set(covariate_names) != set(covariates):
            raise SchemaError("covariate vectors do not match the covariate column specs")

        frozen = {}
        for name in covariate_names:
            vector = _frozen(covariates[name], np.float64)
            if vector.shape != y.shape:
                raise SchemaError(f"column '{name}' has {len(vector)} rows, expected {len(y)}")
            vector = vector.copy()
            vector[~np.isfinite(vector)] = np.nan
            vector.flags.writeable = False
            frozen[name] = vector

        self._columns = tuple(columns)
        self._outcome_name = outcome_specs[0].name
        self._y = y
        self._covariates = frozen
        self._fingerprint = None

    @property
    def columns(self):
        return self._columns

    @property
    def outcome_name(self):
        return self._outcome_name

    @property
    def n_rows(self):
        return len(self._y)

    @property
    def outcome(self):
        return self._y

    @property
    def covariate_names(self):
        return [c.name for c in self._columns if c.role is ColumnRole.COVARIATE]

    def covariate(self, name):
        """
        Get a covariate vector

        Args:
            name (str): Covariate column name

        Returns:
            ndarray: Read-only float vector, NaN where missing
        """
        try:
            return self._covariates[name]
        except KeyError:
            raise UnknownColumn(f"'{name}' is not a covariate column") from None

    def missing_count(self, name):
        """Number of missing cells in a covariate"""
        return int(np.isnan(self.covariate(name)).sum())

    def fingerprint(self):
        """
        Stable content hash of the parsed dataset (independent of file path)

        Returns:
            str: Hex sha256 digest
        """
        if self._fingerprint is None:
            digest = hashlib.sha256()
            for spec in self._columns:
                digest.update(f"{spec.role.value}:{spec.name}\n".encode("utf-8"))
            digest.update(self._y.astype("<i1").tobytes())
            for name in self.covariate_names:
                vector = self._covariates[name].astype("<f8")
                # canonical NaN so payload bits never leak into the hash
                vector = np.where(np.isnan(vector), np.nan, vector)
                digest.update(name.encode("utf-8"))
                digest.update(vector.tobytes())
            self._fingerprint = digest.hexdigest()
        return self._fingerprint

    def __repr__(self):
        return (f"Dataset(n_rows={self.n_rows}, outcome='{self._outcome_name}', "
                f"covariates={self.covariate_names})")


@dataclass(frozen=True)
class PairView:
    """Rows of one (x_j, x_c) pair with every missing value removed"""
    x_j_name: str
    x_c_name: str
    x_j: np.ndarray
    x_c: np.ndarray
    y: np.ndarray
    rows: np.ndarray

    @property
    def n(self):
        return len(self.y)


def _parse_outcome(raw, column):
    values = np.empty(len(raw), dtype=np.int8)
    for i, cell in enumerate(raw):
        key = "" if cell is None else str(cell).strip().lower()
        if key not in _OUTCOME_VALUES:
            row = i + 1
            raise ParseError(
                f"outcome column '{column}' has invalid value '{cell}' at row {row} "
                f"(line {row + 1}); expected 0/1 or true/false",
                row=row, column=column)
        values[i] = _OUTCOME_VALUES[key]
    return values


def _parse_covariate(raw):
    stripped = raw.fillna("").astype(str).str.strip()
    numeric = pd.to_numeric(stripped.where(stripped != ""), errors="coerce")
    return numeric.to_numpy(dtype=np.float64), stripped


def load_csv(path, schema_config):
    """
    Load and validate a CSV file

    Args:
        path (str): Path to a UTF-8 CSV file with a header row
        schema_config (dict): "outcome" (required), optional "include" and
            "exclude" lists of covariate names

    Returns:
        Dataset: Validated dataset
    """
    outcome_name = (schema_config or {}).get("outcome")
    if not outcome_name:
        raise SchemaError("schema config must name the outcome column")
    include = schema_config.get("include") or None
    exclude = set(schema_config.get("exclude") or [])

    if not os.path.isfile(path):
        raise FileError(f"cannot read '{path}': no such file")
    try:
        table = pd.read_csv(path, header=None, dtype=str, keep_default_na=False,
                            na_filter=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise FileError(f"'{path}' is empty") from None
    except pd.errors.ParserError as e:
        raise ParseError(f"malformed CSV '{path}': {e}") from None
    except (OSError, UnicodeDecodeError) as e:
        raise FileError(f"cannot read '{path}': {e}") from None

    header = [str(h).strip() for h in table.iloc[0].tolist()]
    body = table.iloc[1:].reset_index(drop=True)
    body.columns = range(len(header))
    if any(not name for name in header):
        raise SchemaError(f"'{path}' has an empty column name in its header")
    if header.count(outcome_name) == 0:
        raise SchemaError(f"outcome column '{outcome_name}' not found in {header}")
    if header.count(outcome_name) > 1:
        raise SchemaError(f"outcome column '{outcome_name}' appears more than once")
    duplicates = sorted({name for name in header if header.count(name) > 1})
    if duplicates:
        raise SchemaError(f"duplicate column names: {duplicates}")
    if len(body) < 1:
        raise ParseError(f"'{path}' has a header but no data rows")
    if include is not None:
        unknown = [name for name in include if name not in header]
        if unknown:
            raise SchemaError(f"included columns not in header: {unknown}")

    outcome = _parse_outcome(body[header.index(outcome_name)].tolist(), outcome_name)

    columns = []
    covariates = {}
    for index, name in enumerate(header):
        if name == outcome_name:
            columns.append(ColumnSpec(name, ColumnRole.OUTCOME))
            continue
        if name in exclude or (include is not None and name not in include):
            columns.append(ColumnSpec(name, ColumnRole.IGNORED))
            continue
        values, stripped = _parse_covariate(body[index])
        present = (stripped != "").to_numpy()
        parsed = np.isfinite(values)
        if present.any() and not parsed.any():
            logger.warning(f"Ignoring non-numeric covariate column '{name}'")
            columns.append(ColumnSpec(name, ColumnRole.IGNORED))
            continue
        bad = int((present & ~parsed).sum())
        if bad:
            logger.warning(f"Column '{name}': {bad} non-numeric cells treated as missing")
        columns.append(ColumnSpec(name, ColumnRole.COVARIATE))
        covariates[name] = values

    dataset = Dataset(columns, outcome, covariates)
    for name in covariates:
        count = dataset.missing_count(name)
        if count:
            logger.debug(f"Column '{name}': {count} missing cells")
    logger.info(f"Loaded {dataset.n_rows} rows, {len(covariates)} covariates from {path}")
    return dataset


def pair_view(dataset, x_j_name, x_c_name):
    """
    Build the listwise-complete row view for one pair of covariates

    Args:
        dataset (Dataset): Source dataset
        x_j_name (str): Trend covariate
        x_c_name (str): Conditioning covariate

    Returns:
        PairView: Rows where both covariates are present, in original order
    """
    if x_j_name == x_c_name:
        raise SameColumn(f"cannot pair '{x_j_name}' with itself")
    x_j = dataset.covariate(x_j_name)
    x_c = dataset.covariate(x_c_name)
    rows = np.flatnonzero(np.isfinite(x_j) & np.isfinite(x_c))
    return PairView(
        x_j_name=x_j_name,
        x_c_name=x_c_name,
        x_j=_frozen(x_j[rows], np.float64),
        x_c=_frozen(x_c[rows], np.float64),
        y=_frozen(dataset.outcome[rows], np.float64),
        rows=_frozen(rows, np.int64),
    )
