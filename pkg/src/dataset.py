"""Copula-scale datasets: ingestion, rank transform and clamping."""
# Standard library imports
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

# Third-party imports
import numpy as np
import pandas as pd

# Local imports
from constants import CLAMP_EPS, DEFAULT_INGEST_MODE, MACHINE_FLOAT_FORMAT
from src.errors import (
    ClampWarning,
    ConstantColumnError,
    DimensionMismatchError,
    NonNumericError,
    ParseError,
)

INGEST_MODES = ("already_uniform", "rank_transform")


@dataclass
class IngestOptions:
    mode: str = DEFAULT_INGEST_MODE
    clamp_eps: float = CLAMP_EPS
    index_col: Optional[str] = None

    def __post_init__(self):
        if self.mode not in INGEST_MODES:
            raise ValueError(f"ingest mode must be one of {INGEST_MODES}, got {self.mode!r}")


@dataclass
class CopulaDataset:
    """``n x d`` observations on the unit cube with column labels.

    ``index`` holds row labels (dates for a time series) when the source
    file had an index column, otherwise row numbers.
    """
    values: np.ndarray
    labels: List[str]
    index: Optional[pd.Index] = field(default=None)

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if self.values.size == 0:
            self.values = self.values.reshape(0, len(self.labels))
        if self.values.shape[1] != len(self.labels):
            raise DimensionMismatchError(
                f"{self.values.shape[1]} columns but {len(self.labels)} labels")
        if self.index is None:
            self.index = pd.RangeIndex(self.n)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]

    def rows(self, start, stop):
        return CopulaDataset(self.values[start:stop], list(self.labels), self.index[start:stop])

    def to_frame(self):
        return pd.DataFrame(self.values, columns=self.labels, index=self.index)

    def aligned_to(self, spec):
        """Columns rearranged to the variable order of ``spec``.

        Labels are matched by name when the dataset carries all of the spec's
        original labels, otherwise by the position recorded in
        ``spec.permutation``.
        """
        if self.d != spec.d:
            raise DimensionMismatchError(f"data has {self.d} columns, spec has dimension {spec.d}")
        if set(spec.labels) <= set(self.labels):
            order = [self.labels.index(name) for name in spec.labels]
        else:
            order = [j - 1 for j in spec.permutation]
        return CopulaDataset(self.values[:, order], [self.labels[j] for j in order], self.index)


def rank_transform(frame: pd.DataFrame):
    """Average ranks scaled by ``1 / (n + 1)``."""
    n = len(frame)
    for col in frame.columns:
        if frame[col].nunique() < 2:
            raise ConstantColumnError(f"column {col!r} is constant, ranks are undefined")
    return frame.rank(method="average") / (n + 1)


def clamp_frame(frame: pd.DataFrame, eps=CLAMP_EPS, source="data"):
    values = frame.to_numpy(dtype=float)
    outside = (values < 0.0) | (values > 1.0)
    if outside.any():
        row, col = np.argwhere(outside)[0]
        raise ParseError(
            f"value {values[row, col]} outside [0, 1] in {source}; use rank transform for raw data",
            line=int(row) + 2, column=int(col) + 1)
    clipped = np.clip(values, eps, 1.0 - eps)
    n_clamped = int(np.sum(clipped != values))
    if n_clamped:
        warnings.warn(f"{n_clamped} value(s) clamped to [{eps}, {1 - eps}] in {source}", ClampWarning)
    return pd.DataFrame(clipped, columns=frame.columns, index=frame.index)


def _numeric(frame: pd.DataFrame, source):
    converted = frame.apply(pd.to_numeric, errors="coerce")
    bad = converted.isna().to_numpy()
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise NonNumericError(
            f"non-numeric value {frame.iat[row, col]!r} in {source}",
            line=int(row) + 2, column=int(col) + 1)
    return converted.astype(float)


def ingest(path, opts: IngestOptions = None) -> CopulaDataset:
    """Read a delimited table with a header row into a :class:`CopulaDataset`."""
    opts = opts or IngestOptions()
    try:
        frame = pd.read_csv(path, sep=None, engine="python", dtype=str)
    except pd.errors.EmptyDataError:
        raise ParseError(f"{path} is empty")
    except pd.errors.ParserError as err:
        raise ParseError(f"cannot parse {path}: {err}")
    if opts.index_col is not None:
        if opts.index_col not in frame.columns:
            raise ParseError(f"index column {opts.index_col!r} not found in {path}")
        frame = frame.set_index(opts.index_col)
    frame.columns = [str(c).strip() for c in frame.columns]
    frame = _numeric(frame, source=str(path))
    if opts.mode == "rank_transform":
        frame = rank_transform(frame)
    frame = clamp_frame(frame, eps=opts.clamp_eps, source=str(path))
    return CopulaDataset(frame.to_numpy(), list(frame.columns), frame.index)


def write_dataset(data: CopulaDataset, path):
    data.to_frame().to_csv(path, index=False, float_format=MACHINE_FLOAT_FORMAT)
