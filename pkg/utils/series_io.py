"""Reading return series and producing plot-ready diagnostic data.

Returns are log returns in percent (100 * ln(P_t / P_t-1)). Nothing here
imputes: a missing or non-numeric cell is an error.
"""
from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import stats
from scipy.special import ndtri

from Domain.RiskDomain import FilterOutput, ReturnSeries, SummaryStats
from Enums import SeriesFormat
from Exceptions import DegenerateSampleError, InputDataError, PreconditionError

DATE_COLUMN_CANDIDATES = ('date', 'datum', 'time', 'timestamp')


def returns_from_prices(prices) -> np.ndarray:
    prices = np.asarray(prices, dtype=float)
    if np.any(~np.isfinite(prices)):
        raise InputDataError("non-finite price")
    if np.any(prices <= 0.0):
        bad = int(np.flatnonzero(prices <= 0.0)[0])
        raise InputDataError(f"non-positive price {prices[bad]} at row {bad}")
    return 100.0 * np.diff(np.log(prices))


def prices_from_returns(returns, p0: float) -> np.ndarray:
    """Compound percent log returns back into prices, starting at p0."""
    returns = np.asarray(returns, dtype=float)
    return p0 * np.exp(np.concatenate(([0.0], np.cumsum(returns / 100.0))))


def _resolve_column(frame: pd.DataFrame, column: str | int | None, exclude: str | None) -> str:
    if column is None:
        candidates = [c for c in frame.columns if c != exclude]
        if not candidates:
            raise InputDataError("no value column found")
        return candidates[-1]
    if isinstance(column, int) or (isinstance(column, str) and column.isdigit() and column not in frame.columns):
        index = int(column)
        if not 0 <= index < len(frame.columns):
            raise InputDataError(f"column index {index} out of range ({len(frame.columns)} columns)")
        return frame.columns[index]
    if column not in frame.columns:
        raise InputDataError(f"column '{column}' not found; available: {list(frame.columns)}")
    return column


def _resolve_date_column(frame: pd.DataFrame, date_column: str | None) -> str | None:
    if date_column is not None:
        if date_column not in frame.columns:
            raise InputDataError(f"date column '{date_column}' not found")
        return date_column
    for c in frame.columns:
        if str(c).strip().lower() in DATE_COLUMN_CANDIDATES:
            return c
    return None


def load_series(path: Path | str, series_format: SeriesFormat = SeriesFormat.PRICE, column: str | int | None = None,
                date_column: str | None = None, delimiter: str = ',', name: str | None = None) -> ReturnSeries:
    """Read a delimited file with a header row into a ReturnSeries.

    With `series_format=price` the column holds prices and is turned into percent log
    returns; with `return` the values pass through unchanged.
    """
    path = Path(path)
    if not path.exists():
        raise InputDataError(f"input file not found: {path}")
    try:
        frame = pd.read_csv(path, sep=delimiter, dtype=str, keep_default_na=False, skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise InputDataError(f"cannot parse {path}: {e}") from e

    date_col = _resolve_date_column(frame, date_column)
    value_col = _resolve_column(frame, column, exclude=date_col)

    raw = frame[value_col].str.strip()
    numbers = pd.to_numeric(raw, errors='coerce')
    if numbers.isna().any():
        row = int(np.flatnonzero(numbers.isna().to_numpy())[0])
        raise InputDataError(f"non-numeric cell '{raw.iloc[row]}' in column '{value_col}' at data row {row + 1}")
    if len(numbers) < 2:
        raise InputDataError(f"{path} holds {len(numbers)} data row(s); at least 2 are required")

    values = numbers.to_numpy(dtype=float)
    if date_col is not None:
        labels = [str(v).strip() for v in frame[date_col]]
    else:
        labels = [str(i) for i in range(1, len(values) + 1)]

    series_format = SeriesFormat(series_format)
    if series_format == SeriesFormat.PRICE:
        values = returns_from_prices(values)
        labels = labels[1:]

    series = ReturnSeries(labels=tuple(labels), values=values, name=name or path.stem)
    logging.info("Loaded %d returns from %s (column '%s', %s format)", len(series), path, value_col,
                 series_format.value)
    return series


def write_series(series: ReturnSeries, path: Path | str, delimiter: str = ',') -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame({'date': list(series.labels), 'return': series.values})
    frame.to_csv(path, sep=delimiter, index=False, float_format='%.10f')
    return path


def summary_stats(series: ReturnSeries) -> SummaryStats:
    """Population (1/n) moments; kurtosis is the plain fourth-moment ratio (3 for a normal)."""
    x = series.values
    if x.size < 4:
        raise PreconditionError(f"summary statistics need at least 4 observations, got {x.size}")
    sd = float(np.std(x))
    if sd == 0.0:
        raise DegenerateSampleError("constant series: skewness and kurtosis undefined")
    return SummaryStats(
        n=int(x.size),
        mean=float(np.mean(x)),
        sd=sd,
        skewness=float(stats.skew(x, bias=True)),
        kurtosis=float(stats.kurtosis(x, fisher=False, bias=True)),
    )


def qq_data(z) -> tuple[np.ndarray, np.ndarray]:
    """(theoretical Gaussian quantile, empirical quantile) pairs, plotting position (i - 0.5)/n."""
    z = np.asarray(z, dtype=float)
    n = z.size
    if n < 2:
        raise PreconditionError("QQ data needs at least 2 observations")
    theoretical = ndtri((np.arange(1, n + 1) - 0.5) / n)
    return theoretical, np.sort(z)


def series_table(series: ReturnSeries, filter_output: FilterOutput | None = None) -> list[dict[str, object]]:
    """Rows for the time-series panel: label, return and (optionally) mu, sigma, z."""
    rows = []
    for i, (label, value) in enumerate(zip(series.labels, series.values)):
        row: dict[str, object] = {'date': label, 'return': float(value)}
        if filter_output is not None:
            row['mu'] = float(filter_output.mu[i])
            row['sigma'] = float(filter_output.sigma[i])
            row['z'] = float(filter_output.z[i])
        rows.append(row)
    return rows
