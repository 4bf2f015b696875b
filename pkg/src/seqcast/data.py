"""OHLCV ingestion, cleaning, exploratory statistics, scaling, windowing.

The pipeline is: parse a daily OHLCV CSV, clean it (drop rows with a
missing close, impute missing open/high/low from the previous retained
close, reject rows whose prices violate the low/high envelope), compute
monthwise statistics and unit-root diagnostics, then scale closes to
[0, 1] with training-set extremes only and cut them into lookback windows.
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, fields
from datetime import date, datetime, timedelta
from pathlib import Path

import numpy as np

from .numerics import make_rng

_DATE_FORMATS = ("%Y/%m/%d", "%Y-%m-%d")
_MISSING_TOKENS = {"", "nan", "na", "n/a", "null", "none"}
_PRICE_COLUMNS = ("open", "high", "low", "close")


@dataclass(frozen=True)
class OhlcvSeries:
    """Dated open/high/low/close/volume rows, sorted by strictly increasing date.

    Values may contain NaN until :func:`clean` has run; the low/high price
    envelope is only guaranteed for cleaned series.
    """

    dates: tuple[date, ...]
    open: np.ndarray
    high: np.ndarray
    low: np.ndarray
    close: np.ndarray
    volume: np.ndarray

    def __post_init__(self):
        n = len(self.dates)
        for name in ("open", "high", "low", "close", "volume"):
            col = getattr(self, name)
            if col.shape != (n,):
                raise ValueError(f"column {name} has {col.shape[0]} values for {n} dates")
        for a, b in zip(self.dates, self.dates[1:]):
            if a >= b:
                raise ValueError(f"dates must be strictly increasing, got {a} before {b}")

    def __len__(self) -> int:
        return len(self.dates)

    def row(self, i: int) -> dict:
        return {
            "date": self.dates[i],
            "open": float(self.open[i]),
            "high": float(self.high[i]),
            "low": float(self.low[i]),
            "close": float(self.close[i]),
            "volume": float(self.volume[i]),
        }

    def slice(self, start: int, stop: int) -> "OhlcvSeries":
        return OhlcvSeries(
            dates=self.dates[start:stop],
            open=self.open[start:stop].copy(),
            high=self.high[start:stop].copy(),
            low=self.low[start:stop].copy(),
            close=self.close[start:stop].copy(),
            volume=self.volume[start:stop].copy(),
        )


def _series_from_rows(rows: list[dict]) -> OhlcvSeries:
    return OhlcvSeries(
        dates=tuple(r["date"] for r in rows),
        open=np.array([r["open"] for r in rows], dtype=np.float64),
        high=np.array([r["high"] for r in rows], dtype=np.float64),
        low=np.array([r["low"] for r in rows], dtype=np.float64),
        close=np.array([r["close"] for r in rows], dtype=np.float64),
        volume=np.array([r["volume"] for r in rows], dtype=np.float64),
    )


def _parse_date(text: str) -> date:
    for fmt in _DATE_FORMATS:
        try:
            return datetime.strptime(text, fmt).date()
        except ValueError:
            continue
    raise ValueError(f"unrecognized date {text!r} (expected YYYY/M/D or YYYY-MM-DD)")


def _parse_cell(text: str) -> float:
    if text.strip().lower() in _MISSING_TOKENS:
        return math.nan
    return float(text)


def parse_csv(path) -> OhlcvSeries:
    """Load an OHLCV CSV.

    The header must contain Date, Open, High, Low, Close, Volume in any
    order, case-insensitively; extra columns (such as an unnamed leading
    index) are ignored. Rows are returned sorted by date. Errors carry the
    1-based line number of the offending row.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        wanted = {"date", "open", "high", "low", "close", "volume"}
        col_idx: dict[str, int] = {}
        for i, name in enumerate(header):
            key = name.strip().lower()
            if key in wanted and key not in col_idx:
                col_idx[key] = i
        missing = wanted - set(col_idx)
        if missing:
            raise ValueError(f"{path}: header lacks columns {sorted(missing)}")

        rows: list[dict] = []
        for lineno, raw in enumerate(reader, start=2):
            if not raw or all(not cell.strip() for cell in raw):
                continue
            try:
                rows.append(
                    {
                        "date": _parse_date(raw[col_idx["date"]].strip()),
                        "open": _parse_cell(raw[col_idx["open"]]),
                        "high": _parse_cell(raw[col_idx["high"]]),
                        "low": _parse_cell(raw[col_idx["low"]]),
                        "close": _parse_cell(raw[col_idx["close"]]),
                        "volume": _parse_cell(raw[col_idx["volume"]]),
                    }
                )
            except (ValueError, IndexError) as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None

    if not rows:
        raise ValueError(f"{path}: no data rows")
    rows.sort(key=lambda r: r["date"])
    for a, b in zip(rows, rows[1:]):
        if a["date"] == b["date"]:
            raise ValueError(f"{path}: duplicate date {a['date']}")
    return _series_from_rows(rows)


@dataclass
class CleanReport:
    """Counts of every action :func:`clean` took."""

    dropped_missing_close: int = 0
    dropped_envelope: int = 0
    dropped_unimputable: int = 0
    imputed_open: int = 0
    imputed_high: int = 0
    imputed_low: int = 0
    imputed_volume: int = 0

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @property
    def total_dropped(self) -> int:
        return self.dropped_missing_close + self.dropped_envelope + self.dropped_unimputable

    @property
    def all_zero(self) -> bool:
        return all(v == 0 for v in self.as_dict().values())


def clean(series: OhlcvSeries) -> tuple[OhlcvSeries, CleanReport]:
    """Drop or repair defective rows.

    Rows with a missing close are dropped (imputing the modeling target
    would contaminate evaluation). Missing open/high/low are imputed from
    the previous retained row's close; a row needing imputation with no
    retained predecessor is dropped. Missing volume is imputed as 0. Rows
    whose prices break low <= min(open, close) <= max(open, close) <= high,
    or are not strictly positive, are dropped.
    """
    report = CleanReport()
    kept: list[dict] = []
    prev_close: float | None = None
    for i in range(len(series)):
        row = series.row(i)
        if math.isnan(row["close"]):
            report.dropped_missing_close += 1
            continue
        needs = [c for c in ("open", "high", "low") if math.isnan(row[c])]
        if needs and prev_close is None:
            report.dropped_unimputable += 1
            continue
        for c in needs:
            row[c] = prev_close
            setattr(report, f"imputed_{c}", getattr(report, f"imputed_{c}") + 1)
        if math.isnan(row["volume"]):
            row["volume"] = 0.0
            report.imputed_volume += 1
        lo, hi = min(row["open"], row["close"]), max(row["open"], row["close"])
        if not (row["low"] <= lo <= hi <= row["high"]) or row["low"] <= 0 or row["volume"] < 0:
            report.dropped_envelope += 1
            continue
        kept.append(row)
        prev_close = row["close"]
    if not kept:
        raise ValueError("clean dropped every row")
    return _series_from_rows(kept), report


def monthwise_means(series: OhlcvSeries) -> dict[int, tuple[float, float]]:
    """Per calendar month across years: month -> (mean open, mean close).

    Months with no rows are absent from the result.
    """
    if len(series) == 0:
        raise ValueError("monthwise_means needs a non-empty series")
    sums: dict[int, list[float]] = {}
    for i, d in enumerate(series.dates):
        acc = sums.setdefault(d.month, [0.0, 0.0, 0])
        acc[0] += series.open[i]
        acc[1] += series.close[i]
        acc[2] += 1
    return {m: (acc[0] / acc[2], acc[1] / acc[2]) for m, acc in sorted(sums.items())}


def monthly_mean_series(series: OhlcvSeries, column: str = "high") -> np.ndarray:
    """Chronological per-(year, month) means of one value column.

    This is the monthly aggregation the unit-root diagnostics run on.
    """
    if column not in ("open", "high", "low", "close", "volume"):
        raise ValueError(f"unknown column {column!r}")
    values = getattr(series, column)
    keyed: dict[tuple[int, int], list[float]] = {}
    for i, d in enumerate(series.dates):
        acc = keyed.setdefault((d.year, d.month), [0.0, 0])
        acc[0] += values[i]
        acc[1] += 1
    means = [keyed[k][0] / keyed[k][1] for k in sorted(keyed)]
    return np.array(means, dtype=np.float64)


@dataclass(frozen=True)
class Scaler:
    """Min-max scaler; fit on training closes only so the test set never leaks."""

    min: float
    max: float

    def __post_init__(self):
        if not self.max > self.min:
            raise ValueError(f"scaler needs max > min, got [{self.min}, {self.max}]")

    def transform(self, v):
        return (np.asarray(v, dtype=np.float64) - self.min) / (self.max - self.min)

    def inverse(self, v):
        return np.asarray(v, dtype=np.float64) * (self.max - self.min) + self.min


def fit_scaler(train_values) -> Scaler:
    v = np.asarray(train_values, dtype=np.float64)
    if v.size < 2 or np.max(v) == np.min(v):
        raise ValueError("scaler needs at least 2 distinct training values")
    return Scaler(min=float(np.min(v)), max=float(np.max(v)))


@dataclass(frozen=True)
class WindowedDataset:
    """Paired (lookback window, next value) samples in scaled space."""

    inputs: np.ndarray  # (samples, lookback)
    targets: np.ndarray  # (samples,)
    lookback: int

    def __post_init__(self):
        if self.inputs.shape != (self.targets.shape[0], self.lookback):
            raise ValueError(
                f"inputs {self.inputs.shape} do not pair with targets "
                f"{self.targets.shape} at lookback {self.lookback}"
            )

    def __len__(self) -> int:
        return self.targets.shape[0]


def make_windows(scaled, lookback: int) -> WindowedDataset:
    """Cut a sequence into sliding windows; sample i is (v[i:i+L], v[i+L])."""
    v = np.asarray(scaled, dtype=np.float64)
    if lookback < 1:
        raise ValueError(f"lookback must be >= 1, got {lookback}")
    if v.size <= lookback:
        raise ValueError(f"need more than lookback={lookback} values, got {v.size}")
    view = np.lib.stride_tricks.sliding_window_view(v, lookback)
    return WindowedDataset(
        inputs=view[:-1].copy(),
        targets=v[lookback:].copy(),
        lookback=lookback,
    )


def chronological_split(
    series: OhlcvSeries, test_len: int = 30, val_frac: float = 0.10
) -> tuple[OhlcvSeries, OhlcvSeries, OhlcvSeries]:
    """Split into (train, val, test) without shuffling.

    The test set is the final ``test_len`` rows; the validation set is the
    final ``val_frac`` fraction (floored) of what remains; training data is
    the prefix. All three parts must be non-empty.
    """
    n = len(series)
    if test_len < 1:
        raise ValueError(f"test_len must be >= 1, got {test_len}")
    if not 0.0 < val_frac < 1.0:
        raise ValueError(f"val_frac must be in (0, 1), got {val_frac}")
    remainder = n - test_len
    val_len = int(remainder * val_frac)
    train_len = remainder - val_len
    if remainder < 2 or val_len < 1 or train_len < 1:
        raise ValueError(
            f"series of {n} rows cannot be split into non-empty "
            f"train/val/test with test_len={test_len}, val_frac={val_frac}"
        )
    return (
        series.slice(0, train_len),
        series.slice(train_len, train_len + val_len),
        series.slice(train_len + val_len, n),
    )


SYNTH_KINDS = ("sine+noise", "gbm", "random-walk")


def synth_series(
    kind: str,
    n: int,
    seed: int,
    *,
    amplitude: float = 1.0,
    period: float = 40.0,
    offset: float = 10.0,
    noise_sd: float = 0.05,
    start: float = 100.0,
    drift: float = 0.0005,
    vol: float = 0.01,
    step_sd: float = 1.0,
) -> np.ndarray:
    """Deterministic synthetic value sequences for tests and fixtures.

    kinds: "sine+noise" (amplitude, period, offset, noise_sd),
    "gbm" (start, drift, vol), "random-walk" (start, step_sd).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    for name, sd in (("noise_sd", noise_sd), ("vol", vol), ("step_sd", step_sd)):
        if sd < 0:
            raise ValueError(f"{name} must be >= 0, got {sd}")
    rng = make_rng(seed)
    t = np.arange(n, dtype=np.float64)
    if kind == "sine+noise":
        if period <= 0:
            raise ValueError(f"period must be > 0, got {period}")
        return amplitude * np.sin(2.0 * np.pi * t / period) + offset + noise_sd * rng.standard_normal(n)
    if kind == "gbm":
        if start <= 0:
            raise ValueError(f"gbm start must be > 0, got {start}")
        log_path = (drift - 0.5 * vol**2) * t
        log_path[1:] += vol * np.cumsum(rng.standard_normal(n - 1))
        return start * np.exp(log_path)
    if kind == "random-walk":
        path = np.empty(n)
        path[0] = start
        path[1:] = start + np.cumsum(step_sd * rng.standard_normal(n - 1))
        return path
    raise ValueError(f"unknown kind {kind!r}, expected one of {SYNTH_KINDS}")


def weekday_dates(start_date: date, n: int) -> tuple[date, ...]:
    out = []
    d = start_date
    while len(out) < n:
        if d.weekday() < 5:
            out.append(d)
        d += timedelta(days=1)
    return tuple(out)


def synth_ohlcv(
    kind: str, n: int, seed: int, *, start_date: date = date(2015, 1, 2), **params
) -> OhlcvSeries:
    """Wrap a synthetic close path into a valid OHLCV series on weekdays.

    Opens carry the previous close; highs/lows are the envelope extremes of
    each day's open/close, so cleaning is a no-op on the result.
    """
    closes = synth_series(kind, n, seed, **params)
    if np.min(closes) <= 0:
        raise ValueError("synthetic closes must stay positive to form an OHLCV fixture")
    opens = np.empty_like(closes)
    opens[0] = closes[0]
    opens[1:] = closes[:-1]
    volume = make_rng(seed + 1).integers(1_000_000, 100_000_000, size=n).astype(np.float64)
    return OhlcvSeries(
        dates=weekday_dates(start_date, n),
        open=opens,
        high=np.maximum(opens, closes),
        low=np.minimum(opens, closes),
        close=closes.copy(),
        volume=volume,
    )


def write_ohlcv_csv(series: OhlcvSeries, path) -> None:
    """Write a series in the toolkit's CSV schema."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["Date", "Open", "High", "Low", "Close", "Volume"])
        for i in range(len(series)):
            r = series.row(i)
            writer.writerow(
                [
                    r["date"].isoformat(),
                    repr(r["open"]),
                    repr(r["high"]),
                    repr(r["low"]),
                    repr(r["close"]),
                    int(r["volume"]),
                ]
            )


def fingerprint(series: OhlcvSeries) -> dict:
    """Row count, date range, and content hash identifying a dataset."""
    digest = hashlib.sha256()
    for i in range(len(series)):
        r = series.row(i)
        digest.update(
            f"{r['date'].isoformat()},{r['open']!r},{r['high']!r},"
            f"{r['low']!r},{r['close']!r},{r['volume']!r}\n".encode()
        )
    return {
        "n_rows": len(series),
        "start_date": series.dates[0].isoformat(),
        "end_date": series.dates[-1].isoformat(),
        "sha256": digest.hexdigest(),
    }
