"""Recursive forecasting, evaluation metrics, and the three-model comparison.

The comparison pipeline: one chronological split shared by all models,
min-max scaling fit on training closes only, per-model training with its
own derived seed, a 30-step recursive forecast from the end of train+val,
and metrics against the held-out closes in currency units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import data as dat
from . import models, training
from .data import OhlcvSeries, Scaler, WindowedDataset
from .models import MODEL_KINDS, ModelConfig
from .training import TrainConfig, TrainHistory, TrainingError

# Per-model seed = run seed + offset, so models never share an init stream.
SEED_OFFSETS = {"lstm": 1, "gru": 2, "transformer": 3}


@dataclass(frozen=True)
class Metrics:
    r2: float
    mae: float
    mse: float
    rmse: float

    def __post_init__(self):
        if self.mae < 0 or self.mse < 0 or self.rmse < 0:
            raise ValueError("error metrics cannot be negative")
        if self.r2 > 1.0 + 1e-12:
            raise ValueError(f"r2 cannot exceed 1, got {self.r2}")
        if abs(self.rmse**2 - self.mse) > 1e-9:
            raise ValueError(f"rmse^2 != mse ({self.rmse**2} vs {self.mse})")

    @property
    def fit_degree_pct(self) -> float:
        return self.r2 * 100.0

    def as_dict(self) -> dict:
        return {
            "r2": self.r2,
            "mae": self.mae,
            "mse": self.mse,
            "rmse": self.rmse,
            "fit_degree_pct": self.fit_degree_pct,
        }


def compute_metrics(y_true, y_pred) -> Metrics:
    y_true = np.asarray(y_true, dtype=np.float64).ravel()
    y_pred = np.asarray(y_pred, dtype=np.float64).ravel()
    if y_true.size < 2:
        raise ValueError(f"need at least 2 values, got {y_true.size}")
    if y_true.shape != y_pred.shape:
        raise ValueError(f"length mismatch: {y_true.size} vs {y_pred.size}")
    centered = y_true - y_true.mean()
    ss_tot = float(np.sum(centered**2))
    if ss_tot == 0.0:
        raise ValueError("R² undefined: y_true is constant")
    err = y_pred - y_true
    mse = float(np.mean(err**2))
    return Metrics(
        r2=1.0 - float(np.sum(err**2)) / ss_tot,
        mae=float(np.mean(np.abs(err))),
        mse=mse,
        rmse=math.sqrt(mse),
    )


def recursive_forecast(params, last_window, horizon: int, scaler: Scaler) -> np.ndarray:
    """Iterate one-step predictions `horizon` times, then undo the scaling.

    last_window holds the final `lookback` scaled values of the history;
    each prediction is appended and the oldest value dropped.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    window = np.asarray(last_window, dtype=np.float64).copy()
    if window.ndim != 1 or window.size < 1:
        raise ValueError(f"last_window must be a non-empty 1-D sequence, got shape {window.shape}")
    scaled_path = np.empty(horizon)
    for step in range(horizon):
        nxt = models.predict(params, window)
        if not math.isfinite(nxt):
            raise ValueError(f"non-finite prediction at forecast step {step}")
        scaled_path[step] = nxt
        window = np.concatenate([window[1:], [nxt]])
    return scaler.inverse(scaled_path)


def prepare_windows(
    series: OhlcvSeries, lookback: int, horizon: int, val_frac: float = 0.10
) -> tuple[WindowedDataset, WindowedDataset, np.ndarray, Scaler, OhlcvSeries]:
    """Shared split/scale/window stage.

    Returns (train windows, val windows, the final scaled lookback window
    that seeds forecasting, the scaler, and the held-out test rows).
    Windows are cut from scaled train+val closes jointly, so validation
    windows may begin inside the training range; a window belongs to the
    validation set when its target does.
    """
    train, val, test = dat.chronological_split(series, test_len=horizon, val_frac=val_frac)
    scaler = dat.fit_scaler(train.close)
    joint = scaler.transform(np.concatenate([train.close, val.close]))
    windows = dat.make_windows(joint, lookback)
    split_at = len(train) - lookback
    if split_at < 1:
        raise ValueError(
            f"lookback {lookback} leaves no training windows for {len(train)} training rows"
        )
    train_ds = WindowedDataset(
        inputs=windows.inputs[:split_at], targets=windows.targets[:split_at], lookback=lookback
    )
    val_ds = WindowedDataset(
        inputs=windows.inputs[split_at:], targets=windows.targets[split_at:], lookback=lookback
    )
    return train_ds, val_ds, joint[-lookback:], scaler, test


def compare(
    series: OhlcvSeries,
    model_cfgs: dict[str, ModelConfig],
    train_cfgs: dict[str, TrainConfig],
    lookback: int,
    horizon: int = 30,
    val_frac: float = 0.10,
    log_paths: dict[str, str] | None = None,
):
    """Train the three models on one shared split and evaluate each forecast.

    Returns (report dict ready for JSON, trained params by model name,
    forecast paths by model name, the held-out test rows). Model order in
    the report is always lstm, gru, transformer.
    """
    missing = [k for k in MODEL_KINDS if k not in model_cfgs or k not in train_cfgs]
    if missing:
        raise ValueError(f"missing configs for: {', '.join(missing)}")
    train_ds, val_ds, seed_window, scaler, test = prepare_windows(
        series, lookback, horizon, val_frac
    )

    fingerprint = dat.fingerprint(series)
    entries = []
    trained: dict[str, object] = {}
    forecasts: dict[str, np.ndarray] = {}
    for name in MODEL_KINDS:
        log_path = (log_paths or {}).get(name)
        try:
            params, history = training.train(
                model_cfgs[name], train_ds, val_ds, train_cfgs[name], log_path=log_path
            )
            path = recursive_forecast(params, seed_window, horizon, scaler)
        except (TrainingError, ValueError) as exc:
            raise TrainingError(f"{name}: {exc}") from exc
        metrics = compute_metrics(test.close, path)
        trained[name] = params
        forecasts[name] = path
        entries.append(
            {
                "name": name,
                "metrics": metrics.as_dict(),
                "forecast": [float(v) for v in path],
                "history": history.as_dict(),
                "config": {
                    "model": _model_cfg_dict(model_cfgs[name]),
                    "train": train_cfgs[name].as_dict(),
                    "lookback": lookback,
                    "horizon": horizon,
                    "val_frac": val_frac,
                },
            }
        )
    report = {"dataset": fingerprint, "models": entries}
    return report, trained, forecasts, test


def _model_cfg_dict(cfg: ModelConfig) -> dict:
    if cfg.kind == "transformer":
        return {
            "kind": cfg.kind,
            "d_model": cfg.d_model,
            "n_heads": cfg.n_heads,
            "n_layers": cfg.n_layers,
            "d_ff": cfg.d_ff,
        }
    return {"kind": cfg.kind, "hidden": cfg.hidden}


def plot_rows(test: OhlcvSeries, forecasts: dict[str, np.ndarray]) -> list[tuple]:
    """Rows of (date, actual, lstm, gru, transformer) for the forecast chart."""
    rows = []
    for i in range(len(test)):
        rows.append(
            (
                test.dates[i].isoformat(),
                float(test.close[i]),
                *(float(forecasts[name][i]) for name in MODEL_KINDS),
            )
        )
    return rows


def history_summary(history: TrainHistory) -> dict:
    return {
        "n_epochs": history.n_epochs,
        "best_epoch": history.best_epoch,
        "best_val_loss": history.val_loss[history.best_epoch - 1],
        "stopped_early": history.stopped_early,
    }
