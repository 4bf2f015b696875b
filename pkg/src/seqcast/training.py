"""Mini-batch training: MSE loss, Adam, gradient clipping, early stopping.

The loop is deliberately plain. Each epoch shuffles the window indices
with its own seeded generator, walks the batches (last one may be short),
and does forward / loss / backward / clip / Adam. Validation loss decides
early stopping and which epoch's parameters are returned.

Everything is deterministic given (seed, data, config): two runs produce
bit-identical parameters and history.
"""

from __future__ import annotations

import copy
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import models
from .data import WindowedDataset
from .models import ModelConfig
from .numerics import make_rng


class TrainingError(RuntimeError):
    """Raised when a run cannot continue (diverged loss, bad setup)."""


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 100
    patience: int = 10
    grad_clip_norm: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError(f"Adam betas must lie in (0, 1), got {self.beta1}, {self.beta2}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be at least 1, got {self.batch_size}")
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be at least 1, got {self.max_epochs}")
        if not 1 <= self.patience <= self.max_epochs:
            raise ValueError(
                f"patience must lie in [1, max_epochs], got {self.patience} with max_epochs {self.max_epochs}"
            )
        if self.grad_clip_norm <= 0:
            raise ValueError(f"grad_clip_norm must be positive, got {self.grad_clip_norm}")

    def as_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "epsilon": self.epsilon,
            "batch_size": self.batch_size,
            "max_epochs": self.max_epochs,
            "patience": self.patience,
            "grad_clip_norm": self.grad_clip_norm,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class TrainHistory:
    train_loss: tuple[float, ...]
    val_loss: tuple[float, ...]
    best_epoch: int  # 1-based, matches the log
    stopped_early: bool

    def __post_init__(self):
        if len(self.train_loss) != len(self.val_loss):
            raise ValueError("train_loss and val_loss must have one entry per epoch")
        if not 1 <= self.best_epoch <= len(self.val_loss):
            raise ValueError(f"best_epoch {self.best_epoch} outside 1..{len(self.val_loss)}")

    @property
    def n_epochs(self) -> int:
        return len(self.train_loss)

    def as_dict(self) -> dict:
        return {
            "train_loss": list(self.train_loss),
            "val_loss": list(self.val_loss),
            "best_epoch": self.best_epoch,
            "stopped_early": self.stopped_early,
        }


@dataclass
class AdamState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0


def init_adam(arrays: dict[str, np.ndarray]) -> AdamState:
    return AdamState(
        m={k: np.zeros_like(a) for k, a in arrays.items()},
        v={k: np.zeros_like(a) for k, a in arrays.items()},
        t=0,
    )


def mse_loss(pred, target) -> float:
    pred = np.asarray(pred, dtype=np.float64).ravel()
    target = np.asarray(target, dtype=np.float64).ravel()
    if pred.size == 0:
        raise ValueError("mse_loss needs at least one element")
    if pred.shape != target.shape:
        raise ValueError(f"length mismatch: {pred.shape} vs {target.shape}")
    return float(np.mean((pred - target) ** 2))


def clip_global_norm(
    grads: dict[str, np.ndarray], max_norm: float
) -> tuple[dict[str, np.ndarray], float]:
    """Scale all gradients together so their joint L2 norm is at most max_norm."""
    total = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if total <= max_norm or total == 0.0:
        return grads, total
    scale = max_norm / total
    return {k: g * scale for k, g in grads.items()}, total


def adam_step(
    arrays: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
    cfg: TrainConfig,
) -> tuple[dict[str, np.ndarray], AdamState]:
    """One Adam update. Returns new arrays and state; inputs stay untouched."""
    if set(arrays) != set(grads):
        raise ValueError("parameter and gradient names differ")
    for key in arrays:
        if arrays[key].shape != grads[key].shape:
            raise ValueError(
                f"shape mismatch for {key}: {arrays[key].shape} vs {grads[key].shape}"
            )
    t = state.t + 1
    new_m, new_v, out = {}, {}, {}
    bc1 = 1.0 - cfg.beta1**t
    bc2 = 1.0 - cfg.beta2**t
    for key, theta in arrays.items():
        g = grads[key]
        m = cfg.beta1 * state.m[key] + (1.0 - cfg.beta1) * g
        v = cfg.beta2 * state.v[key] + (1.0 - cfg.beta2) * g * g
        new_m[key] = m
        new_v[key] = v
        out[key] = theta - cfg.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + cfg.epsilon)
    return out, AdamState(m=new_m, v=new_v, t=t)


def train(
    model_cfg: ModelConfig,
    train_set: WindowedDataset,
    val_set: WindowedDataset,
    cfg: TrainConfig,
    log_path: str | Path | None = None,
):
    """Train one model; returns (params from the best-validation epoch, history).

    log_path, when given, receives one JSON line per epoch:
    {"epoch": ..., "train_loss": ..., "val_loss": ..., "seconds": ...}.
    """
    if len(train_set) == 0 or len(val_set) == 0:
        raise TrainingError("train and validation sets must both be non-empty")

    rng = make_rng(cfg.seed)
    params = models.init_params(model_cfg, rng)
    arrays = dict(params.named_arrays())
    state = init_adam(arrays)
    n = len(train_set)

    best_val = math.inf
    best_arrays = copy.deepcopy(arrays)
    best_epoch = 0
    epochs_since_best = 0
    train_losses: list[float] = []
    val_losses: list[float] = []
    stopped_early = False
    log_file = open(log_path, "w", encoding="utf-8", newline="\n") if log_path else None

    try:
        for epoch in range(1, cfg.max_epochs + 1):
            started = time.perf_counter()
            order = rng.permutation(n)
            sq_err_sum = 0.0
            for start in range(0, n, cfg.batch_size):
                batch_no = start // cfg.batch_size
                idx = order[start : start + cfg.batch_size]
                x = train_set.inputs[idx]
                y = train_set.targets[idx]
                preds, cache = models.forward(params, x)
                batch_loss = mse_loss(preds, y)
                if not math.isfinite(batch_loss):
                    raise TrainingError(
                        f"non-finite loss at epoch {epoch}, batch {batch_no} "
                        f"({model_cfg.kind}, seed {cfg.seed})"
                    )
                sq_err_sum += batch_loss * len(idx)
                d_preds = 2.0 * (preds - y) / len(idx)
                grad_params = models.backward(params, cache, d_preds)
                grads, _ = clip_global_norm(dict(grad_params.named_arrays()), cfg.grad_clip_norm)
                arrays, state = adam_step(arrays, grads, state, cfg)
                params = models.rebuild(params, arrays)

            train_loss = sq_err_sum / n
            val_preds, _ = models.forward(params, val_set.inputs)
            val_loss = mse_loss(val_preds, val_set.targets)
            if not math.isfinite(val_loss):
                raise TrainingError(
                    f"non-finite validation loss at epoch {epoch} "
                    f"({model_cfg.kind}, seed {cfg.seed})"
                )
            train_losses.append(train_loss)
            val_losses.append(val_loss)
            if log_file:
                record = {
                    "epoch": epoch,
                    "train_loss": train_loss,
                    "val_loss": val_loss,
                    "seconds": round(time.perf_counter() - started, 6),
                }
                log_file.write(json.dumps(record) + "\n")

            if val_loss < best_val:
                best_val = val_loss
                best_arrays = copy.deepcopy(arrays)
                best_epoch = epoch
                epochs_since_best = 0
            else:
                epochs_since_best += 1
                if epochs_since_best >= cfg.patience:
                    stopped_early = True
                    break
    finally:
        if log_file:
            log_file.close()

    history = TrainHistory(
        train_loss=tuple(train_losses),
        val_loss=tuple(val_losses),
        best_epoch=best_epoch,
        stopped_early=stopped_early,
    )
    return models.rebuild(params, best_arrays), history
