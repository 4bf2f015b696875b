"""The three sequence forecasters and their shared dispatch surface.

Each model module exposes a parameter dataclass plus ``init_params``,
``forward`` and ``backward``; everything here routes on the parameter type
so training and forecasting stay model-agnostic. Forward/backward are pure
given (params, input): params are never mutated by model code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gru, lstm, transformer
from .gru import GruParams
from .lstm import LstmParams
from .transformer import TransformerParams

MODEL_KINDS = ("lstm", "gru", "transformer")

_KIND_BY_TYPE = {
    LstmParams: "lstm",
    GruParams: "gru",
    TransformerParams: "transformer",
}
_MODULE_BY_KIND = {"lstm": lstm, "gru": gru, "transformer": transformer}


@dataclass(frozen=True)
class ModelConfig:
    """Architecture hyperparameters for one forecaster."""

    kind: str
    hidden: int = 64  # lstm / gru state width
    d_model: int = 64  # transformer embedding width
    n_heads: int = 2
    n_layers: int = 2
    d_ff: int = 128

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}, expected one of {MODEL_KINDS}")
        for field in ("hidden", "d_model", "n_heads", "n_layers", "d_ff"):
            if getattr(self, field) < 1:
                raise ValueError(f"{field} must be >= 1, got {getattr(self, field)}")
        if self.kind == "transformer" and self.d_model % self.n_heads != 0:
            raise ValueError(f"d_model {self.d_model} not divisible by {self.n_heads} heads")


def init_params(cfg: ModelConfig, rng: np.random.Generator, input_size: int = 1):
    if cfg.kind == "lstm":
        return lstm.init_params(rng, cfg.hidden, input_size)
    if cfg.kind == "gru":
        return gru.init_params(rng, cfg.hidden, input_size)
    return transformer.init_params(
        rng, cfg.d_model, cfg.n_heads, cfg.n_layers, cfg.d_ff, input_size
    )


def rebuild(params, arrays: dict[str, np.ndarray]):
    """New params of the same type with arrays swapped in (optimizer plumbing)."""
    if isinstance(params, TransformerParams):
        return TransformerParams.from_arrays(arrays, n_heads=params.n_heads)
    return type(params).from_arrays(arrays)


def kind_of(params) -> str:
    try:
        return _KIND_BY_TYPE[type(params)]
    except KeyError:
        raise TypeError(f"not a model parameter collection: {type(params)!r}") from None


def forward(params, x: np.ndarray):
    """Batched forward pass: x is (batch, steps), result is ((batch,), cache)."""
    return _MODULE_BY_KIND[kind_of(params)].forward(params, x)


def backward(params, cache, d_preds: np.ndarray):
    """Gradient of sum_b d_preds[b] * prediction_b w.r.t. every parameter."""
    return _MODULE_BY_KIND[kind_of(params)].backward(params, cache, d_preds)


def predict(params, window: np.ndarray) -> float:
    """Single-window prediction: window is (steps,), result a scalar."""
    window = np.asarray(window, dtype=np.float64)
    if window.ndim != 1:
        raise ValueError(f"predict expects a 1-D window, got shape {window.shape}")
    preds, _ = forward(params, window[None, :])
    return float(preds[0])
