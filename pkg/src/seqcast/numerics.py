"""Dense numeric kernels shared by every model.

All array data is float64. Matrices are 2-D ``numpy.ndarray``; vectors are
1-D. Randomness always flows through an explicit generator created by
:func:`make_rng`, never through global state, so any run can be replayed
from its seed.
"""

from __future__ import annotations

import copy
from typing import Callable, Iterable

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """Deterministic 64-bit-seeded generator (PCG64).

    Equal seeds produce bit-identical draw sequences.
    """
    return np.random.Generator(np.random.PCG64(seed))


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product with an explicit shape check.

    Raises ValueError naming both shapes on an inner-dimension mismatch.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError(f"matmul expects 2-D arrays, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ValueError(
            f"matmul shape mismatch: {a.shape} @ {b.shape} "
            f"(inner dimensions {a.shape[1]} != {b.shape[0]})"
        )
    return a @ b


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Elementwise logistic function, stable for large |x|.

    Saturating inputs clamp to 0/1 within float precision instead of
    overflowing; sigmoid(-v) + sigmoid(v) == 1 exactly for the same v.
    """
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def tanh(x: np.ndarray) -> np.ndarray:
    """Elementwise hyperbolic tangent."""
    return np.tanh(np.asarray(x, dtype=np.float64))


def softmax_rows(x: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction for overflow safety."""
    x = np.asarray(x, dtype=np.float64)
    shifted = x - x.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def init_xavier(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Uniform Glorot initialization on [-b, b] with b = sqrt(6/(rows+cols))."""
    if rows < 1 or cols < 1:
        raise ValueError(f"init_xavier needs positive dims, got ({rows}, {cols})")
    bound = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-bound, bound, size=(rows, cols))


def _iter_arrays(params) -> Iterable[tuple[str, np.ndarray]]:
    """Yield (name, array) views of a parameter collection.

    Accepts a bare ndarray, a dict of ndarrays, or any object exposing
    ``named_arrays()`` (the model parameter classes).
    """
    if isinstance(params, np.ndarray):
        yield "theta", params
    elif isinstance(params, dict):
        yield from params.items()
    elif hasattr(params, "named_arrays"):
        yield from params.named_arrays()
    else:
        raise TypeError(f"unsupported parameter collection: {type(params)!r}")


def grad_check(
    loss_fn: Callable,
    params,
    analytic,
    eps: float = 1e-5,
) -> float:
    """Compare an analytic gradient against central finite differences.

    ``loss_fn(params)`` must be a deterministic scalar function; ``analytic``
    mirrors the shape of ``params``. Returns the max over all coordinates of
    |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    work = copy.deepcopy(params)
    arrays = dict(_iter_arrays(work))
    grads = dict(_iter_arrays(analytic))
    if set(arrays) != set(grads):
        raise ValueError("analytic gradient does not mirror the parameter names")

    worst = 0.0
    for name, arr in arrays.items():
        g = np.asarray(grads[name], dtype=np.float64)
        if g.shape != arr.shape:
            raise ValueError(f"gradient shape mismatch for {name}: {g.shape} vs {arr.shape}")
        # Index-wise mutation so the perturbation is visible through `work`
        # regardless of array memory layout.
        for idx in np.ndindex(arr.shape):
            orig = arr[idx]
            arr[idx] = orig + eps
            f_plus = float(loss_fn(work))
            arr[idx] = orig - eps
            f_minus = float(loss_fn(work))
            arr[idx] = orig
            if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
                raise ValueError(f"non-finite loss while perturbing {name}[{idx}]")
            numeric = (f_plus - f_minus) / (2.0 * eps)
            denom = max(1e-8, abs(g[idx]) + abs(numeric))
            worst = max(worst, abs(g[idx] - numeric) / denom)
    return worst
