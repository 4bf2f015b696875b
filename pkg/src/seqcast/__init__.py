"""seqcast: univariate time-series forecasting toolkit.

Ingests daily OHLCV data, runs stationarity diagnostics, trains three
sequence forecasters (LSTM, GRU, Transformer encoder) with hand-derived
gradients, produces recursive multi-step forecasts, and compares the
models on R2 / MAE / MSE / RMSE.
"""

__version__ = "0.1.0"
