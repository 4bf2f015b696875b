import numpy as np
import pytest

from seqcast import data as dat


@pytest.fixture(scope="session")
def sine_series() -> dat.OhlcvSeries:
    """Small deterministic sine fixture shared by pipeline-level tests."""
    return dat.synth_ohlcv("sine+noise", 400, 7)


@pytest.fixture(scope="session")
def sine_csv(tmp_path_factory, sine_series) -> str:
    path = tmp_path_factory.mktemp("fixture") / "sine.csv"
    dat.write_ohlcv_csv(sine_series, path)
    return str(path)


def tiny_config_text(data_path: str, out_dir: str, seed: int = 0, horizon: int = 10) -> str:
    """Config with small models and few epochs, for fast CLI runs."""
    return f"""
[run]
data = {data_path}
output_dir = {out_dir}
lookback = 24
horizon = {horizon}
val_frac = 0.1
seed = {seed}

[lstm]
hidden = 8
max_epochs = 6
patience = 3

[gru]
hidden = 8
max_epochs = 6
patience = 3

[transformer]
d_model = 8
n_heads = 2
n_layers = 1
d_ff = 16
max_epochs = 6
patience = 3
"""


@pytest.fixture()
def rng():
    return np.random.Generator(np.random.PCG64(12345))
