"""Command-line entry point.

Subcommands walk the pipeline stages: ``synth`` writes a reproducible
fixture CSV, ``eda`` reports cleaning stats, monthwise means and the
unit-root tests, ``train`` fits one model and saves its weights, ``forecast``
extends a series past its end with saved weights, and ``compare`` runs the
full three-model experiment.

Exit codes: 0 success, 1 runtime failure (bad data, diverged training),
2 usage or configuration error. Artifacts are written only below the
configured output directory.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from datetime import timedelta
from pathlib import Path

from . import charts
from . import data as dat
from . import forecast_eval, stationarity
from .models import MODEL_KINDS, weights_io
from .runconfig import (
    ADF_CHOICES,
    ConfigError,
    RunConfig,
    apply_flags,
    canonical_text,
    config_echo,
    parse_config_file,
)
from .training import TrainingError, train


def _json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _load_config(args) -> RunConfig:
    config_path = getattr(args, "config", None)
    cfg = parse_config_file(config_path) if config_path else RunConfig()
    return apply_flags(
        cfg,
        data=getattr(args, "data", None),
        seed=getattr(args, "seed", None),
        horizon=getattr(args, "horizon", None),
        out=getattr(args, "out", None),
    )


def _require_data(cfg: RunConfig) -> Path:
    if not cfg.data_path:
        raise ConfigError("no input data: pass --data PATH or set data in [run]")
    path = Path(cfg.data_path)
    if not path.is_file():
        raise ConfigError(f"data file not found: {path}")
    return path


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_clean(cfg: RunConfig) -> tuple[dat.OhlcvSeries, dat.CleanReport]:
    return dat.clean(dat.parse_csv(_require_data(cfg)))


def _adf_input(series: dat.OhlcvSeries, adf_on: str):
    if adf_on == "monthly-high":
        return dat.monthly_mean_series(series, "high")
    return series.high


def cmd_eda(cfg: RunConfig, args) -> int:
    series, report = _load_clean(cfg)
    values = _adf_input(series, cfg.adf_on)
    level = stationarity.adf_test(values)
    differenced = stationarity.adf_test(stationarity.difference(values, 1))
    means = dat.monthwise_means(series)
    monthwise = [
        {
            "month": m,
            "mean_open": means[m][0] if m in means else None,
            "mean_close": means[m][1] if m in means else None,
        }
        for m in range(1, 13)
    ]
    payload = {
        "n_rows": len(series),
        "date_range": {
            "start": series.dates[0].isoformat(),
            "end": series.dates[-1].isoformat(),
        },
        "missing_report": report.as_dict(),
        "monthwise": monthwise,
        "adf": {
            "series": cfg.adf_on,
            "level": level.as_dict(),
            "differenced": differenced.as_dict(),
        },
        "config": config_echo(cfg),
    }
    out = _outdir(cfg)
    (out / "eda.json").write_text(_json_text(payload), encoding="utf-8")
    labels = [str(m) for m in range(1, 13)]
    chart = charts.bar_chart_svg(
        "Monthwise mean open and close",
        [lab for lab, row in zip(labels, monthwise) if row["mean_open"] is not None],
        {
            "open": [row["mean_open"] for row in monthwise if row["mean_open"] is not None],
            "close": [row["mean_close"] for row in monthwise if row["mean_close"] is not None],
        },
    )
    (out / "monthwise.svg").write_text(chart, encoding="utf-8")
    print(f"wrote {out / 'eda.json'} and {out / 'monthwise.svg'}")
    return 0


def cmd_train(cfg: RunConfig, args) -> int:
    series, _ = _load_clean(cfg)
    train_ds, val_ds, _, _, _ = forecast_eval.prepare_windows(
        series, cfg.lookback, cfg.horizon, cfg.val_frac
    )
    out = _outdir(cfg)
    name = args.model
    params, history = train(
        cfg.model_config(name),
        train_ds,
        val_ds,
        cfg.train_config(name),
        log_path=out / f"train-{name}.ndjson",
    )
    weights_io.save_weights(out / f"weights-{name}.txt", params)
    summary = forecast_eval.history_summary(history)
    print(
        f"{name}: best epoch {summary['best_epoch']}/{summary['n_epochs']}, "
        f"val loss {summary['best_val_loss']:.6g}; wrote {out / f'weights-{name}.txt'}"
    )
    return 0


def cmd_forecast(cfg: RunConfig, args) -> int:
    name = args.model
    weights_path = Path(cfg.output_dir) / f"weights-{name}.txt"
    if not weights_path.is_file():
        raise ConfigError(f"weights not found: {weights_path} (run the train command first)")
    series, _ = _load_clean(cfg)
    params, _ = weights_io.load_weights(weights_path, expect_kind=name)
    # Scale exactly as training did: min-max fit on the training slice only.
    train_part, _, _ = dat.chronological_split(series, cfg.horizon, cfg.val_frac)
    scaler = dat.fit_scaler(train_part.close)
    if len(series) < cfg.lookback:
        raise ValueError(f"series of {len(series)} rows is shorter than lookback {cfg.lookback}")
    window = scaler.transform(series.close[-cfg.lookback :])
    path = forecast_eval.recursive_forecast(params, window, cfg.horizon, scaler)
    future = dat.weekday_dates(series.dates[-1] + timedelta(days=1), cfg.horizon)

    out = _outdir(cfg)
    csv_lines = ["date,forecast"]
    csv_lines += [f"{d.isoformat()},{float(v)!r}" for d, v in zip(future, path)]
    (out / f"forecast-{name}.csv").write_text("\n".join(csv_lines) + "\n", encoding="utf-8")

    tail = min(60, len(series))
    labels = [d.isoformat() for d in series.dates[-tail:]] + [d.isoformat() for d in future]
    pad = [float("nan")] * tail
    actual = [float(v) for v in series.close[-tail:]] + [float("nan")] * cfg.horizon
    chart = charts.line_chart_svg(
        f"{name} forecast, next {cfg.horizon} steps",
        labels,
        {"actual": actual, name: pad + [float(v) for v in path]},
    )
    (out / f"forecast-{name}.svg").write_text(chart, encoding="utf-8")
    payload = {
        "model": name,
        "horizon": cfg.horizon,
        "dates": [d.isoformat() for d in future],
        "forecast": [float(v) for v in path],
        "config": config_echo(cfg),
    }
    (out / f"forecast-{name}.json").write_text(_json_text(payload), encoding="utf-8")
    print(f"wrote {out / f'forecast-{name}.csv'}, .svg and .json")
    return 0


def cmd_compare(cfg: RunConfig, args) -> int:
    series, _ = _load_clean(cfg)
    out = _outdir(cfg)
    report, trained, forecasts, test = forecast_eval.compare(
        series,
        {k: cfg.model_config(k) for k in MODEL_KINDS},
        {k: cfg.train_config(k) for k in MODEL_KINDS},
        lookback=cfg.lookback,
        horizon=cfg.horizon,
        val_frac=cfg.val_frac,
        log_paths={k: str(out / f"train-{k}.ndjson") for k in MODEL_KINDS},
    )
    report["config"] = config_echo(cfg)
    (out / "report.json").write_text(_json_text(report), encoding="utf-8")
    for name in MODEL_KINDS:
        weights_io.save_weights(out / f"weights-{name}.txt", trained[name])

    rows = forecast_eval.plot_rows(test, forecasts)
    csv_lines = ["date,actual," + ",".join(MODEL_KINDS)]
    csv_lines += [",".join([r[0]] + [repr(v) for v in r[1:]]) for r in rows]
    (out / "plot.csv").write_text("\n".join(csv_lines) + "\n", encoding="utf-8")
    chart = charts.line_chart_svg(
        f"Held-out closes vs {cfg.horizon}-step forecasts",
        [r[0] for r in rows],
        {
            "actual": [r[1] for r in rows],
            **{name: [r[2 + i] for r in rows] for i, name in enumerate(MODEL_KINDS)},
        },
    )
    (out / "plot.svg").write_text(chart, encoding="utf-8")
    for entry in report["models"]:
        m = entry["metrics"]
        print(
            f"{entry['name']}: r2 {m['r2']:.4f}, mae {m['mae']:.4f}, "
            f"mse {m['mse']:.4f}, rmse {m['rmse']:.4f}"
        )
    print(f"wrote {out / 'report.json'}, plot.csv, plot.svg and weight files")
    return 0


def cmd_synth(cfg: RunConfig, args) -> int:
    series = dat.synth_ohlcv(args.kind, args.n, cfg.seed)
    out = _outdir(cfg)
    path = out / "synth.csv"
    dat.write_ohlcv_csv(series, path)
    print(f"wrote {path} ({args.kind}, {args.n} rows, seed {cfg.seed})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqcast",
        description="Univariate price forecasting: data prep, three sequence models, comparison.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, with_model: bool = False):
        p.add_argument("--config", help="INI config file")
        p.add_argument("--data", help="input OHLCV CSV (overrides config)")
        p.add_argument("--seed", type=int, help="run seed (overrides config)")
        p.add_argument("--horizon", type=int, help="forecast steps (overrides config)")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument(
            "--print-config",
            action="store_true",
            help="print the merged canonical config and exit",
        )
        if with_model:
            p.add_argument("--model", required=True, choices=MODEL_KINDS)

    p_eda = sub.add_parser("eda", help="cleaning stats, monthwise means, unit-root tests")
    add_common(p_eda)
    p_eda.add_argument("--adf-on", choices=ADF_CHOICES, help="series under the ADF test")
    p_eda.set_defaults(func=cmd_eda)

    p_train = sub.add_parser("train", help="fit one model, save weights and log")
    add_common(p_train, with_model=True)
    p_train.set_defaults(func=cmd_train)

    p_fc = sub.add_parser("forecast", help="extend the series using saved weights")
    add_common(p_fc, with_model=True)
    p_fc.set_defaults(func=cmd_forecast)

    p_cmp = sub.add_parser("compare", help="train all three models and compare forecasts")
    add_common(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    p_synth = sub.add_parser("synth", help="write a reproducible synthetic fixture CSV")
    p_synth.add_argument("--kind", choices=dat.SYNTH_KINDS, default="sine+noise")
    p_synth.add_argument("--n", type=int, default=1000)
    p_synth.add_argument("--seed", type=int, help="generator seed")
    p_synth.add_argument("--out", help="output directory")
    p_synth.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        if getattr(args, "adf_on", None):
            cfg = replace(cfg, adf_on=args.adf_on)
        if getattr(args, "print_config", False):
            print(canonical_text(cfg), end="")
            return 0
        return args.func(cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, TrainingError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
