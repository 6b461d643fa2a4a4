"""End-to-end library walkthrough: generate, window, train, evaluate.

A scaled-down version of what `loadcast train --synthetic` does, using the
library API directly so each stage is visible.  Takes about ten seconds.
Run with `python3 demos/train_synthetic.py`.
"""

from loadcast.data import (build_features, build_windows, compute_stats,
                           generate_synthetic, split_by_forecast_day,
                           standardize, synthetic_calendar)
from loadcast.model import ModelConfig
from loadcast.training import TrainConfig, evaluate, train


def main():
    records = generate_synthetic(16, seed=20)
    calendar = synthetic_calendar(records)
    frames = build_features(records, calendar)
    print(f"generated {len(records)} hourly records "
          f"({records[0].timestamp.date()} .. {records[-1].timestamp.date()})")

    # Standardization statistics come from the training days only, so the
    # later splits cannot leak into the scaling.
    train_days, val_days, test_days = 12, 2, 2
    stats = compute_stats(frames[:train_days * 24])
    frames = standardize(frames, stats)

    config = ModelConfig(days=7, day_len=24, n_features=45, hidden_size=8,
                         feature_attn_size=4, temporal_attn_size=4,
                         head_size=8, seed=3)
    samples = build_windows(frames, config)
    split = split_by_forecast_day(samples, records[0].timestamp.date(),
                                  train_days, val_days, test_days)
    train_set, val_set, test_set = split
    print(f"{len(samples)} windows: {len(train_set)} train, "
          f"{len(val_set)} validation, {len(test_set)} test")

    result = train(config, train_set, val_set,
                   TrainConfig(batch_size=1, epochs=5, learning_rate=1e-2,
                               seed=2))
    print("\nepoch  train MSE  val MSE")
    for row in result.log:
        print(f"{row.epoch:5d}  {row.train_mse:9.4f}  {row.val_mse:7.4f}")
    print(f"kept epoch {result.best_epoch} (lowest validation MSE)")

    evaluation = evaluate(result.params, config, test_set, stats)
    print(f"\ntest metrics: {evaluation.report.as_text()}", end="")

    print("\nfirst test day, forecast vs actual (load units):")
    actual = evaluation.actuals[0]
    forecast = evaluation.forecasts[0]
    for hour in range(0, 24, 3):
        print(f"  {hour:02d}:00  actual {actual[hour]:7.1f}  "
              f"forecast {forecast[hour]:7.1f}")


if __name__ == "__main__":
    main()
