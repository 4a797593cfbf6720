#!/usr/bin/env python3
"""Regenerates synthetic_seasonal.csv: 3 channels, 5000 hourly steps.

Each channel is a period-48 sinusoid plus a linear trend plus N(0, 0.1^2) noise.
"""
import argparse
from pathlib import Path

import numpy as np
import pandas as pd

N_STEPS = 5000
PERIOD = 48
NOISE_STD = 0.1
SEED = 20240501

# (amplitude, phase in radians, trend per step)
CHANNELS = [
    (1.0, 0.0, 2.0e-4),
    (1.5, 1.0, -1.0e-4),
    (0.8, 2.5, 3.0e-4),
]


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", type=Path,
                        default=Path(__file__).with_name("synthetic_seasonal.csv"))
    args = parser.parse_args()

    rng = np.random.default_rng(SEED)
    t = np.arange(N_STEPS, dtype=np.float64)
    data = {"date": pd.date_range("2020-01-01", periods=N_STEPS, freq="h")
                      .strftime("%Y-%m-%d %H:%M:%S")}
    for i, (amp, phase, slope) in enumerate(CHANNELS):
        seasonal = amp * np.sin(2.0 * np.pi * t / PERIOD + phase)
        data[f"ch{i}"] = seasonal + slope * t + rng.normal(0.0, NOISE_STD, N_STEPS)
    pd.DataFrame(data).to_csv(args.out, index=False, float_format="%.10g")


if __name__ == "__main__":
    main()
