"""Writes peaks_fixture.json: random signals with scipy.signal.find_peaks results."""
import json

import numpy as np
from scipy.signal import find_peaks

rng = np.random.default_rng(12345)
cases = []
for i in range(200):
    n = int(rng.integers(3, 120))
    kind = i % 4
    if kind == 0:
        x = rng.normal(size=n)
    elif kind == 1:  # quantized: plenty of plateaus
        x = np.round(rng.normal(size=n) * 2) / 2
    elif kind == 2:
        t = np.linspace(0, 4 * np.pi, n)
        x = np.sin(t) + 0.1 * rng.normal(size=n)
    else:
        x = np.cumsum(rng.normal(size=n))
    prom = float(rng.choice([0.0, 0.1, 0.5, 1.0]))
    peaks, _ = find_peaks(x, prominence=prom)
    cases.append({"signal": x.tolist(), "prominence": prom, "peaks": peaks.tolist()})
with open("peaks_fixture.json", "w") as f:
    json.dump(cases, f)
