"""Regenerates stationarity_reference.json with statsmodels.

ADF: constant-only regression, t-stat lag pruning from the default
ceil(12 * (n/100)^0.25) maximum. KPSS: level stationarity with
floor(4 * (n/100)^0.25) Bartlett lags.
"""
import json
import math
import pathlib

import numpy as np
import statsmodels
from statsmodels.tsa.stattools import adfuller, kpss

N = 400
rng = np.random.default_rng(20240611)
series = []
for i in range(10):
    phi = 0.2 + 0.05 * i
    e = rng.normal(size=N)
    x = np.zeros(N)
    for t in range(1, N):
        x[t] = phi * x[t - 1] + e[t]
    series.append(("ar1_phi%.2f" % phi, True, x + 3.0))
for i in range(10):
    x = np.cumsum(rng.normal(size=N)) + 10.0
    series.append(("random_walk_%d" % i, False, x))

lags = int(math.floor(4 * (N / 100) ** 0.25))
out = {"generator": "statsmodels " + statsmodels.__version__, "kpss_lags": lags, "series": []}
for name, stationary, x in series:
    adf = adfuller(x, regression="c", autolag="t-stat")
    k = kpss(x, regression="c", nlags=lags)
    out["series"].append({
        "name": name,
        "constructed_stationary": stationary,
        "values": [float(v) for v in x],
        "adf_stat": float(adf[0]),
        "adf_pvalue": float(adf[1]),
        "adf_lags": int(adf[2]),
        "kpss_stat": float(k[0]),
        "kpss_pvalue": float(k[1]),
    })

path = pathlib.Path(__file__).with_name("stationarity_reference.json")
path.write_text(json.dumps(out, indent=1) + "\n")
