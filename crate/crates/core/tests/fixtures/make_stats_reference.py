"""Reference values for Welch's t-test and Pearson's r, computed with scipy.

Run from this directory: python3 make_stats_reference.py
"""

import json

import numpy as np
from scipy import stats

rng = np.random.default_rng(20240601)


def welch(name, a, b):
    res = stats.ttest_ind(a, b, equal_var=False)
    va, vb = np.var(a, ddof=1) / len(a), np.var(b, ddof=1) / len(b)
    df = (va + vb) ** 2 / (va**2 / (len(a) - 1) + vb**2 / (len(b) - 1))
    return {"name": name, "a": list(map(float, a)), "b": list(map(float, b)),
            "t": float(res.statistic), "p": float(res.pvalue), "df": float(df)}


def pearson(name, x, y):
    r, p = stats.pearsonr(x, y)
    return {"name": name, "x": list(map(float, x)), "y": list(map(float, y)), "r": float(r), "p": float(p)}


welch_cases = [
    welch("normal_38_vs_29", rng.normal(2300, 250, 38), rng.normal(2250, 300, 29)),
    welch("shifted_clear_difference", rng.normal(0, 1, 20), rng.normal(1.5, 1, 25)),
    welch("unequal_variance", rng.normal(10, 1, 12), rng.normal(10.8, 5, 40)),
    welch("small_samples", [1.0, 2.0, 4.0], [2.5, 3.5, 9.0, 1.0]),
    welch("integers", list(range(1, 11)), list(range(3, 18, 2))),
]
base = rng.normal(2400, 200, 30)
other = rng.normal(2400, 350, 27)
other = other - other.mean() + base.mean()
welch_cases.append(welch("same_mean_not_significant", base, other))

pearson_cases = []
while True:
    x = rng.integers(3, 25, 38).astype(float)
    y = 1800 + 15 * x + rng.normal(0, 220, 38)
    r = stats.pearsonr(x, y)[0]
    if 0.34 <= r <= 0.36:
        break
pearson_cases.append(pearson("runs_vs_best_38_r035", x, y))
pearson_cases.append(pearson("independent_29", rng.normal(0, 1, 29), rng.normal(0, 1, 29)))
pearson_cases.append(pearson("negative_strong", np.arange(15.0), -2 * np.arange(15.0) + rng.normal(0, 3, 15)))
pearson_cases.append(pearson("three_points", [1.0, 2.0, 4.0], [1.0, 3.0, 2.0]))
pearson_cases.append(pearson("heavy_tailed", rng.standard_t(2, 50), rng.standard_t(2, 50)))

with open("stats_reference.json", "w") as f:
    json.dump({"welch": welch_cases, "pearson": pearson_cases}, f, indent=1)
for c in welch_cases:
    print(c["name"], c["t"], c["p"])
for c in pearson_cases:
    print(c["name"], c["r"], c["p"])
