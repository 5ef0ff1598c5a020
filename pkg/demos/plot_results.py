"""
Plot the CSV tables
===================

Turns a results directory into four figures: overhead ratio, measured and
effective MSE, sum rate against threshold, and the pooled user-rate CDF.
Needs matplotlib, which the library itself does not.

Run with ``python3 demos/plot_results.py results/desk``.
"""

import csv
import os
import sys

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

src = sys.argv[1] if len(sys.argv) > 1 else "results/desk"


def read(name):
    with open(os.path.join(src, name)) as fh:
        return list(csv.DictReader(fh))


def series(rows, scheme, col):
    pick = [r for r in rows if r["scheme"] == scheme]
    return np.array([float(r["delta_db"]) for r in pick]), np.array([float(r[col]) for r in pick])


fig, ax = plt.subplots(2, 2, figsize=(10, 8))

ov = read("overhead.csv")
ax[0, 0].plot(*series(ov, "graph", "overhead_ratio"), "o-")
ax[0, 0].set(xlabel="threshold [dB]", ylabel="overhead ratio")

ms, me = read("mse_measured.csv"), read("mse_effective.csv")
for scheme, style in (("orthogonal", "s--"), ("graph", "o-")):
    ax[0, 1].semilogy(*series(ms, scheme, "j_analytic"), style, label=f"measured, {scheme}")
    ax[0, 1].semilogy(*series(me, scheme, "mse_analytic"), style, alpha=0.5, label=f"effective, {scheme}")
ax[0, 1].set(xlabel="threshold [dB]", ylabel="MSE")
ax[0, 1].legend(fontsize=7)

rt = read("rates.csv")
for scheme, style in (("orthogonal", "s--"), ("graph", "o-")):
    ax[1, 0].plot(*series(rt, scheme, "mean_sum_rate"), style, label=scheme)
ax[1, 0].set(xlabel="threshold [dB]", ylabel="sum rate [bit/use]")
ax[1, 0].legend()

cdf = [r for r in read("rate_cdf.csv") if r["selection"] == "graph_optimal" and r["drop_id"] != "all"]
for scheme in ("orthogonal", "graph"):
    x = np.sort([float(r["rate"]) for r in cdf if r["scheme"] == scheme])
    ax[1, 1].plot(x, np.arange(1, len(x) + 1) / len(x), label=scheme)
ax[1, 1].set(xlabel="user rate [bit/use]", ylabel="CDF")
ax[1, 1].legend()

fig.tight_layout()
out = os.path.join(src, "summary.png")
fig.savefig(out, dpi=120)
print(f"wrote {out}")
