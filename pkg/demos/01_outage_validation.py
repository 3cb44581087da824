"""Closed-form outage probabilities versus Monte Carlo fading simulation.

Sweeps the NOMA power split and the SNR for the solo schemes, overlaying the
analytic curves with 4-sigma error bars from 200k-sample simulation.  The
instantaneous-ordering NOMA estimate is plotted alongside the fixed
mean-power-order one to show the gap between the two SIC readings.

Run from the repository root:  python3 demos/01_outage_validation.py
Writes demos/output/outage_validation.png and prints the audit table.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from aoisched import Scheme, derive, load_config, mc_outage_estimate
from aoisched.link import outage_noma, outage_oma, outage_wet_oma

OUT_DIR = os.path.join(os.path.dirname(__file__), "output")
N_SAMPLES = 200_000


def main():
    os.makedirs(OUT_DIR, exist_ok=True)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.2))

    # --- solo schemes vs SNR ------------------------------------------------
    snrs = np.arange(30, 62, 2)
    for tag, fn, style in (("oma", outage_oma, "-"), ("wet+oma", outage_wet_oma, "--")):
        for dev, color in ((1, "tab:blue"), (2, "tab:orange")):
            analytic = []
            mc_pts = []
            for i, snr in enumerate(snrs):
                d = derive(load_config(f"snr_db = {snr}\n"))
                analytic.append(fn(dev, d.params.p_s_max, d))
                powers = (0.01, 0.0) if dev == 1 else (0.0, 0.01)
                mc = mc_outage_estimate(Scheme(tag, dev), powers, d, N_SAMPLES, seed=100 + i)
                mc_pts.append((mc.estimate[dev - 1], 4 * mc.stderr[dev - 1]))
            ax1.semilogy(snrs, analytic, style, color=color, label=f"{tag} s{dev}")
            est, err = zip(*mc_pts)
            ax1.errorbar(snrs, est, yerr=err, fmt=".", color=color, alpha=0.6)
    ax1.set_xlabel("SNR (dB)")
    ax1.set_ylabel("outage probability")
    ax1.set_title("solo schemes: lines analytic, dots simulated")
    ax1.grid(True, which="both", alpha=0.3)
    ax1.legend(fontsize=8)

    # --- NOMA vs power split at 50 dB --------------------------------------
    d = derive(load_config("snr_db = 50\n"))
    splits = np.arange(1, 10)
    print(f"{'alpha1':>7} {'dev':>3} {'analytic':>10} {'mc (fixed)':>11} {'mc (inst)':>10}")
    for dev, color in ((1, "tab:blue"), (2, "tab:orange")):
        analytic, fixed, inst = [], [], []
        for i, l in enumerate(splits):
            p = (l / 10 * 0.01, (10 - l) / 10 * 0.01)
            analytic.append(outage_noma(p[0], p[1], d).astuple()[dev - 1])
            mc_f = mc_outage_estimate(Scheme("noma"), p, d, N_SAMPLES, seed=200 + i, order="mean")
            mc_i = mc_outage_estimate(Scheme("noma"), p, d, N_SAMPLES,
                                      seed=300 + i, order="instantaneous")
            fixed.append(mc_f.estimate[dev - 1])
            inst.append(mc_i.estimate[dev - 1])
            print(f"{l / 10:7.1f} {dev:3d} {analytic[-1]:10.5f} {fixed[-1]:11.5f} {inst[-1]:10.5f}")
        ax2.plot(splits / 10, analytic, "-", color=color, label=f"analytic s{dev}")
        ax2.plot(splits / 10, fixed, ".", color=color, label=f"mc fixed-order s{dev}")
        ax2.plot(splits / 10, inst, "x", color=color, alpha=0.6,
                 label=f"mc instantaneous s{dev}")
    ax2.set_xlabel("device-1 power fraction")
    ax2.set_ylabel("outage probability")
    ax2.set_title("NOMA at 50 dB: decoding-order readings")
    ax2.grid(True, alpha=0.3)
    ax2.legend(fontsize=7)

    fig.tight_layout()
    path = os.path.join(OUT_DIR, "outage_validation.png")
    fig.savefig(path, dpi=130)
    print(f"\nwrote {path}")


if __name__ == "__main__":
    main()
