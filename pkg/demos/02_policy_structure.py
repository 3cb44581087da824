"""Optimal-policy structure over the (AoI1, AoI2) plane.

Solves the full 396,900-state baseline scenario at 50 dB and 60 dB and
renders the scheme chosen at the mid-battery slice (11, 11) as heatmaps.
The boundary-switching regions are clearly visible: WET+OMA when one device
is stale and the other can charge, plain OMA along the very stale edges,
NOMA in the broad region where both ages are large and comparable, and a
larger NOMA region at the higher SNR.

Runtime: about 10 seconds.  Writes demos/output/policy_structure.png.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import ListedColormap

from aoisched import State, TransitionKernel, load_config, solve_restricted
from aoisched.mdp import cost_table
from aoisched.policy_io import GRID_SCHEME_CODES

OUT_DIR = os.path.join(os.path.dirname(__file__), "output")
SLICE = (11, 11)
# figure-legend colors: 1 WET+OMA (blue), 2 OMA (green), 3 WET (pink), 4 NOMA (yellow)
CMAP = ListedColormap(["#3b6fd4", "#4caf50", "#f48fb1", "#ffd54f"])


def scheme_grid(kernel, policy, e1, e2):
    dmax = kernel.params.delta_max
    grid = np.empty((dmax, dmax), dtype=int)
    for d1 in range(1, dmax + 1):
        for d2 in range(1, dmax + 1):
            a = int(policy[kernel.space.index(State(d1, d2, e1, e2))])
            grid[d1 - 1, d2 - 1] = GRID_SCHEME_CODES[kernel.actions.scheme(a).tag]
    return grid


def main():
    os.makedirs(OUT_DIR, exist_ok=True)
    params = load_config("")
    base = TransitionKernel(params)
    costs = cost_table(base.space, params)

    fig, axes = plt.subplots(1, 2, figsize=(11, 4.8))
    for ax, snr in zip(axes, (50, 60)):
        kernel = base.at_snr(snr)
        print(f"solving adaptive policy at {snr} dB ...")
        result = solve_restricted(kernel, costs, "adaptive", params.gamma, params.eps_star)
        grid = scheme_grid(kernel, result.policy, *SLICE)
        for code, name in ((1, "WET+OMA"), (2, "OMA"), (3, "WET"), (4, "NOMA")):
            print(f"  {name:8s}: {(grid == code).sum():4d} cells")
        im = ax.imshow(grid.T, origin="lower", cmap=CMAP, vmin=0.5, vmax=4.5,
                       extent=(0.5, 30.5, 0.5, 30.5))
        ax.set_xlabel("AoI of device 1")
        ax.set_ylabel("AoI of device 2")
        ax.set_title(f"battery slice {SLICE}, SNR {snr} dB")
    cbar = fig.colorbar(im, ax=axes, ticks=[1, 2, 3, 4], shrink=0.85)
    cbar.ax.set_yticklabels(["1 WET+OMA", "2 OMA", "3 WET", "4 NOMA"])

    path = os.path.join(OUT_DIR, "policy_structure.png")
    fig.savefig(path, dpi=130)
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
