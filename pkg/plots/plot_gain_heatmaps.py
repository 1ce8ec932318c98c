#!/usr/bin/env python3
"""Runtime-gain maps over (sensitivity, initial age): one panel per latency
regime, one row per controller. Red marks cells where the best open-loop
schedule wins, green where the runtime controller wins; the black contour
traces zero where both signs are present."""

import sys
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

from _common import (
    PlotInputError,
    REGIME_LABELS,
    REGIME_ORDER,
    read_csv,
    run_script,
    save_figure,
)

GAINMAP_HEADER = "alpha,a0_s,regime,controller,delta_open"


def build(in_dir: Path, out_dir: Path):
    rows = read_csv(in_dir / "gainmap.csv", GAINMAP_HEADER)
    controllers = sorted({r["controller"] for r in rows})
    grids = {}
    for r in rows:
        key = (r["controller"], r["regime"])
        grids.setdefault(key, []).append(
            (float(r["alpha"]), float(r["a0_s"]), float(r["delta_open"]))
        )
    missing = [
        (c, reg)
        for c in controllers
        for reg in REGIME_ORDER
        if (c, reg) not in grids
    ]
    if missing:
        raise PlotInputError(f"gainmap.csv: missing controller/regime {missing[0]}")

    vmax = max(abs(float(r["delta_open"])) for r in rows) or 1.0
    fig, axes = plt.subplots(
        len(controllers), 3,
        figsize=(9.2, 2.9 * len(controllers)),
        constrained_layout=True, squeeze=False,
    )
    mesh = None
    for i, controller in enumerate(controllers):
        for j, regime in enumerate(REGIME_ORDER):
            ax = axes[i][j]
            cells = grids[(controller, regime)]
            alphas = np.array(sorted({c[0] for c in cells}))
            ages = np.array(sorted({c[1] for c in cells}))
            values = np.full((alphas.size, ages.size), np.nan)
            index = {(a, b): v for a, b, v in cells}
            for ia, a in enumerate(alphas):
                for ja, b in enumerate(ages):
                    values[ia, ja] = index[(a, b)]
            mesh = ax.pcolormesh(
                ages / 3600.0, alphas, values,
                cmap="RdYlGn", vmin=-vmax, vmax=vmax, shading="nearest",
            )
            if (values > 0).any() and (values < 0).any():
                ax.contour(
                    ages / 3600.0, alphas, values,
                    levels=[0.0], colors="black", linewidths=1.0,
                )
            if i == 0:
                ax.set_title(REGIME_LABELS[regime])
            if i == len(controllers) - 1:
                ax.set_xlabel("initial age [h]")
            if j == 0:
                ax.set_ylabel(f"{controller}\nsensitivity")
            ax.grid(False)
    fig.colorbar(mesh, ax=axes, label="runtime gain", shrink=0.85)
    fig.suptitle("Runtime gain over the strengthened open-loop family")
    return save_figure(fig, out_dir, "gain_heatmaps")


if __name__ == "__main__":
    sys.exit(run_script(build, __doc__))
