#!/usr/bin/env python3
"""Rollout-controller action diagnostics over the parameter grid: total
calibration actions (top row) and the fraction of heavy actions (bottom
row), one column per latency regime."""

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

DIAGNOSTICS_HEADER = "alpha,a0_s,regime,total_actions,heavy_fraction"


def build(in_dir: Path, out_dir: Path):
    rows = read_csv(in_dir / "diagnostics.csv", DIAGNOSTICS_HEADER)
    by_regime = {}
    for r in rows:
        by_regime.setdefault(r["regime"], []).append(r)
    missing = [reg for reg in REGIME_ORDER if reg not in by_regime]
    if missing:
        raise PlotInputError(f"diagnostics.csv: missing regime {missing[0]!r}")

    count_max = max(int(r["total_actions"]) for r in rows) or 1
    fig, axes = plt.subplots(2, 3, figsize=(9.2, 5.4), constrained_layout=True)
    meshes = [None, None]
    for j, regime in enumerate(REGIME_ORDER):
        cells = by_regime[regime]
        alphas = np.array(sorted({float(r["alpha"]) for r in cells}))
        ages = np.array(sorted({float(r["a0_s"]) for r in cells}))
        counts = np.zeros((alphas.size, ages.size))
        fractions = np.zeros_like(counts)
        index = {
            (float(r["alpha"]), float(r["a0_s"])): (
                int(r["total_actions"]), float(r["heavy_fraction"])
            )
            for r in cells
        }
        for ia, a in enumerate(alphas):
            for ja, b in enumerate(ages):
                counts[ia, ja], fractions[ia, ja] = index[(a, b)]
        meshes[0] = axes[0][j].pcolormesh(
            ages / 3600.0, alphas, counts,
            cmap="viridis", vmin=0, vmax=count_max, shading="nearest",
        )
        meshes[1] = axes[1][j].pcolormesh(
            ages / 3600.0, alphas, fractions,
            cmap="magma", vmin=0.0, vmax=1.0, shading="nearest",
        )
        axes[0][j].set_title(REGIME_LABELS[regime])
        axes[1][j].set_xlabel("initial age [h]")
        for i in (0, 1):
            axes[i][j].grid(False)
    axes[0][0].set_ylabel("sensitivity")
    axes[1][0].set_ylabel("sensitivity")
    fig.colorbar(meshes[0], ax=axes[0], label="total actions", shrink=0.9)
    fig.colorbar(meshes[1], ax=axes[1], label="heavy fraction", shrink=0.9)
    fig.suptitle("Intervention frequency vs depth (rollout controller)")
    return save_figure(fig, out_dir, "diagnostics")


if __name__ == "__main__":
    sys.exit(run_script(build, __doc__))
