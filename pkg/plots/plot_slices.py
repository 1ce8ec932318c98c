#!/usr/bin/env python3
"""One-dimensional slices of the runtime gain through the representative
point: gain versus workload sensitivity at fixed initial age, and gain
versus initial age at fixed sensitivity, per latency regime."""

import sys
from pathlib import Path

import matplotlib.pyplot as plt

from _common import (
    REGIME_COLORS,
    REGIME_LABELS,
    REGIME_ORDER,
    read_csv,
    run_script,
    save_figure,
)

SLICES_HEADER = "slice_kind,x,regime,gain"


def build(in_dir: Path, out_dir: Path):
    rows = read_csv(in_dir / "slices.csv", SLICES_HEADER)
    fig, (ax_alpha, ax_age) = plt.subplots(
        1, 2, figsize=(8.4, 3.2), constrained_layout=True
    )
    for regime in REGIME_ORDER:
        for kind, ax, scale in (("alpha", ax_alpha, 1.0), ("a0", ax_age, 3600.0)):
            points = sorted(
                (float(r["x"]), float(r["gain"]))
                for r in rows
                if r["slice_kind"] == kind and r["regime"] == regime
            )
            if not points:
                continue
            xs = [p[0] / scale for p in points]
            ys = [p[1] for p in points]
            ax.plot(xs, ys, "o-", ms=3, lw=1.2,
                    color=REGIME_COLORS[regime], label=REGIME_LABELS[regime])
    for ax in (ax_alpha, ax_age):
        ax.axhline(0.0, color="black", lw=0.8)
    ax_alpha.set_xlabel("sensitivity (fixed initial age 12 h)")
    ax_alpha.set_ylabel("runtime gain")
    ax_age.set_xlabel("initial age [h] (fixed sensitivity 0.7)")
    ax_alpha.legend(fontsize=7)
    fig.suptitle("Gain slices through the representative point")
    return save_figure(fig, out_dir, "slices")


if __name__ == "__main__":
    sys.exit(run_script(build, __doc__))
