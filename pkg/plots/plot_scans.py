#!/usr/bin/env python3
"""Runtime gain versus the classical loop time: fixed-iteration workloads
(budget grows with the loop time) on the left, fixed wall-clock budget on
the right, per latency regime."""

import sys
from pathlib import Path

import matplotlib.pyplot as plt

from _common import (
    PlotInputError,
    REGIME_COLORS,
    REGIME_LABELS,
    REGIME_ORDER,
    read_csv,
    run_script,
    save_figure,
)

SCAN_HEADER = "t_class_s,regime,scan_kind,gain"
KINDS = ("fixed_iteration", "fixed_wall_clock")


def build(in_dir: Path, out_dir: Path):
    rows = read_csv(in_dir / "scans.csv", SCAN_HEADER)
    kinds = {r["scan_kind"] for r in rows}
    missing = [k for k in KINDS if k not in kinds]
    if missing:
        raise PlotInputError(f"scans.csv: missing scan_kind {missing[0]!r}")

    fig, axes = plt.subplots(1, 2, figsize=(8.4, 3.2), constrained_layout=True)
    for ax, kind, title in zip(
        axes, KINDS, ("fixed iteration count", "fixed wall-clock budget (600 s)")
    ):
        for regime in REGIME_ORDER:
            points = sorted(
                (float(r["t_class_s"]), float(r["gain"]))
                for r in rows
                if r["scan_kind"] == kind and r["regime"] == regime
            )
            if not points:
                continue
            ax.plot(
                [p[0] for p in points], [p[1] for p in points], "o-",
                ms=3, lw=1.2, color=REGIME_COLORS[regime],
                label=REGIME_LABELS[regime],
            )
        ax.set_xscale("log")
        ax.axhline(0.0, color="black", lw=0.8)
        ax.set_xlabel("classical time per iteration [s]")
        ax.set_title(title)
    axes[0].set_ylabel("runtime gain")
    axes[0].legend(fontsize=7)
    fig.suptitle("Classical-loop timescale sensitivity")
    return save_figure(fig, out_dir, "scans")


if __name__ == "__main__":
    sys.exit(run_script(build, __doc__))
