#!/usr/bin/env python3
"""Time-domain trajectories: freshness on top, optimization gap below, one
curve per (regime, policy) trace found in the input directory; calibration
actions drawn as markers on the freshness curves."""

import sys
from pathlib import Path

import matplotlib.pyplot as plt

from _common import (
    PlotInputError,
    REGIME_COLORS,
    REGIME_ORDER,
    read_csv,
    run_script,
    save_figure,
)

TRACE_HEADER = "t_s,age_s,l2,gap,action,step_s"

POLICY_STYLES = {
    "no_cal": (":", "no cal"),
    "periodic_heavy_6": ("--", "periodic heavy (6)"),
    "greedy": ("-.", "greedy"),
    "rollout_6": ("-", "rollout (H=6)"),
}


def build(in_dir: Path, out_dir: Path):
    traces = sorted(in_dir.glob("trace_*.csv"))
    if not traces:
        raise PlotInputError(f"no trace_*.csv files in {in_dir}")

    fig, (ax_l2, ax_gap) = plt.subplots(
        2, 1, figsize=(8.0, 5.6), sharex=True, constrained_layout=True
    )
    for path in traces:
        parts = path.stem.split("_", 2)  # trace_<regime>_<policy>
        if len(parts) < 3 or parts[1] not in REGIME_ORDER:
            continue
        regime, policy = parts[1], parts[2]
        style, label = POLICY_STYLES.get(policy, ("-", policy))
        rows = read_csv(path, TRACE_HEADER)
        t = [float(r["t_s"]) for r in rows]
        l2 = [float(r["l2"]) for r in rows]
        gap = [float(r["gap"]) for r in rows]
        color = REGIME_COLORS[regime]
        ax_l2.plot(t, l2, style, color=color, lw=1.1,
                   label=f"{regime} / {label}")
        ax_gap.plot(t, gap, style, color=color, lw=1.1)
        lights = [(x, y) for x, y, r in zip(t, l2, rows) if r["action"] == "light"]
        heavies = [(x, y) for x, y, r in zip(t, l2, rows) if r["action"] == "heavy"]
        if lights:
            ax_l2.plot(*zip(*lights), "o", color=color, ms=3.0, mfc="none")
        if heavies:
            ax_l2.plot(*zip(*heavies), "^", color=color, ms=4.5)

    ax_l2.set_ylabel("freshness")
    ax_l2.set_ylim(0.0, 1.05)
    ax_gap.set_ylabel("optimization gap")
    ax_gap.set_xlabel("wall-clock time [s]")
    ax_l2.legend(fontsize=6, ncol=2, loc="lower right")
    fig.suptitle("Calibration as a state reset: trajectories under one budget")
    return save_figure(fig, out_dir, "trajectories")


if __name__ == "__main__":
    sys.exit(run_script(build, __doc__))
