"""Shared plumbing for the figure scripts: CSV loading with schema checks,
deterministic matplotlib setup, and dual PNG/SVG output.

The scripts are read-only over their input CSVs and carry no model logic;
every plotted number comes from a file produced by the simulator CLI.
"""

from __future__ import annotations

import argparse
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


class PlotInputError(Exception):
    """Input CSV missing, malformed, or empty."""


REGIME_ORDER = ("cloud", "local", "tight")
REGIME_COLORS = {"cloud": "#c44e52", "local": "#dd8452", "tight": "#55a868"}
REGIME_LABELS = {
    "cloud": "cloud (25 ms)",
    "local": "local (1 ms)",
    "tight": "tight (4 us)",
}


def setup_style() -> None:
    # fixed hash salt and no embedded dates keep the SVG output byte-stable
    plt.rcParams.update(
        {
            "svg.hashsalt": "calsim-plots",
            "figure.dpi": 110,
            "savefig.dpi": 110,
            "font.size": 9,
            "axes.grid": True,
            "grid.alpha": 0.3,
        }
    )


def io_args(description: str) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=description)
    parser.add_argument("--in", dest="in_dir", required=True, help="CSV directory")
    parser.add_argument("--out", dest="out_dir", required=True, help="image directory")
    return parser.parse_args()


def read_csv(path: Path, expected_header: str) -> list[dict]:
    if not path.exists():
        raise PlotInputError(f"input file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PlotInputError(f"{path.name}: file is empty") from None
        expected = expected_header.split(",")
        for want, got in zip(expected, header + [""] * len(expected)):
            if want != got:
                raise PlotInputError(
                    f"{path.name}: expected column {want!r}, found {got!r}"
                )
        if len(header) != len(expected):
            raise PlotInputError(
                f"{path.name}: unexpected extra column {header[len(expected)]!r}"
            )
        rows = [dict(zip(header, row)) for row in reader]
    if not rows:
        raise PlotInputError(f"{path.name}: no data rows")
    return rows


def save_figure(fig, out_dir: Path, name: str) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for ext in ("png", "svg"):
        path = out_dir / f"{name}.{ext}"
        fig.savefig(path, metadata={"Date": None} if ext == "svg" else None)
        written.append(path)
    plt.close(fig)
    return written


def run_script(build, description: str) -> int:
    args = io_args(description)
    setup_style()
    try:
        written = build(Path(args.in_dir), Path(args.out_dir))
    except PlotInputError as exc:
        print(f"error: {exc}")
        return 1
    for path in written:
        print(f"wrote {path}")
    return 0
