"""Command-line entry point.

Subcommands: simulate, gainmap, slices, diagnostics, scan, robustness, all.
Every invocation writes its CSV outputs plus a ``manifest.txt`` holding the
fully resolved configuration; the manifest is itself a valid config file.
Partially written outputs are removed when a command fails.

The output directory resolves as: --out flag, else $CALSIM_OUT_DIR, else
./out.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import experiments
from .config import RunConfig, load_config, parse_duration, write_manifest
from .errors import CalsimError
from .policy import Policy
from .sim import run
from dataclasses import replace

TRACE_POLICIES = ("no_cal", "periodic_heavy_6", "greedy", "rollout")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="calsim",
        description="Wall-clock calibration-policy simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="config file (key = value lines)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--alpha", type=float, help="workload sensitivity in [0, 1]")
        p.add_argument("--a0", help="initial equivalent age (e.g. 12h)")
        p.add_argument("--H", type=int, dest="horizon", help="rollout horizon")
        p.add_argument(
            "--form",
            choices=("rational", "exponential", "linear_cutoff"),
            help="runtime realizability form",
        )
        p.add_argument("--workers", type=int, default=1, help="worker processes")

    p_sim = sub.add_parser("simulate", help="one run, trace CSV")
    add_common(p_sim)
    p_sim.add_argument(
        "--policy",
        default="rollout",
        choices=("no_cal", "periodic_heavy", "fixed_light", "greedy", "rollout"),
    )
    p_sim.add_argument("--period", type=int, default=6, help="schedule period")
    p_sim.add_argument("--regime", default="tight", choices=("cloud", "local", "tight"))

    p_gain = sub.add_parser("gainmap", help="runtime-gain map CSV")
    add_common(p_gain)
    p_gain.add_argument("--controller", default="both", choices=("greedy", "rollout", "both"))
    p_gain.add_argument("--regime", default="all", choices=("cloud", "local", "tight", "all"))

    for name, help_text in (
        ("slices", "gain slices through the representative point"),
        ("diagnostics", "action count / heavy fraction maps"),
        ("robustness", "regime-ordering robustness report"),
    ):
        p = sub.add_parser(name, help=help_text)
        add_common(p)

    p_scan = sub.add_parser("scan", help="classical-loop timescale scan")
    add_common(p_scan)
    p_scan.add_argument(
        "--kind",
        default="both",
        choices=("fixed_iteration", "fixed_wall_clock", "both"),
    )

    p_all = sub.add_parser("all", help="produce every output file")
    add_common(p_all)
    return parser


def _resolve_config(args) -> RunConfig:
    cfg = load_config(args.config)
    overrides = {}
    if args.alpha is not None:
        overrides["alpha"] = args.alpha
    if args.a0 is not None:
        overrides["a0"] = parse_duration(args.a0)
    if args.horizon is not None:
        overrides["horizon"] = args.horizon
    if args.form is not None:
        overrides["realizability_form"] = args.form
    if overrides:
        cfg = replace(cfg, **overrides).validate()
    return cfg


def _resolve_out(args) -> Path:
    out = args.out or os.environ.get("CALSIM_OUT_DIR") or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _policy_from_name(name: str, cfg: RunConfig, period: int = 6) -> Policy:
    if name == "no_cal":
        return Policy.no_cal()
    if name == "periodic_heavy":
        return Policy.periodic_heavy(period)
    if name == "fixed_light":
        return Policy.fixed_light(period)
    if name == "greedy":
        return Policy.greedy()
    if name.startswith("periodic_heavy_"):
        return Policy.periodic_heavy(int(name.rsplit("_", 1)[1]))
    if name.startswith("fixed_light_"):
        return Policy.fixed_light(int(name.rsplit("_", 1)[1]))
    return Policy.rollout(cfg.horizon, cfg.rollout_common_horizon)


class _OutputTracker:
    """Records written files so a failed command leaves nothing behind."""

    def __init__(self):
        self.paths: list[Path] = []

    def add(self, path: Path) -> Path:
        self.paths.append(path)
        return path

    def cleanup(self) -> None:
        for path in self.paths:
            try:
                path.unlink(missing_ok=True)
            except OSError:
                pass


def _write_trace(cfg, regime_name, policy_name, out_dir, tracker):
    drift = cfg.drift_model()
    workload = cfg.workload_model()
    primitives = cfg.primitive_set()
    regime = cfg.regimes()[regime_name]
    policy = _policy_from_name(policy_name, cfg)
    result = run(
        workload, drift, primitives, regime, policy,
        a0=cfg.a0, form=cfg.realizability_form, g0=cfg.g0,
    )
    path = tracker.add(out_dir / f"trace_{regime_name}_{policy.label}.csv")
    result.trace.to_csv(path)
    return result


def _cmd_simulate(args, cfg, out_dir, tracker):
    _write_trace(cfg, args.regime, _policy_from_name(args.policy, cfg, args.period).label
                 if args.policy in ("periodic_heavy", "fixed_light") else args.policy,
                 out_dir, tracker)


def _gainmaps(cfg, controllers, regime_names, n_workers):
    drift = cfg.drift_model()
    workload = cfg.workload_model()
    primitives = cfg.primitive_set()
    regimes = cfg.regimes()
    alpha_grid = experiments.default_alpha_grid(cfg.alpha_grid_n)
    a0_grid = experiments.default_age_grid(cfg.a0_grid_n, cfg.a0_grid_max)
    maps = []
    for controller in controllers:
        for name in regime_names:
            maps.append(
                experiments.gain_map(
                    controller, regimes[name], alpha_grid, a0_grid,
                    workload, drift, primitives,
                    form=cfg.realizability_form, g0=cfg.g0,
                    horizon=cfg.horizon, n_workers=n_workers,
                )
            )
    return maps


def _cmd_gainmap(args, cfg, out_dir, tracker):
    controllers = ("greedy", "rollout") if args.controller == "both" else (args.controller,)
    regime_names = ("cloud", "local", "tight") if args.regime == "all" else (args.regime,)
    maps = _gainmaps(cfg, controllers, regime_names, args.workers)
    experiments.write_gainmap_csv(maps, tracker.add(out_dir / "gainmap.csv"))


def _cmd_slices(args, cfg, out_dir, tracker):
    points = experiments.regime_slices(
        cfg.workload_model(), cfg.drift_model(), cfg.primitive_set(), cfg.regimes(),
        form=cfg.realizability_form, horizon=cfg.horizon,
        alpha_grid=experiments.default_alpha_grid(cfg.alpha_grid_n),
        a0_grid=experiments.default_age_grid(cfg.a0_grid_n, cfg.a0_grid_max),
        g0=cfg.g0,
    )
    experiments.write_slices_csv(points, tracker.add(out_dir / "slices.csv"))


def _cmd_diagnostics(args, cfg, out_dir, tracker):
    diags = experiments.action_diagnostics(
        cfg.workload_model(), cfg.drift_model(), cfg.primitive_set(), cfg.regimes(),
        form=cfg.realizability_form, horizon=cfg.horizon,
        alpha_grid=experiments.default_alpha_grid(cfg.alpha_grid_n),
        a0_grid=experiments.default_age_grid(cfg.a0_grid_n, cfg.a0_grid_max),
        g0=cfg.g0,
    )
    experiments.write_diagnostics_csv(diags, tracker.add(out_dir / "diagnostics.csv"))


def _cmd_scan(args, cfg, out_dir, tracker):
    kinds = (
        ("fixed_iteration", "fixed_wall_clock")
        if getattr(args, "kind", "both") == "both"
        else (args.kind,)
    )
    grid = experiments.default_t_class_grid(
        cfg.t_class_scan_n, cfg.t_class_scan_min, cfg.t_class_scan_max
    )
    points = []
    for kind in kinds:
        points.extend(
            experiments.classical_scan(
                kind, grid, cfg.workload_model(), cfg.drift_model(),
                cfg.primitive_set(), cfg.regimes(),
                form=cfg.realizability_form, horizon=cfg.horizon,
                n_iterations=cfg.fixed_iterations, g0=cfg.g0,
            )
        )
    experiments.write_scan_csv(points, tracker.add(out_dir / "scans.csv"))


def _cmd_robustness(args, cfg, out_dir, tracker):
    rows = experiments.robustness_scan(
        cfg.workload_model(), cfg.drift_model(), cfg.primitive_set(), cfg.regimes(),
        form=cfg.realizability_form, horizon=cfg.horizon, g0=cfg.g0,
    )
    experiments.write_robustness_csv(rows, tracker.add(out_dir / "robustness.csv"))


def _cmd_all(args, cfg, out_dir, tracker):
    for regime_name in ("cloud", "local", "tight"):
        for policy_name in TRACE_POLICIES:
            _write_trace(cfg, regime_name, policy_name, out_dir, tracker)
    maps = _gainmaps(cfg, ("greedy", "rollout"), ("cloud", "local", "tight"), args.workers)
    experiments.write_gainmap_csv(maps, tracker.add(out_dir / "gainmap.csv"))
    _cmd_slices(args, cfg, out_dir, tracker)
    _cmd_diagnostics(args, cfg, out_dir, tracker)
    args_kind = argparse.Namespace(**{**vars(args), "kind": "both"})
    _cmd_scan(args_kind, cfg, out_dir, tracker)
    _cmd_robustness(args, cfg, out_dir, tracker)


_COMMANDS = {
    "simulate": _cmd_simulate,
    "gainmap": _cmd_gainmap,
    "slices": _cmd_slices,
    "diagnostics": _cmd_diagnostics,
    "scan": _cmd_scan,
    "robustness": _cmd_robustness,
    "all": _cmd_all,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    tracker = _OutputTracker()
    try:
        cfg = _resolve_config(args)
        out_dir = _resolve_out(args)
        _COMMANDS[args.command](args, cfg, out_dir, tracker)
        write_manifest(cfg, tracker.add(out_dir / "manifest.txt"))
    except (CalsimError, OSError) as exc:
        tracker.cleanup()
        print(f"calsim: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
