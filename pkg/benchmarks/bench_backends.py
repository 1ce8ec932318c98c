#!/usr/bin/env python3
"""Compare the numba kernels against the pure-Python fallback.

Each backend runs in a fresh subprocess (the backend is chosen at import
time via CALSIM_NUMBA) over the same payload: repeated rollout runs at the
representative point plus a small gain map. Reported times exclude the
one-off JIT compilation, which is timed separately.

Usage: python3 benchmarks/bench_backends.py [--repeats N]
"""

import argparse
import json
import os
import subprocess
import sys

PAYLOAD = r"""
import json, time
import numpy as np
from calsim import (DriftModel, Policy, WorkloadModel, backend_name,
                    default_primitives, default_regimes, run)
from calsim import experiments as ex

repeats = int({repeats})
models = dict(
    workload=WorkloadModel(), drift=DriftModel(),
    primitives=default_primitives(), regimes=default_regimes(),
)

t0 = time.perf_counter()
run(models["workload"], models["drift"], models["primitives"],
    models["regimes"]["tight"], Policy.rollout(6), a0=43200.0)
warmup = time.perf_counter() - t0

t0 = time.perf_counter()
check = 0.0
for _ in range(repeats):
    res = run(models["workload"], models["drift"], models["primitives"],
              models["regimes"]["tight"], Policy.rollout(6), a0=43200.0)
    check = res.mean_gap
rollout_s = (time.perf_counter() - t0) / repeats

t0 = time.perf_counter()
m = ex.gain_map("rollout", models["regimes"]["local"],
                np.linspace(0, 1, 3), np.linspace(0, 86400.0, 3),
                models["workload"], models["drift"], models["primitives"])
gainmap_s = time.perf_counter() - t0

print(json.dumps(dict(backend=backend_name(), warmup_s=warmup,
                      rollout_s=rollout_s, gainmap_s=gainmap_s,
                      mean_gap=check, map_sum=float(m.values.sum()))))
"""


def run_backend(flag: str, repeats: int) -> dict:
    env = dict(os.environ, CALSIM_NUMBA=flag)
    out = subprocess.run(
        [sys.executable, "-c", PAYLOAD.format(repeats=repeats)],
        capture_output=True, text=True, env=env, check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()

    results = [run_backend(flag, args.repeats) for flag in ("auto", "0")]
    fast, slow = results
    if fast["backend"] == slow["backend"]:
        print("numba unavailable; both runs used the python fallback")

    print(f"{'backend':<8} {'warmup':>9} {'rollout run':>12} {'3x3 gain map':>13}")
    for r in results:
        print(
            f"{r['backend']:<8} {r['warmup_s']:>8.2f}s {r['rollout_s']*1e3:>10.2f}ms "
            f"{r['gainmap_s']:>12.2f}s"
        )
    if slow["rollout_s"] > 0:
        print(
            f"speedup: rollout x{slow['rollout_s']/fast['rollout_s']:.1f}, "
            f"gain map x{slow['gainmap_s']/fast['gainmap_s']:.1f}"
        )

    agree = (
        abs(fast["mean_gap"] - slow["mean_gap"]) <= 1e-9 * abs(slow["mean_gap"])
        and abs(fast["map_sum"] - slow["map_sum"]) <= 1e-9 * abs(slow["map_sum"])
    )
    print(f"backends agree to 1e-9 relative: {agree}")
    return 0 if agree else 1


if __name__ == "__main__":
    sys.exit(main())
