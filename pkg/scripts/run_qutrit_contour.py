#!/usr/bin/env python3
"""Qutrit triangle picture: free-energy contours plus trajectory overlays.

Exports a contour lattice together with three trajectories at the
standard parameter point: one single-shot realisation from the ground
state, the averaged dynamics from the ground state, and the flat
max-divergence path whose top-level population matches the averaged
reservoir.  All outputs are CSV; --plot adds a PNG overlay.
"""

import argparse
import json
import math
import sys
import tempfile
from pathlib import Path

import numpy as np

import thermops.cli as cli
from thermops import (
    DiagonalState,
    EnergySpec,
    PerturbationSpec,
    UniformPartialSwap,
    analytic_trajectory,
    ensemble_thermal_state,
    run_stream,
    simplex_path,
    simulate_single_shot,
)

SPEC = EnergySpec(3, 2.0, 1.0)
PERT = PerturbationSpec(0.1)
THETA = 0.1
STEPS = 300


def export_paths(out: Path, seed: int) -> None:
    mean_thermal = ensemble_thermal_state(SPEC, PERT)
    ground = DiagonalState.ground(3)

    shot = simulate_single_shot(ground, SPEC, PERT, UniformPartialSwap(THETA),
                                STEPS, (), run_stream(seed, 0))
    averaged = analytic_trajectory(ground, mean_thermal, THETA, STEPS)
    top = mean_thermal.probs[2]
    flat_start = DiagonalState(np.array([1.0 - top - 0.01, 0.01, top]))
    flat = analytic_trajectory(flat_start, mean_thermal, THETA, STEPS)

    for name, states in (("single_shot", shot.states), ("averaged", averaged),
                         ("flat_max_order", flat)):
        xy = simplex_path(states)
        lines = ["# thermops-sim v1", "step,p0,p1,p2,x,y"]
        lines += [
            ",".join([str(r)] + [repr(float(v)) for v in (*states[r], *xy[r])])
            for r in range(states.shape[0])
        ]
        (out / f"path_{name}.csv").write_text("\n".join(lines) + "\n")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="runs/qutrit_contour")
    parser.add_argument("--resolution", type=int, default=200)
    parser.add_argument("--seed", type=int, default=77)
    parser.add_argument("--plot", action="store_true")
    args = parser.parse_args(argv)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = {"d": 3, "g0": 2.0, "beta": 1.0, "alphas": [1, "inf"],
              "resolution": args.resolution}
    with tempfile.TemporaryDirectory() as tmp:
        config_path = Path(tmp) / "config.json"
        config_path.write_text(json.dumps(config))
        code = cli.main(["contour", "--config", str(config_path), "--out", str(out)])
    if code != 0:
        return code
    export_paths(out, args.seed)
    print(f"wrote contour.csv and three path_*.csv files under {out}")

    if args.plot:
        try:
            import matplotlib
            matplotlib.use("Agg")
            import matplotlib.pyplot as plt
        except ImportError:
            print("matplotlib is not installed; skipping the plot", file=sys.stderr)
            return 0
        data = np.loadtxt(out / "contour.csv", delimiter=",", skiprows=2)
        x, y, f1, finf = data[:, 0], data[:, 1], data[:, 5], data[:, 6]
        fig, ax = plt.subplots(figsize=(6, 5.5))
        ax.tricontour(x, y, f1, levels=25, colors="m", linewidths=0.6)
        ax.tricontour(x, y, finf, levels=25, colors="k", linewidths=0.6,
                      linestyles="dashdot")
        for name, style in (("single_shot", "g."), ("averaged", "r-"),
                            ("flat_max_order", "c-")):
            path = np.loadtxt(out / f"path_{name}.csv", delimiter=",", skiprows=2)
            ax.plot(path[:, 4], path[:, 5], style, markersize=2, label=name)
        ax.set_aspect("equal")
        ax.legend(loc="upper right")
        fig.tight_layout()
        fig.savefig(out / "contour_overlay.png", dpi=150)
        print(f"wrote {out / 'contour_overlay.png'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
