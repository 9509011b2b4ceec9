#!/usr/bin/env python3
"""Reference qubit run: max-divergence along single-shot and averaged dynamics.

Drives the CLI ensemble pipeline at the standard parameter point
(g0 = 2, beta = 1, theta = 0.1, coupling variance 0.1, ground-state
input, 1000 runs) and reports where the second laws break.  Pass --plot
to also render the three tracked series to PNG (needs matplotlib).
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path

import thermops.cli as cli

CONFIG = {
    "d": 2,
    "g0": 2.0,
    "beta": 1.0,
    "theta": 0.1,
    "delta_variance": 0.1,
    "steps": 300,
    "runs": 1000,
    "alphas": ["inf"],
    "initial_state": "ground",
    "master_seed": 20240801,
}


def load_series(out_dir: Path):
    lines = (out_dir / "ensemble.csv").read_text().splitlines()
    header = lines[1].split(",")
    cols = {name: i for i, name in enumerate(header)}
    rows = [line.split(",") for line in lines[2:]]
    pick = lambda name: [float(r[cols[name]]) for r in rows]
    return {
        "mean_of_divergence": pick("Dbar_inf"),
        "divergence_of_mc_mean": pick("Dmean_mc_inf"),
        "divergence_of_analytic_mean": pick("Dmean_analytic_inf"),
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="runs/qubit_divergence")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--plot", action="store_true")
    args = parser.parse_args(argv)

    out = Path(args.out)
    with tempfile.TemporaryDirectory() as tmp:
        config_path = Path(tmp) / "config.json"
        config_path.write_text(json.dumps(CONFIG, indent=2))
        cli_args = ["ensemble", "--config", str(config_path), "--out", str(out)]
        if args.seed is not None:
            cli_args += ["--seed", str(args.seed)]
        code = cli.main(cli_args)
    if code != 0:
        return code

    reports = json.loads((out / "violations.json").read_text())["reports"]
    for report in reports:
        n = len(report["events"])
        first = report["first_violation_step"]
        print(f"alpha={report['alpha']}: {n} rising steps"
              + (f", first at step {first}" if n else ""))

    if args.plot:
        try:
            import matplotlib
            matplotlib.use("Agg")
            import matplotlib.pyplot as plt
        except ImportError:
            print("matplotlib is not installed; skipping the plot", file=sys.stderr)
            return 0
        series = load_series(out)
        fig, ax = plt.subplots(figsize=(7, 4.5))
        styles = {"mean_of_divergence": ":", "divergence_of_mc_mean": "-",
                  "divergence_of_analytic_mean": "--"}
        for name, values in series.items():
            ax.plot(values, styles[name], label=name.replace("_", " "))
        ax.set_xlabel("collision number")
        ax.set_ylabel("max-order divergence to the thermal state")
        ax.legend()
        fig.tight_layout()
        fig.savefig(out / "divergence_series.png", dpi=150)
        print(f"wrote {out / 'divergence_series.png'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
