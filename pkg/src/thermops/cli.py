"""Command-line harness: JSON configs in, deterministic CSV/JSON files out.

    thermops <mode> --config <path> [--seed <u64>] [--out <dir>]

Modes and their outputs:

  single-shot  one random trajectory        trajectory.csv, violations.json
  ensemble     Monte Carlo ensemble         ensemble.csv, trajectory.csv
               (first run)                  violations.json (closed-form mean series)
  contour      qutrit free-energy lattice   contour.csv
  scan         qubit initial-state sweep    scan.csv, scan.json
  curved       per-block-angle trajectory   trajectory.csv, curved.json

Configs are strict: unknown fields are rejected, every value is
validated at parse time.  Floats are serialised with their shortest
round-trip representation and files are written via temp-and-rename, so
identical configs produce byte-identical outputs.  THERMOPS_THREADS
caps ensemble worker threads (0 or unset picks the CPU count).
Exit codes: 0 success, 2 config error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .collisions import (
    BlockPartialSwap,
    CollisionUnitary,
    UniformPartialSwap,
    analytic_trajectory,
    build_block_unitary,
    collide,
    simulate_single_shot,
)
from .divergence import divergence_rows
from .ensemble import EnsembleConfig, run_ensemble, run_stream
from .geometry import (
    ANALYTIC_TOL,
    SAMPLED_TOL,
    ViolationReport,
    contour_grid,
    detect_violations,
    qubit_violation_scan,
    simplex_path,
    straightness_deviation,
)
from .qudit import (
    DiagonalState,
    EnergySpec,
    PerturbationSpec,
    QuadratureError,
    ensemble_thermal_state,
    thermal_state,
)

MODES = ("single-shot", "ensemble", "contour", "scan", "curved")

_COMMON_FIELDS = {"mode", "d", "g0", "beta", "output_dir"}
_ALLOWED = {
    "single-shot": _COMMON_FIELDS | {
        "delta_variance", "theta", "theta_blocks", "blocks", "steps",
        "alphas", "initial_state", "master_seed", "violation_tolerance",
    },
    "ensemble": _COMMON_FIELDS | {
        "delta_variance", "theta", "theta_blocks", "blocks", "steps", "runs",
        "alphas", "initial_state", "master_seed", "violation_tolerance",
    },
    "contour": _COMMON_FIELDS | {"alphas", "resolution"},
    "scan": _COMMON_FIELDS | {
        "delta_variance", "theta", "steps", "p0_grid", "alphas", "violation_tolerance",
    },
    "curved": _COMMON_FIELDS | {
        "delta_variance", "theta", "theta_blocks", "blocks", "steps",
        "alphas", "initial_state",
    },
}
_REQUIRED = {
    "single-shot": {"d", "g0", "beta", "steps", "alphas", "initial_state", "master_seed"},
    "ensemble": {"d", "g0", "beta", "steps", "runs", "alphas", "initial_state", "master_seed"},
    "contour": {"d", "g0", "beta", "alphas", "resolution"},
    "scan": {"d", "g0", "beta", "delta_variance", "theta", "steps", "p0_grid"},
    "curved": {"d", "g0", "beta", "steps", "initial_state"},
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    mode: str
    spec: EnergySpec
    pert: PerturbationSpec
    unitary: CollisionUnitary | None
    steps: int
    runs: int
    alphas: tuple[float, ...]
    initial: DiagonalState | None
    master_seed: int
    resolution: int
    p0_grid: np.ndarray | None
    output_dir: str | None
    violation_tolerance: float | None


def _fail(field: str, message: str):
    raise ConfigError(f"{field}: {message}")


def _number(raw, field: str) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        _fail(field, f"expected a number, got {raw!r}")
    return float(raw)


def _integer(raw, field: str) -> int:
    if isinstance(raw, bool) or not isinstance(raw, int):
        _fail(field, f"expected an integer, got {raw!r}")
    return raw


def _parse_alphas(raw) -> tuple[float, ...]:
    if not isinstance(raw, list) or not raw:
        _fail("alphas", "expected a non-empty list of numbers or the token \"inf\"")
    out = []
    for i, item in enumerate(raw):
        if item == "inf":
            out.append(math.inf)
        elif isinstance(item, (int, float)) and not isinstance(item, bool):
            value = float(item)
            if math.isnan(value):
                _fail(f"alphas[{i}]", "NaN is not a valid order")
            if value < 0:
                print(f"warning: alphas[{i}] = {value} is negative; "
                      "no monotonicity claims apply to negative orders", file=sys.stderr)
            out.append(value)
        else:
            _fail(f"alphas[{i}]", f"expected a number or \"inf\", got {item!r}")
    return tuple(out)


def _parse_initial(raw, d: int) -> DiagonalState:
    if raw == "ground":
        return DiagonalState.ground(d)
    if isinstance(raw, list):
        try:
            state = DiagonalState(np.asarray(raw, dtype=float))
        except (TypeError, ValueError) as exc:
            _fail("initial_state", str(exc))
        if state.d != d:
            _fail("initial_state", f"has {state.d} entries, expected d = {d}")
        return state
    _fail("initial_state", f"expected \"ground\" or a probability list, got {raw!r}")


def _parse_unitary(data: dict, mode: str, d: int) -> CollisionUnitary | None:
    given = [k for k in ("theta", "theta_blocks", "blocks") if k in data]
    if mode == "contour":
        return None
    if mode == "scan":
        if given != ["theta"]:
            _fail("theta", "scan mode takes the uniform swap angle only")
        return UniformPartialSwap(_number(data["theta"], "theta"))
    if len(given) != 1:
        _fail("theta", "exactly one of theta, theta_blocks, blocks is required")
    key = given[0]
    if key == "theta":
        return UniformPartialSwap(_number(data["theta"], "theta"))
    if key == "theta_blocks":
        raw = data["theta_blocks"]
        if not isinstance(raw, list):
            _fail("theta_blocks", "expected a list of angles, one per joint-energy block")
        try:
            return BlockPartialSwap(tuple(_number(t, f"theta_blocks[{i}]") for i, t in enumerate(raw)))
        except ValueError as exc:
            _fail("theta_blocks", str(exc))
    raw = data["blocks"]
    if not isinstance(raw, list):
        _fail("blocks", "expected a list of per-block matrices (nested [re, im] pairs) or angles")
    try:
        parsed = [b if isinstance(b, (int, float)) else _complex_matrix(b, f"blocks[{k}]")
                  for k, b in enumerate(raw)]
        return build_block_unitary(d, parsed)
    except ConfigError:
        raise
    except ValueError as exc:
        _fail("blocks", str(exc))


def _complex_matrix(raw, field: str) -> np.ndarray:
    # Matrix entries are [re, im] pairs so that plain JSON can carry them.
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        _fail(field, "expected a nested list of [re, im] entries")
    if arr.ndim != 3 or arr.shape[0] != arr.shape[1] or arr.shape[2] != 2:
        _fail(field, f"expected shape (n, n, 2) of [re, im] entries, got {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _parse_p0_grid(raw) -> np.ndarray:
    if isinstance(raw, list):
        if len(raw) < 2:
            _fail("p0_grid", "need at least two grid values")
        grid = np.asarray([_number(x, f"p0_grid[{i}]") for i, x in enumerate(raw)])
    elif isinstance(raw, dict):
        unknown = set(raw) - {"count", "start", "stop"}
        if unknown:
            _fail("p0_grid", f"unknown keys {sorted(unknown)}")
        count = _integer(raw.get("count", 0), "p0_grid.count")
        if count < 2:
            _fail("p0_grid.count", "need at least two points")
        start = _number(raw.get("start", 0.0), "p0_grid.start")
        stop = _number(raw.get("stop", 1.0), "p0_grid.stop")
        grid = np.linspace(start, stop, count)
    else:
        _fail("p0_grid", f"expected a list or {{count, start, stop}}, got {raw!r}")
    if np.any((grid < 0) | (grid > 1)):
        _fail("p0_grid", "occupations must lie in [0, 1]")
    return grid


def parse_config(path, mode: str | None = None) -> RunConfig:
    """Load and validate a JSON run configuration."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")

    file_mode = data.get("mode")
    if file_mode is not None and not isinstance(file_mode, str):
        _fail("mode", f"expected a string, got {file_mode!r}")
    if mode is None:
        mode = file_mode
    elif file_mode is not None and file_mode != mode:
        _fail("mode", f"config says {file_mode!r} but {mode!r} was requested")
    if mode not in MODES:
        raise ConfigError(f"mode: expected one of {', '.join(MODES)}, got {mode!r}")

    unknown = set(data) - _ALLOWED[mode]
    if unknown:
        _fail(sorted(unknown)[0], f"unknown field for mode {mode!r}")
    missing = _REQUIRED[mode] - set(data)
    if missing:
        _fail(sorted(missing)[0], f"required for mode {mode!r}")

    d = _integer(data["d"], "d")
    try:
        spec = EnergySpec(d=d, g0=_number(data["g0"], "g0"), beta=_number(data["beta"], "beta"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if mode == "contour" and d != 3:
        _fail("d", "contour mode draws qutrit triangles; need d = 3")
    if mode == "scan" and d != 2:
        _fail("d", "scan mode is a qubit construction; need d = 2")

    try:
        pert = PerturbationSpec(_number(data.get("delta_variance", 0.0), "delta_variance"))
    except ValueError as exc:
        raise ConfigError(f"delta_variance: {exc}") from exc

    unitary = _parse_unitary(data, mode, d)

    steps = _integer(data.get("steps", 1), "steps")
    if "steps" in data and steps < 1:
        _fail("steps", "must be >= 1")
    runs = _integer(data.get("runs", 1), "runs")
    if "runs" in data and runs < 1:
        _fail("runs", "must be >= 1")

    alphas = _parse_alphas(data["alphas"]) if "alphas" in data else (0.5, 1.0, 2.0, math.inf)
    initial = _parse_initial(data["initial_state"], d) if "initial_state" in data else None

    master_seed = _integer(data.get("master_seed", 0), "master_seed")
    if not 0 <= master_seed < 2**64:
        _fail("master_seed", "must fit in an unsigned 64-bit integer")

    resolution = _integer(data.get("resolution", 0), "resolution")
    if mode == "contour" and resolution < 2:
        _fail("resolution", "must be >= 2")

    p0_grid = _parse_p0_grid(data["p0_grid"]) if mode == "scan" else None

    output_dir = data.get("output_dir")
    if output_dir is not None and not isinstance(output_dir, str):
        _fail("output_dir", f"expected a string, got {output_dir!r}")

    tol = data.get("violation_tolerance")
    if tol is not None:
        tol = _number(tol, "violation_tolerance")
        if tol < 0:
            _fail("violation_tolerance", "must be >= 0")

    return RunConfig(
        mode=mode, spec=spec, pert=pert, unitary=unitary, steps=steps, runs=runs,
        alphas=alphas, initial=initial, master_seed=master_seed, resolution=resolution,
        p0_grid=p0_grid, output_dir=output_dir, violation_tolerance=tol,
    )


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(value)


def _alpha_label(alpha: float) -> str:
    return "inf" if math.isinf(alpha) else f"{alpha:g}"


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = ["# thermops-sim v1", ",".join(header)]
    lines.extend(",".join(_fmt(v) if v is not None else "" for v in row) for row in rows)
    _write_atomic(path, "\n".join(lines) + "\n")


def _write_json(path: Path, payload) -> None:
    _write_atomic(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _report_payload(report: ViolationReport) -> dict:
    return {
        "alpha": "inf" if report.alpha is not None and math.isinf(report.alpha) else report.alpha,
        "tolerance": report.tolerance,
        "events": [{"step": step, "increase": inc} for step, inc in report.events],
        "max_increase": report.max_increase,
        "first_violation_step": report.first_violation_step,
    }


def _trajectory_rows(states: np.ndarray, deltas: np.ndarray | None, table: np.ndarray):
    for r in range(states.shape[0]):
        delta = None if r == 0 or deltas is None else deltas[r - 1]
        yield [r, *states[r], delta, *table[r]]


def _trajectory_header(d: int, alphas) -> list[str]:
    return (["step"] + [f"p_{j}" for j in range(d)] + ["delta"]
            + [f"D_{_alpha_label(a)}" for a in alphas])


# ---------------------------------------------------------------------------
# mode pipelines
# ---------------------------------------------------------------------------

def _run_single_shot(cfg: RunConfig, out: Path) -> None:
    traj = simulate_single_shot(cfg.initial, cfg.spec, cfg.pert, cfg.unitary,
                                cfg.steps, cfg.alphas, run_stream(cfg.master_seed, 0))
    _write_csv(out / "trajectory.csv", _trajectory_header(cfg.spec.d, cfg.alphas),
               _trajectory_rows(traj.states, traj.deltas, traj.divergences))
    tol = cfg.violation_tolerance if cfg.violation_tolerance is not None else SAMPLED_TOL
    reports = [detect_violations(traj.divergences[:, i], tol, alpha)
               for i, alpha in enumerate(cfg.alphas)]
    _write_json(out / "violations.json", {"series": "single_shot",
                                          "reports": [_report_payload(r) for r in reports]})


def _thread_cap() -> int | None:
    raw = os.environ.get("THERMOPS_THREADS")
    if raw is None:
        return None
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ConfigError(f"THERMOPS_THREADS: expected an integer, got {raw!r}") from exc
    if cap < 0:
        raise ConfigError("THERMOPS_THREADS: must be >= 0")
    return (os.cpu_count() or 1) if cap == 0 else cap


def _run_ensemble(cfg: RunConfig, out: Path) -> None:
    ecfg = EnsembleConfig(runs=cfg.runs, steps=cfg.steps, master_seed=cfg.master_seed,
                          spec=cfg.spec, pert=cfg.pert, unitary=cfg.unitary,
                          initial=cfg.initial, alphas=cfg.alphas)
    result = run_ensemble(ecfg, max_threads=_thread_cap())

    d = cfg.spec.d
    header = (["step"] + [f"analytic_p_{j}" for j in range(d)] + [f"mean_p_{j}" for j in range(d)])
    for a in cfg.alphas:
        label = _alpha_label(a)
        header += [f"Dbar_{label}", f"Dmean_mc_{label}", f"Dmean_analytic_{label}", f"stderr_{label}"]

    def rows():
        for r in range(cfg.steps + 1):
            row = [r, *result.analytic_states[r], *result.mean_states[r]]
            for i in range(len(cfg.alphas)):
                row += [result.mean_divergence[r, i], result.divergence_of_mean_mc[r, i],
                        result.divergence_of_mean_analytic[r, i], result.divergence_stderr[r, i]]
            yield row

    _write_csv(out / "ensemble.csv", header, rows())

    sample = simulate_single_shot(cfg.initial, cfg.spec, cfg.pert, cfg.unitary,
                                  cfg.steps, cfg.alphas, run_stream(cfg.master_seed, 0))
    _write_csv(out / "trajectory.csv", _trajectory_header(d, cfg.alphas),
               _trajectory_rows(sample.states, sample.deltas, sample.divergences))

    tol = cfg.violation_tolerance if cfg.violation_tolerance is not None else ANALYTIC_TOL
    reports = [detect_violations(result.divergence_of_mean_analytic[:, i], tol, alpha)
               for i, alpha in enumerate(cfg.alphas)]
    _write_json(out / "violations.json", {"series": "analytic_mean",
                                          "reports": [_report_payload(r) for r in reports]})


def _run_contour(cfg: RunConfig, out: Path) -> None:
    grid = contour_grid(cfg.spec, cfg.alphas, cfg.resolution)
    prefix = "F" if grid.value_kind == "free_energy" else "D"
    header = ["x", "y", "p0", "p1", "p2"] + [f"{prefix}_{_alpha_label(a)}" for a in cfg.alphas]
    rows = ([*grid.points[i], *grid.probs[i], *grid.values[i]] for i in range(grid.probs.shape[0]))
    _write_csv(out / "contour.csv", header, rows)


def _run_scan(cfg: RunConfig, out: Path) -> None:
    tol = cfg.violation_tolerance if cfg.violation_tolerance is not None else ANALYTIC_TOL
    result = qubit_violation_scan(cfg.spec, cfg.pert, cfg.unitary.theta, cfg.steps,
                                  cfg.p0_grid, alphas=cfg.alphas, tolerance=tol)
    _write_csv(out / "scan.csv", ["p0", "all_violated"],
               ([p0, int(flag)] for p0, flag in zip(result.p0_grid, result.all_violated)))
    _write_json(out / "scan.json", {
        "boundary": result.boundary,
        "ground_occupation": result.ground_occupation,
        "mean_ground_occupation": result.mean_ground_occupation,
        "alphas": ["inf" if math.isinf(a) else a for a in result.alphas],
        "tolerance": result.tolerance,
    })


def _run_curved(cfg: RunConfig, out: Path) -> None:
    mean_thermal = ensemble_thermal_state(cfg.spec, cfg.pert)
    states = np.empty((cfg.steps + 1, cfg.spec.d))
    states[0] = cfg.initial.probs
    state = cfg.initial
    for r in range(cfg.steps):
        state = collide(state, mean_thermal, cfg.unitary)
        states[r + 1] = state.probs
    reference = thermal_state(cfg.spec)
    table = np.column_stack([divergence_rows(states, reference, a) for a in cfg.alphas])
    _write_csv(out / "trajectory.csv", _trajectory_header(cfg.spec.d, cfg.alphas),
               _trajectory_rows(states, None, table))
    payload = {"steps": cfg.steps}
    if cfg.spec.d == 3:
        payload["straightness_deviation"] = straightness_deviation(states)
        payload["simplex_endpoints"] = [list(simplex_path(states)[0]), list(simplex_path(states)[-1])]
    _write_json(out / "curved.json", payload)


_PIPELINES = {
    "single-shot": _run_single_shot,
    "ensemble": _run_ensemble,
    "contour": _run_contour,
    "scan": _run_scan,
    "curved": _run_curved,
}


def run(cfg: RunConfig, out_dir=None) -> int:
    """Execute one validated configuration; returns the process exit status."""
    target = out_dir or cfg.output_dir or "thermops_out"
    out = Path(target)
    out.mkdir(parents=True, exist_ok=True)
    _PIPELINES[cfg.mode](cfg, out)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="thermops", description=__doc__.splitlines()[0])
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", required=True, help="path to a JSON run configuration")
    parser.add_argument("--seed", type=int, default=None, help="override the config master_seed")
    parser.add_argument("--out", default=None, help="output directory (overrides config output_dir)")
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(args.config, mode=args.mode)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("--seed must fit in an unsigned 64-bit integer")
            cfg.master_seed = args.seed
        return run(cfg, out_dir=args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except QuadratureError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
