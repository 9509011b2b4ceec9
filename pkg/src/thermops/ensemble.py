"""Monte Carlo ensembles of collision trajectories.

Per step the engine tracks the three quantities worth comparing:

  * the mean of the per-run divergences (what repeated single-shot
    experiments would average),
  * the divergence of the mean state (the observable candidate), both
    for the Monte Carlo mean and for the closed-form mean dynamics,
  * component means and standard errors of the states themselves.

Run i draws its offsets from an independent stream seeded by
(master_seed, i), so results never depend on execution order or worker
count.  Runs are processed in fixed-size chunks; chunk statistics are
merged in index order, which keeps every float bit reproducible.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .collisions import (
    CollisionUnitary,
    UniformPartialSwap,
    _advance_rows,
    analytic_trajectory,
    collide,
    transfer_matrix,
)
from .divergence import divergence_rows
from .qudit import (
    DiagonalState,
    EnergySpec,
    PerturbationSpec,
    ensemble_thermal_state,
    thermal_probs,
    thermal_state,
)

_CHUNK = 128


@dataclass(frozen=True)
class EnsembleConfig:
    runs: int
    steps: int
    master_seed: int
    spec: EnergySpec
    pert: PerturbationSpec
    unitary: CollisionUnitary
    initial: DiagonalState
    alphas: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.initial.d != self.spec.d:
            raise ValueError("initial state dimension does not match spec")
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))


@dataclass
class EnsembleResult:
    alphas: tuple[float, ...]
    mean_states: np.ndarray = field(repr=False)          # (steps+1, d)
    mean_state_stderr: np.ndarray = field(repr=False)    # (steps+1, d)
    analytic_states: np.ndarray = field(repr=False)      # (steps+1, d)
    mean_divergence: np.ndarray = field(repr=False)      # (steps+1, A)
    divergence_stderr: np.ndarray = field(repr=False)    # (steps+1, A)
    divergence_of_mean_mc: np.ndarray = field(repr=False)
    divergence_of_mean_analytic: np.ndarray = field(repr=False)
    reference: DiagonalState
    mean_thermal: DiagonalState


@dataclass(frozen=True)
class MeanDivergenceTable:
    alphas: tuple[float, ...]
    mc: np.ndarray
    analytic: np.ndarray


def run_stream(master_seed: int, run_index: int) -> np.random.Generator:
    """Independent generator for one run, stable in (master_seed, run_index)."""
    return np.random.default_rng(np.random.SeedSequence((master_seed, run_index)))


def analytic_ensemble_states(cfg: EnsembleConfig, mean_thermal: DiagonalState) -> np.ndarray:
    """Closed-form mean trajectory: relax toward the averaged thermal state."""
    if isinstance(cfg.unitary, UniformPartialSwap):
        return analytic_trajectory(cfg.initial, mean_thermal, cfg.unitary.theta, cfg.steps)
    # Averaging commutes with the (reservoir-linear) population map, so
    # the mean dynamics is the noiseless channel with the mean ancilla.
    out = np.empty((cfg.steps + 1, cfg.spec.d))
    out[0] = cfg.initial.probs
    state = cfg.initial
    for r in range(cfg.steps):
        state = collide(state, mean_thermal, cfg.unitary)
        out[r + 1] = state.probs
    return out


def _chunk_stats(cfg: EnsembleConfig, W: np.ndarray | None, reference: DiagonalState,
                 start: int, stop: int):
    n = stop - start
    steps, d = cfg.steps, cfg.spec.d
    sigma = cfg.pert.sigma
    deltas = np.stack([
        run_stream(cfg.master_seed, i).normal(0.0, sigma, steps)
        for i in range(start, stop)
    ])
    states = np.empty((steps + 1, n, d))
    states[0] = np.tile(cfg.initial.probs, (n, 1))
    rows = states[0]
    for r in range(steps):
        resv = thermal_probs(cfg.spec, deltas[:, r])
        rows = _advance_rows(rows, resv, cfg.unitary, W)
        states[r + 1] = rows

    table = np.empty((steps + 1, n, len(cfg.alphas)))
    flat = states.reshape((steps + 1) * n, d)
    for i, alpha in enumerate(cfg.alphas):
        table[:, :, i] = divergence_rows(flat, reference, alpha).reshape(steps + 1, n)

    mean_s = states.mean(axis=1)
    m2_s = ((states - mean_s[:, None, :]) ** 2).sum(axis=1)
    mean_d = table.mean(axis=1)
    m2_d = ((table - mean_d[:, None, :]) ** 2).sum(axis=1)
    return n, mean_s, m2_s, mean_d, m2_d


def _merge(count, mean, m2, n_b, mean_b, m2_b):
    # Chan's parallel update; applied in chunk order for reproducibility.
    total = count + n_b
    gap = mean_b - mean
    mean = mean + gap * (n_b / total)
    m2 = m2 + m2_b + gap**2 * (count * n_b / total)
    return total, mean, m2


def run_ensemble(cfg: EnsembleConfig, max_threads: int | None = None) -> EnsembleResult:
    """Aggregate `cfg.runs` independent trajectories.

    `max_threads` caps worker threads for chunk evaluation; statistics
    are identical for any value because chunking and merge order are
    fixed by the config alone.
    """
    reference = thermal_state(cfg.spec)
    mean_thermal = ensemble_thermal_state(cfg.spec, cfg.pert)
    analytic = analytic_ensemble_states(cfg, mean_thermal)
    W = None if isinstance(cfg.unitary, UniformPartialSwap) else transfer_matrix(cfg.unitary, cfg.spec.d)

    bounds = [(s, min(s + _CHUNK, cfg.runs)) for s in range(0, cfg.runs, _CHUNK)]
    workers = max_threads if max_threads and max_threads > 0 else 1
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _chunk_stats(cfg, W, reference, *b), bounds))
    else:
        parts = [_chunk_stats(cfg, W, reference, *b) for b in bounds]

    count, mean_s, m2_s, mean_d, m2_d = parts[0]
    for n_b, ms, m2s, md, m2d in parts[1:]:
        new_count, mean_s, m2_s = _merge(count, mean_s, m2_s, n_b, ms, m2s)
        _, mean_d, m2_d = _merge(count, mean_d, m2_d, n_b, md, m2d)
        count = new_count

    if cfg.runs > 1:
        stderr_s = np.sqrt(m2_s / (cfg.runs - 1) / cfg.runs)
        stderr_d = np.sqrt(m2_d / (cfg.runs - 1) / cfg.runs)
    else:
        stderr_s = np.zeros_like(mean_s)
        stderr_d = np.zeros_like(mean_d)

    dom_mc = np.empty_like(mean_d)
    dom_an = np.empty_like(mean_d)
    for i, alpha in enumerate(cfg.alphas):
        dom_mc[:, i] = divergence_rows(mean_s, reference, alpha)
        dom_an[:, i] = divergence_rows(analytic, reference, alpha)

    return EnsembleResult(
        alphas=cfg.alphas,
        mean_states=mean_s,
        mean_state_stderr=stderr_s,
        analytic_states=analytic,
        mean_divergence=mean_d,
        divergence_stderr=stderr_d,
        divergence_of_mean_mc=dom_mc,
        divergence_of_mean_analytic=dom_an,
        reference=reference,
        mean_thermal=mean_thermal,
    )


def divergence_of_mean(result: EnsembleResult, alphas) -> MeanDivergenceTable:
    """Divergence tables of the mean states for an arbitrary set of orders."""
    alphas = tuple(float(a) for a in alphas)
    mc = np.empty((result.mean_states.shape[0], len(alphas)))
    an = np.empty_like(mc)
    for i, alpha in enumerate(alphas):
        mc[:, i] = divergence_rows(result.mean_states, result.reference, alpha)
        an[:, i] = divergence_rows(result.analytic_states, result.reference, alpha)
    return MeanDivergenceTable(alphas=alphas, mc=mc, analytic=an)
