"""Monotonicity analysis and simplex geometry for trajectories.

Free evolution should only ever move a state down every divergence
contour.  `detect_violations` flags the steps where a divergence series
rises instead; `qubit_violation_scan` maps which qubit initial states
produce such rises on the closed-form mean dynamics.

Qutrit diagonal states are drawn inside an equilateral triangle with the
pure ground state at the bottom-right corner (1, 0), the middle level at
the bottom-left corner (0, 0), and the top level at the apex
(1/2, sqrt(3)/2).  Repeated uniform partial swaps trace straight chords
in that picture; per-block angles bend them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .collisions import analytic_trajectory
from .divergence import divergence_rows
from .qudit import (
    DiagonalState,
    EnergySpec,
    PerturbationSpec,
    ensemble_thermal_state,
    log_partition,
    thermal_state,
)

# Rows: where each pure level lands in the plane.
TRIANGLE_VERTICES = np.array([
    [1.0, 0.0],
    [0.0, 0.0],
    [0.5, math.sqrt(3.0) / 2.0],
])

ANALYTIC_TOL = 1e-10
SAMPLED_TOL = 1e-6


@dataclass(frozen=True)
class ViolationReport:
    alpha: float | None
    tolerance: float
    events: tuple[tuple[int, float], ...]
    max_increase: float
    first_violation_step: int | None

    @property
    def violated(self) -> bool:
        return bool(self.events)


def detect_violations(series, tolerance: float = ANALYTIC_TOL, alpha: float | None = None) -> ViolationReport:
    """Flag every step where the series increases by more than `tolerance`."""
    series = np.asarray(series, dtype=float)
    if series.ndim != 1 or series.size < 2:
        raise ValueError("need a 1-D series of at least two values")
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    diffs = np.diff(series)
    steps = np.flatnonzero(diffs > tolerance)
    events = tuple((int(r), float(diffs[r])) for r in steps)
    return ViolationReport(
        alpha=alpha,
        tolerance=tolerance,
        events=events,
        max_increase=max((inc for _, inc in events), default=0.0),
        first_violation_step=int(steps[0]) if steps.size else None,
    )


@dataclass(frozen=True)
class ScanResult:
    p0_grid: np.ndarray
    all_violated: np.ndarray
    boundary: float | None
    ground_occupation: float        # of the unperturbed thermal state
    mean_ground_occupation: float   # of the Gaussian-averaged one
    alphas: tuple[float, ...]
    tolerance: float


def qubit_violation_scan(spec: EnergySpec, pert: PerturbationSpec, theta: float,
                         steps: int, p0_grid,
                         alphas: tuple[float, ...] = (0.5, 1.0, 2.0, math.inf),
                         tolerance: float = ANALYTIC_TOL) -> ScanResult:
    """Which qubit initial states break monotonicity for every tested order.

    Each grid value p0 seeds the closed-form mean trajectory toward the
    averaged thermal state; the flag is set when every alpha > 0 in
    `alphas` shows at least one rise.  `boundary` is the midpoint of the
    single False-to-True transition (None if the flags are constant or
    not a clean threshold).
    """
    if spec.d != 2:
        raise ValueError("the scan is a qubit construction; need d = 2")
    grid = np.asarray(p0_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("need a 1-D grid of at least two initial occupations")
    if np.any((grid < 0) | (grid > 1)):
        raise ValueError("initial occupations must lie in [0, 1]")
    if any(a <= 0 for a in alphas):
        raise ValueError("the scan tests positive orders only")

    reference = thermal_state(spec)
    mean_thermal = ensemble_thermal_state(spec, pert)
    flags = np.zeros(grid.size, dtype=bool)
    for i, p0 in enumerate(grid):
        initial = DiagonalState(np.array([p0, 1.0 - p0]))
        path = analytic_trajectory(initial, mean_thermal, theta, steps)
        flags[i] = all(
            detect_violations(divergence_rows(path, reference, a), tolerance).violated
            for a in alphas
        )

    order = np.argsort(grid, kind="stable")
    sorted_flags = flags[order]
    boundary = None
    rises = np.flatnonzero(np.diff(sorted_flags.astype(int)) == 1)
    if rises.size == 1 and sorted_flags[rises[0] + 1:].all() and not sorted_flags[:rises[0] + 1].any():
        lo, hi = grid[order][rises[0]], grid[order][rises[0] + 1]
        boundary = float(0.5 * (lo + hi))
    return ScanResult(
        p0_grid=grid,
        all_violated=flags,
        boundary=boundary,
        ground_occupation=float(reference.probs[0]),
        mean_ground_occupation=float(mean_thermal.probs[0]),
        alphas=tuple(alphas),
        tolerance=tolerance,
    )


def _as_qutrit_rows(states) -> np.ndarray:
    if isinstance(states, DiagonalState):
        rows = states.probs[None, :]
    else:
        rows = np.atleast_2d(np.asarray(states, dtype=float))
    if rows.shape[1] != 3:
        raise ValueError(f"triangle coordinates need three levels, got {rows.shape[1]}")
    return rows


def simplex_coords(state) -> np.ndarray:
    """Plane coordinates of one qutrit diagonal state."""
    return (_as_qutrit_rows(state) @ TRIANGLE_VERTICES)[0]


def simplex_path(states) -> np.ndarray:
    """Plane coordinates of a whole trajectory, shape (n, 2)."""
    return _as_qutrit_rows(states) @ TRIANGLE_VERTICES


def straightness_deviation(states) -> float:
    """Largest perpendicular distance of a path from its first-to-last chord."""
    xy = simplex_path(states)
    if xy.shape[0] < 2:
        raise ValueError("need at least two trajectory points")
    rel = xy - xy[0]
    chord = rel[-1]
    length = math.hypot(chord[0], chord[1])
    if length == 0.0:
        return float(np.hypot(rel[:, 0], rel[:, 1]).max())
    return float(np.abs(chord[0] * rel[:, 1] - chord[1] * rel[:, 0]).max() / length)


@dataclass(frozen=True)
class ContourGrid:
    resolution: int
    alphas: tuple[float, ...]
    points: np.ndarray   # (m, 2) plane coordinates
    probs: np.ndarray    # (m, 3) barycentric lattice
    values: np.ndarray   # (m, len(alphas)); +inf marks divergent entries
    value_kind: str      # "free_energy" for beta > 0, "divergence" at beta = 0


def contour_grid(spec: EnergySpec, alphas, resolution: int) -> ContourGrid:
    """Free-energy table over the barycentric lattice of the qutrit triangle.

    The lattice holds (resolution+1)(resolution+2)/2 points including the
    boundary; boundary zeros follow each order's own conventions and
    divergent entries (negative orders against empty levels) are stored
    as +inf.  At beta = 0 the free energy has no meaning, so the raw
    divergences are tabulated instead; the contours are the same.
    """
    if spec.d != 3:
        raise ValueError("contour grids are drawn for qutrits; need d = 3")
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    alphas = tuple(float(a) for a in alphas)

    probs = np.array([
        (i / resolution, j / resolution, (resolution - i - j) / resolution)
        for i in range(resolution + 1)
        for j in range(resolution + 1 - i)
    ])
    reference = thermal_state(spec)
    values = np.empty((probs.shape[0], len(alphas)))
    for col, alpha in enumerate(alphas):
        if alpha < 0:
            interior = (probs > 0).all(axis=1)
            values[~interior, col] = np.inf
            values[interior, col] = divergence_rows(probs[interior], reference, alpha)
        else:
            values[:, col] = divergence_rows(probs, reference, alpha)
    if spec.beta > 0:
        values = (values - log_partition(spec)) / spec.beta
        kind = "free_energy"
    else:
        kind = "divergence"
    return ContourGrid(
        resolution=resolution,
        alphas=alphas,
        points=probs @ TRIANGLE_VERTICES,
        probs=probs,
        values=values,
        value_kind=kind,
    )
