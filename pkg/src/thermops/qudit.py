"""Qudit energy structure, thermal states, and the reservoir perturbation.

Conventions: hbar = k_B = 1 and natural logarithms everywhere.  A qudit
with coupling g0 carries the evenly spaced, traceless spectrum

    E_j = g0 * (j - (d - 1) / 2),    j = 0 .. d-1,

so |0> is the ground state.  Reservoir ancillas see a rescaled coupling
g0 * (1 + delta); their occupations depend on delta only through the
product beta * g0 * (1 + delta), which is why a coupling inhomogeneity
and a temperature inhomogeneity are one and the same knob here.

The averaged reservoir state over a Gaussian delta is *not* the thermal
state of the average coupling; it is strictly more mixed whenever
beta > 0 and the spread is nonzero.  `ensemble_thermal_state` computes
that average by Gauss-Hermite quadrature over the full, untruncated
Gaussian (delta < -1 simply inverts the level populations, which stays
perfectly well defined).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_hermite

# Distributions are rejected, never silently renormalized, outside this.
PROB_TOL = 1e-12

# Node-doubling schedule for the Gaussian average.  High variances
# combined with low temperatures genuinely need several hundred nodes
# to stabilize to _QUAD_TOL; scipy's Hermite nodes stay accurate
# throughout this range.
_QUAD_NODES = (16, 32, 64, 128, 256, 512, 1024)
_QUAD_TOL = 1e-12


class QuadratureError(RuntimeError):
    """Node doubling failed to stabilize the Gaussian average."""


@dataclass(frozen=True)
class EnergySpec:
    """System dimension, level spacing, and inverse temperature."""

    d: int
    g0: float
    beta: float

    def __post_init__(self) -> None:
        if not isinstance(self.d, int) or self.d < 2:
            raise ValueError(f"dimension d must be an integer >= 2, got {self.d!r}")
        if not (math.isfinite(self.g0) and self.g0 > 0):
            raise ValueError(f"coupling g0 must be finite and positive, got {self.g0!r}")
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise ValueError(f"inverse temperature beta must be finite and >= 0, got {self.beta!r}")


@dataclass(frozen=True)
class PerturbationSpec:
    """Zero-mean Gaussian spread of the reservoir coupling, delta ~ N(0, variance)."""

    variance: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.variance) and self.variance >= 0):
            raise ValueError(f"variance must be finite and >= 0, got {self.variance!r}")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance)


@dataclass(frozen=True)
class DiagonalState:
    """Population vector of a state diagonal in the energy eigenbasis."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size < 2:
            raise ValueError("state must be a 1-D distribution over at least two levels")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise ValueError("populations must be finite and non-negative")
        total = probs.sum()
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"populations sum to {total!r}, expected 1 within {PROB_TOL}")
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    @property
    def d(self) -> int:
        return self.probs.size

    @classmethod
    def pure(cls, d: int, level: int) -> "DiagonalState":
        if not 0 <= level < d:
            raise ValueError(f"level {level} out of range for dimension {d}")
        p = np.zeros(d)
        p[level] = 1.0
        return cls(p)

    @classmethod
    def ground(cls, d: int) -> "DiagonalState":
        return cls.pure(d, 0)

    @classmethod
    def uniform(cls, d: int) -> "DiagonalState":
        return cls(np.full(d, 1.0 / d))


def energy_levels(spec: EnergySpec) -> np.ndarray:
    """Ascending level energies g0 * (j - (d-1)/2); they always sum to zero."""
    return spec.g0 * (np.arange(spec.d) - (spec.d - 1) / 2)


def log_partition(spec: EnergySpec) -> float:
    """log Z at the unperturbed coupling, evaluated with a max shift."""
    x = -spec.beta * energy_levels(spec)
    m = x.max()
    return float(m + math.log(np.exp(x - m).sum()))


def thermal_probs(spec: EnergySpec, deltas) -> np.ndarray:
    """Boltzmann populations for each coupling offset in `deltas`, shape (n, d).

    Exponents are max-shifted per row, so arbitrarily large |delta|
    (including delta < -1, which inverts the populations) stays finite.
    """
    deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
    expo = -spec.beta * np.outer(1.0 + deltas, energy_levels(spec))
    expo -= expo.max(axis=1, keepdims=True)
    w = np.exp(expo)
    return w / w.sum(axis=1, keepdims=True)


def thermal_state(spec: EnergySpec, delta: float = 0.0) -> DiagonalState:
    """Thermal state at coupling g0 * (1 + delta)."""
    return DiagonalState(thermal_probs(spec, delta)[0])


def ensemble_thermal_state(spec: EnergySpec, pert: PerturbationSpec) -> DiagonalState:
    """Gaussian average of the perturbed thermal states.

    Gauss-Hermite nodes are doubled until successive averages agree to
    1e-12 componentwise; failing that raises QuadratureError.  With zero
    variance this is exactly the unperturbed thermal state.
    """
    if pert.variance == 0.0:
        return thermal_state(spec)
    scale = math.sqrt(2.0) * pert.sigma
    prev = None
    for n in _QUAD_NODES:
        nodes, weights = roots_hermite(n)
        avg = (weights @ thermal_probs(spec, scale * nodes)) / weights.sum()
        if prev is not None and np.max(np.abs(avg - prev)) < _QUAD_TOL:
            return DiagonalState(avg)
        prev = avg
    raise QuadratureError(
        f"Gaussian average did not stabilize to {_QUAD_TOL} within "
        f"{_QUAD_NODES[-1]} Hermite nodes (variance {pert.variance})"
    )


def sample_delta(pert: PerturbationSpec, rng: np.random.Generator) -> float:
    """One Gaussian coupling offset; zero variance always returns 0."""
    return float(rng.normal(0.0, pert.sigma))
