"""Renyi divergences and generalised free energies for diagonal states.

For populations p against a full-support reference q the divergence of
order alpha is

    D_alpha(p||q) = sgn(alpha) / (alpha - 1) * log sum_j p_j^alpha q_j^(1-alpha)

with the usual limits wired in explicitly rather than approached
numerically:

  * alpha = 1   Kullback-Leibler, sum p_j log(p_j / q_j), 0 log 0 = 0
  * alpha = inf log max_j p_j / q_j
  * alpha = 0   the alpha -> 0+ limit, -log sum_{j: p_j > 0} q_j, which is
                identically zero on full-support states

Orders within 1e-9 of 1 are routed to the KL branch.  Interior sums are
evaluated in log space with a max shift.  Negative orders are supported
by the same formula but need full-support p.  Everything is in nats.

The free energy differs from D_alpha by the temperature prefactor and a
constant offset:  F_alpha(p) = (D_alpha(p||thermal) - log Z) / beta.
"""

from __future__ import annotations

import math

import numpy as np

from .qudit import DiagonalState, EnergySpec, log_partition, thermal_state

_ALPHA_ONE_WINDOW = 1e-9


class UnsupportedReferenceError(ValueError):
    """Reference distribution has a zero component."""


class DivergentInputError(ValueError):
    """Negative order needs full-support input populations."""


class UndefinedTemperatureError(ValueError):
    """Free energies need beta > 0; use the divergence at beta = 0."""


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if math.isnan(alpha) or alpha == -math.inf:
        raise ValueError(f"order must be a real number or +inf, got {alpha!r}")
    return alpha


def divergence_rows(states: np.ndarray, reference, alpha: float) -> np.ndarray:
    """D_alpha of each row of `states` against one reference distribution.

    `states` is (n, d) with rows on the simplex; `reference` is a
    DiagonalState or bare length-d vector with all components > 0.
    """
    alpha = _check_alpha(alpha)
    P = np.atleast_2d(np.asarray(states, dtype=float))
    q = reference.probs if isinstance(reference, DiagonalState) else np.asarray(reference, dtype=float)
    if P.shape[1] != q.size:
        raise ValueError(f"dimension mismatch: states have {P.shape[1]} levels, reference {q.size}")
    if np.any(q <= 0):
        raise UnsupportedReferenceError("reference must have full support (all components > 0)")
    lnq = np.log(q)

    if math.isinf(alpha):
        return np.log((P / q).max(axis=1))

    if abs(alpha - 1.0) < _ALPHA_ONE_WINDOW:
        terms = np.where(P > 0, P * (np.log(np.where(P > 0, P, 1.0)) - lnq), 0.0)
        return terms.sum(axis=1)

    if alpha == 0.0:
        return -np.log(((P > 0) * q).sum(axis=1))

    if alpha < 0 and np.any(P == 0):
        raise DivergentInputError("negative orders diverge on states with empty levels")

    with np.errstate(divide="ignore"):
        lnp = np.where(P > 0, np.log(np.where(P > 0, P, 1.0)), -np.inf)
    expo = alpha * lnp + (1.0 - alpha) * lnq
    shift = expo.max(axis=1)
    total = np.exp(expo - shift[:, None]).sum(axis=1)
    sign = 1.0 if alpha > 0 else -1.0
    return sign / (alpha - 1.0) * (shift + np.log(total))


def renyi_divergence(p: DiagonalState, q: DiagonalState, alpha: float) -> float:
    """Divergence of order alpha between two diagonal states."""
    return float(divergence_rows(p.probs[None, :], q, alpha)[0])


def divergence_profile(p: DiagonalState, q: DiagonalState, alphas) -> np.ndarray:
    """renyi_divergence over a list of orders; identifies the offender on error."""
    out = np.empty(len(alphas))
    for i, alpha in enumerate(alphas):
        try:
            out[i] = renyi_divergence(p, q, alpha)
        except ValueError as exc:
            raise type(exc)(f"order alpha={alpha!r}: {exc}") from exc
    return out


def free_energy(p: DiagonalState, spec: EnergySpec, alpha: float) -> float:
    """Generalised free energy (in energy units) against the thermal state."""
    if spec.beta == 0:
        raise UndefinedTemperatureError("free energy is undefined at infinite temperature")
    d = renyi_divergence(p, thermal_state(spec), alpha)
    return (d - log_partition(spec)) / spec.beta
