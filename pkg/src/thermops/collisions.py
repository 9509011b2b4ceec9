"""Collision channel on diagonal states.

One collision couples the system qudit to a fresh thermal ancilla through
a unitary that is block diagonal over the joint energy subspaces
span{|j, j'> : j + j' = k}.  Such unitaries never build coherences out of
diagonal product inputs (after tracing out the ancilla), so the fast path
tracks populations only; `reference_collide` is a dense d^2 x d^2 oracle
kept around to certify that reduction.

Three interaction flavours are supported:

  * UniformPartialSwap(theta): |jj'> -> cos(theta)|jj'> + i sin(theta)|j'j>,
    the same angle in every block.  On populations this is exactly
    p' = cos^2(theta) p + sin^2(theta) q.
  * BlockPartialSwap(thetas): one swap angle per joint-energy block.
  * GeneralBlockUnitary(blocks): arbitrary unitaries, one per block.

Coupling inhomogeneity enters only through the ancilla state handed to
`collide`; the unitary itself never depends on it.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .divergence import divergence_rows
from .qudit import (
    DiagonalState,
    EnergySpec,
    PerturbationSpec,
    energy_levels,
    sample_delta,
    thermal_probs,
    thermal_state,
)

UNITARY_TOL = 1e-12
_ORACLE_MAX_DIM = 8


def block_dimensions(d: int) -> np.ndarray:
    """Sizes of the joint energy subspaces, dim_k = d - |k - (d-1)|, k = 0..2d-2."""
    if d < 2:
        raise ValueError(f"dimension d must be >= 2, got {d}")
    k = np.arange(2 * d - 1)
    return d - np.abs(k - (d - 1))


def free_parameter_count(d: int) -> int:
    """Parameters of a general energy-conserving unitary: sum of squared block sizes."""
    return int((block_dimensions(d) ** 2).sum())


def _block_levels(d: int, k: int) -> list[tuple[int, int]]:
    # Pairs (j, j') with j + j' = k, ordered by ascending system level j.
    lo, hi = max(0, k - d + 1), min(k, d - 1)
    return [(j, k - j) for j in range(lo, hi + 1)]


def partial_swap_block(d: int, k: int, theta: float) -> np.ndarray:
    """Restriction of the partial swap to joint-energy block k.

    |jj> components are fixed; each pair (|jj'>, |j'j>) mixes as
    cos(theta) on the diagonal and i sin(theta) off it.
    """
    pairs = _block_levels(d, k)
    n = len(pairs)
    mat = np.eye(n, dtype=complex)
    c, s = math.cos(theta), math.sin(theta)
    for a, (j, jp) in enumerate(pairs):
        if j >= jp:
            continue
        b = pairs.index((jp, j))
        mat[a, a] = c
        mat[b, b] = c
        mat[a, b] = 1j * s
        mat[b, a] = 1j * s
    return mat


@dataclass(frozen=True)
class UniformPartialSwap:
    theta: float

    def block_matrices(self, d: int) -> tuple[np.ndarray, ...]:
        return tuple(partial_swap_block(d, k, self.theta) for k in range(2 * d - 1))


@dataclass(frozen=True)
class BlockPartialSwap:
    thetas: tuple[float, ...]

    def __post_init__(self) -> None:
        thetas = tuple(float(t) for t in self.thetas)
        if len(thetas) < 3 or len(thetas) % 2 == 0:
            raise ValueError("need one angle per joint-energy block: an odd count 2d-1 >= 3")
        object.__setattr__(self, "thetas", thetas)

    @property
    def d(self) -> int:
        return (len(self.thetas) + 1) // 2

    def block_matrices(self, d: int) -> tuple[np.ndarray, ...]:
        if d != self.d:
            raise ValueError(f"angle list describes dimension {self.d}, not {d}")
        return tuple(partial_swap_block(d, k, t) for k, t in enumerate(self.thetas))


@dataclass(frozen=True)
class GeneralBlockUnitary:
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.blocks) < 3 or len(self.blocks) % 2 == 0:
            raise ValueError("need one unitary per joint-energy block: an odd count 2d-1 >= 3")
        d = (len(self.blocks) + 1) // 2
        dims = block_dimensions(d)
        mats = []
        for k, raw in enumerate(self.blocks):
            mat = np.array(raw, dtype=complex)
            if mat.shape != (dims[k], dims[k]):
                raise ValueError(
                    f"block {k} has shape {mat.shape}, expected {(int(dims[k]), int(dims[k]))}"
                )
            defect = np.abs(mat.conj().T @ mat - np.eye(dims[k])).max()
            if defect > UNITARY_TOL:
                raise ValueError(f"block {k} is not unitary (defect {defect:.2e})")
            mat.flags.writeable = False
            mats.append(mat)
        object.__setattr__(self, "blocks", tuple(mats))

    @property
    def d(self) -> int:
        return (len(self.blocks) + 1) // 2

    def block_matrices(self, d: int) -> tuple[np.ndarray, ...]:
        if d != self.d:
            raise ValueError(f"blocks describe dimension {self.d}, not {d}")
        return self.blocks


CollisionUnitary = Union[UniformPartialSwap, BlockPartialSwap, GeneralBlockUnitary]


def build_block_unitary(d: int, blocks: Sequence) -> CollisionUnitary:
    """Assemble a collision unitary from per-block parameters.

    Each entry is either a swap angle (scalar) or an explicit unitary
    matrix for that block.  All-scalar input yields a BlockPartialSwap;
    any explicit matrix promotes the whole thing to a GeneralBlockUnitary
    (scalars are expanded to their partial-swap blocks).
    """
    if len(blocks) != 2 * d - 1:
        raise ValueError(f"need {2 * d - 1} block parameters for dimension {d}, got {len(blocks)}")
    if all(isinstance(b, numbers.Real) for b in blocks):
        return BlockPartialSwap(tuple(float(b) for b in blocks))
    mats = []
    for k, b in enumerate(blocks):
        if isinstance(b, numbers.Real):
            mats.append(partial_swap_block(d, k, float(b)))
        else:
            mats.append(np.asarray(b, dtype=complex))
    unitary = GeneralBlockUnitary(tuple(mats))
    defect = commutator_defect(unitary, d)
    if defect > UNITARY_TOL:
        raise ValueError(f"assembled unitary does not conserve energy (defect {defect:.2e})")
    return unitary


def joint_matrix(u: CollisionUnitary, d: int) -> np.ndarray:
    """Dense joint unitary on the d^2-dimensional system-ancilla space."""
    out = np.zeros((d * d, d * d), dtype=complex)
    for k, mat in enumerate(u.block_matrices(d)):
        idx = [j * d + jp for j, jp in _block_levels(d, k)]
        out[np.ix_(idx, idx)] = mat
    return out


def transfer_matrix(u: CollisionUnitary, d: int) -> np.ndarray:
    """Joint population-transfer matrix |U|^2; columns sum to one."""
    return np.abs(joint_matrix(u, d)) ** 2


def commutator_defect(u: CollisionUnitary, d: int, g0: float = 1.0) -> float:
    """Max |[H, U]| entry against the unperturbed two-body Hamiltonian."""
    mu = np.arange(d) - (d - 1) / 2
    h = g0 * (mu[:, None] + mu[None, :]).ravel()
    U = joint_matrix(u, d)
    return float(np.abs(h[:, None] * U - U * h[None, :]).max())


def _advance_rows(P: np.ndarray, R: np.ndarray, u: CollisionUnitary, W: np.ndarray | None) -> np.ndarray:
    # One collision applied to every row of P with matching reservoir rows R.
    if isinstance(u, UniformPartialSwap):
        c2 = math.cos(u.theta) ** 2
        s2 = math.sin(u.theta) ** 2
        return c2 * P + s2 * R
    n, d = P.shape
    joint = (P[:, :, None] * R[:, None, :]).reshape(n, d * d)
    return (joint @ W.T).reshape(n, d, d).sum(axis=2)


def collide(state: DiagonalState, reservoir: DiagonalState, u: CollisionUnitary) -> DiagonalState:
    """System populations after one collision with a fresh ancilla."""
    if state.d != reservoir.d:
        raise ValueError(f"dimension mismatch: system {state.d}, reservoir {reservoir.d}")
    W = None if isinstance(u, UniformPartialSwap) else transfer_matrix(u, state.d)
    out = _advance_rows(state.probs[None, :], reservoir.probs[None, :], u, W)[0]
    return DiagonalState(out)


def reference_collide(state: DiagonalState, reservoir: DiagonalState, u: CollisionUnitary) -> DiagonalState:
    """Dense-matrix collision: conjugate the joint state and trace the ancilla.

    Also certifies that the reduced output carries no coherences; meant
    for small dimensions, not for production trajectories.
    """
    d = state.d
    if d != reservoir.d:
        raise ValueError(f"dimension mismatch: system {d}, reservoir {reservoir.d}")
    if d > _ORACLE_MAX_DIM:
        raise ValueError(f"dense oracle is limited to d <= {_ORACLE_MAX_DIM}")
    U = joint_matrix(u, d)
    defect = np.abs(U.conj().T @ U - np.eye(d * d)).max()
    if defect > UNITARY_TOL:
        raise ValueError(f"assembled joint matrix is not unitary (defect {defect:.2e})")
    joint = np.diag(np.kron(state.probs, reservoir.probs)).astype(complex)
    evolved = U @ joint @ U.conj().T
    reduced = np.einsum("anbn->ab", evolved.reshape(d, d, d, d))
    off = reduced - np.diag(np.diag(reduced))
    leak = np.abs(off).max()
    if leak > UNITARY_TOL:
        raise RuntimeError(f"reduced state grew off-diagonal terms ({leak:.2e})")
    pops = np.real(np.diag(reduced))
    return DiagonalState(pops)


def analytic_trajectory(rho0: DiagonalState, fixed_point: DiagonalState, theta: float, steps: int) -> np.ndarray:
    """Closed-form repeated-swap path, rows r = 0..steps of

        rho_r = fixed_point - (fixed_point - rho_0) * cos(theta)^(2r).

    Row 0 is rho0 exactly.  Pass the unperturbed thermal state for the
    noiseless channel, or the Gaussian-averaged one for the mean dynamics.
    """
    if rho0.d != fixed_point.d:
        raise ValueError("initial state and fixed point must share a dimension")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    factors = (math.cos(theta) ** 2) ** np.arange(steps + 1)
    states = fixed_point.probs + np.outer(factors, rho0.probs - fixed_point.probs)
    states[0] = rho0.probs
    return states


@dataclass
class TrajectoryRecord:
    """One stochastic realisation: states, sampled offsets, divergences, energy flow."""

    spec: EnergySpec
    unitary: CollisionUnitary
    alphas: tuple[float, ...]
    states: np.ndarray = field(repr=False)      # (steps+1, d)
    deltas: np.ndarray = field(repr=False)      # (steps,)
    divergences: np.ndarray = field(repr=False)  # (steps+1, len(alphas))
    energy_ledger: np.ndarray = field(repr=False)  # (steps,)

    @property
    def steps(self) -> int:
        return self.deltas.size


@dataclass(frozen=True)
class EnergyAudit:
    per_step: np.ndarray
    cumulative: np.ndarray


def _collision_energy_change(p: np.ndarray, resv: np.ndarray, delta: float,
                             spec: EnergySpec, W: np.ndarray) -> float:
    # Expected two-body energy after minus before; the ancilla level
    # spacing carries the sampled offset, the system one does not.
    levels = energy_levels(spec)
    h = levels[:, None] + (1.0 + delta) * levels[None, :]
    joint_in = np.outer(p, resv)
    joint_out = (W @ joint_in.ravel()).reshape(spec.d, spec.d)
    return float((h * joint_out).sum() - (h * joint_in).sum())


def simulate_single_shot(rho0: DiagonalState, spec: EnergySpec, pert: PerturbationSpec,
                         u: CollisionUnitary, steps: int, alphas,
                         rng: np.random.Generator) -> TrajectoryRecord:
    """One random trajectory of repeated collisions.

    Each step draws a fresh offset, prepares the corresponding perturbed
    thermal ancilla, and collides.  Divergences are taken against the
    unperturbed thermal state throughout.  Deterministic for a given
    generator state.
    """
    if rho0.d != spec.d:
        raise ValueError(f"initial state dimension {rho0.d} does not match spec d={spec.d}")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    alphas = tuple(float(a) for a in alphas)
    W = transfer_matrix(u, spec.d)

    states = np.empty((steps + 1, spec.d))
    states[0] = rho0.probs
    deltas = np.empty(steps)
    ledger = np.empty(steps)
    row = rho0.probs[None, :]
    for r in range(steps):
        delta = sample_delta(pert, rng)
        resv = thermal_probs(spec, delta)
        ledger[r] = _collision_energy_change(row[0], resv[0], delta, spec, W)
        row = _advance_rows(row, resv, u, W)
        states[r + 1] = row[0]
        deltas[r] = delta

    reference = thermal_state(spec)
    table = np.empty((steps + 1, len(alphas)))
    for i, alpha in enumerate(alphas):
        table[:, i] = divergence_rows(states, reference, alpha)
    return TrajectoryRecord(spec=spec, unitary=u, alphas=alphas, states=states,
                            deltas=deltas, divergences=table, energy_ledger=ledger)


def energy_audit(traj: TrajectoryRecord, spec: EnergySpec) -> EnergyAudit:
    """Recompute the per-collision energy balance from the stored record.

    With zero perturbation the balance vanishes identically (the unitary
    only connects degenerate joint levels); with noise the signed changes
    fluctuate around a mean that is small against their spread.
    """
    if spec != traj.spec:
        raise ValueError("spec does not match the one the trajectory was produced with")
    W = transfer_matrix(traj.unitary, spec.d)
    per_step = np.empty(traj.steps)
    for r in range(traj.steps):
        resv = thermal_probs(spec, traj.deltas[r])[0]
        per_step[r] = _collision_energy_change(traj.states[r], resv, traj.deltas[r], spec, W)
    return EnergyAudit(per_step=per_step, cumulative=np.cumsum(per_step))
