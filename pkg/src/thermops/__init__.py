"""Collisional qudit thermalization with perturbed reservoirs.

Repeated partial-swap collisions with thermal ancillas drive a qudit to
equilibrium.  Giving each ancilla a Gaussian-perturbed coupling makes the
channel leave the free-operation set, and the whole family of Renyi
free energies can then rise along trajectories.  This package simulates
those trajectories (single-shot and ensemble-averaged), evaluates the
divergence family stably across all orders, and provides the analysis
tools (violation detection, initial-state scans, triangle plots of the
qutrit simplex) to chart where monotonicity breaks.
"""

from .collisions import (
    BlockPartialSwap,
    CollisionUnitary,
    EnergyAudit,
    GeneralBlockUnitary,
    TrajectoryRecord,
    UniformPartialSwap,
    analytic_trajectory,
    block_dimensions,
    build_block_unitary,
    collide,
    commutator_defect,
    energy_audit,
    free_parameter_count,
    joint_matrix,
    partial_swap_block,
    reference_collide,
    simulate_single_shot,
    transfer_matrix,
)
from .divergence import (
    DivergentInputError,
    UndefinedTemperatureError,
    UnsupportedReferenceError,
    divergence_profile,
    divergence_rows,
    free_energy,
    renyi_divergence,
)
from .ensemble import (
    EnsembleConfig,
    EnsembleResult,
    MeanDivergenceTable,
    analytic_ensemble_states,
    divergence_of_mean,
    run_ensemble,
    run_stream,
)
from .geometry import (
    ContourGrid,
    ScanResult,
    ViolationReport,
    contour_grid,
    detect_violations,
    qubit_violation_scan,
    simplex_coords,
    simplex_path,
    straightness_deviation,
)
from .qudit import (
    DiagonalState,
    EnergySpec,
    PerturbationSpec,
    QuadratureError,
    energy_levels,
    ensemble_thermal_state,
    log_partition,
    sample_delta,
    thermal_probs,
    thermal_state,
)

__version__ = "0.1.0"

__all__ = [
    "BlockPartialSwap",
    "CollisionUnitary",
    "ContourGrid",
    "DiagonalState",
    "DivergentInputError",
    "EnergyAudit",
    "EnergySpec",
    "EnsembleConfig",
    "EnsembleResult",
    "GeneralBlockUnitary",
    "MeanDivergenceTable",
    "PerturbationSpec",
    "QuadratureError",
    "ScanResult",
    "TrajectoryRecord",
    "UndefinedTemperatureError",
    "UniformPartialSwap",
    "UnsupportedReferenceError",
    "ViolationReport",
    "analytic_ensemble_states",
    "analytic_trajectory",
    "block_dimensions",
    "build_block_unitary",
    "collide",
    "commutator_defect",
    "contour_grid",
    "detect_violations",
    "divergence_of_mean",
    "divergence_profile",
    "divergence_rows",
    "energy_audit",
    "energy_levels",
    "ensemble_thermal_state",
    "free_energy",
    "free_parameter_count",
    "joint_matrix",
    "log_partition",
    "partial_swap_block",
    "qubit_violation_scan",
    "reference_collide",
    "renyi_divergence",
    "run_ensemble",
    "run_stream",
    "sample_delta",
    "simplex_coords",
    "simplex_path",
    "simulate_single_shot",
    "straightness_deviation",
    "thermal_probs",
    "thermal_state",
    "transfer_matrix",
]
