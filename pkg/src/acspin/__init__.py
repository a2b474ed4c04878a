"""Anticoherent spin states from rotation and squeezing pulses.

The package builds t-anticoherent spin-j states with short pulse protocols,
measures anticoherence through the multipole content of the state, and
wraps the pulses in dynamical-decoupling schedules so the protocols survive
disorder and dipolar noise on real ensembles.
"""
from .angmom import (
    Spin,
    as_spin,
    coherent_state,
    expm_hermitian,
    initial_state,
    spin_operators,
)
from .multipole import ac_measure, decompose, rank_index, tensor_op
from .protocol import (
    OptimizationResult,
    analytic_params,
    apply_protocol,
    optimize_protocol,
    protocol_steps,
)
from .sequences import DDSequence, load_named, verify_decoupling
from .ddcg import (
    DCGSchedule,
    PulseSegment,
    assemble_dcg,
    per_cycle_schedule,
    per_pulse_schedule,
    simulate_schedule,
    state_prep_segments,
)
from .metrics import distance, infidelity, magnus_bounds, regime_thresholds
from .ensemble import NoiseInstance, sample_noise, symmetric_isometry

__version__ = "0.1.0"

__all__ = [
    "Spin",
    "as_spin",
    "coherent_state",
    "initial_state",
    "spin_operators",
    "expm_hermitian",
    "ac_measure",
    "tensor_op",
    "decompose",
    "rank_index",
    "OptimizationResult",
    "analytic_params",
    "apply_protocol",
    "optimize_protocol",
    "protocol_steps",
    "DDSequence",
    "load_named",
    "verify_decoupling",
    "DCGSchedule",
    "PulseSegment",
    "assemble_dcg",
    "per_cycle_schedule",
    "per_pulse_schedule",
    "simulate_schedule",
    "state_prep_segments",
    "distance",
    "infidelity",
    "magnus_bounds",
    "regime_thresholds",
    "NoiseInstance",
    "sample_noise",
    "symmetric_isometry",
    "__version__",
]
