"""Clock-offset estimation over a quantum channel.

Two parties share a carrier of angular frequency ω but start their clocks at
different times; the offset imprints a phase φ = ω·t on every qubit crossing
the channel.  This package provides the exact single-qubit frame/gate algebra
for that setting, shot-by-shot simulators for the standard fringe protocols
and their bounce-amplified, entangled, and hybrid refinements, closed-form
resource costs with photon loss, and a CLI harness for sweeps and tables.
"""

from .channel import (
    LOG_HUGE,
    LossyChannel,
    TransmissionLog,
    expected_bounces,
    log_expected_bounces,
    run_coherent_bounces,
    sample_bounce_attempts,
    transmit,
)
from .cost_model import (
    crossover_bits,
    hybrid_cost,
    hybrid_phase2_shots,
    improved_cost,
    lossy_improved_cost,
    lossy_sql_cost,
    sql_one_way_cost,
    sql_two_way_cost,
    sql_uncertainty,
    uncertainty_mixture,
)
from .frames_gates import (
    UNITARITY_TOL,
    FrameMismatchError,
    FrameTag,
    PhaseAngle,
    Unitary2,
    bounce_unitary,
    canonical_phase,
    equal_up_to_global_phase,
    frame_conjugate,
    frame_shift_matrix,
    frame_shift_state,
    hadamard_op,
    pauli_x_op,
    rabi_pulse,
    z_rotation,
)
from .protocols import (
    ONE_WAY_FRINGE,
    TWO_WAY_FRINGE,
    BitRecord,
    ProtocolReport,
    Quadrature,
    QuadratureMode,
    ShotSampler,
    TruthModel,
    assemble_estimate,
    bit_from_quadratures,
    entangled_bitwise,
    entangled_oneshot,
    hybrid_estimate,
    improved_estimate,
    repetitions_per_bit,
    select_k1,
    simple_one_way,
    simple_two_way,
)
from .simulator import (
    GHZ_MAX_QUBITS,
    GhzState,
    PureQubit,
    RngStream,
    apply,
    count_plus_ones,
    excited_state,
    ghz_parity_expectation,
    measure_minus_z,
    prepare_ghz,
    sample_pm1,
    sample_pm1_batch,
)

__version__ = "0.1.0"

__all__ = [
    "LOG_HUGE",
    "LossyChannel",
    "TransmissionLog",
    "expected_bounces",
    "log_expected_bounces",
    "run_coherent_bounces",
    "sample_bounce_attempts",
    "transmit",
    "crossover_bits",
    "hybrid_cost",
    "hybrid_phase2_shots",
    "improved_cost",
    "lossy_improved_cost",
    "lossy_sql_cost",
    "sql_one_way_cost",
    "sql_two_way_cost",
    "sql_uncertainty",
    "uncertainty_mixture",
    "UNITARITY_TOL",
    "FrameMismatchError",
    "FrameTag",
    "PhaseAngle",
    "Unitary2",
    "bounce_unitary",
    "canonical_phase",
    "equal_up_to_global_phase",
    "frame_conjugate",
    "frame_shift_matrix",
    "frame_shift_state",
    "hadamard_op",
    "pauli_x_op",
    "rabi_pulse",
    "z_rotation",
    "ONE_WAY_FRINGE",
    "TWO_WAY_FRINGE",
    "BitRecord",
    "ProtocolReport",
    "Quadrature",
    "QuadratureMode",
    "ShotSampler",
    "TruthModel",
    "assemble_estimate",
    "bit_from_quadratures",
    "entangled_bitwise",
    "entangled_oneshot",
    "hybrid_estimate",
    "improved_estimate",
    "repetitions_per_bit",
    "select_k1",
    "simple_one_way",
    "simple_two_way",
    "GHZ_MAX_QUBITS",
    "GhzState",
    "PureQubit",
    "RngStream",
    "apply",
    "count_plus_ones",
    "excited_state",
    "ghz_parity_expectation",
    "measure_minus_z",
    "prepare_ghz",
    "sample_pm1",
    "sample_pm1_batch",
    "__version__",
]
