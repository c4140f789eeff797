"""Dense state-vector quantum circuit simulator.

Public surface: states and precision control, gate construction and
application kernels, circuits (with fusion and sharded execution),
measurement sampling, Hamiltonians, time evolution, and variational
optimization.
"""

from .circuit import (
    Circuit,
    FusedGate,
    circuit_from_dict,
    circuit_to_dict,
    fuse,
    qft_circuit,
    variational_circuit,
)
from .errors import (
    ArityError,
    CapacityError,
    FormError,
    ParseError,
    ShapeError,
    SimulationError,
)
from .evolution import (
    Callback,
    EnergyCallback,
    EntanglementEntropyCallback,
    EvolutionConfig,
    GapCallback,
    OverlapCallback,
    Schedule,
    ScheduleForm,
    Solver,
    adiabatic_evolve,
    entanglement_entropy,
    evolve,
    optimize_schedule,
    trotter_step_circuit,
)
from .gates import (
    CNOT,
    CZ,
    CZPow,
    GateKind,
    GateSpec,
    H,
    KernelClass,
    RX,
    RY,
    RZ,
    SWAP,
    Unitary,
    VariationalLayer,
    X,
    Y,
    Z,
    apply_gate,
    apply_matrix,
    classify_kernel,
    expanded_matrix,
    gate_matrix,
)
from .hamiltonians import (
    DenseHamiltonian,
    Form,
    TrotterHamiltonian,
    build_tfim,
    build_x,
    combine,
    eigensystem,
    expectation,
    ground_state_vector,
)
from .measurement import (
    MeasurementResult,
    frequencies,
    marginal_probabilities,
    sample,
)
from .sharding import (
    ExecutionPlan,
    ShardedState,
    execute_sharded,
    gather,
    partition,
    plan,
    reshuffle,
)
from .state import (
    MAX_QUBITS,
    Precision,
    StateVector,
    from_amplitudes,
    norm,
    overlap,
    zero_state,
)
from .variational import (
    OptimizerConfig,
    VQEProblem,
    aavqe,
    minimize_nelder_mead,
    vqe_minimize,
)

__version__ = "0.1.0"

__all__ = [
    "ArityError",
    "Callback",
    "CapacityError",
    "Circuit",
    "CNOT",
    "CZ",
    "CZPow",
    "DenseHamiltonian",
    "EnergyCallback",
    "EntanglementEntropyCallback",
    "EvolutionConfig",
    "ExecutionPlan",
    "Form",
    "FormError",
    "FusedGate",
    "GapCallback",
    "GateKind",
    "GateSpec",
    "H",
    "KernelClass",
    "MAX_QUBITS",
    "MeasurementResult",
    "OptimizerConfig",
    "OverlapCallback",
    "ParseError",
    "Precision",
    "RX",
    "RY",
    "RZ",
    "Schedule",
    "ScheduleForm",
    "ShapeError",
    "ShardedState",
    "SimulationError",
    "Solver",
    "StateVector",
    "SWAP",
    "TrotterHamiltonian",
    "Unitary",
    "VariationalLayer",
    "VQEProblem",
    "X",
    "Y",
    "Z",
    "aavqe",
    "adiabatic_evolve",
    "apply_gate",
    "apply_matrix",
    "build_tfim",
    "build_x",
    "circuit_from_dict",
    "circuit_to_dict",
    "classify_kernel",
    "combine",
    "eigensystem",
    "entanglement_entropy",
    "evolve",
    "execute_sharded",
    "expanded_matrix",
    "expectation",
    "frequencies",
    "from_amplitudes",
    "fuse",
    "gate_matrix",
    "gather",
    "ground_state_vector",
    "marginal_probabilities",
    "minimize_nelder_mead",
    "norm",
    "optimize_schedule",
    "overlap",
    "partition",
    "plan",
    "qft_circuit",
    "reshuffle",
    "sample",
    "trotter_step_circuit",
    "variational_circuit",
    "vqe_minimize",
    "zero_state",
]
