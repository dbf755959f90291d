"""State-vector simulation of cavity-mediated non-local two-qubit logic.

A chain of four-level atoms shares one far-detuned cavity mode; virtual
photon exchange induces a distance-independent coupling between any two
atoms that are pulsed into the cavity-coupled levels.  The package builds
the composite Hilbert space, the dispersive / effective / decay-augmented
Hamiltonians, the five-step C-Sign protocol with CNOT/Toffoli/Bell
compositions, the decay-limited fidelity model, and the routing-cost
arithmetic that quantifies what a non-local gate saves over SWAP chains.
"""

from .errors import (
    LeakageError,
    NumericalInstabilityError,
    PhaseUndefinedError,
    PreconditionError,
    ShapeError,
    SimulationError,
    TruncationError,
)
from .hilbert import (
    AtomLevel,
    Operator,
    SpaceShape,
    SystemState,
    amplitude_at,
    basis_state,
    cavity_vacuum_population,
    global_phase_align,
    partial_overlap,
    qubit_subspace_population,
    top_fock_population,
)
from .model import (
    FrameChoice,
    PhysicalParams,
    Pulse,
    decay_augmented_hamiltonian,
    drive_hamiltonian,
    effective_hamiltonian,
    full_hamiltonian,
    load_params,
    params_from_dict,
)
from .dynamics import (
    ClosedFormResult,
    IntegratorConfig,
    apply_pulse,
    effective_pair_closed_form,
    evolve,
    rabi_closed_form,
)
from .protocol import (
    EngineMode,
    GateKind,
    GateSpec,
    ProtocolTrace,
    bell_prepare,
    cnot,
    csign,
    csign_qubit_matrix,
    single_qubit,
    toffoli,
    toffoli_qubit_matrix,
    truth_table,
)
from .fidelity import (
    DecayModelState,
    FidelityReport,
    experimental_point,
    fidelity_analytic,
    fidelity_numeric,
    fidelity_point,
    fidelity_sweep,
    low_loss_point,
)
from .circuits import (
    CostModel,
    CostReport,
    VerificationResult,
    nonlocal_gate_cost,
    verify_cnot_csign_equivalence,
    verify_swap_decomposition,
    verify_toffoli_decomposition,
)

__version__ = "0.1.0"
