"""The five-step non-local C-Sign protocol and its gate compositions.

A C-Sign between a control and a target atom anywhere in the register:

1. ``|0> -> |g>`` on both atoms (pulse area pi/2, phase 3pi/2);
2. ``|1> -> |e>`` on the control only (same area and phase);
3. joint interaction with the cavity vacuum for ``t = pi/eta``;
4. inverse of step 2 (phase pi/2);
5. inverse of step 1 (phase pi/2).

During step 3 only the addressed pair is cavity-active; dormant atoms keep
their qubit state untouched.  The interaction window gives ``|e_c,1_t>`` a
phase of -1 and returns every other configuration unchanged, which is
exactly ``diag(1, 1, 1, -1)`` on the qubit pair.

Step 3 can run under three engines: the closed effective exchange coupling,
the full dispersive Hamiltonian in the rotated frame, or the latter
augmented with non-Hermitian decay.  All verdicts are taken after global
phase alignment, so they are frame independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import PreconditionError
from .dynamics import IntegratorConfig, apply_pulse, evolve
from .hilbert import (
    AtomLevel,
    Operator,
    SpaceShape,
    SystemState,
    amplitude_at,
    basis_state,
    cavity_vacuum_population,
    qubit_subspace_population,
    state_to_json_dict,
    top_fock_population,
    unflatten_index,
)
from .model import (
    FrameChoice,
    PhysicalParams,
    Pulse,
    decay_augmented_hamiltonian,
    effective_hamiltonian,
    embed_operator,
    full_hamiltonian,
)

__all__ = [
    "EngineMode",
    "GateKind",
    "GateSpec",
    "ProtocolTrace",
    "TruthTableRow",
    "csign",
    "cnot",
    "toffoli",
    "bell_prepare",
    "single_qubit",
    "truth_table",
    "csign_qubit_matrix",
    "toffoli_qubit_matrix",
    "CSIGN_STEP_LABELS",
]

CSIGN_STEP_LABELS = ("step1", "step2", "step3", "step4", "step5")

DEFAULT_PULSE_RABI = 1.0

# Input states are rejected when more than this much population sits
# outside the qubit subspace or outside the cavity vacuum.
_PRECONDITION_POP_TOL = 1e-14

# Per-amplitude verdict tolerances of the truth table, by engine.
_TRUTH_TOL = {"effective": 1e-8, "full": 1e-2, "decay": 1e-2}


class EngineMode(Enum):
    """Which Hamiltonian backs the cavity-interaction step."""

    EFFECTIVE = "effective"
    FULL = "full"
    FULL_WITH_DECAY = "decay"


class GateKind(Enum):
    CSIGN = "csign"
    CNOT = "cnot"
    HADAMARD = "hadamard"
    S = "s"
    T = "t"
    TOFFOLI = "toffoli"


_OPERAND_COUNT = {
    GateKind.HADAMARD: 1,
    GateKind.S: 1,
    GateKind.T: 1,
    GateKind.CSIGN: 2,
    GateKind.CNOT: 2,
    GateKind.TOFFOLI: 3,
}

_SINGLE_QUBIT_MATRIX = {
    GateKind.HADAMARD: np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0),
    GateKind.S: np.diag([1.0, 1j]).astype(complex),
    GateKind.T: np.diag([1.0, np.exp(1j * np.pi / 4)]).astype(complex),
}


@dataclass(frozen=True)
class GateSpec:
    """Declarative gate record: kind plus ordered operand atoms."""

    kind: GateKind
    operands: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "operands", tuple(int(a) for a in self.operands))
        expected = _OPERAND_COUNT[self.kind]
        if len(self.operands) != expected:
            raise ValueError(
                f"{self.kind.value} takes {expected} operand(s), got {len(self.operands)}"
            )
        if len(set(self.operands)) != len(self.operands):
            raise ValueError(f"operands must be distinct, got {self.operands}")


@dataclass
class ProtocolTrace:
    """Ordered record of protocol steps with state snapshots."""

    steps: list[tuple[str, SystemState]]
    final: SystemState

    def state_after(self, label: str) -> SystemState:
        for name, snap in self.steps:
            if name == label:
                return snap
        raise KeyError(f"no step labeled {label!r}")

    def summary(self) -> dict:
        """Per-step norms and leakage diagnostics; no state payload."""
        rows = []
        for label, snap in self.steps:
            rows.append(
                {
                    "step": label,
                    "norm": snap.norm,
                    "top_fock_population": top_fock_population(snap),
                    "cavity_vacuum_population": cavity_vacuum_population(snap),
                }
            )
        return {
            "steps": rows,
            "final_norm": self.final.norm,
            "final_qubit_subspace_population": qubit_subspace_population(self.final),
            "final_cavity_vacuum_population": cavity_vacuum_population(self.final),
        }

    def to_json_dict(self, include_states: bool = False, max_dim: int = 4096) -> dict:
        data = self.summary()
        if include_states:
            if self.final.space.dim > max_dim:
                raise ValueError(
                    f"state dim {self.final.space.dim} exceeds the {max_dim} dump guard"
                )
            data["states"] = {
                label: state_to_json_dict(snap) for label, snap in self.steps
            }
            data["final_state"] = state_to_json_dict(self.final)
        return data


def _check_atoms(shape: SpaceShape, *atoms: int) -> None:
    for a in atoms:
        if not 0 <= a < shape.n_atoms:
            raise ValueError(f"atom index {a} outside [0, {shape.n_atoms})")
    if len(set(atoms)) != len(atoms):
        raise ValueError(f"atoms must be distinct, got {atoms}")


def _require_qubit_input(state: SystemState) -> None:
    total = state.norm**2
    outside = total - qubit_subspace_population(state)
    if outside > _PRECONDITION_POP_TOL * max(total, 1e-300):
        raise PreconditionError(
            f"input has population {outside:.3e} outside the qubit subspace"
        )


def _require_cavity_vacuum(state: SystemState) -> None:
    total = state.norm**2
    excited = total - cavity_vacuum_population(state)
    if excited > _PRECONDITION_POP_TOL * max(total, 1e-300):
        raise PreconditionError(
            f"cavity is not in vacuum: photon population {excited:.3e}"
        )


def interaction_hamiltonian(
    params: PhysicalParams,
    pair: tuple[int, int],
    mode: EngineMode,
    shape: SpaceShape,
) -> Operator:
    """The step-3 generator for the chosen engine, pair cavity-active."""
    if mode is EngineMode.EFFECTIVE:
        return effective_hamiltonian(params, pair, shape)
    base = full_hamiltonian(params, pair, FrameChoice.ROTATED, shape)
    if mode is EngineMode.FULL:
        return base
    return decay_augmented_hamiltonian(base, params)


def csign(
    state: SystemState,
    control: int,
    target: int,
    params: PhysicalParams,
    mode: EngineMode = EngineMode.EFFECTIVE,
    cfg: IntegratorConfig | None = None,
    pulse_rabi: float = DEFAULT_PULSE_RABI,
) -> ProtocolTrace:
    """Run the five-step C-Sign gate on (control, target).

    Preconditions: the two atoms are distinct register indices, the input
    is supported on the qubit subspace of every atom, and the cavity is in
    vacuum.  The returned trace holds one snapshot per protocol step; the
    final state equals ``diag(1, 1, 1, -1)`` on the pair (up to a global
    phase and the engine's dispersive/decay error), identity on dormant
    atoms, with the cavity back in vacuum.
    """
    shape = state.space
    _check_atoms(shape, control, target)
    _require_qubit_input(state)
    _require_cavity_vacuum(state)

    duration = (np.pi / 2) / pulse_rabi
    both = frozenset((control, target))
    ctrl = frozenset((control,))
    forward, inverse = 3 * np.pi / 2, np.pi / 2

    steps: list[tuple[str, SystemState]] = []
    s = apply_pulse(
        state, Pulse(both, (AtomLevel.ZERO, AtomLevel.G), pulse_rabi, forward, duration), cfg
    )
    steps.append(("step1", s))
    s = apply_pulse(
        s, Pulse(ctrl, (AtomLevel.ONE, AtomLevel.E), pulse_rabi, forward, duration), cfg
    )
    steps.append(("step2", s))
    h3 = interaction_hamiltonian(params, (control, target), mode, shape)
    s = evolve(s, h3, params.gate_time, cfg)
    steps.append(("step3", s))
    s = apply_pulse(
        s, Pulse(ctrl, (AtomLevel.ONE, AtomLevel.E), pulse_rabi, inverse, duration), cfg
    )
    steps.append(("step4", s))
    s = apply_pulse(
        s, Pulse(both, (AtomLevel.ZERO, AtomLevel.G), pulse_rabi, inverse, duration), cfg
    )
    steps.append(("step5", s))
    return ProtocolTrace(steps=steps, final=s)


def single_qubit(
    state: SystemState, gate: GateKind | GateSpec, atom: int | None = None
) -> SystemState:
    """Apply an exact single-qubit unitary on one atom's {|0>, |1>} subspace.

    The matrix acts as identity on |g> and |e> and on all other atoms.
    Accepts a bare :class:`GateKind` plus ``atom``, or a one-operand
    :class:`GateSpec`.
    """
    if isinstance(gate, GateSpec):
        kind = gate.kind
        atom = gate.operands[0] if atom is None else atom
    else:
        kind = gate
    if kind not in _SINGLE_QUBIT_MATRIX:
        raise ValueError(f"{kind.value} is not a single-qubit gate")
    if atom is None:
        raise ValueError("target atom is required")
    _check_atoms(state.space, atom)
    block = np.eye(4, dtype=complex)
    block[:2, :2] = _SINGLE_QUBIT_MATRIX[kind]
    mat = embed_operator(state.space, {atom: block})
    return state.with_amplitudes(mat @ state.amplitudes)


def _apply_qubit_matrix(state: SystemState, mat2: np.ndarray, atom: int) -> SystemState:
    block = np.eye(4, dtype=complex)
    block[:2, :2] = mat2
    return state.with_amplitudes(embed_operator(state.space, {atom: block}) @ state.amplitudes)


def cnot(
    state: SystemState,
    control: int,
    target: int,
    params: PhysicalParams,
    mode: EngineMode = EngineMode.EFFECTIVE,
    cfg: IntegratorConfig | None = None,
) -> ProtocolTrace:
    """CNOT as H(target), C-Sign(control, target), H(target)."""
    s = single_qubit(state, GateKind.HADAMARD, target)
    steps: list[tuple[str, SystemState]] = [(f"h:{target}:in", s)]
    inner = csign(s, control, target, params, mode, cfg)
    steps.extend(inner.steps)
    s = single_qubit(inner.final, GateKind.HADAMARD, target)
    steps.append((f"h:{target}:out", s))
    return ProtocolTrace(steps=steps, final=s)


_T_DAGGER = np.diag([1.0, np.exp(-1j * np.pi / 4)]).astype(complex)


def toffoli(
    state: SystemState,
    control1: int,
    control2: int,
    target: int,
    params: PhysicalParams,
    mode: EngineMode = EngineMode.EFFECTIVE,
    cfg: IntegratorConfig | None = None,
) -> ProtocolTrace:
    """Toffoli from single-qubit gates and six C-Sign-backed CNOTs.

    Runs the same gate sequence that the ideal-matrix route composes
    (``circuits.TOFFOLI_GATE_SEQUENCE``); non-neighbor CNOTs execute
    directly through the non-local protocol, no SWAP chains inserted.
    "tdg" is T^-1 realized as an exact matrix.
    """
    from .circuits import TOFFOLI_GATE_SEQUENCE  # deferred: circuits imports us

    _check_atoms(state.space, control1, control2, target)
    atom_of = {0: control1, 1: control2, 2: target}
    steps: list[tuple[str, SystemState]] = []
    s = state
    for gate, ops in TOFFOLI_GATE_SEQUENCE:
        atoms = tuple(atom_of[o] for o in ops)
        if gate == "cnot":
            s = cnot(s, atoms[0], atoms[1], params, mode, cfg).final
            label = f"cnot:{atoms[0]},{atoms[1]}"
        elif gate == "h":
            s = single_qubit(s, GateKind.HADAMARD, atoms[0])
            label = f"h:{atoms[0]}"
        elif gate == "t":
            s = single_qubit(s, GateKind.T, atoms[0])
            label = f"t:{atoms[0]}"
        else:
            s = _apply_qubit_matrix(s, _T_DAGGER, atoms[0])
            label = f"tdg:{atoms[0]}"
        steps.append((label, s))
    return ProtocolTrace(steps=steps, final=s)


def bell_prepare(
    state: SystemState,
    i: int,
    j: int,
    params: PhysicalParams,
    mode: EngineMode = EngineMode.EFFECTIVE,
    cfg: IntegratorConfig | None = None,
    eta_t: float = np.pi / 4,
) -> SystemState:
    """Single-step entangler: evolve |e_i g_j, vacuum> for ``eta * t = eta_t``.

    At the default ``eta_t = pi/4`` the pair ends in
    ``(1/sqrt(2)) e^{-i pi/4} (|e_i g_j> - i |g_i e_j>)``, a maximally
    entangled state one local rotation away from any Bell state.
    """
    shape = state.space
    _check_atoms(shape, i, j)
    total = state.norm**2
    probs = np.abs(state.amplitudes) ** 2
    supported = 0.0
    for idx in np.nonzero(probs > 0)[0]:
        levels, photons = unflatten_index(int(idx), shape)
        if photons == 0 and levels[i] is AtomLevel.E and levels[j] is AtomLevel.G:
            supported += probs[idx]
    if total - supported > _PRECONDITION_POP_TOL * max(total, 1e-300):
        raise PreconditionError(
            "bell_prepare expects |e_i g_j> with the cavity in vacuum"
        )
    t = eta_t / params.eta
    h = interaction_hamiltonian(params, (i, j), mode, shape)
    return evolve(state, h, t, cfg)


# ---------------------------------------------------------------------------
# truth table


@dataclass(frozen=True)
class TruthTableRow:
    """Verdict for one C-Sign basis input against the expected step states."""

    input_label: str
    step_errors: tuple[float, ...]
    final_error: float
    output_sign: int
    tolerance: float
    passed: bool
    trace: ProtocolTrace = field(repr=False)


# Expected per-step pair configurations and signs for control=atom0,
# target=atom1; levels given as (control, target).
_Z, _O, _G, _E = AtomLevel.ZERO, AtomLevel.ONE, AtomLevel.G, AtomLevel.E
_TRUTH_EXPECTED: dict[str, list[tuple[tuple[AtomLevel, AtomLevel], int]]] = {
    "00": [((_G, _G), 1), ((_G, _G), 1), ((_G, _G), 1), ((_G, _G), 1), ((_Z, _Z), 1)],
    "01": [((_G, _O), 1), ((_G, _O), 1), ((_G, _O), 1), ((_G, _O), 1), ((_Z, _O), 1)],
    "10": [((_O, _G), 1), ((_E, _G), 1), ((_E, _G), 1), ((_O, _G), 1), ((_O, _Z), 1)],
    "11": [((_O, _O), 1), ((_E, _O), 1), ((_E, _O), -1), ((_O, _O), -1), ((_O, _O), -1)],
}

TRUTH_TABLE_SIGNS = {"00": 1, "01": 1, "10": 1, "11": -1}


def truth_table(
    params: PhysicalParams,
    mode: EngineMode = EngineMode.EFFECTIVE,
    cfg: IntegratorConfig | None = None,
    n_max: int = 2,
    tolerance: float | None = None,
) -> list[TruthTableRow]:
    """Run C-Sign on all four two-qubit basis inputs and check every step.

    Each snapshot is compared per amplitude against the expected signed
    basis configuration; the final sign pattern must be (+, +, +, -).
    Comparisons share one global phase taken from the |00> row, which is
    stationary under every engine.
    """
    if tolerance is None:
        tolerance = _TRUTH_TOL[mode.value]
    rows = []
    traces: dict[str, ProtocolTrace] = {}
    for label in ("00", "01", "10", "11"):
        levels = [AtomLevel(int(label[0])), AtomLevel(int(label[1]))]
        state = basis_state(levels, 0, n_max)
        traces[label] = csign(state, 0, 1, params, mode, cfg)

    # Global phase of the run, from the stationary |00> row.
    ref00 = basis_state([_Z, _Z], 0, n_max)
    amp00 = complex(np.vdot(ref00.amplitudes, traces["00"].final.amplitudes))
    phase = amp00 / abs(amp00) if abs(amp00) > 0 else 1.0 + 0j

    for label, trace in traces.items():
        errors = []
        for (levels, sign), (_, snap) in zip(_TRUTH_EXPECTED[label], trace.steps):
            expected = sign * basis_state(levels, 0, n_max).amplitudes
            errors.append(float(np.max(np.abs(snap.amplitudes / phase - expected))))
        final_amp = amplitude_at(
            trace.final, [AtomLevel(int(label[0])), AtomLevel(int(label[1]))], 0
        ) / phase
        sign = 1 if final_amp.real >= 0 else -1
        rows.append(
            TruthTableRow(
                input_label=label,
                step_errors=tuple(errors),
                final_error=errors[-1],
                output_sign=sign,
                tolerance=tolerance,
                passed=max(errors) <= tolerance,
                trace=trace,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# qubit-matrix reconstruction (used by verification and the CLI)


def _run_qubit_matrix(runner, operands: tuple[int, ...], shape: SpaceShape) -> np.ndarray:
    """Reconstruct the gate's action on the operand qubits, column by column.

    Basis convention matches the ideal-matrix module: the first operand is
    the most significant bit.  Amplitudes are read on qubit basis outputs
    with the cavity in vacuum and every non-operand atom in |0>; any
    population elsewhere (leakage) shows up as column-norm deficit.
    """
    k = len(operands)
    dim = 2**k
    mat = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        levels = [AtomLevel.ZERO] * shape.n_atoms
        for m, atom in enumerate(operands):
            levels[atom] = AtomLevel((col >> (k - 1 - m)) & 1)
        final = runner(basis_state(levels, 0, shape.n_max))
        for row in range(dim):
            levels_out = [AtomLevel.ZERO] * shape.n_atoms
            for m, atom in enumerate(operands):
                levels_out[atom] = AtomLevel((row >> (k - 1 - m)) & 1)
            mat[row, col] = amplitude_at(final, levels_out, 0)
    return mat


def csign_qubit_matrix(
    params: PhysicalParams,
    mode: EngineMode = EngineMode.EFFECTIVE,
    control: int = 0,
    target: int = 1,
    n_atoms: int = 2,
    n_max: int = 2,
    cfg: IntegratorConfig | None = None,
) -> np.ndarray:
    """4x4 matrix of the simulated C-Sign on the (control, target) qubits."""
    shape = SpaceShape(n_atoms, n_max)
    runner = lambda s: csign(s, control, target, params, mode, cfg).final
    return _run_qubit_matrix(runner, (control, target), shape)


def toffoli_qubit_matrix(
    params: PhysicalParams,
    mode: EngineMode = EngineMode.EFFECTIVE,
    atoms: tuple[int, int, int] = (0, 1, 2),
    n_max: int = 2,
    cfg: IntegratorConfig | None = None,
) -> np.ndarray:
    """8x8 matrix of the protocol-simulated Toffoli on three atoms."""
    shape = SpaceShape(max(atoms) + 1, n_max)
    runner = lambda s: toffoli(s, atoms[0], atoms[1], atoms[2], params, mode, cfg).final
    return _run_qubit_matrix(runner, atoms, shape)
