"""Composite Hilbert space of N four-level atoms and one truncated cavity mode.

Basis convention (frozen so serialized states are portable across runs):
the flat index of an atomic configuration ``(l_0, ..., l_{N-1})`` with
``p`` cavity photons is

    index = p + (n_max + 1) * sum_k  l_k * 4**k

i.e. atom 0 is the least significant atomic digit and the cavity index is
innermost (fastest varying).  Equivalently, as a Kronecker product the
state factorizes as ``atom_{N-1} (x) ... (x) atom_0 (x) cavity``.

All states and operators are dense: at the validated sizes (N <= 4,
n_max = 2) the dimension never exceeds 768 and sparse machinery would be
unjustified complexity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence

import numpy as np

from .errors import PhaseUndefinedError, ShapeError, TruncationError

__all__ = [
    "AtomLevel",
    "SpaceShape",
    "SystemState",
    "Operator",
    "basis_state",
    "partial_overlap",
    "global_phase_align",
    "flatten_index",
    "unflatten_index",
    "amplitude_at",
    "top_fock_population",
    "cavity_vacuum_population",
    "qubit_subspace_population",
    "state_to_json_dict",
    "state_from_json_dict",
]

ATOM_DIM = 4

# Alignment is refused when |<ref|state>| falls below this fraction of the
# product of the two norms.
_PHASE_OVERLAP_FLOOR = 1e-12

HERMITICITY_TOL = 1e-12


class AtomLevel(IntEnum):
    """The four internal levels of each atom.

    ``ZERO`` and ``ONE`` are the long-lived qubit levels; ``G`` and ``E``
    are the pair of levels coupled (dispersively) to the cavity mode.
    The integer encoding is part of the basis convention and must not
    change.
    """

    ZERO = 0
    ONE = 1
    G = 2
    E = 3


@dataclass(frozen=True)
class SpaceShape:
    """Dimension label for states and operators: N atoms, Fock cutoff n_max."""

    n_atoms: int
    n_max: int = 2

    def __post_init__(self) -> None:
        if self.n_atoms < 1:
            raise ShapeError(f"need at least one atom, got n_atoms={self.n_atoms}")
        if self.n_max < 0:
            raise ShapeError(f"n_max must be >= 0, got {self.n_max}")

    @property
    def cavity_dim(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return ATOM_DIM**self.n_atoms * self.cavity_dim


def flatten_index(levels: Sequence[int], photons: int, n_max: int) -> int:
    """Flat basis index of an atomic configuration with ``photons`` quanta."""
    return photons + (n_max + 1) * sum(int(l) * ATOM_DIM**k for k, l in enumerate(levels))


def unflatten_index(index: int, shape: SpaceShape) -> tuple[tuple[AtomLevel, ...], int]:
    """Inverse of :func:`flatten_index` for the given space shape."""
    if not 0 <= index < shape.dim:
        raise ShapeError(f"index {index} outside [0, {shape.dim})")
    photons = index % shape.cavity_dim
    rest = index // shape.cavity_dim
    levels = []
    for _ in range(shape.n_atoms):
        levels.append(AtomLevel(rest % ATOM_DIM))
        rest //= ATOM_DIM
    return tuple(levels), photons


@dataclass(frozen=True)
class SystemState:
    """Immutable complex amplitude vector over the composite basis.

    Attributes
    ----------
    amplitudes : np.ndarray
        Complex vector of length ``4**n_atoms * (n_max + 1)`` in flat-index
        order.  The array is locked read-only; all mutation is by returning
        new states.
    n_atoms, n_max : int
        Shape of the underlying space.
    """

    amplitudes: np.ndarray
    n_atoms: int
    n_max: int

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        shape = SpaceShape(self.n_atoms, self.n_max)
        if amps.size != shape.dim:
            raise ShapeError(
                f"amplitude vector of length {amps.size} does not match "
                f"dim {shape.dim} for N={self.n_atoms}, n_max={self.n_max}"
            )
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def space(self) -> SpaceShape:
        return SpaceShape(self.n_atoms, self.n_max)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def with_amplitudes(self, amplitudes: np.ndarray) -> "SystemState":
        """New state over the same space with replaced amplitudes."""
        return SystemState(amplitudes, self.n_atoms, self.n_max)


@dataclass(frozen=True)
class Operator:
    """Dense square matrix over the same flat basis as :class:`SystemState`.

    ``hermitian=True`` asserts Hermiticity at construction (checked to
    1e-12); non-Hermitian generators (decay models) leave it False.
    """

    matrix: np.ndarray
    n_atoms: int
    n_max: int
    hermitian: bool = False

    def __post_init__(self) -> None:
        mat = np.asarray(self.matrix, dtype=complex)
        shape = SpaceShape(self.n_atoms, self.n_max)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ShapeError(f"operator matrix must be square, got {mat.shape}")
        if mat.shape[0] != shape.dim:
            raise ShapeError(
                f"operator dim {mat.shape[0]} does not match space dim {shape.dim}"
            )
        if self.hermitian:
            dev = float(np.max(np.abs(mat - mat.conj().T)))
            if dev >= HERMITICITY_TOL:
                raise ShapeError(f"operator flagged hermitian deviates by {dev:.3e}")
        mat = mat.copy()
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    @property
    def space(self) -> SpaceShape:
        return SpaceShape(self.n_atoms, self.n_max)

    def apply(self, state: SystemState) -> SystemState:
        _require_same_space(self.space, state.space)
        return state.with_amplitudes(self.matrix @ state.amplitudes)

    def dagger(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.n_atoms, self.n_max, self.hermitian)


def _require_same_space(a: SpaceShape, b: SpaceShape) -> None:
    if a != b:
        raise ShapeError(f"space mismatch: {a} vs {b}")


def basis_state(
    levels: Sequence[AtomLevel | int], photons: int, n_max: int = 2
) -> SystemState:
    """Unit-norm basis state with the given atomic levels and photon number.

    Parameters
    ----------
    levels : sequence of AtomLevel
        One entry per atom, atom 0 first.
    photons : int
        Cavity occupation, must satisfy ``0 <= photons <= n_max``.
    n_max : int
        Fock truncation of the cavity mode.
    """
    levels = [AtomLevel(l) for l in levels]
    if not levels:
        raise ShapeError("at least one atom level is required")
    if photons < 0 or photons > n_max:
        raise TruncationError(f"photon number {photons} outside [0, {n_max}]")
    shape = SpaceShape(len(levels), n_max)
    amps = np.zeros(shape.dim, dtype=complex)
    amps[flatten_index(levels, photons, n_max)] = 1.0
    return SystemState(amps, shape.n_atoms, shape.n_max)


def partial_overlap(state: SystemState, target: SystemState) -> complex:
    """Inner product ``<target|state>`` of two states over the same space."""
    _require_same_space(state.space, target.space)
    return complex(np.vdot(target.amplitudes, state.amplitudes))


def global_phase_align(state: SystemState, reference: SystemState) -> SystemState:
    """Rotate a global phase so ``<reference|state>`` is real and positive.

    Raises
    ------
    PhaseUndefinedError
        If the overlap with the reference is numerically zero, in which
        case no alignment phase exists.
    """
    overlap = partial_overlap(state, reference)
    floor = _PHASE_OVERLAP_FLOOR * max(state.norm * reference.norm, 1e-300)
    if abs(overlap) <= floor:
        raise PhaseUndefinedError(
            "cannot align phase: overlap with reference is zero"
        )
    phase = overlap / abs(overlap)
    return state.with_amplitudes(state.amplitudes / phase)


def amplitude_at(
    state: SystemState, levels: Sequence[AtomLevel | int], photons: int
) -> complex:
    """Amplitude on one basis configuration of the state's own space."""
    if len(levels) != state.n_atoms:
        raise ShapeError(f"expected {state.n_atoms} levels, got {len(levels)}")
    if photons < 0 or photons > state.n_max:
        raise TruncationError(f"photon number {photons} outside [0, {state.n_max}]")
    return complex(state.amplitudes[flatten_index(levels, photons, state.n_max)])


def _photon_of_index(index: int, cavity_dim: int) -> int:
    return index % cavity_dim


def top_fock_population(state: SystemState) -> float:
    """Total population in the highest retained Fock level.

    This is the truncation-validity monitor: appreciable population here
    means the absent ``n_max + 1`` level would have been reached.
    """
    cav = state.n_max + 1
    probs = np.abs(state.amplitudes) ** 2
    return float(probs[np.arange(probs.size) % cav == state.n_max].sum())


def cavity_vacuum_population(state: SystemState) -> float:
    """Population with zero cavity photons."""
    cav = state.n_max + 1
    probs = np.abs(state.amplitudes) ** 2
    return float(probs[np.arange(probs.size) % cav == 0].sum())


def qubit_subspace_population(state: SystemState) -> float:
    """Population with every atom inside the {|0>, |1>} qubit subspace."""
    probs = np.abs(state.amplitudes) ** 2
    total = 0.0
    for idx in range(probs.size):
        if probs[idx] == 0.0:
            continue
        levels, _ = unflatten_index(idx, state.space)
        if all(l in (AtomLevel.ZERO, AtomLevel.ONE) for l in levels):
            total += probs[idx]
    return float(total)


def state_to_json_dict(state: SystemState) -> dict:
    """Serialize to ``{n_atoms, n_max, amplitudes: [[re, im], ...]}``."""
    return {
        "n_atoms": state.n_atoms,
        "n_max": state.n_max,
        "amplitudes": [[float(a.real), float(a.imag)] for a in state.amplitudes],
    }


def state_from_json_dict(data: dict) -> SystemState:
    """Inverse of :func:`state_to_json_dict`."""
    try:
        n_atoms = int(data["n_atoms"])
        n_max = int(data["n_max"])
        pairs = data["amplitudes"]
    except (KeyError, TypeError) as exc:
        raise ShapeError(f"malformed state dict: {exc}") from exc
    amps = np.array([complex(re, im) for re, im in pairs], dtype=complex)
    return SystemState(amps, n_atoms, n_max)


def save_state(state: SystemState, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(state_to_json_dict(state), fh)


def load_state(path: str) -> SystemState:
    with open(path, "r", encoding="utf-8") as fh:
        return state_from_json_dict(json.load(fh))
