"""Hamiltonians of the dispersive atom-cavity model.

Units and conventions (hbar = 1 throughout):

* all rates are expressed in units of the atom-cavity coupling ``omega_c``
  and all times in ``1/omega_c``;
* couplings enter with a minus sign, ``-omega_c (|e><g| a + h.c.)`` for the
  cavity and ``-rabi (e^{i phi} |to><from| + h.c.)`` for external drives;
* in the rotated frame the free evolution reduces to ``-delta * n_photon``
  on the cavity, which reproduces the single-excitation amplitude
  equations ``da/dt = i g c``, ``dc/dt = i delta c + i g (a + b)`` and,
  with decay switched on, ``dc/dt = (i delta - kappa/2) c + ...``;
* cavity loss is modeled as ``-i (kappa/2) n`` on every Fock level and
  spontaneous decay of |e> as ``-i (gamma/2) |e><e|`` per atom, so the
  tracked amplitudes simply lose norm to decayed states that never return.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from functools import reduce
from typing import Iterable, Mapping

import numpy as np

from .hilbert import ATOM_DIM, AtomLevel, Operator, SpaceShape

__all__ = [
    "FrameChoice",
    "PhysicalParams",
    "Pulse",
    "full_hamiltonian",
    "effective_hamiltonian",
    "drive_hamiltonian",
    "decay_augmented_hamiltonian",
    "embed_operator",
    "annihilation_matrix",
    "photon_number_matrix",
    "load_params",
    "params_from_dict",
]

DISPERSIVE_RATIO = 10.0

_PARAM_KEYS = {"omega_c", "delta", "kappa", "gamma", "nu_k", "omega_e", "omega_g"}


class FrameChoice(Enum):
    """Reference frame for the full Hamiltonian."""

    ROTATED = "rotated"
    LAB = "lab"


@dataclass(frozen=True)
class PhysicalParams:
    """All rates and detunings, in units of the cavity coupling.

    ``eta = omega_c**2 / delta`` is always computed, never stored.  The
    lab-frame level energies (``nu_k``, ``omega_e``, ``omega_g``) are
    optional; leaving them out restricts the model to the rotated frame.
    When both ``nu_k`` and ``omega_e`` are given they must satisfy
    ``omega_e - nu_k = delta``.
    """

    delta: float
    omega_c: float = 1.0
    kappa: float = 0.0
    gamma: float = 0.0
    nu_k: float | None = None
    omega_e: float | None = None
    omega_g: float = 0.0

    def __post_init__(self) -> None:
        if self.omega_c <= 0:
            raise ValueError(f"omega_c must be positive, got {self.omega_c}")
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.kappa < 0 or self.gamma < 0:
            raise ValueError(
                f"decay rates must be non-negative, got kappa={self.kappa}, gamma={self.gamma}"
            )
        if self.nu_k is not None and self.omega_e is not None:
            if abs(self.omega_e - self.nu_k - self.delta) > 1e-9 * max(1.0, self.delta):
                raise ValueError(
                    "inconsistent lab energies: omega_e - nu_k must equal delta "
                    f"({self.omega_e} - {self.nu_k} != {self.delta})"
                )

    @property
    def eta(self) -> float:
        """Effective cavity-mediated coupling rate omega_c**2 / delta."""
        return self.omega_c**2 / self.delta

    @property
    def gate_time(self) -> float:
        """Interaction window pi/eta = pi * delta / omega_c**2."""
        return np.pi / self.eta

    @property
    def is_dispersive(self) -> bool:
        """True when delta >= 10 omega_c, where adiabatic elimination is trusted."""
        return self.delta >= DISPERSIVE_RATIO * self.omega_c

    @property
    def lab_frame_available(self) -> bool:
        return self.nu_k is not None or self.omega_e is not None

    def lab_energies(self) -> tuple[float, float, float]:
        """Resolved (nu_k, omega_e, omega_g); derives the missing one from delta."""
        if self.nu_k is None and self.omega_e is None:
            raise ValueError(
                "lab-frame energies were not provided; only the rotated frame is available"
            )
        nu = self.nu_k if self.nu_k is not None else self.omega_e - self.delta
        omega_e = self.omega_e if self.omega_e is not None else self.nu_k + self.delta
        return float(nu), float(omega_e), float(self.omega_g)


def params_from_dict(data: Mapping) -> PhysicalParams:
    """Build parameters from a config mapping, rejecting unknown keys."""
    unknown = set(data) - _PARAM_KEYS
    if unknown:
        raise ValueError(f"unknown parameter keys: {sorted(unknown)}")
    if "delta" not in data:
        raise ValueError("config must define 'delta'")
    kwargs = {k: float(v) for k, v in data.items()}
    return PhysicalParams(**kwargs)


def load_params(path: str) -> PhysicalParams:
    """Read :class:`PhysicalParams` from a JSON or TOML file."""
    if path.endswith(".toml"):
        try:
            import tomllib  # py>=3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    else:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    return params_from_dict(data)


@dataclass(frozen=True)
class Pulse:
    """A timed, phased square drive on one atomic transition of selected atoms.

    The drive Hamiltonian orientation is fixed by ``transition=(from, to)``:
    ``-rabi (e^{i phase} |to><from| + e^{-i phase} |from><to|)``.  With
    ``rabi * duration = pi/2``, phase 3pi/2 transfers |from> -> |to>
    cleanly and phase pi/2 transfers |to> -> |from>.
    """

    atoms: frozenset[int]
    transition: tuple[AtomLevel, AtomLevel]
    rabi: float
    phase: float
    duration: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "atoms", frozenset(int(a) for a in self.atoms))
        frm, to = self.transition
        object.__setattr__(self, "transition", (AtomLevel(frm), AtomLevel(to)))
        object.__setattr__(self, "phase", float(self.phase) % (2 * np.pi))
        if not self.atoms:
            raise ValueError("pulse must address at least one atom")
        if any(a < 0 for a in self.atoms):
            raise ValueError(f"negative atom index in {sorted(self.atoms)}")
        if self.transition[0] == self.transition[1]:
            raise ValueError("pulse transition levels must be distinct")
        if self.rabi < 0:
            raise ValueError(f"rabi frequency must be >= 0, got {self.rabi}")
        if self.duration < 0:
            raise ValueError(f"duration must be >= 0, got {self.duration}")


# ---------------------------------------------------------------------------
# operator building blocks


def _identity_factors(shape: SpaceShape) -> list[np.ndarray]:
    eye_atom = np.eye(ATOM_DIM, dtype=complex)
    eye_cav = np.eye(shape.cavity_dim, dtype=complex)
    return [eye_atom] * shape.n_atoms + [eye_cav]


def _kron_chain(factors: Iterable[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, factors)


def embed_operator(
    shape: SpaceShape,
    atom_ops: Mapping[int, np.ndarray] | None = None,
    cavity_op: np.ndarray | None = None,
) -> np.ndarray:
    """Kronecker-embed per-atom 4x4 blocks and/or a cavity block.

    Factor order follows the flat-index convention: atom N-1 outermost,
    atom 0 next-to-innermost, cavity innermost.
    """
    factors = _identity_factors(shape)
    if atom_ops:
        for atom, op in atom_ops.items():
            if not 0 <= atom < shape.n_atoms:
                raise ValueError(f"atom index {atom} outside [0, {shape.n_atoms})")
            factors[shape.n_atoms - 1 - atom] = np.asarray(op, dtype=complex)
    if cavity_op is not None:
        factors[-1] = np.asarray(cavity_op, dtype=complex)
    return _kron_chain(factors)


def _level_ket_bra(to: AtomLevel, frm: AtomLevel) -> np.ndarray:
    op = np.zeros((ATOM_DIM, ATOM_DIM), dtype=complex)
    op[int(to), int(frm)] = 1.0
    return op


def _level_projector(level: AtomLevel) -> np.ndarray:
    return _level_ket_bra(level, level)


def annihilation_matrix(n_max: int) -> np.ndarray:
    """Cavity annihilation operator on the truncated Fock basis."""
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1).astype(complex)


def photon_number_matrix(n_max: int) -> np.ndarray:
    return np.diag(np.arange(n_max + 1, dtype=float)).astype(complex)


# ---------------------------------------------------------------------------
# Hamiltonians


def full_hamiltonian(
    params: PhysicalParams,
    active_atoms: Iterable[int],
    frame: FrameChoice,
    shape: SpaceShape,
) -> Operator:
    """Dispersive atom-cavity Hamiltonian for the cavity-active atoms.

    The coupling part is ``-omega_c sum_l (|e_l><g_l| a + h.c.)`` over the
    active atoms.  In the lab frame the free part adds
    ``nu_k a^dag a + omega_g |g><g| + omega_e |e><e|`` per atom; in the
    rotated frame it collapses to ``-delta a^dag a``.

    Raises
    ------
    ValueError
        If an active atom index is out of range, or the lab frame is
        requested without lab energies.
    """
    active = sorted(set(int(a) for a in active_atoms))
    for a in active:
        if not 0 <= a < shape.n_atoms:
            raise ValueError(f"active atom {a} outside [0, {shape.n_atoms})")

    dim = shape.dim
    h = np.zeros((dim, dim), dtype=complex)

    a_mat = annihilation_matrix(shape.n_max)
    eg = _level_ket_bra(AtomLevel.E, AtomLevel.G)
    for atom in active:
        down = embed_operator(shape, {atom: eg}, a_mat)  # |e><g| a
        h += -params.omega_c * (down + down.conj().T)

    if frame is FrameChoice.ROTATED:
        h += embed_operator(shape, None, -params.delta * photon_number_matrix(shape.n_max))
    else:
        nu, omega_e, omega_g = params.lab_energies()
        h += embed_operator(shape, None, nu * photon_number_matrix(shape.n_max))
        atomic = omega_g * _level_projector(AtomLevel.G) + omega_e * _level_projector(
            AtomLevel.E
        )
        for atom in range(shape.n_atoms):
            h += embed_operator(shape, {atom: atomic})

    return Operator(h, shape.n_atoms, shape.n_max, hermitian=True)


def effective_hamiltonian(
    params: PhysicalParams, pair: tuple[int, int], shape: SpaceShape
) -> Operator:
    """Cavity-mediated exchange interaction between one atom pair.

    ``eta * (sum_k |e_k><e_k| + |e_i><g_i| (x) |g_j><e_j| + h.c.)`` acting
    as identity on the cavity factor and on all other atoms.  Valid in the
    dispersive regime delta >> omega_c.
    """
    i, j = int(pair[0]), int(pair[1])
    if i == j:
        raise ValueError(f"pair atoms must be distinct, got ({i}, {j})")
    for a in (i, j):
        if not 0 <= a < shape.n_atoms:
            raise ValueError(f"pair atom {a} outside [0, {shape.n_atoms})")

    eta = params.eta
    proj_e = _level_projector(AtomLevel.E)
    eg = _level_ket_bra(AtomLevel.E, AtomLevel.G)
    ge = _level_ket_bra(AtomLevel.G, AtomLevel.E)

    h = eta * (embed_operator(shape, {i: proj_e}) + embed_operator(shape, {j: proj_e}))
    exchange = embed_operator(shape, {i: eg, j: ge})
    h += eta * (exchange + exchange.conj().T)
    return Operator(h, shape.n_atoms, shape.n_max, hermitian=True)


def drive_hamiltonian(pulse: Pulse, shape: SpaceShape) -> Operator:
    """External square drive ``-rabi (e^{i phi} |to><from| + h.c.)`` per atom."""
    for a in pulse.atoms:
        if a >= shape.n_atoms:
            raise ValueError(f"pulse atom {a} outside [0, {shape.n_atoms})")
    frm, to = pulse.transition
    raise_op = _level_ket_bra(to, frm)
    dim = shape.dim
    h = np.zeros((dim, dim), dtype=complex)
    for atom in sorted(pulse.atoms):
        up = embed_operator(shape, {atom: raise_op})
        h += -pulse.rabi * (np.exp(1j * pulse.phase) * up + np.exp(-1j * pulse.phase) * up.conj().T)
    return Operator(h, shape.n_atoms, shape.n_max, hermitian=True)


def decay_augmented_hamiltonian(base: Operator, params: PhysicalParams) -> Operator:
    """Non-Hermitian generator: base minus the no-jump decay terms.

    Adds ``-i (gamma/2) |e><e|`` on every atom and ``-i (kappa/2) n`` on
    the cavity.  Population leaving through these channels exits the
    tracked subspace and never returns, so plain amplitude evolution under
    the result reproduces the damped amplitude equations.
    """
    if params.gamma < 0 or params.kappa < 0:
        raise ValueError("decay rates must be non-negative")
    if params.gamma == 0.0 and params.kappa == 0.0:
        return base
    shape = base.space
    h = base.matrix.astype(complex).copy()
    proj_e = _level_projector(AtomLevel.E)
    for atom in range(shape.n_atoms):
        h += -0.5j * params.gamma * embed_operator(shape, {atom: proj_e})
    h += -0.5j * params.kappa * embed_operator(shape, None, photon_number_matrix(shape.n_max))
    return Operator(h, shape.n_atoms, shape.n_max, hermitian=False)
