"""Hamiltonian construction and parameter handling."""

import numpy as np
import pytest

from cavitygate.hilbert import AtomLevel, SpaceShape, flatten_index
from cavitygate.model import (
    FrameChoice,
    PhysicalParams,
    Pulse,
    decay_augmented_hamiltonian,
    drive_hamiltonian,
    effective_hamiltonian,
    embed_operator,
    full_hamiltonian,
    load_params,
    params_from_dict,
)

Z, O, G, E = AtomLevel.ZERO, AtomLevel.ONE, AtomLevel.G, AtomLevel.E
SHAPE2 = SpaceShape(2, 2)


def elem(h, bra, ket):
    """<bra|H|ket> for (levels, photons) tuples."""
    i = flatten_index(bra[0], bra[1], h.n_max)
    j = flatten_index(ket[0], ket[1], h.n_max)
    return h.matrix[i, j]


class TestPhysicalParams:
    def test_eta_and_gate_time(self):
        p = PhysicalParams(delta=10.0)
        assert p.eta == pytest.approx(0.1)
        assert p.gate_time == pytest.approx(10 * np.pi)

    def test_validation(self):
        with pytest.raises(ValueError):
            PhysicalParams(delta=0.0)
        with pytest.raises(ValueError):
            PhysicalParams(delta=-1.0)
        with pytest.raises(ValueError):
            PhysicalParams(delta=10.0, kappa=-0.1)
        with pytest.raises(ValueError):
            PhysicalParams(delta=10.0, gamma=-0.1)
        with pytest.raises(ValueError):
            PhysicalParams(delta=10.0, omega_c=0.0)

    def test_dispersive_flag(self):
        assert PhysicalParams(delta=10.0).is_dispersive
        assert not PhysicalParams(delta=5.0).is_dispersive

    def test_lab_energy_consistency(self):
        PhysicalParams(delta=10.0, nu_k=50.0, omega_e=60.0)
        with pytest.raises(ValueError):
            PhysicalParams(delta=10.0, nu_k=50.0, omega_e=55.0)

    def test_lab_energy_derivation(self):
        p = PhysicalParams(delta=10.0, nu_k=50.0)
        assert p.lab_energies() == (50.0, 60.0, 0.0)
        p = PhysicalParams(delta=10.0, omega_e=60.0)
        assert p.lab_energies() == (50.0, 60.0, 0.0)

    def test_rotated_only_without_energies(self):
        p = PhysicalParams(delta=10.0)
        assert not p.lab_frame_available
        with pytest.raises(ValueError):
            p.lab_energies()


class TestParamsConfig:
    def test_unknown_keys_rejected(self):
        with pytest.raises(ValueError, match="unknown"):
            params_from_dict({"delta": 10.0, "bogus": 1.0})

    def test_missing_delta(self):
        with pytest.raises(ValueError, match="delta"):
            params_from_dict({"kappa": 0.1})

    def test_json_file(self, tmp_path):
        path = tmp_path / "params.json"
        path.write_text('{"delta": 20.0, "kappa": 0.05}')
        p = load_params(str(path))
        assert p.delta == 20.0 and p.kappa == 0.05

    def test_toml_file(self, tmp_path):
        path = tmp_path / "params.toml"
        path.write_text("delta = 20.0\ngamma = 0.001\n")
        p = load_params(str(path))
        assert p.delta == 20.0 and p.gamma == 0.001


class TestPulse:
    def test_validation(self):
        with pytest.raises(ValueError):
            Pulse(frozenset(), (Z, G), 1.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            Pulse(frozenset({0}), (G, G), 1.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            Pulse(frozenset({0}), (Z, G), -1.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            Pulse(frozenset({-1}), (Z, G), 1.0, 0.0, 1.0)

    def test_phase_wrapped(self):
        p = Pulse(frozenset({0}), (Z, G), 1.0, 5 * np.pi, 1.0)
        assert p.phase == pytest.approx(np.pi)


class TestFullHamiltonian:
    def test_rotated_coupling_element(self):
        h = full_hamiltonian(PhysicalParams(delta=10.0), (0, 1), FrameChoice.ROTATED, SHAPE2)
        # <g g, 1|H|e g, 0> = -omega_c
        assert elem(h, ([G, G], 1), ([E, G], 0)) == pytest.approx(-1.0)
        assert elem(h, ([G, G], 1), ([G, E], 0)) == pytest.approx(-1.0)

    def test_rotated_photon_diagonal(self):
        h = full_hamiltonian(PhysicalParams(delta=10.0), (0, 1), FrameChoice.ROTATED, SHAPE2)
        assert elem(h, ([G, G], 1), ([G, G], 1)) == pytest.approx(-10.0)
        assert elem(h, ([G, G], 2), ([G, G], 2)) == pytest.approx(-20.0)
        assert elem(h, ([E, G], 0), ([E, G], 0)) == pytest.approx(0.0)

    def test_two_photon_matrix_element(self):
        h = full_hamiltonian(PhysicalParams(delta=10.0), (0, 1), FrameChoice.ROTATED, SHAPE2)
        # boson enhancement: <g e, 2|H|e e, 1> = -omega_c*sqrt(2)
        assert elem(h, ([G, E], 2), ([E, E], 1)) == pytest.approx(-np.sqrt(2))

    def test_no_active_atoms_leaves_only_free_part(self):
        p = PhysicalParams(delta=10.0)
        h = full_hamiltonian(p, (), FrameChoice.ROTATED, SHAPE2)
        from cavitygate.model import photon_number_matrix

        expected = embed_operator(SHAPE2, None, -p.delta * photon_number_matrix(2))
        np.testing.assert_allclose(h.matrix, expected, atol=1e-15)

    def test_hermitian(self):
        for frame, p in [
            (FrameChoice.ROTATED, PhysicalParams(delta=10.0)),
            (FrameChoice.LAB, PhysicalParams(delta=10.0, nu_k=50.0)),
        ]:
            h = full_hamiltonian(p, (0, 1), frame, SHAPE2)
            assert np.max(np.abs(h.matrix - h.matrix.conj().T)) < 1e-12

    def test_lab_frame_energies(self):
        p = PhysicalParams(delta=10.0, nu_k=50.0, omega_g=2.0)
        h = full_hamiltonian(p, (0, 1), FrameChoice.LAB, SHAPE2)
        assert elem(h, ([G, G], 1), ([G, G], 1)) == pytest.approx(50.0 + 4.0)
        assert elem(h, ([E, Z], 0), ([E, Z], 0)) == pytest.approx(60.0)

    def test_lab_frame_requires_energies(self):
        with pytest.raises(ValueError):
            full_hamiltonian(PhysicalParams(delta=10.0), (0, 1), FrameChoice.LAB, SHAPE2)

    def test_invalid_atom(self):
        with pytest.raises(ValueError):
            full_hamiltonian(PhysicalParams(delta=10.0), (0, 5), FrameChoice.ROTATED, SHAPE2)

    @pytest.mark.parametrize("delta", [10.0, 30.0])
    def test_single_excitation_eigenvalues_perturbative(self, delta):
        """Restricted to {|eg0>, |ge0>, |gg1>}: eigenvalues {0, 2 eta, -delta - 2 eta}."""
        p = PhysicalParams(delta=delta)
        h = full_hamiltonian(p, (0, 1), FrameChoice.ROTATED, SHAPE2)
        idx = [
            flatten_index([E, G], 0, 2),
            flatten_index([G, E], 0, 2),
            flatten_index([G, G], 1, 2),
        ]
        sub = h.matrix[np.ix_(idx, idx)]
        evals = np.sort(np.linalg.eigvalsh(sub))
        expected = np.sort([0.0, 2 * p.eta, -delta - 2 * p.eta])
        tol = 5 * (p.omega_c / delta) ** 2 * p.omega_c
        np.testing.assert_allclose(evals, expected, atol=tol)


class TestEffectiveHamiltonian:
    def test_exchange_element(self):
        p = PhysicalParams(delta=10.0)
        h = effective_hamiltonian(p, (0, 1), SHAPE2)
        assert elem(h, ([E, G], 0), ([G, E], 0)) == pytest.approx(p.eta)

    def test_excited_uncoupled_diagonal(self):
        # |e_i a_j> with a = |1>: diagonal eta (single excited pair atom)
        p = PhysicalParams(delta=10.0)
        h = effective_hamiltonian(p, (0, 1), SHAPE2)
        assert elem(h, ([E, O], 0), ([E, O], 0)) == pytest.approx(p.eta)
        assert elem(h, ([E, E], 0), ([E, E], 0)) == pytest.approx(2 * p.eta)

    def test_ground_pair_unshifted(self):
        h = effective_hamiltonian(PhysicalParams(delta=10.0), (0, 1), SHAPE2)
        assert elem(h, ([G, G], 0), ([G, G], 0)) == 0.0

    def test_identity_on_cavity(self):
        h = effective_hamiltonian(PhysicalParams(delta=10.0), (0, 1), SHAPE2)
        for n in (0, 1, 2):
            assert elem(h, ([E, G], n), ([G, E], n)) == pytest.approx(0.1)

    def test_exactly_hermitian(self):
        h = effective_hamiltonian(PhysicalParams(delta=10.0), (0, 1), SHAPE2)
        assert np.array_equal(h.matrix, h.matrix.conj().T)

    def test_same_atom_pair_rejected(self):
        with pytest.raises(ValueError):
            effective_hamiltonian(PhysicalParams(delta=10.0), (1, 1), SHAPE2)

    def test_commutes_with_excitation_number(self):
        shape = SpaceShape(3, 1)
        h = effective_hamiltonian(PhysicalParams(delta=10.0), (0, 2), shape)
        proj_e = np.zeros((4, 4), dtype=complex)
        proj_e[3, 3] = 1.0
        n_e = sum(embed_operator(shape, {a: proj_e}) for a in range(3))
        comm = h.matrix @ n_e - n_e @ h.matrix
        assert np.max(np.abs(comm)) < 1e-14

    def test_dormant_atom_untouched(self):
        shape = SpaceShape(3, 1)
        h = effective_hamiltonian(PhysicalParams(delta=10.0), (0, 2), shape)
        # dormant atom 1 in |e> must not contribute to the pair's shift
        assert elem(h, ([G, E, G], 0), ([G, E, G], 0)) == 0.0


class TestDriveHamiltonian:
    def test_control_drive_element(self):
        rabi, phase = 0.7, 1.1
        pulse = Pulse(frozenset({0}), (O, E), rabi, phase, 1.0)
        h = drive_hamiltonian(pulse, SHAPE2)
        assert elem(h, ([E, Z], 0), ([O, Z], 0)) == pytest.approx(
            -rabi * np.exp(1j * phase)
        )
        assert elem(h, ([O, Z], 0), ([E, Z], 0)) == pytest.approx(
            -rabi * np.exp(-1j * phase)
        )

    def test_both_atoms_driven(self):
        pulse = Pulse(frozenset({0, 1}), (Z, G), 0.5, 0.0, 1.0)
        h = drive_hamiltonian(pulse, SHAPE2)
        assert elem(h, ([G, Z], 0), ([Z, Z], 0)) == pytest.approx(-0.5)
        assert elem(h, ([Z, G], 0), ([Z, Z], 0)) == pytest.approx(-0.5)

    def test_zero_rabi_zero_operator(self):
        pulse = Pulse(frozenset({0}), (Z, G), 0.0, 0.3, 1.0)
        h = drive_hamiltonian(pulse, SHAPE2)
        assert np.all(h.matrix == 0)

    def test_exactly_hermitian(self):
        pulse = Pulse(frozenset({0, 1}), (Z, G), 1.0, 2.2, 1.0)
        h = drive_hamiltonian(pulse, SHAPE2)
        assert np.max(np.abs(h.matrix - h.matrix.conj().T)) == 0.0

    def test_atom_out_of_range(self):
        pulse = Pulse(frozenset({4}), (Z, G), 1.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            drive_hamiltonian(pulse, SHAPE2)


class TestDecayAugmented:
    def test_no_decay_returns_base(self):
        p = PhysicalParams(delta=10.0)
        base = full_hamiltonian(p, (0, 1), FrameChoice.ROTATED, SHAPE2)
        assert decay_augmented_hamiltonian(base, p) is base

    def test_excited_level_damping(self):
        p = PhysicalParams(delta=10.0, gamma=0.01, kappa=0.1)
        base = full_hamiltonian(p, (0, 1), FrameChoice.ROTATED, SHAPE2)
        h = decay_augmented_hamiltonian(base, p)
        assert not h.hermitian
        assert elem(h, ([E, G], 0), ([E, G], 0)).imag == pytest.approx(-0.005)
        assert elem(h, ([E, E], 0), ([E, E], 0)).imag == pytest.approx(-0.01)

    def test_cavity_damping_and_detuning_sign(self):
        # diagonal of |g g, 1>: real part -delta, imaginary part -kappa/2,
        # i.e. the amplitude equation dc/dt = (i delta - kappa/2) c
        p = PhysicalParams(delta=10.0, gamma=0.001, kappa=0.1)
        base = full_hamiltonian(p, (0, 1), FrameChoice.ROTATED, SHAPE2)
        h = decay_augmented_hamiltonian(base, p)
        d = elem(h, ([G, G], 1), ([G, G], 1))
        assert d.real == pytest.approx(-10.0)
        assert d.imag == pytest.approx(-0.05)
        d2 = elem(h, ([G, G], 2), ([G, G], 2))
        assert d2.imag == pytest.approx(-0.1)
