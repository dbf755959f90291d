"""Damped amplitude model: analytic and numeric fidelities against frozen references."""

import numpy as np
import pytest

from cavitygate.dynamics import IntegratorConfig, evolve
from cavitygate.fidelity import (
    EXPERIMENTAL_KAPPA,
    FidelityReport,
    amplitude_closed_form,
    damped_amplitude_trajectory,
    experimental_point,
    fidelity_analytic,
    fidelity_numeric,
    fidelity_point,
    fidelity_sweep,
    load_reference_table,
    low_loss_point,
    reference_grid,
    reports_to_csv,
)
from cavitygate.hilbert import AtomLevel, SpaceShape, amplitude_at, basis_state
from cavitygate.model import (
    FrameChoice,
    PhysicalParams,
    decay_augmented_hamiltonian,
    full_hamiltonian,
)

G, E = AtomLevel.G, AtomLevel.E

# Frozen reference rows: (gamma, kappa) -> (F analytic, F' numeric) at delta=10.
REFERENCE_ROWS = [
    (0.001, 0.1, 0.939334, 0.924248),
    (0.01, 0.1, 0.707988, 0.698862),
    (0.1, 0.1, 0.0418878, 0.0430447),
    (0.1, 0.01, 0.0430785, 0.0466712),
    (0.01, 0.01, 0.728113, 0.727542),
    (0.001, 0.01, 0.966035, 0.960429),
    (0.001, 0.001, 0.968768, 0.965277),
]


class TestAnalytic:
    @pytest.mark.parametrize("gamma,kappa,f_ref,_", REFERENCE_ROWS)
    def test_reference_rows(self, gamma, kappa, f_ref, _):
        params = PhysicalParams(delta=10.0, gamma=gamma, kappa=kappa)
        assert fidelity_analytic(params) == pytest.approx(f_ref, abs=1e-5)

    def test_lossless_is_exactly_one(self):
        params = PhysicalParams(delta=10.0)
        assert fidelity_analytic(params) == pytest.approx(1.0, abs=1e-14)

    def test_warns_outside_regime(self):
        with pytest.warns(UserWarning):
            fidelity_analytic(PhysicalParams(delta=2.0, gamma=0.01, kappa=0.01))


class TestNumeric:
    @pytest.mark.parametrize("gamma,kappa,_,fp_ref", REFERENCE_ROWS)
    def test_reference_rows(self, gamma, kappa, _, fp_ref):
        params = PhysicalParams(delta=10.0, gamma=gamma, kappa=kappa)
        assert fidelity_numeric(params) == pytest.approx(fp_ref, abs=1e-3)

    def test_lossless_dispersive_residual(self):
        # no decay channels: only the |gg1> leakage costs fidelity
        params = PhysicalParams(delta=10.0)
        f = fidelity_numeric(params)
        assert f >= 0.99
        assert f < 1.0

    def test_scipy_cross_oracle(self):
        """Independent integrator (adaptive RK) agrees to 1e-6."""
        from scipy.integrate import solve_ivp

        for gamma, kappa in [(0.001, 0.1), (0.01, 0.01)]:
            params = PhysicalParams(delta=10.0, gamma=gamma, kappa=kappa)

            def rhs(t, y):
                a, b, c = y[:3] + 1j * y[3:]
                da = -gamma / 2 * a + 1j * c
                db = -gamma / 2 * b + 1j * c
                dc = (1j * params.delta - kappa / 2) * c + 1j * (a + b)
                d = np.array([da, db, dc])
                return np.concatenate([d.real, d.imag])

            y0 = np.array([1.0, 0, 0, 0, 0, 0])
            sol = solve_ivp(
                rhs, (0.0, params.gate_time), y0, method="DOP853",
                rtol=1e-11, atol=1e-13,
            )
            a_final = sol.y[0, -1] + 1j * sol.y[3, -1]
            assert fidelity_numeric(params) == pytest.approx(
                abs(a_final) ** 2, abs=1e-6
            )

    def test_cross_module_consistency(self):
        """Three-amplitude model vs full state-vector decay evolution, 1e-6."""
        for gamma, kappa in [(0.001, 0.1), (0.01, 0.01)]:
            params = PhysicalParams(delta=10.0, gamma=gamma, kappa=kappa)
            shape = SpaceShape(2, 2)
            base = full_hamiltonian(params, (0, 1), FrameChoice.ROTATED, shape)
            h = decay_augmented_hamiltonian(base, params)
            state = basis_state([E, G], 0, 2)
            out = evolve(state, h, params.gate_time)
            f_state_vector = abs(amplitude_at(out, [E, G], 0)) ** 2
            assert fidelity_numeric(params) == pytest.approx(f_state_vector, abs=1e-6)

    def test_dt_override_honored(self):
        params = PhysicalParams(delta=10.0, gamma=0.001, kappa=0.01)
        f = fidelity_numeric(params, IntegratorConfig(dt=2e-4))
        assert f == pytest.approx(0.960429, abs=1e-3)


class TestClosedFormStructure:
    def test_amplitude_at_time_zero(self):
        params = PhysicalParams(delta=10.0, gamma=0.01, kappa=0.05)
        assert amplitude_closed_form(params, 0.0) == pytest.approx(1.0)

    def test_norm_never_exceeds_one(self):
        params = PhysicalParams(delta=10.0, gamma=0.02, kappa=0.05)
        for k in range(10):
            t = params.gate_time * k / 9
            assert abs(amplitude_closed_form(params, t)) <= 1 + 1e-12

    def test_trajectory_norm_leak_nonnegative(self):
        params = PhysicalParams(delta=10.0, gamma=0.01, kappa=0.1)
        traj = damped_amplitude_trajectory(params, n_samples=100)
        tracked = [state.tracked_population for _, state in traj]
        assert all(x <= 1 + 1e-9 for x in tracked)
        # tracked population only decreases (the decayed share never returns)
        assert all(b <= a + 1e-12 for a, b in zip(tracked, tracked[1:]))
        assert tracked[-1] < 1.0
        assert traj[-1][1].decayed_population > 0.0

    def test_decay_state_norm_guard(self):
        from cavitygate.fidelity import DecayModelState

        with pytest.raises(ValueError):
            DecayModelState(1.0, 0.5, 0.0)
        s = DecayModelState(0.6, 0.0, 0.0)
        assert s.decayed_population == pytest.approx(0.64)


class TestSweep:
    def test_reproduces_reference_table(self):
        grid = [(g, k) for g, k, _, _ in REFERENCE_ROWS]
        reports = fidelity_sweep(grid, delta=10.0)
        for report, (g, k, f_ref, fp_ref) in zip(reports, REFERENCE_ROWS):
            assert (report.gamma, report.kappa) == (g, k)
            assert report.f_analytic == pytest.approx(f_ref, abs=1e-5)
            assert report.f_numeric == pytest.approx(fp_ref, abs=1e-3)

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            fidelity_sweep([], delta=10.0)

    def test_monotone_in_gamma_and_kappa(self):
        gammas = [0.001, 0.01, 0.1]
        kappas = [0.001, 0.01, 0.1]
        for kappa in kappas:
            fs = [fidelity_numeric(PhysicalParams(delta=10.0, gamma=g, kappa=kappa)) for g in gammas]
            assert all(b < a for a, b in zip(fs, fs[1:]))
        for gamma in gammas:
            fs = [fidelity_numeric(PhysicalParams(delta=10.0, gamma=gamma, kappa=k)) for k in kappas]
            assert all(b < a for a, b in zip(fs, fs[1:]))

    def test_analytic_numeric_agreement_in_regime(self):
        """|F - F'| <= 0.02 for delta >= 10, kappa <= 0.1, gamma <= 0.01."""
        for gamma in (0.001, 0.01):
            for kappa in (0.001, 0.01, 0.1):
                r = fidelity_point(gamma, kappa, 10.0)
                assert abs(r.f_analytic - r.f_numeric) <= 0.02


class TestQuotedPoints:
    def test_experimental_kappa_conversion(self):
        # 2.8 pi MHz linewidth over 32 pi MHz coupling
        assert EXPERIMENTAL_KAPPA == 0.0875

    def test_experimental_point_near_93_percent(self):
        r = experimental_point()
        assert min(abs(r.f_analytic - 0.93), abs(r.f_numeric - 0.93)) <= 0.01

    def test_experimental_lossless_same_path(self):
        r = fidelity_point(0.0, 0.0, 10.0)
        assert r.f_numeric >= 0.99
        assert r.f_analytic == pytest.approx(1.0, abs=1e-14)

    def test_low_loss_point_above_99ish(self):
        r = low_loss_point()
        assert r.f_numeric >= 0.99 - 0.005
        assert r.f_analytic >= 0.99 - 0.005


class TestReportAndOutput:
    def test_report_bounds_validated(self):
        with pytest.raises(ValueError):
            FidelityReport(0.1, 0.1, 10.0, 31.4, f_analytic=1.2, f_numeric=0.5)

    def test_csv_layout(self):
        reports = fidelity_sweep([(0.001, 0.01)], delta=10.0)
        text = reports_to_csv(reports)
        lines = text.strip().splitlines()
        assert lines[0] == "gamma,kappa,delta,t_gate,f_analytic,f_numeric"
        fields = lines[1].split(",")
        assert len(fields) == 6
        assert fields[0] == "0.001000"
        assert all(len(f.split(".")[1]) == 6 for f in fields)

    def test_csv_deterministic(self):
        grid = [(0.001, 0.1), (0.01, 0.01)]
        a = reports_to_csv(fidelity_sweep(grid, delta=10.0))
        b = reports_to_csv(fidelity_sweep(grid, delta=10.0))
        assert a == b

    def test_reference_data_file(self):
        table = load_reference_table()
        assert table["delta"] == 10.0
        assert len(table["rows"]) == 7
        assert reference_grid() == [(g, k) for g, k, _, _ in REFERENCE_ROWS]
        for row, (g, k, f_ref, fp_ref) in zip(table["rows"], REFERENCE_ROWS):
            assert row["f_analytic"] == f_ref
            assert row["f_numeric"] == fp_ref
