"""Decay-limited gate fidelity from the damped three-amplitude model.

During the cavity-interaction window the worst-case branch ``|e_c, g_t>``
couples only to ``|g_c, e_t>`` and ``|g_c, g_t, 1_k>``; spontaneous decay
(rate gamma) and cavity loss (rate kappa) drain these amplitudes into a
dynamically decoupled sector, so plain amplitude equations suffice:

    da/dt = -(gamma/2) a + i omega_c c
    db/dt = -(gamma/2) b + i omega_c c
    dc/dt = (i delta - kappa/2) c + i omega_c (a + b)

Adiabatic elimination of the one-photon amplitude (delta >> omega_c >>
kappa) gives the closed form for ``a(t)``; the gate fidelity is
``F = |a(t)|**2`` at the interaction time ``t = pi * delta / omega_c**2``.
``fidelity_numeric`` integrates the three coupled equations without the
elimination and is an independent code path from the full state-vector
engine (the two are cross-checked in the test suite).

Pulse steps are treated as instantaneous and lossless here; only the
cavity window accrues decay.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from importlib import resources
from math import ceil
from typing import Iterable, Sequence

import numpy as np

from .dynamics import DEFAULT_STEP_ANGLE, MAX_STEP_ANGLE, IntegratorConfig
from .model import PhysicalParams

__all__ = [
    "DecayModelState",
    "FidelityReport",
    "amplitude_closed_form",
    "fidelity_analytic",
    "fidelity_numeric",
    "fidelity_point",
    "fidelity_sweep",
    "experimental_point",
    "low_loss_point",
    "damped_amplitude_trajectory",
    "reports_to_csv",
    "load_reference_table",
    "EXPERIMENTAL_KAPPA",
]

# Experimental strong-coupling cavity parameters: coupling 32*pi MHz,
# cavity linewidth 2.8*pi MHz, hence kappa = 2.8/32 in units of the coupling.
EXPERIMENTAL_KAPPA = 2.8 / 32.0
EXPERIMENTAL_GAMMA = 0.001
EXPERIMENTAL_DELTA = 10.0


@dataclass(frozen=True)
class DecayModelState:
    """Tracked amplitudes of the damped model at one instant.

    ``a``, ``b``, ``c`` belong to |e_c g_t 0>, |g_c e_t 0>, |g_c g_t 1>;
    the decayed share is implicit, 1 - (|a|^2 + |b|^2 + |c|^2), and never
    returns.
    """

    a: complex
    b: complex
    c: complex

    def __post_init__(self) -> None:
        if self.tracked_population > 1 + 1e-9:
            raise ValueError(
                f"tracked population {self.tracked_population} exceeds 1"
            )

    @property
    def tracked_population(self) -> float:
        return abs(self.a) ** 2 + abs(self.b) ** 2 + abs(self.c) ** 2

    @property
    def decayed_population(self) -> float:
        return max(0.0, 1.0 - self.tracked_population)


@dataclass(frozen=True)
class FidelityReport:
    """Analytic and numeric fidelity for one (gamma, kappa, delta) point."""

    gamma: float
    kappa: float
    delta: float
    t_gate: float
    f_analytic: float
    f_numeric: float
    notes: str = ""

    def __post_init__(self) -> None:
        for name in ("f_analytic", "f_numeric"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")


def amplitude_closed_form(params: PhysicalParams, t: float) -> complex:
    """Adiabatic-elimination solution a(t) for the initial branch a(0)=1.

    Evaluates, with all rates in units of omega_c,

        a(t) = (1/2) exp(-t*gamma*delta / (2*delta + i*kappa)) *
               [ exp(-i*t*gamma*kappa / (2*(2*delta + i*kappa)))
               + exp(-i*t*(gamma*kappa + 8*omega_c**2) / (2*(2*delta + i*kappa))) ]
    """
    gamma, kappa, delta = params.gamma, params.kappa, params.delta
    omega = params.omega_c
    denom = 2.0 * delta + 1j * kappa
    pre = np.exp(-t * gamma * delta / denom)
    term1 = np.exp(-1j * t * gamma * kappa / (2.0 * denom))
    term2 = np.exp(-1j * t * (gamma * kappa + 8.0 * omega**2) / (2.0 * denom))
    return complex(0.5 * pre * (term1 + term2))


def fidelity_analytic(params: PhysicalParams) -> float:
    """F = |a(t_gate)|**2 from the closed form, t_gate = pi*delta/omega_c**2."""
    if not (params.delta >= 10 * params.omega_c and params.kappa <= 0.5 * params.omega_c):
        warnings.warn(
            "closed form assumes delta >> omega_c >> kappa; result may be inaccurate",
            stacklevel=2,
        )
    return abs(amplitude_closed_form(params, params.gate_time)) ** 2


def _amplitude_matrix(params: PhysicalParams) -> np.ndarray:
    """Generator M of the damped amplitude equations, d(a,b,c)/dt = M (a,b,c)."""
    g, k, d, om = params.gamma, params.kappa, params.delta, params.omega_c
    return np.array(
        [
            [-g / 2.0, 0.0, 1j * om],
            [0.0, -g / 2.0, 1j * om],
            [1j * om, 1j * om, 1j * d - k / 2.0],
        ],
        dtype=complex,
    )


def _rk4_matrix_power(m: np.ndarray, t: float, dt_max: float) -> np.ndarray:
    """Exact n-step fixed RK4 propagator for dx/dt = M x as a matrix power."""
    n = max(1, ceil(t / dt_max - 1e-9))
    a = m * (t / n)
    a2 = a @ a
    u = np.eye(m.shape[0], dtype=complex) + a + a2 / 2.0 + (a2 @ a) / 6.0 + (a2 @ a2) / 24.0
    return np.linalg.matrix_power(u, n)


def _step_limit(m: np.ndarray, cfg: IntegratorConfig | None) -> float:
    bound = float(np.max(np.sum(np.abs(m), axis=1)))
    if cfg is not None and cfg.dt is not None:
        if cfg.dt * bound > MAX_STEP_ANGLE * (1 + 1e-9):
            raise ValueError(f"dt={cfg.dt} too coarse for spectral bound {bound:.3g}")
        return cfg.dt
    return DEFAULT_STEP_ANGLE / bound


def fidelity_numeric(
    params: PhysicalParams, cfg: IntegratorConfig | None = None
) -> float:
    """F' = |a(t_gate)|**2 from the three coupled equations, no elimination."""
    m = _amplitude_matrix(params)
    u = _rk4_matrix_power(m, params.gate_time, _step_limit(m, cfg))
    a_t = (u @ np.array([1.0, 0.0, 0.0], dtype=complex))[0]
    return float(abs(a_t) ** 2)


def damped_amplitude_trajectory(
    params: PhysicalParams,
    n_samples: int = 200,
    cfg: IntegratorConfig | None = None,
) -> list[tuple[float, DecayModelState]]:
    """Sampled damped evolution from (a, b, c) = (1, 0, 0), for diagnostics."""
    m = _amplitude_matrix(params)
    dt_max = _step_limit(m, cfg)
    x = np.array([1.0, 0.0, 0.0], dtype=complex)
    out = [(0.0, DecayModelState(*map(complex, x)))]
    t_prev = 0.0
    for k in range(1, n_samples + 1):
        t_k = params.gate_time * k / n_samples
        x = _rk4_matrix_power(m, t_k - t_prev, dt_max) @ x
        t_prev = t_k
        out.append((t_k, DecayModelState(*map(complex, x))))
    return out


def fidelity_point(
    gamma: float,
    kappa: float,
    delta: float,
    cfg: IntegratorConfig | None = None,
    notes: str = "",
) -> FidelityReport:
    """Both fidelities for one parameter point."""
    params = PhysicalParams(delta=delta, kappa=kappa, gamma=gamma)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        f_an = fidelity_analytic(params)
    return FidelityReport(
        gamma=gamma,
        kappa=kappa,
        delta=delta,
        t_gate=params.gate_time,
        f_analytic=f_an,
        f_numeric=fidelity_numeric(params, cfg),
        notes=notes,
    )


def fidelity_sweep(
    grid: Sequence[tuple[float, float]],
    delta: float = 10.0,
    cfg: IntegratorConfig | None = None,
) -> list[FidelityReport]:
    """One report per (gamma, kappa) point, in input order."""
    if not grid:
        raise ValueError("fidelity sweep requires a non-empty grid")
    return [fidelity_point(g, k, delta, cfg) for g, k in grid]


def experimental_point(cfg: IntegratorConfig | None = None) -> FidelityReport:
    """Fidelity at the published cavity parameters (kappa/omega_c = 0.0875)."""
    return fidelity_point(
        EXPERIMENTAL_GAMMA,
        EXPERIMENTAL_KAPPA,
        EXPERIMENTAL_DELTA,
        cfg,
        notes="experimental cavity parameters",
    )


def low_loss_point(cfg: IntegratorConfig | None = None) -> FidelityReport:
    """The quoted low-loss operating point (gamma=1e-4, kappa=0.01, delta=10)."""
    return fidelity_point(1e-4, 0.01, 10.0, cfg, notes="low-loss operating point")


def reports_to_csv(reports: Iterable[FidelityReport]) -> str:
    """Render reports as CSV with 6 decimal places, one row per point."""
    lines = ["gamma,kappa,delta,t_gate,f_analytic,f_numeric"]
    for r in reports:
        lines.append(
            f"{r.gamma:.6f},{r.kappa:.6f},{r.delta:.6f},"
            f"{r.t_gate:.6f},{r.f_analytic:.6f},{r.f_numeric:.6f}"
        )
    return "\n".join(lines) + "\n"


def load_reference_table() -> dict:
    """Frozen reference fidelities shipped with the package.

    Returns a dict with keys ``delta``, ``rows`` (list of mappings with
    gamma, kappa, f_analytic, f_numeric) and ``tolerances``.
    """
    with resources.files("cavitygate").joinpath(
        "data/reference_fidelities.json"
    ).open("r", encoding="utf-8") as fh:
        return json.load(fh)


def reference_grid() -> list[tuple[float, float]]:
    """The (gamma, kappa) grid of the embedded reference table, in order."""
    table = load_reference_table()
    return [(row["gamma"], row["kappa"]) for row in table["rows"]]
