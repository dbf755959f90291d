"""Command-line front end.

Subcommands: ``truth-table``, ``fidelity``, ``cost``, ``verify``, ``bell``,
``toffoli``.  Every numeric flag can also be supplied through an
environment variable with the ``CAVITYGATE_`` prefix (``CAVITYGATE_DELTA``
etc.) or a JSON/TOML config file (``--config``); explicit flags win over
the environment, which wins over the config file.

Exit codes: 0 on success, 1 when a verification or tolerance check fails,
2 on usage or configuration errors.  Identical configurations produce
byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import circuits, fidelity, protocol
from .dynamics import effective_pair_closed_form, evolve
from .hilbert import AtomLevel, SpaceShape, basis_state, partial_overlap
from .model import FrameChoice, PhysicalParams, full_hamiltonian
from .protocol import EngineMode

ENV_PREFIX = "CAVITYGATE_"

_CONFIG_KEYS = {
    "delta",
    "gamma",
    "kappa",
    "mode",
    "n",
    "n_max",
    "fault_factor",
    "format",
    "out",
}

_MODES = {
    "effective": EngineMode.EFFECTIVE,
    "full": EngineMode.FULL,
    "decay": EngineMode.FULL_WITH_DECAY,
}


class _UsageError(Exception):
    pass


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        if path.endswith(".toml"):
            try:
                import tomllib
            except ModuleNotFoundError:
                import tomli as tomllib
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        else:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
    except (OSError, ValueError) as exc:
        raise _UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise _UsageError(f"config {path} must contain a table/object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise _UsageError(f"unknown config keys: {sorted(unknown)}")
    return data


def _resolve(args, name: str, config: dict, cast, default):
    """flag > environment > config file > default."""
    flag = getattr(args, name, None)
    if flag is not None:
        return flag
    env = os.environ.get(ENV_PREFIX + name.upper())
    if env is not None:
        try:
            return cast(env)
        except ValueError as exc:
            raise _UsageError(f"bad {ENV_PREFIX}{name.upper()}={env!r}: {exc}") from exc
    if name in config:
        return cast(config[name])
    return default


def _resolve_params(args, config: dict) -> PhysicalParams:
    delta = _resolve(args, "delta", config, float, 10.0)
    gamma = _resolve(args, "gamma", config, float, 0.0)
    kappa = _resolve(args, "kappa", config, float, 0.0)
    try:
        return PhysicalParams(delta=delta, gamma=gamma, kappa=kappa)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def _resolve_mode(args, config: dict) -> EngineMode:
    name = _resolve(args, "mode", config, str, "effective")
    if name not in _MODES:
        raise _UsageError(f"unknown mode {name!r}; choose from {sorted(_MODES)}")
    return _MODES[name]


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _as_json(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# subcommands


def cmd_truth_table(args, config: dict) -> int:
    params = _resolve_params(args, config)
    mode = _resolve_mode(args, config)
    rows = protocol.truth_table(params, mode)
    all_pass = all(r.passed for r in rows)

    fmt = _resolve(args, "format", config, str, "table")
    if fmt == "json":
        payload = []
        for r in rows:
            entry = {
                "input": r.input_label,
                "step_errors": list(r.step_errors),
                "output_sign": r.output_sign,
                "tolerance": r.tolerance,
                "passed": r.passed,
            }
            if args.dump_states:
                entry["trace"] = r.trace.to_json_dict(include_states=True)
            payload.append(entry)
        _emit(_as_json(payload), args.out)
    else:
        lines = [
            f"C-Sign truth table  (mode={mode.value}, delta={params.delta:g}, "
            f"tol={rows[0].tolerance:g})",
            "input  " + "  ".join(f"{label:>9}" for label in protocol.CSIGN_STEP_LABELS)
            + "   sign  verdict",
        ]
        for r in rows:
            errs = "  ".join(f"{e:9.2e}" for e in r.step_errors)
            sign = "+" if r.output_sign > 0 else "-"
            lines.append(
                f"|{r.input_label}>   {errs}    {sign}    "
                + ("PASS" if r.passed else "FAIL")
            )
        lines.append("overall: " + ("PASS" if all_pass else "FAIL"))
        _emit("\n".join(lines) + "\n", args.out)
    return 0 if all_pass else 1


def _parse_float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x != ""]
    except ValueError as exc:
        raise _UsageError(f"bad numeric list {text!r}") from exc


def cmd_fidelity(args, config: dict) -> int:
    delta = _resolve(args, "delta", config, float, 10.0)
    fmt = _resolve(args, "format", config, str, "csv")

    failures: list[str] = []
    if args.reference_grid:
        table = fidelity.load_reference_table()
        delta = float(table["delta"])
        reports = fidelity.fidelity_sweep(fidelity.reference_grid(), delta)
        tol_an = float(table["tolerances"]["f_analytic"])
        tol_num = float(table["tolerances"]["f_numeric"])
        for report, row in zip(reports, table["rows"]):
            d_an = abs(report.f_analytic - row["f_analytic"])
            d_num = abs(report.f_numeric - row["f_numeric"])
            if d_an > tol_an or d_num > tol_num:
                failures.append(
                    f"(gamma={report.gamma}, kappa={report.kappa}): "
                    f"|dF|={d_an:.2e} (tol {tol_an:g}), |dF'|={d_num:.2e} (tol {tol_num:g})"
                )
    elif args.experimental:
        reports = [fidelity.experimental_point()]
    else:
        gammas = _parse_float_list(_resolve(args, "gamma", config, str, "0.001"))
        kappas = _parse_float_list(_resolve(args, "kappa", config, str, "0.01"))
        if not gammas or not kappas:
            raise _UsageError("fidelity sweep requires at least one gamma and kappa")
        grid = [(g, k) for g in gammas for k in kappas]
        reports = fidelity.fidelity_sweep(grid, delta)

    if fmt == "json":
        payload = [
            {
                "gamma": r.gamma,
                "kappa": r.kappa,
                "delta": r.delta,
                "t_gate": r.t_gate,
                "f_analytic": round(r.f_analytic, 6),
                "f_numeric": round(r.f_numeric, 6),
            }
            for r in reports
        ]
        _emit(_as_json(payload), args.out)
    elif fmt == "table":
        lines = ["  gamma     kappa    delta     t_gate   F(analytic)  F'(numeric)"]
        for r in reports:
            lines.append(
                f"{r.gamma:9.6f} {r.kappa:9.6f} {r.delta:8.3f} {r.t_gate:10.4f}"
                f"   {r.f_analytic:10.6f}   {r.f_numeric:10.6f}"
            )
        _emit("\n".join(lines) + "\n", args.out)
    else:
        _emit(fidelity.reports_to_csv(reports), args.out)

    if failures:
        for f in failures:
            sys.stderr.write(f"reference mismatch {f}\n")
        return 1
    return 0


def _parse_n_range(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        try:
            return list(range(int(lo), int(hi) + 1))
        except ValueError as exc:
            raise _UsageError(f"bad range {text!r}") from exc
    try:
        return [int(text)]
    except ValueError as exc:
        raise _UsageError(f"bad qubit count {text!r}") from exc


def cmd_cost(args, config: dict) -> int:
    n_text = _resolve(args, "n", config, str, "10")
    fault = int(_resolve(args, "fault_factor", config, int, 10))
    n_values = _parse_n_range(str(n_text))
    try:
        reports = circuits.cost_table(n_values, fault)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc

    fmt = _resolve(args, "format", config, str, "table")
    if fmt == "json":
        payload = [
            {
                "n_qubits": r.n_qubits,
                "swap_ops": r.swap_ops,
                "extra_cnots": r.extra_cnots,
                "extra_ft_ops": r.extra_ft_ops,
                "nonlocal_ops": r.nonlocal_ops,
                "direct_chain_extra": r.direct_chain_extra,
            }
            for r in reports
        ]
        _emit(_as_json(payload), args.out)
    elif fmt == "csv":
        lines = ["n_qubits,swap_ops,extra_cnots,extra_ft_ops,nonlocal_ops"]
        lines += [
            f"{r.n_qubits},{r.swap_ops},{r.extra_cnots},{r.extra_ft_ops},{r.nonlocal_ops}"
            for r in reports
        ]
        _emit("\n".join(lines) + "\n", args.out)
    else:
        lines = [
            "  N   SWAPs  extra CNOTs  fault-tolerant ops  non-local ops",
        ]
        for r in reports:
            note = (
                f"   (direct 3-qubit chain: {r.direct_chain_extra} extra)"
                if r.direct_chain_extra is not None
                else ""
            )
            lines.append(
                f"{r.n_qubits:3d}   {r.swap_ops:5d}  {r.extra_cnots:11d}"
                f"  {r.extra_ft_ops:18d}  {r.nonlocal_ops:13d}{note}"
            )
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def _oracle_suite(params: PhysicalParams, perturb: bool = False) -> list[tuple[str, bool, float]]:
    """Numerical evolution vs the closed forms; returns (name, passed, err)."""
    checks: list[tuple[str, bool, float]] = []
    rng = np.random.default_rng(20240831)
    labels = ("gg", "eg", "ge", "ee", "ga", "ea")

    # Effective engine vs closed form at random (eta, t).
    worst = 0.0
    shape = SpaceShape(2, 2)
    for label in labels:
        for _ in range(5):
            eta = float(rng.uniform(0.02, 0.3))
            t = float(rng.uniform(0.0, 2 * np.pi / eta))
            prm = PhysicalParams(delta=1.0 / eta)
            h = protocol.interaction_hamiltonian(prm, (0, 1), EngineMode.EFFECTIVE, shape)
            state = effective_pair_closed_form(label, eta, 0.0).to_state(shape)
            out = evolve(state, h, t)
            ref = effective_pair_closed_form(label, eta, t).to_state(shape)
            err = float(np.max(np.abs(out.amplitudes - ref.amplitudes)))
            worst = max(worst, err)
    if perturb:
        worst += 1.0  # test hook: force a detectable failure
    checks.append(("effective-vs-closed-form", worst <= 1e-8, worst))

    # Full dispersive engine vs closed form, amplitude-overlap deficit.
    worst_full = 0.0
    for label in labels:
        # two-excitation initial states need one spare Fock level
        shape_l = SpaceShape(2, 3 if label == "ee" else 2)
        h = full_hamiltonian(params, (0, 1), FrameChoice.ROTATED, shape_l)
        state = effective_pair_closed_form(label, params.eta, 0.0).to_state(shape_l)
        out = evolve(state, h, params.gate_time)
        ref = effective_pair_closed_form(label, params.eta, params.gate_time).to_state(shape_l)
        deficit = 1.0 - abs(partial_overlap(out, ref))
        worst_full = max(worst_full, deficit)
    tol_full = 2.0 * (params.omega_c / params.delta) ** 2
    checks.append(("full-vs-closed-form", worst_full <= tol_full, worst_full))
    return checks


def cmd_verify(args, config: dict) -> int:
    params = _resolve_params(args, config)
    results = [
        circuits.verify_swap_decomposition(),
        circuits.verify_cnot_csign_equivalence(),
        circuits.verify_toffoli_decomposition(params=params),
    ]
    lines = []
    failed = []
    for r in results:
        lines.append(
            f"{'PASS' if r.passed else 'FAIL'}  {r.name}  "
            f"max_dev={r.max_deviation:.3e}  {r.detail}"
        )
        if not r.passed:
            failed.append(r.name)

    for name, passed, err in _oracle_suite(params, perturb=args.self_test_perturb):
        lines.append(f"{'PASS' if passed else 'FAIL'}  {name}  max_err={err:.3e}")
        if not passed:
            failed.append(name)

    if args.bell:
        overlap = _bell_overlap(params, EngineMode.EFFECTIVE)
        ok = overlap >= 1 - 1e-9
        lines.append(f"{'PASS' if ok else 'FAIL'}  bell-state  overlap={overlap:.12f}")
        if not ok:
            failed.append("bell-state")

    _emit("\n".join(lines) + "\n", args.out)
    return 1 if failed else 0


def _bell_overlap(params: PhysicalParams, mode: EngineMode) -> float:
    state = basis_state([AtomLevel.E, AtomLevel.G], 0, 2)
    out = protocol.bell_prepare(state, 0, 1, params, mode)
    target = (1 / np.sqrt(2)) * np.exp(-1j * np.pi / 4) * (
        basis_state([AtomLevel.E, AtomLevel.G], 0, 2).amplitudes
        - 1j * basis_state([AtomLevel.G, AtomLevel.E], 0, 2).amplitudes
    )
    return float(abs(np.vdot(target, out.amplitudes)))


def cmd_bell(args, config: dict) -> int:
    params = _resolve_params(args, config)
    mode = _resolve_mode(args, config)
    overlap = _bell_overlap(params, mode)
    threshold = 1 - 1e-9 if mode is EngineMode.EFFECTIVE else 1 - 1e-3
    ok = overlap >= threshold
    _emit(
        f"bell overlap modulus = {overlap:.12f} (mode={mode.value}, "
        f"threshold={threshold})\n{'PASS' if ok else 'FAIL'}\n",
        args.out,
    )
    return 0 if ok else 1


def cmd_toffoli(args, config: dict) -> int:
    params = _resolve_params(args, config)
    mode = _resolve_mode(args, config)
    simulated = protocol.toffoli_qubit_matrix(params, mode)
    dev = circuits.phase_aligned_deviation(simulated, circuits.ideal_toffoli())
    tol = 1e-8 if mode is EngineMode.EFFECTIVE else 1e-1
    ok = dev <= tol
    _emit(
        f"protocol toffoli vs ideal: max deviation = {dev:.3e} "
        f"(mode={mode.value}, tol={tol:g})\n{'PASS' if ok else 'FAIL'}\n",
        args.out,
    )
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavitygate",
        description="Cavity-mediated non-local two-qubit gate simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON or TOML config file")
        p.add_argument("--format", choices=("json", "csv", "table"), default=None)
        p.add_argument("--out", help="write output to this path instead of stdout")
        p.add_argument("--delta", type=float, default=None, help="detuning in omega_c units")
        p.add_argument("--gamma", default=None, help="spontaneous decay rate(s)")
        p.add_argument("--kappa", default=None, help="cavity decay rate(s)")
        p.add_argument("--mode", choices=tuple(_MODES), default=None)

    p = sub.add_parser("truth-table", help="run the C-Sign truth table")
    add_common(p)
    p.add_argument("--dump-states", action="store_true", help="include state snapshots")
    p.set_defaults(func=cmd_truth_table)

    p = sub.add_parser("fidelity", help="decay-limited gate fidelities")
    add_common(p)
    p.add_argument(
        "--reference-grid",
        action="store_true",
        help="run the embedded reference grid and diff against it",
    )
    p.add_argument(
        "--experimental",
        action="store_true",
        help="run the published experimental cavity parameters",
    )
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("cost", help="nearest-neighbor routing cost table")
    add_common(p)
    p.add_argument("--n", default=None, help="qubit count or range, e.g. 10 or 3..12")
    p.add_argument("--fault-factor", dest="fault_factor", type=int, default=None)
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("verify", help="matrix identities and oracle checks")
    add_common(p)
    p.add_argument("--bell", action="store_true", help="also check Bell-state generation")
    p.add_argument(
        "--self-test-perturb",
        action="store_true",
        help="test hook: inject an error to confirm failures are detected",
    )
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bell", help="single-step entangled-state generation")
    add_common(p)
    p.set_defaults(func=cmd_bell)

    p = sub.add_parser("toffoli", help="protocol Toffoli vs the ideal matrix")
    add_common(p)
    p.set_defaults(func=cmd_toffoli)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        return args.func(args, config)
    except _UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
