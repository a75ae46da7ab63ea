from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .coefficients import CoefficientError, sign_report
from .csv_output import key_value_table, key_value_text, snapshot_columns, stack_snapshots, write_table
from .dispersion import FORMS, DispersionError, curve_columns, dispersion_curve, quintic_ratio
from .harness import (
    COMPARISON_COLUMNS,
    homogenized_on,
    initial_field,
    run_comparison,
    run_reference_scenario,
    scenario_coefficients,
    solver_config,
)
from .homogenized_solver import SolverError, fast_scale_reconstruction, save_checkpoint, simulate, spectral_resample
from .scenarios import ScenarioConfig, ScenarioError, load_scenario
from .swe_reference import ReferenceSolverError, crest_train, period_average
from .traveling_wave import (
    TravelingWaveError,
    periodic_wave_o3,
    solitary_wave_o3,
    solitary_wave_o5,
    speed_for_amplitude,
)
from .unit_cell import UnitCellError, identity_suite

OUTPUT_DIR_ENV = "BATHY_HOMOG_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "generated"


class UsageError(Exception):
    """Raised for option combinations that argparse cannot check."""


PACKAGE_ERRORS = (
    UnitCellError,
    CoefficientError,
    DispersionError,
    TravelingWaveError,
    SolverError,
    ReferenceSolverError,
    ScenarioError,
)


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--scenario",
        default="scenario_a",
        help="Built-in scenario name (scenario_a, scenario_b, flat) or path to a JSON scenario (default: scenario_a).",
    )
    common.add_argument(
        "--output-dir",
        dest="output_dir",
        help=f"Directory for generated files. If omitted, {OUTPUT_DIR_ENV} or '{DEFAULT_OUTPUT_DIR}/' is used.",
    )
    common.add_argument("--verbose", "-v", action="store_true", help="Log solver progress at DEBUG level.")
    return common


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bathy_homog",
        description="Homogenized shallow-water waves over periodic bathymetry.",
    )
    common = _common_options()
    verbs = parser.add_subparsers(dest="verb", required=True)

    verbs.add_parser(
        "dump-coefficients",
        parents=[common],
        help="Write every homogenized coefficient and the sign report.",
    )

    disp = verbs.add_parser("dispersion", parents=[common], help="Write a dimensionless dispersion curve.")
    disp.add_argument("--form", choices=FORMS, default="xxt", help="Dispersion form (default: xxt).")
    disp.add_argument("--kmax", type=float, default=5.0, help="Largest K on the curve (default: 5).")
    disp.add_argument("--points", type=int, default=501, help="Number of K samples (default: 501).")
    disp.add_argument(
        "--ratio",
        type=float,
        default=None,
        help="Quintic ratio r for form xxt5. If omitted, it is computed from the scenario profile.",
    )

    wave = verbs.add_parser("traveling-wave", parents=[common], help="Write a traveling-wave profile.")
    wave.add_argument("--order", type=int, choices=(3, 5), default=3)
    speed = wave.add_mutually_exclusive_group(required=True)
    speed.add_argument("--speed", type=float, help="Wave speed V in m/s.")
    speed.add_argument("--speed-ratio", dest="speed_ratio", type=float, help="Wave speed as a multiple of c.")
    speed.add_argument("--amplitude", type=float, help="Target crest height; the speed is solved for.")
    wave.add_argument(
        "--energy",
        type=float,
        default=None,
        help="Energy level inside the potential well; selects a periodic order-3 wave.",
    )

    sim = verbs.add_parser("simulate", parents=[common], help="Run the homogenized solver.")
    sim.add_argument("--order", type=int, choices=(3, 4, 5), default=3)
    sim.add_argument(
        "--reconstruct",
        action="store_true",
        help="Add the fast-scale reconstruction of the surface (written on the refined grid).",
    )
    sim.add_argument("--checkpoint", action="store_true", help="Also write a binary checkpoint of the last snapshot.")

    verbs.add_parser("reference", parents=[common], help="Run the finite-volume reference solver.")

    comp = verbs.add_parser("compare", parents=[common], help="Compare homogenized orders with the reference.")
    comp.add_argument(
        "--orders",
        type=int,
        nargs="+",
        choices=(3, 4, 5),
        default=None,
        help="Homogenized orders to run (default: the scenario's orders).",
    )

    ident = verbs.add_parser("verify-identities", parents=[common], help="Check the bracket identities on a profile.")
    ident.add_argument("--tol", type=float, default=1e-8, help="Relative tolerance per identity (default: 1e-8).")
    return parser


def _error_line(exc: BaseException) -> str:
    message = str(exc).replace("\\", "\\\\").replace('"', '\\"')
    return f'error: kind={type(exc).__name__} message="{message}"'


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def _dump_coefficients(scenario: ScenarioConfig, out: Path) -> int:
    coeffs = scenario_coefficients(scenario)
    rows = coeffs.as_rows()
    report = sign_report(coeffs)
    signs = [f"# sign status: {report.status}\n"] + [
        f"# {'PASS' if check.passed else 'FAIL'} {check.name} ({check.value:.6g})\n" for check in report.checks
    ]
    text_path = _write(out / f"{scenario.name}_coefficients.txt", "".join(signs) + key_value_text(rows))
    csv_path = _write(out / f"{scenario.name}_coefficients.csv", key_value_table(rows))
    print(
        f"Wrote coefficients to {text_path} and {csv_path} "
        f"(c={coeffs.c:.6g} m/s, mu={coeffs.mu:.6g}, signs={report.status})."
    )
    return 0


def _dispersion(scenario: ScenarioConfig, out: Path, args: argparse.Namespace) -> int:
    if args.points < 2 or not args.kmax > 0.0:
        raise UsageError("--points must be at least 2 and --kmax positive.")
    r = args.ratio
    if args.form == "xxt5" and r is None:
        r = quintic_ratio(scenario_coefficients(scenario))
    K = np.linspace(0.0, args.kmax, args.points)
    header, rows = curve_columns(dispersion_curve(args.form, K, r if args.form == "xxt5" else None))
    path = write_table(out / f"dispersion_{args.form}.csv", header, rows)
    extra = f", r={r:.6g}" if args.form == "xxt5" else ""
    print(f"Wrote dispersion curve to {path} (form={args.form}, {args.points} points up to K={args.kmax}{extra}).")
    return 0


def _traveling_wave(scenario: ScenarioConfig, out: Path, args: argparse.Namespace) -> int:
    coeffs = scenario_coefficients(scenario)
    delta = scenario.delta
    if args.energy is not None and args.order != 3:
        raise UsageError("Periodic waves (--energy) are only available at order 3.")
    if args.amplitude is not None:
        V = speed_for_amplitude(coeffs, delta, args.amplitude, order=args.order)
    elif args.speed_ratio is not None:
        V = args.speed_ratio * coeffs.c
    else:
        V = args.speed
    if args.energy is not None:
        wave = periodic_wave_o3(coeffs, V, delta, args.energy)
        name = f"periodic_wave_o3_{scenario.name}.csv"
    elif args.order == 3:
        wave = solitary_wave_o3(coeffs, V, delta)
        name = f"traveling_wave_o3_{scenario.name}.csv"
    else:
        wave = solitary_wave_o5(coeffs, V, delta)
        name = f"traveling_wave_o5_{scenario.name}.csv"
    path = write_table(out / name, ["xi", "eta", "q"], np.column_stack((wave.xi, wave.eta, wave.q)))
    print(f"Wrote traveling wave to {path} (order={args.order}, V={V:.10g} m/s, amplitude={wave.amplitude:.6g} m).")
    return 0


def _simulate(scenario: ScenarioConfig, out: Path, args: argparse.Namespace) -> int:
    coeffs = scenario_coefficients(scenario)
    config = solver_config(scenario, args.order)
    snapshots = simulate(initial_field(scenario, coeffs), coeffs, config, scenario.output_times)
    tables = []
    profile = scenario.profile()
    for state in snapshots:
        if args.reconstruct:
            fast = fast_scale_reconstruction(state, coeffs, profile, scenario.delta, config)
            M_fine = fast.x.size
            tables.append(
                snapshot_columns(
                    state.t,
                    fast.x,
                    spectral_resample(state.eta_bar, M_fine),
                    spectral_resample(state.q_bar, M_fine),
                    eta_reconstructed=fast.eta,
                )
            )
        else:
            tables.append(snapshot_columns(state.t, state.x, state.eta_bar, state.q_bar))
    header, rows = stack_snapshots(tables)
    path = write_table(out / f"simulate_o{args.order}_{scenario.name}.csv", header, rows)
    print(f"Wrote {len(snapshots)} snapshots to {path} (order={args.order}, M={scenario.homogenized.M}).")
    if args.checkpoint:
        ckpt = save_checkpoint(out / f"simulate_o{args.order}_{scenario.name}.ckpt", snapshots[-1])
        print(f"Wrote checkpoint to {ckpt} (t={snapshots[-1].t:.6g}).")
    return 0


def _reference(scenario: ScenarioConfig, out: Path) -> int:
    snapshots, seconds = run_reference_scenario(scenario)
    tables = [
        snapshot_columns(s.t, s.x, period_average(s, scenario.delta), s.hu, eta_reference=s.eta) for s in snapshots
    ]
    header, rows = stack_snapshots(tables)
    path = write_table(out / f"reference_{scenario.name}.csv", header, rows)
    print(f"Wrote {len(snapshots)} reference snapshots to {path} ({snapshots[0].x.size} cells, {seconds:.2f} s).")
    last = snapshots[-1]
    crests = crest_train(last.x, period_average(last, scenario.delta), (0.0, float(last.x[-1])))
    print(f"Separated crests at t={last.t:.6g}: {len(crests)}.")
    return 0


def _compare(scenario: ScenarioConfig, out: Path, args: argparse.Namespace) -> int:
    report = run_comparison(scenario, args.orders)
    path = write_table(out / f"compare_{scenario.name}.csv", COMPARISON_COLUMNS, report.table())
    print(f"Wrote comparison to {path} (reference {report.reference_seconds:.2f} s).")
    for order, snapshots in report.homogenized.items():
        tables = []
        for state, ref in zip(snapshots, report.reference):
            keep = (state.x >= 0.0) & (state.x <= ref.x[-1])
            x = state.x[keep]
            reference_eta = np.interp(x, ref.x, period_average(ref, scenario.delta))
            tables.append(
                snapshot_columns(state.t, x, homogenized_on(state, x), state.q_bar[keep], eta_reference=reference_eta)
            )
        header, rows = stack_snapshots(tables)
        snap_path = write_table(out / f"compare_o{order}_{scenario.name}.csv", header, rows)
        print(
            f"Wrote order-{order} snapshots to {snap_path} "
            f"({report.homogenized_seconds[order]:.2f} s, speedup {report.speedup(order):.1f}x)."
        )
    return 0


def _verify_identities(scenario: ScenarioConfig, args: argparse.Namespace) -> int:
    checks = identity_suite(scenario.profile(), tol=args.tol)
    failed: list[str] = []
    for check in checks:
        if check.skipped is not None:
            print(f"SKIP {check.name}: {check.skipped}")
        elif check.passed:
            print(f"PASS {check.name} (residual {check.residual:.3e})")
        else:
            failed.append(check.name)
            print(f"FAIL {check.name} (lhs {check.lhs:.17g}, rhs {check.rhs:.17g})")
    if failed:
        raise UnitCellError(f"{len(failed)} identities failed: {', '.join(failed)}.")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    out = Path(args.output_dir or os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR)
    try:
        scenario = load_scenario(args.scenario)
        if args.verb == "dump-coefficients":
            return _dump_coefficients(scenario, out)
        if args.verb == "dispersion":
            return _dispersion(scenario, out, args)
        if args.verb == "traveling-wave":
            return _traveling_wave(scenario, out, args)
        if args.verb == "simulate":
            return _simulate(scenario, out, args)
        if args.verb == "reference":
            return _reference(scenario, out)
        if args.verb == "compare":
            return _compare(scenario, out, args)
        return _verify_identities(scenario, args)
    except UsageError as exc:
        print(_error_line(exc), file=sys.stderr)
        return 2
    except PACKAGE_ERRORS as exc:
        print(_error_line(exc), file=sys.stderr)
        return 1
    except OSError as exc:
        print(_error_line(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
