"""Command-line front end: simulation, dilation certification, cross-solver
comparison, cutoff-convergence studies and parameter sweeps.

Output files are deterministic: fixed %.17g float formatting, sorted JSON
keys, LF line endings, no timestamps.  Identical configs therefore produce
byte-identical artifacts.
"""

import argparse
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import dynamics, pseudomode, volterra
from .config import (
    ConfigError,
    RunConfig,
    apply_override,
    config_to_dict,
    parse_config,
)
from .linalg import LinAlgError, hermitian_eigen
from .model import TimeGrid, lorentz_correlation
from .pseudomode import DilationReport

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_THRESHOLD = 4

_FLOAT_FMT = "%.17g"


def _fmt(x: float) -> str:
    return _FLOAT_FMT % x


def _atomic_write(path: str, data: str):
    tmp = path + ".tmp"
    with open(tmp, "w", newline="\n") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _dilation_dict(report: DilationReport) -> dict:
    return {
        "spectral_pass": report.spectral_pass,
        "min_eigenvalue_V": report.min_eigenvalue_v,
        "closed_form_pass": report.closed_form_pass,
        "threshold": report.threshold,
        "min_eigenvalue_H": report.min_eigenvalue_h,
        "psd_tolerance": report.psd_tolerance,
        "per_block": [
            {
                "alpha": b.alpha,
                "E_alpha": b.e_alpha,
                "min_eigenvalue": b.min_eigenvalue,
                "passed": b.passed,
            }
            for b in report.per_block
        ],
    }


def _lorentz_kernel(bath):
    if bath.k == 0:
        return None
    peaks = bath.peaks
    return lambda t: lorentz_correlation(peaks, t)


def _run_trajectory(cfg: RunConfig, grid: TimeGrid, renormalize_init: bool):
    if cfg.bath.is_empty:
        return dynamics.evolve_closed(
            cfg.system, cfg.initial, grid, rtol=cfg.solver.rtol, atol=cfg.solver.atol
        )
    heff = pseudomode.build_effective_hamiltonian(cfg.system, cfg.bath)
    return dynamics.evolve(
        heff,
        cfg.initial,
        grid,
        rtol=cfg.solver.rtol,
        atol=cfg.solver.atol,
        renormalize_init=renormalize_init,
    )


def _validate_rho(rho: dynamics.ReducedDensityMatrix, t: float) -> float:
    """Check the density-matrix invariants; returns the minimum eigenvalue."""
    m = rho.matrix
    asym = float(np.abs(m - m.conj().T).max())
    if asym > rho.HERMITICITY_TOL:
        raise LinAlgError(f"rho at t={t} not Hermitian (defect {asym:.3e})")
    trace_dev = abs(float(np.trace(m).real) - 1.0)
    if trace_dev > rho.TRACE_TOL:
        raise LinAlgError(f"rho at t={t} trace deviates by {trace_dev:.3e}")
    min_eig = float(hermitian_eigen(m).eigenvalues[0])
    if min_eig < -rho.PSD_TOL:
        raise LinAlgError(f"rho at t={t} not PSD (min eigenvalue {min_eig:.3e})")
    return min_eig


def _simulate(cfg: RunConfig, out_dir: str, renormalize_init: bool) -> dict:
    grid = TimeGrid.uniform(cfg.t_max, cfg.output_points)
    traj = _run_trajectory(cfg, grid, renormalize_init)
    dilation = pseudomode.check_dilation_closed_form(cfg.system, cfg.bath)
    obs = dynamics.observables(traj, cfg.initial)

    n = cfg.system.n
    header = ["t"]
    for i in range(n + 1):
        for j in range(n + 1):
            header.append(f"rho_{i}_{j}_re")
            header.append(f"rho_{i}_{j}_im")
    header.append("excited_population")

    lines = [",".join(header)]
    min_rho_eig = np.inf
    max_trace_dev = 0.0
    for t, excited, _ground, rho in obs:
        min_rho_eig = min(min_rho_eig, _validate_rho(rho, t))
        max_trace_dev = max(max_trace_dev, abs(float(np.trace(rho.matrix).real) - 1.0))
        row = [_fmt(t)]
        for i in range(n + 1):
            for j in range(n + 1):
                z = rho.matrix[i, j]
                row.append(_fmt(z.real))
                row.append(_fmt(z.imag))
        row.append(_fmt(excited))
        lines.append(",".join(row))

    report = {
        "config": config_to_dict(cfg),
        "dilation": _dilation_dict(dilation),
        "trajectory": {
            "points": len(grid),
            "final_excited_population": obs[-1][1],
            "final_ground_population": obs[-1][2],
            "max_trace_deviation": max_trace_dev,
            "min_rho_eigenvalue": float(min_rho_eig),
        },
        "tolerances": {
            "rho_hermiticity": dynamics.ReducedDensityMatrix.HERMITICITY_TOL,
            "rho_trace": dynamics.ReducedDensityMatrix.TRACE_TOL,
            "rho_psd": dynamics.ReducedDensityMatrix.PSD_TOL,
            "ode_rtol": cfg.solver.rtol,
            "ode_atol": cfg.solver.atol,
        },
    }
    os.makedirs(out_dir, exist_ok=True)
    _atomic_write(os.path.join(out_dir, "trajectory.csv"), "\n".join(lines) + "\n")
    _atomic_write(os.path.join(out_dir, "report.json"), _dump_json(report))
    return report


def cmd_simulate(cfg: RunConfig, args) -> int:
    _simulate(cfg, args.out, not args.unrenormalized_init)
    return EXIT_OK


def cmd_check(cfg: RunConfig, args) -> int:
    report = _dilation_dict(pseudomode.check_dilation_closed_form(cfg.system, cfg.bath))
    text = _dump_json(report)
    os.makedirs(args.out, exist_ok=True)
    _atomic_write(os.path.join(args.out, "dilation.json"), text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_compare(cfg: RunConfig, args) -> int:
    steps = cfg.solver.oracle_steps
    grid = TimeGrid.uniform(cfg.t_max, steps + 1)
    traj = _run_trajectory(cfg, grid, renormalize_init=not args.unrenormalized_init)
    kernel = _lorentz_kernel(cfg.bath)
    if cfg.bath.eta > 0.0:
        oracle = volterra.solve_renormalized(
            cfg.system, cfg.bath.eta, kernel, cfg.initial.psi, cfg.t_max, steps,
            extrapolate=True,
        )
    else:
        oracle = volterra.solve_integro_differential(
            cfg.system, kernel, cfg.initial.psi, cfg.t_max, steps, extrapolate=True
        )
    sup = volterra.compare_trajectories(traj, oracle, norm="sup")
    l2 = volterra.compare_trajectories(traj, oracle, norm="L2")
    report = {
        "config": config_to_dict(cfg),
        "comparison": {
            "sup_deviation": sup,
            "l2_deviation": l2,
            "threshold": args.threshold,
            "oracle_steps": steps,
            "oracle_extrapolated": True,
        },
    }
    os.makedirs(args.out, exist_ok=True)
    _atomic_write(os.path.join(args.out, "compare.json"), _dump_json(report))
    sys.stdout.write(_dump_json(report["comparison"]))
    return EXIT_OK if sup <= args.threshold else EXIT_THRESHOLD


def cmd_cutoff_study(cfg: RunConfig, args) -> int:
    if cfg.bath.eta <= 0.0:
        sys.stderr.write("cutoff-study requires an Ohmic bath (eta > 0)\n")
        return EXIT_CONFIG
    steps = cfg.solver.oracle_steps
    kernel = _lorentz_kernel(cfg.bath)
    reference = volterra.solve_renormalized(
        cfg.system, cfg.bath.eta, kernel, cfg.initial.psi, cfg.t_max, steps,
        extrapolate=True,
    )
    family = volterra.solve_cutoff_family(
        cfg.system, cfg.bath.eta, args.omegas, kernel, cfg.initial.psi, cfg.t_max, steps
    )
    mask = reference.times >= args.t_min
    if not np.any(mask):
        sys.stderr.write(f"--t-min {args.t_min} excludes the whole grid\n")
        return EXIT_CONFIG
    lines = ["Omega,sup_deviation"]
    for omega, traj in zip(args.omegas, family):
        diff = np.linalg.norm(traj.states - reference.states, axis=1)
        sup = float(diff[mask].max())
        lines.append(f"{_fmt(omega)},{_fmt(sup)}")
    os.makedirs(args.out, exist_ok=True)
    _atomic_write(os.path.join(args.out, "cutoff_study.csv"), "\n".join(lines) + "\n")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def _sweep_point(payload):
    text, out_dir, renormalize_init = payload
    cfg = parse_config(text)
    _simulate(cfg, out_dir, renormalize_init)
    return out_dir


def cmd_sweep(cfg: RunConfig, args) -> int:
    if not cfg.sweep:
        sys.stderr.write("sweep requires a non-empty \"sweep\" section in the config\n")
        return EXIT_CONFIG
    base_doc = config_to_dict(cfg)
    paths = sorted(cfg.sweep.keys())
    value_lists = [cfg.sweep[p] for p in paths]

    jobs = []
    manifest = []
    for index, combo in enumerate(itertools.product(*value_lists)):
        doc = json.loads(json.dumps(base_doc))
        for path, value in zip(paths, combo):
            apply_override(doc, path, value)
        doc.pop("sweep", None)
        point_dir = os.path.join(args.out, f"point_{index:04d}")
        jobs.append((json.dumps(doc), point_dir, not args.unrenormalized_init))
        manifest.append(
            {
                "index": index,
                "dir": f"point_{index:04d}",
                "params": {p: v for p, v in zip(paths, combo)},
            }
        )

    os.makedirs(args.out, exist_ok=True)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            list(pool.map(_sweep_point, jobs))
    else:
        for payload in jobs:
            _sweep_point(payload)
    _atomic_write(os.path.join(args.out, "manifest.json"), _dump_json(manifest))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pseudobath",
        description="Exact non-Markovian reduced dynamics via pseudomode "
        "effective Hamiltonians, with dilation certification and "
        "independent cross-validation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="path to a JSON run config")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--rtol", type=float, default=None, help="override ODE rtol")
        p.add_argument("--atol", type=float, default=None, help="override ODE atol")
        p.add_argument(
            "--oracle-steps", type=int, default=None, help="override oracle step count"
        )
        p.add_argument(
            "--unrenormalized-init",
            action="store_true",
            help="skip the 1/(1+i*eta/2) rescaling of the initial system part",
        )

    p = sub.add_parser("simulate", help="run the pseudomode dynamics, emit CSV + report")
    add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check", help="certify the Markovian-dilation condition")
    add_common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("compare", help="cross-validate against the direct memory solver")
    add_common(p)
    p.add_argument(
        "--threshold",
        type=float,
        default=1e-6,
        help="nonzero exit if the sup deviation exceeds this",
    )
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("cutoff-study", help="finite-cutoff convergence study")
    add_common(p)
    p.add_argument(
        "--omegas", type=float, nargs="+", default=[20.0, 40.0, 80.0],
        help="cutoff frequencies to scan",
    )
    p.add_argument(
        "--t-min", type=float, default=0.5,
        help="start of the deviation window (the cutoff limit holds for t > 0)",
    )
    p.set_defaults(func=cmd_cutoff_study)

    p = sub.add_parser("sweep", help="cartesian parameter sweep of simulate")
    add_common(p)
    p.add_argument("--jobs", type=int, default=1, help="parallel sweep workers")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, "rb") as fh:
            cfg = parse_config(fh.read())
    except OSError as exc:
        sys.stderr.write(f"cannot read config: {exc}\n")
        return EXIT_CONFIG
    except ConfigError as exc:
        sys.stderr.write(f"invalid config: {exc}\n")
        return EXIT_CONFIG

    if args.rtol is not None or args.atol is not None or args.oracle_steps is not None:
        from dataclasses import replace

        solver = replace(
            cfg.solver,
            **{
                k: v
                for k, v in {
                    "rtol": args.rtol,
                    "atol": args.atol,
                    "oracle_steps": args.oracle_steps,
                }.items()
                if v is not None
            },
        )
        cfg = replace(cfg, solver=solver)

    try:
        return args.func(cfg, args)
    except ConfigError as exc:
        sys.stderr.write(f"invalid config: {exc}\n")
        return EXIT_CONFIG
    except (
        LinAlgError,
        dynamics.NormExceededError,
        volterra.StepTooCoarseError,
        pseudomode.EmptyBathError,
    ) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
