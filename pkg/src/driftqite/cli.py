"""Command-line front end: trajectories, sweeps, and analysis artifacts.

All outputs are plain CSV plus one JSON manifest per run directory;
numbers are written with repr-exact 17-significant-digit formatting so
identical commands reproduce byte-identical files regardless of thread
count or locale.  Exit codes: 0 success, 1 algorithmic failure
(singular system or non-convergence flagged), 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import glob
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import analysis, hamio
from .engine import QiteConfig, TrajectoryResult, build_linear_system, run_trajectory
from .errors import (
    ConfigurationError,
    DocumentError,
    OracleSizeError,
    SeriesConvergenceError,
)
from .pool import pool_for
from .state import exact_diagonalize

CHEMICAL_ACCURACY = 1.6e-3

_METHOD_FLAGS = {
    "ite": "exact_ite",
    "qite": "full_qite",
    "drift": "drift_single_path",
    "drift-channel": "drift_channel",
    "deterministic": "deterministic",
}

TRAJECTORY_COLUMNS = (
    "step", "time", "energy", "chosen_pauli", "angle",
    "a_l1_norm", "c", "kappa", "n_truncated",
)


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


def _write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _trajectory_rows(records):
    return [
        (r.step, r.time, r.energy, r.chosen_pauli, r.angle,
         r.a_l1_norm, r.c, r.kappa, r.n_truncated)
        for r in records
    ]


def _config_from_args(args) -> QiteConfig:
    return QiteConfig(
        dt=args.dt,
        n_steps=args.steps,
        method=_METHOD_FLAGS[args.method],
        truncation_threshold=args.truncate,
        n_paths=args.paths,
        seed=args.seed,
        shot_mode=args.shot_mode,
        e_shift=args.e_shift,
        c_mode=args.c_mode,
        epsilon=args.epsilon,
        gamma=args.gamma,
    )


def _document_sha(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _ed_reference(doc, cap: int = 12):
    """Exact-diagonalization energy: dense when feasible, else metadata."""
    if doc.n_qubits <= cap:
        ground, _ = exact_diagonalize(doc.hamiltonian(), oracle_cap=cap)
        return ground
    fci = doc.metadata.get("fci_energy")
    if fci is None:
        raise ConfigurationError(
            "no exact reference available: system too large and no fci_energy metadata"
        )
    return float(fci)


def _emit_run_outputs(out_dir: Path, result: TrajectoryResult, config: QiteConfig,
                      ham_path: Path, wall_time: float) -> list[str]:
    outputs = []
    if result.paths is not None:
        for i, records in enumerate(result.paths):
            name = f"trajectory_p{i:03d}.csv"
            _write_csv(out_dir / name, TRAJECTORY_COLUMNS, _trajectory_rows(records))
            outputs.append(name)
        steps = np.arange(1, len(result.mean_energy) + 1)
        _write_csv(
            out_dir / "channel.csv",
            ("step", "time", "mean_energy", "std_energy"),
            zip(steps, steps * config.dt, result.mean_energy, result.std_energy),
        )
        outputs.append("channel.csv")
    else:
        _write_csv(out_dir / "trajectory.csv", TRAJECTORY_COLUMNS,
                   _trajectory_rows(result.records))
        outputs.append("trajectory.csv")
    if result.tracker_records:
        _write_csv(
            out_dir / "tracker.csv",
            ("step", "tracker_estimate", "exact_value", "gamma"),
            result.tracker_records,
        )
        outputs.append("tracker.csv")

    manifest = {
        "config": asdict(config),
        "hamiltonian": str(ham_path),
        "hamiltonian_sha256": _document_sha(ham_path),
        "seed": config.seed,
        "outputs": outputs,
        "status": result.status,
        "initial_energy": result.initial_energy,
        "final_energy": result.final_energy,
        "wall_time_seconds": wall_time,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return outputs


def cmd_run(args) -> int:
    ham_path = Path(args.hamiltonian)
    try:
        doc = hamio.load(ham_path)
    except (OSError, DocumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.paths > 1 and args.method != "drift-channel":
        print("error: --paths only applies to --method drift-channel", file=sys.stderr)
        return 2
    try:
        config = _config_from_args(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    pool = None
    if config.method != "exact_ite":
        pool = pool_for(doc)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    start = time.monotonic()
    try:
        result = run_trajectory(doc.hamiltonian(), pool, doc.reference_state, config)
    except (ConfigurationError, OracleSizeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SeriesConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit_run_outputs(out_dir, result, config, ham_path, time.monotonic() - start)
    print(f"{result.status}: {len(result.records)} steps, "
          f"final energy {result.final_energy:.10f}")
    return 0 if result.status in ("completed", "converged") else 1


def _steps_to_accuracy(records, ed: float) -> int:
    for r in records:
        if abs(r.energy - ed) < CHEMICAL_ACCURACY:
            return r.step
    return -1


def _sweep_one(task):
    doc, config, parameter = task
    pool = pool_for(doc) if config.method != "exact_ite" else None
    result = run_trajectory(doc.hamiltonian(), pool, doc.reference_state, config)
    ed = _ed_reference(doc)
    return (
        parameter,
        result.final_energy,
        result.final_energy - ed,
        _steps_to_accuracy(result.records, ed),
        result.status,
    )


def cmd_sweep(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        base = _config_from_args(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    tasks = []
    if args.sweep == "bondlength":
        files = sorted(set(glob.glob(args.hamiltonian)))
        if not files:
            print(f"error: no fixtures match {args.hamiltonian!r}", file=sys.stderr)
            return 2
        for f in files:
            doc = hamio.load(f)
            parameter = doc.metadata.get("bond_length", Path(f).stem)
            tasks.append((doc, base, parameter))
    elif args.sweep == "threshold":
        if not args.thresholds:
            print("error: --thresholds required for a threshold sweep", file=sys.stderr)
            return 2
        doc = hamio.load(args.hamiltonian)
        from dataclasses import replace
        for t in args.thresholds:
            tasks.append((doc, replace(base, truncation_threshold=t), t))
    else:  # dt sweep
        if not args.dts:
            print("error: --dts required for a dt sweep", file=sys.stderr)
            return 2
        doc = hamio.load(args.hamiltonian)
        from dataclasses import replace
        for dt in args.dts:
            steps = args.steps if args.total_time is None else max(1, round(args.total_time / dt))
            tasks.append((doc, replace(base, dt=dt, n_steps=steps), dt))

    workers = args.threads or os.cpu_count() or 1
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool_exec:
            rows = list(pool_exec.map(_sweep_one, tasks))
    else:
        rows = [_sweep_one(t) for t in tasks]

    _write_csv(
        out_dir / "sweep.csv",
        ("parameter", "final_energy", "error_vs_ed", "steps_to_chemical_accuracy", "status"),
        rows,
    )
    if args.sweep == "threshold":
        _write_csv(
            out_dir / "truncation.csv",
            ("threshold", "energy", "error_vs_ed"),
            [(r[0], r[1], r[2]) for r in rows],
        )
    print(f"wrote {out_dir / 'sweep.csv'} ({len(rows)} points)")
    failed = any(r[4] == "stalled" for r in rows)
    return 1 if failed else 0


def cmd_analyze(args) -> int:
    run_dir = Path(args.run)
    manifest_path = run_dir / "manifest.json"
    if not manifest_path.exists():
        print(f"error: no manifest in {run_dir}", file=sys.stderr)
        return 2
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    ham_path = Path(manifest["hamiltonian"])
    if not ham_path.exists():
        print(f"error: missing hamiltonian {ham_path}", file=sys.stderr)
        return 2
    doc = hamio.load(ham_path)
    config = QiteConfig(**manifest["config"])
    if args.step is not None:
        from dataclasses import replace
        config = replace(config, n_steps=args.step)
    if config.method == "exact_ite":
        print("error: analysis needs a pool-based method", file=sys.stderr)
        return 2

    pool = pool_for(doc)
    result = run_trajectory(doc.hamiltonian(), pool, doc.reference_state, config)
    state = result.final_state
    step = result.records[-1].step if result.records else 0
    out_dir = Path(args.out) if args.out else run_dir
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.analyze == "spectrum":
        sys_now = build_linear_system(
            state, pool, doc.hamiltonian(), config.dt,
            e_shift=config.e_shift, c_mode=config.c_mode,
        )
        report = analysis.spectrum_at_step(sys_now, step, config.truncation_threshold)
        _write_csv(
            out_dir / "spectrum.csv",
            ("index", "singular_value"),
            enumerate(report.singular_values),
        )
        print(f"spectrum at step {step}: kappa={report.kappa:.6g}, "
              f"{report.n_above_threshold} values above {report.threshold}")
    elif args.analyze == "correlation":
        report = analysis.correlation_matrix(state, pool)
        rows = []
        nu = len(pool)
        for i in range(nu):
            for j in range(i, nu):
                rows.append((i, j, report.distances[i, j], report.s_prime[i, j]))
        _write_csv(out_dir / "correlation.csv", ("i", "j", "d", "s_prime"), rows)
        if report.fit_ok:
            print(f"correlation fit: alpha={report.alpha:.6g}, xi={report.xi:.6g}")
        else:
            print("correlation fit skipped: not enough distinct support separations")
    else:  # sensitivity
        sys_now = build_linear_system(
            state, pool, doc.hamiltonian(), config.dt,
            e_shift=config.e_shift, c_mode=config.c_mode,
        )
        rng = np.random.default_rng([config.seed, 9999])
        report = analysis.sensitivity_probe(sys_now, args.delta_s, args.delta_b,
                                            args.trials, rng)
        _write_csv(
            out_dir / "sensitivity.csv",
            ("trial", "delta_s", "delta_b", "ratio", "kappa"),
            [(i, args.delta_s, args.delta_b, r, report.kappa)
             for i, r in enumerate(report.ratios)],
        )
        print(f"sensitivity: kappa={report.kappa:.6g}, max ratio={report.max_ratio:.6g}")
    return 0


def _add_common_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=sorted(_METHOD_FLAGS), default="qite")
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--steps", type=int, default=200, help="number of time steps K")
    p.add_argument("--truncate", type=float, default=0.05,
                   help="singular-value truncation threshold")
    p.add_argument("--paths", type=int, default=1, help="channel paths")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shot-mode", choices=("exact", "sampled"), default="exact")
    p.add_argument("--epsilon", type=float, default=0.01,
                   help="sampled-mode target precision for a")
    p.add_argument("--gamma", type=int, default=0,
                   help="measurement-reduction ratio (0 = off)")
    p.add_argument("--e-shift", type=float, default=0.0)
    p.add_argument("--c-mode", choices=("first_order", "exact"), default="first_order")
    p.add_argument("--threads", type=int, default=0,
                   help="sweep parallelism (0 = all cores); results independent of it")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="driftqite",
        description="Imaginary-time evolution by drifted real-time Pauli rotations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    default_out = os.environ.get("DRIFTQITE_OUT", "runs")

    run_p = sub.add_parser("run", help="run one trajectory")
    run_p.add_argument("--hamiltonian", required=True)
    _add_common_run_flags(run_p)
    run_p.add_argument("--out", default=default_out)

    sweep_p = sub.add_parser("sweep", help="aggregate runs over a parameter grid")
    sweep_p.add_argument("--sweep", choices=("bondlength", "threshold", "dt"), required=True)
    sweep_p.add_argument("--hamiltonian", required=True,
                         help="fixture path (glob for bondlength sweeps)")
    sweep_p.add_argument("--thresholds", type=float, nargs="*")
    sweep_p.add_argument("--dts", type=float, nargs="*")
    sweep_p.add_argument("--total-time", type=float, default=None,
                         help="fix T = K dt across a dt sweep")
    _add_common_run_flags(sweep_p)
    sweep_p.add_argument("--out", default=default_out)

    an_p = sub.add_parser("analyze", help="spectral/correlation/sensitivity artifacts")
    an_p.add_argument("--analyze", choices=("spectrum", "correlation", "sensitivity"),
                      required=True)
    an_p.add_argument("--run", required=True, help="completed run directory")
    an_p.add_argument("--step", type=int, default=None,
                      help="replay to this step (default: the run's last step)")
    an_p.add_argument("--delta-s", type=float, default=1e-6)
    an_p.add_argument("--delta-b", type=float, default=1e-6)
    an_p.add_argument("--trials", type=int, default=50)
    an_p.add_argument("--out", default=None, help="default: the run directory")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        return cmd_analyze(args)
    except (OSError, DocumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
