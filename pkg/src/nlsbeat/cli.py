"""Command-line entry point.

Subcommands map one-to-one onto the library layers:

* ``sequence``  -- grow an admissible cluster sequence by exhaustive search
* ``verify``    -- run the closure certificates on a family of clusters
* ``model``     -- integrate the reduced phase-plane model, period tools
* ``simulate``  -- raw split-step run from a JSON initial condition
* ``beating``   -- full scenario: PDE vs model comparison, report artifacts
* ``sweep``     -- the same scenario across several nu, with scaling checks
* ``schedule``  -- commensurate beating planner

Every run writes a manifest (resolved configuration, package version,
wall-clock, SHA-256 of each artifact) next to its outputs.  Numerics are
deterministic: rerunning a command reproduces the data artifacts
bit-for-bit.  The only environment variable honored is NLSBEAT_OUTDIR
(default output directory).
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, LabError
from .experiments import (
    BeatingReport,
    ScenarioConfig,
    beating_window_check,
    commensurate_schedule,
    emit_report,
    leakage_check,
    run_beating,
)
from .model import (
    ModelParams,
    PhasePlaneState,
    gamma,
    half_period,
    integrate,
    limit_period,
)
from .resonance import (
    ClusterFamily,
    closure_violations,
    intra_cluster_check,
    next_admissible,
)
from .spectral import SimParams, SpectralField, evolve

__version__ = "0.1.0"


def _outdir(args) -> Path:
    if args.outdir is not None:
        return Path(args.outdir)
    return Path(os.environ.get("NLSBEAT_OUTDIR", "."))


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_json(obj, path: Path) -> None:
    with path.open("w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(
    command: str,
    config: dict,
    outputs: Sequence[Path],
    outdir: Path,
    basename: str,
    started: float,
) -> Path:
    manifest = {
        "schema": "run-manifest/1",
        "command": command,
        "config": config,
        "version": __version__,
        "started": _dt.datetime.fromtimestamp(started, _dt.timezone.utc).isoformat(),
        "duration_s": time.time() - started,
        "outputs": {p.name: _sha256(p) for p in sorted(outputs)},
    }
    path = outdir / f"{basename}_manifest.json"
    _write_json(manifest, path)
    return path


def _family_from(centers: Sequence[int]) -> ClusterFamily:
    return ClusterFamily.from_centers(centers)


def _sextuple_dicts(sextuples) -> list[dict]:
    return [{"j": list(s.j), "l": list(s.l)} for s in sextuples]


# ---------------------------------------------------------------- sequence


def _cmd_sequence(args) -> int:
    started = time.time()
    outdir = _outdir(args)
    outdir.mkdir(parents=True, exist_ok=True)
    centers: list[int] = []
    complete = True
    for _ in range(args.count):
        nxt = next_admissible(centers, args.cap)
        if nxt is None:
            complete = False
            break
        centers.append(nxt)
    family = _family_from(centers) if centers else None
    payload = {
        "centers": centers,
        "complete": complete,
        "search_cap": args.cap,
        "within_hypothesis": bool(family.within_hypothesis) if family else None,
    }
    path = outdir / "sequence.json"
    _write_json(payload, path)
    _write_manifest(
        "sequence",
        {"count": args.count, "cap": args.cap},
        [path],
        outdir,
        "sequence",
        started,
    )
    print(json.dumps(payload, sort_keys=True))
    return 0


# ------------------------------------------------------------------ verify


def _cmd_verify(args) -> int:
    started = time.time()
    outdir = _outdir(args)
    outdir.mkdir(parents=True, exist_ok=True)
    family = _family_from(args.centers)
    escaping = closure_violations(family)
    spanning = intra_cluster_check(family)
    payload = {
        "centers": list(family.centers),
        "within_hypothesis": family.within_hypothesis,
        "closure_violations": _sextuple_dicts(escaping),
        "cluster_spanning": _sextuple_dicts(spanning),
    }
    path = outdir / "verify.json"
    _write_json(payload, path)
    _write_manifest(
        "verify", {"centers": list(args.centers)}, [path], outdir, "verify", started
    )
    print(json.dumps(payload, sort_keys=True))
    return 0 if not escaping and not spanning else 1


# ------------------------------------------------------------------- model


def _cmd_model(args) -> int:
    started = time.time()
    outdir = _outdir(args)
    outdir.mkdir(parents=True, exist_ok=True)
    params = ModelParams.from_C(args.C)
    g = gamma(params)
    summary: dict = {
        "C": args.C,
        "K0": args.K0,
        "gamma": g,
        "limit_period": limit_period(params),
    }

    T = None
    in_band = g < args.K0 < 1.0 - g and args.K0 != 0.5
    if in_band:
        T = half_period(args.K0, params, tol=args.tol)
        summary["half_period"] = T
    if args.branch == "check":
        if not 0.5 < args.K0 < 1.0 - g:
            raise DomainError(
                f"--branch check needs K0 in (1/2, {1.0 - g:.6f}), got {args.K0}"
            )
        T_mirror = half_period(1.0 - args.K0, params, tol=args.tol)
        rel = abs(T - T_mirror) / T
        summary["branch_check"] = {
            "mirror_K0": 1.0 - args.K0,
            "half_period": T,
            "mirror_half_period": T_mirror,
            "relative_difference": rel,
            "passed": rel <= 1e-8,
        }

    if args.tau_end is not None:
        tau_end = args.tau_end
    elif T is not None:
        tau_end = 2.0 * T * args.periods
    else:
        raise DomainError(
            "K0 has no finite period (outside band or at the center); use --tau-end"
        )
    traj = integrate(
        PhasePlaneState(phi=args.phi0, K=args.K0),
        params,
        (0.0, tau_end),
        tol=args.tol,
        n_samples=args.samples,
    )
    summary["energy_drift"] = traj.energy_drift

    cpath = outdir / "model.csv"
    with cpath.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tau", "phi", "K", "H"])
        for row in zip(traj.tau, traj.phi, traj.K, traj.energy):
            w.writerow(["%.17g" % x for x in row])
    jpath = outdir / "model.json"
    _write_json(summary, jpath)
    _write_manifest(
        "model",
        {
            "C": args.C,
            "K0": args.K0,
            "phi0": args.phi0,
            "tol": args.tol,
            "branch": args.branch,
            "tau_end": tau_end,
            "samples": args.samples,
        },
        [cpath, jpath],
        outdir,
        "model",
        started,
    )
    print(json.dumps(summary, sort_keys=True))
    return 0


# ---------------------------------------------------------------- simulate


def _load_initial(path: Path) -> list[tuple[int, complex]]:
    with path.open() as fh:
        raw = json.load(fh)
    out = []
    for entry in raw:
        j, re, im = entry
        out.append((int(j), complex(float(re), float(im))))
    return out


def _cmd_simulate(args) -> int:
    started = time.time()
    outdir = _outdir(args)
    outdir.mkdir(parents=True, exist_ok=True)
    modes = _load_initial(Path(args.initial))
    M = args.M if args.M is not None else max(abs(j) for j, _ in modes)
    field0 = SpectralField.from_modes(M, dict(modes))
    params = SimParams(
        nu=args.nu,
        dt=args.dt,
        M=M,
        sample_stride=args.stride,
        allow_focusing=args.allow_focusing,
    )
    record = evolve(field0, params, args.t_end)

    cpath = outdir / "simulate.csv"
    with cpath.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "mass", "hamiltonian"] + [f"I_{j}" for j in record.modes])
        for i in range(record.t.shape[0]):
            row = [record.t[i], record.mass[i], record.hamiltonian[i]]
            row.extend(record.actions[i])
            w.writerow(["%.17g" % x for x in row])
    summary = {
        "nu": args.nu,
        "dt": args.dt,
        "M": M,
        "t_end": args.t_end,
        "n_steps": record.n_steps,
        "mass_drift": record.mass_drift,
        "hamiltonian_drift": record.hamiltonian_drift,
    }
    jpath = outdir / "simulate.json"
    _write_json(summary, jpath)
    _write_manifest("simulate", summary, [cpath, jpath], outdir, "simulate", started)
    print(json.dumps(summary, sort_keys=True))
    return 0


# ----------------------------------------------------------------- beating


def _parse_seed_modes(specs: Optional[Sequence[str]]):
    if not specs:
        return None
    out = []
    for s in specs:
        parts = s.split(":")
        if len(parts) != 3:
            raise DomainError(f"--seed-mode wants j:re:im, got {s!r}")
        out.append((int(parts[0]), complex(float(parts[1]), float(parts[2]))))
    return tuple(out)


def _scenario_from_args(args, nu: float) -> ScenarioConfig:
    family = _family_from(args.centers)
    K = len(family.clusters)
    K0 = tuple(args.K0) if len(args.K0) != 1 else tuple(args.K0) * K
    weights = tuple(args.weights) if args.weights else None
    return ScenarioConfig(
        family=family,
        nu=nu,
        K0=K0,
        weights=weights,
        M=args.M,
        dt=args.dt,
        t_end=args.t_end,
        variable=args.variable,
        background=args.background,
        seed=args.seed,
        seed_modes=_parse_seed_modes(args.seed_mode),
        model_only=args.model_only,
        sample_stride=args.stride,
    )


def _scenario_dict(config: ScenarioConfig, t_end: float) -> dict:
    return {
        "centers": [c.n for c in config.family.clusters],
        "nu": config.nu,
        "K0": list(config.K0),
        "weights": None if config.weights is None else list(config.weights),
        "M": config.M,
        "dt": config.dt,
        "t_end": t_end,
        "variable": config.variable,
        "background": config.background,
        "seed": config.seed,
        "model_only": config.model_only,
    }


def _cmd_beating(args) -> int:
    started = time.time()
    outdir = _outdir(args)
    config = _scenario_from_args(args, args.nu)
    report = run_beating(config)
    paths = emit_report(report, outdir, args.basename)
    _write_manifest(
        "beating",
        _scenario_dict(config, report.config["t_end"]),
        paths,
        outdir,
        args.basename,
        started,
    )
    brief = {
        "sup_error": report.sup_error,
        "leakage_max": report.leakage_max,
        "amplitude": report.amplitude,
        "period_estimate": report.period_estimate,
        "flags": report.flags,
    }
    print(json.dumps(brief, sort_keys=True))
    return 0


# ------------------------------------------------------------------- sweep


def _cmd_sweep(args) -> int:
    started = time.time()
    outdir = _outdir(args)
    outdir.mkdir(parents=True, exist_ok=True)
    nus = sorted(set(args.nu_list), reverse=True)
    if len(nus) < 2:
        raise DomainError("sweep needs at least two distinct nu values")
    configs = [_scenario_from_args(args, nu) for nu in nus]
    with ThreadPoolExecutor(max_workers=min(4, len(configs))) as pool:
        reports = list(pool.map(run_beating, configs))

    paths: list[Path] = []
    entries = []
    for nu, report in zip(nus, reports):
        basename = f"{args.basename}_nu{nu:g}"
        paths.extend(emit_report(report, outdir, basename))
        entries.append(
            {
                "nu": nu,
                "basename": basename,
                "sup_error": report.sup_error,
                "leakage_max": report.leakage_max,
                "amplitude": report.amplitude,
                "flags": report.flags,
            }
        )
    checks = []
    for a, b in zip(reports, reports[1:]):
        chk = leakage_check(a, b)
        checks.append(
            {
                "nu_pair": [a.nu, b.nu],
                "exponent": None if np.isnan(chk.exponent) else chk.exponent,
                "expected": chk.expected,
                "passed": chk.passed,
                "inconclusive": chk.inconclusive,
                "out_of_hypothesis": chk.out_of_hypothesis,
            }
        )
    summary = {"runs": entries, "leakage_checks": checks}
    spath = outdir / f"{args.basename}_sweep.json"
    _write_json(summary, spath)
    paths.append(spath)
    _write_manifest(
        "sweep",
        {"nu_list": nus, **_scenario_dict(configs[0], reports[0].config["t_end"])},
        paths,
        outdir,
        f"{args.basename}_sweep",
        started,
    )
    print(json.dumps(summary["leakage_checks"], sort_keys=True))
    return 0


# ---------------------------------------------------------------- schedule


def _cmd_schedule(args) -> int:
    started = time.time()
    outdir = _outdir(args)
    outdir.mkdir(parents=True, exist_ok=True)
    family = _family_from(args.centers)
    sched = commensurate_schedule(args.lambdas, family, args.nu)
    window = beating_window_check(family, args.nu, sched.periods)
    payload = {
        "N": sched.N,
        "threshold": sched.threshold,
        "half_periods": list(sched.periods),
        "K0": list(sched.K0),
        "valid": sched.valid,
        "window_ok": window,
        "nu": args.nu,
        "centers": list(family.centers),
        "lambdas": list(args.lambdas),
    }
    path = outdir / "schedule.json"
    _write_json(payload, path)
    _write_manifest(
        "schedule",
        {"centers": list(args.centers), "lambdas": list(args.lambdas), "nu": args.nu},
        [path],
        outdir,
        "schedule",
        started,
    )
    print(json.dumps(payload, sort_keys=True))
    return 0


# ---------------------------------------------------------------- argparse


def _add_outdir(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--outdir",
        default=None,
        help="output directory (default: $NLSBEAT_OUTDIR or current directory)",
    )


def _add_scenario_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--centers", type=int, nargs="+", default=[3], help="cluster centers")
    p.add_argument("--K0", type=float, nargs="+", default=[0.3], help="per-cluster K0")
    p.add_argument("--weights", type=float, nargs="+", default=None,
                   help="per-cluster amplitude weights (replaces e^-n; beyond-theorem)")
    p.add_argument("--M", type=int, default=64, help="Fourier truncation")
    p.add_argument("--dt", type=float, default=1e-3, help="time step")
    p.add_argument("--t-end", type=float, default=None,
                   help="horizon (default: one full beating period of cluster 1)")
    p.add_argument("--variable", choices=("u", "v"), default="u",
                   help="units for reported leakage actions")
    p.add_argument("--background", type=float, default=0.0,
                   help="out-of-cluster seeding scale, in units of sqrt(nu) e^-|j|")
    p.add_argument("--seed", type=int, default=0, help="RNG seed for background phases")
    p.add_argument("--seed-mode", action="append", default=None, metavar="J:RE:IM",
                   help="inject an extra initial coefficient (repeatable)")
    p.add_argument("--model-only", action="store_true", help="skip the PDE")
    p.add_argument("--stride", type=int, default=None, help="sampling stride")
    p.add_argument("--basename", default="beating", help="artifact basename")
    _add_outdir(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlsbeat",
        description="Numerical laboratory for resonant beating in the quintic NLS "
        "on the circle.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sequence", help="grow an admissible cluster sequence")
    p.add_argument("--count", type=int, default=3, help="clusters to grow")
    p.add_argument("--cap", type=int, default=200000, help="per-step search cap")
    _add_outdir(p)
    p.set_defaults(func=_cmd_sequence)

    p = sub.add_parser("verify", help="closure certificates for a family")
    p.add_argument("--centers", type=int, nargs="+", required=True)
    _add_outdir(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("model", help="reduced phase-plane model runs")
    p.add_argument("--C", type=float, default=9.0, help="model constant C")
    p.add_argument("--K0", type=float, required=True)
    p.add_argument("--phi0", type=float, default=0.0)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--periods", type=float, default=2.0,
                   help="horizon in full periods (when K0 is periodic)")
    p.add_argument("--tau-end", type=float, default=None, help="explicit horizon")
    p.add_argument("--samples", type=int, default=2001)
    p.add_argument("--branch", choices=("none", "check"), default="none",
                   help="'check' validates the symmetric branch K0 <-> 1-K0")
    _add_outdir(p)
    p.set_defaults(func=_cmd_model)

    p = sub.add_parser("simulate", help="raw split-step run from JSON initial data")
    p.add_argument("--initial", required=True,
                   help="JSON file: list of [j, re, im] coefficients")
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--M", type=int, default=None, help="truncation (default: cover data)")
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--allow-focusing", action="store_true")
    _add_outdir(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("beating", help="one beating scenario with report artifacts")
    p.add_argument("--nu", type=float, default=1e-2)
    _add_scenario_args(p)
    p.set_defaults(func=_cmd_beating)

    p = sub.add_parser("sweep", help="beating scenario across several nu")
    p.add_argument("--nu-list", type=float, nargs="+", required=True)
    _add_scenario_args(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("schedule", help="commensurate beating planner")
    p.add_argument("--centers", type=int, nargs="+", default=[3])
    p.add_argument("--lambdas", type=float, nargs="+", required=True)
    p.add_argument("--nu", type=float, required=True)
    _add_outdir(p)
    p.set_defaults(func=_cmd_schedule)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
