"""Command-line front end.

Subcommands: ``fom`` (full-order run), ``rom`` (adaptive reduced run),
``compare`` (error + speedup of two runs), ``bifurcation`` (injection
parameter sweep), ``bench`` (full vs reduced wall clock), and
``bench-kernels`` (compiled vs pure-python kernel backends).

Exit codes: 0 success, 1 numerical failure (instability/divergence),
2 usage or configuration error.

The JSON config file is flat; every key below is optional and defaults to
the benchmark configuration (see DEFAULT_CONFIG). Unknown keys are
rejected.
"""

import argparse
import json
import math
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import driver, io
from .fom import NewtonError
from .model import Grid1D, RdeParams, TimeGrid

DEFAULT_CONFIG = {
    # space/time discretization
    "grid_points": 1024,          # M; the state dimension is N = 2M
    "dt": 1e-3,
    "num_steps": 50000,
    # physical parameters
    "nu": 0.01,
    "k_pre": 1.0,
    "alpha": 0.3,
    "eta_c": 1.1,
    "eta_p": 0.5,
    "r": 1.0,
    "epsilon": 0.11,
    "mu": 3.5,
    # reduction parameters
    "n": 9,
    "w_init": 500,
    "w": 10,
    "sampling_frac": 0.5,
    "m_s": None,                  # explicit count overrides sampling_frac
    "z": 3,
    "c_tau": 5,
    "strategy": "lookahead",
    "oversample": 0,
    "seed": 0,
    # artifacts
    "out_dir": "runs",
    "save_trajectory": True,
    "save_trajectory_csv": False,
    "save_probe": True,
    "probe_x": 0.5 * math.pi,
}

_RUN_KEYS = ("n", "w_init", "w", "sampling_frac", "m_s", "z", "c_tau",
             "strategy", "oversample", "seed")
_PARAM_KEYS = ("nu", "k_pre", "alpha", "eta_c", "eta_p", "r", "epsilon", "mu")


class ConfigError(ValueError):
    pass


def load_config_file(path):
    """Read a JSON config file, apply defaults, reject unknown keys."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as err:
        raise ConfigError(
            f"{path}:{err.lineno}:{err.colno}: invalid JSON ({err.msg})")
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    unknown = sorted(set(doc) - set(DEFAULT_CONFIG))
    if unknown:
        raise ConfigError(f"{path}: unknown config keys: {', '.join(unknown)}")
    merged = dict(DEFAULT_CONFIG)
    merged.update(doc)
    return merged


def config_from_dict(doc):
    """Build a RunConfig from a flat config dict (inverse of the manifest's
    config_file section)."""
    try:
        grid = Grid1D(int(doc["grid_points"]))
        tg = TimeGrid(float(doc["dt"]), int(doc["num_steps"]))
        params = RdeParams(**{k: float(doc[k]) for k in _PARAM_KEYS})
        run_kwargs = {k: doc[k] for k in _RUN_KEYS}
        if run_kwargs["m_s"] is not None:
            run_kwargs["m_s"] = int(run_kwargs["m_s"])
        config = driver.RunConfig(grid=grid, time=tg, params=params,
                                  **run_kwargs)
        config.validate()
    except (ValueError, TypeError) as err:
        raise ConfigError(f"invalid configuration: {err}")
    return config


def _apply_overrides(doc, args):
    pairs = (
        ("mu", "mu"), ("grid_points", "grid_points"), ("seed", "seed"),
        ("c_tau", "c_tau"), ("sampling_frac", "sampling_frac"),
        ("z", "update_freq"), ("strategy", "strategy"),
        ("num_steps", "steps"), ("w_init", "w_init"),
        ("out_dir", "out"),
    )
    for key, attr in pairs:
        val = getattr(args, attr, None)
        if val is not None:
            doc[key] = val
    return doc


def _prepare(args, strategy=None):
    doc = load_config_file(args.config) if args.config else dict(DEFAULT_CONFIG)
    doc = _apply_overrides(doc, args)
    if strategy is not None:
        doc["strategy"] = strategy
    config = config_from_dict(doc)
    out_dir = Path(doc["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    return doc, config, out_dir


def _write_probe(out_dir, traj, doc):
    x = float(doc["probe_x"])
    for field in ("eta", "lambda"):
        series = driver.probe(traj, x, field)
        io.write_csv(out_dir / f"probe_{field}.csv",
                     [traj.times, series], ["t", field])


def _write_trajectory(out_dir, traj, doc):
    files = {}
    if doc["save_trajectory"]:
        files["trajectory"] = str(
            io.write_matrix(out_dir / "trajectory.bin", traj.states))
    if doc["save_trajectory_csv"]:
        files["trajectory_csv"] = str(io.write_matrix_csv(
            out_dir / "trajectory.csv", traj.states))
    if doc["save_probe"] and traj.states is not None:
        _write_probe(out_dir, traj, doc)
        files["probe"] = str(out_dir / "probe_eta.csv")
    return files


def _diag_summary(traj):
    diag = traj.diagnostics
    out = {
        "wall_time": traj.wall_time,
        "timings": traj.timings,
        "unstable": traj.unstable,
        "failed_step": traj.failed_step,
    }
    if "newton_iters" in diag:
        iters = np.asarray(diag["newton_iters"])
        if iters.size:
            out["newton_iters_max"] = int(iters.max())
            out["newton_iters_mean"] = float(iters.mean())
    for key in ("predictor_fallbacks", "sampling_updates", "component_evals",
                "abort_reason"):
        if key in diag:
            out[key] = diag[key]
    return out


def cmd_fom(args):
    doc, config, out_dir = _prepare(args)
    try:
        traj = driver.run_fom(config, keep_states=True)
    except NewtonError as err:
        print(f"full-model run failed at step {err.failed_step}: {err}",
              file=sys.stderr)
        return 1
    files = _write_trajectory(out_dir, traj, doc)
    io.write_manifest(out_dir / "manifest.json", config, extra={
        "command": "fom", "config_file": doc, "files": files,
        "run": _diag_summary(traj)})
    print(f"full-model run: {config.grid.num_dofs} dofs, "
          f"{config.time.num_steps} steps, {traj.wall_time:.2f} s")
    return 0


def _load_reference(ref_path):
    ref_path = Path(ref_path)
    if ref_path.is_dir():
        ref_path = ref_path / "trajectory.bin"
    if not ref_path.exists():
        raise ConfigError(f"reference trajectory not found: {ref_path}")
    return io.read_matrix(ref_path)


def cmd_rom(args):
    doc, config, out_dir = _prepare(args, strategy=args.strategy)
    traj = driver.run_adeim(config, keep_states=True)
    files = _write_trajectory(out_dir, traj, doc)

    extra = {"command": "rom", "config_file": doc, "files": files,
             "run": _diag_summary(traj)}
    if args.no_reference:
        reference = None
    elif args.reference:
        reference = _load_reference(args.reference)
    else:
        print("no --reference given; computing full-model reference",
              file=sys.stderr)
        reference = driver.run_fom(config, keep_states=True).states

    if reference is not None:
        cols = min(traj.states.shape[1], reference.shape[1])
        diff = np.linalg.norm(traj.states[:, :cols] - reference[:, :cols],
                              axis=0)
        denom = np.linalg.norm(reference[:, :cols], axis=0)
        rel = diff / np.where(denom > 0, denom, 1.0)
        tgrid = np.arange(cols) * config.time.dt
        io.write_csv(out_dir / "error.csv",
                     [np.arange(cols), tgrid, rel], ["k", "t", "rel_err"])
        files["error"] = str(out_dir / "error.csv")
        if traj.states.shape[1] == reference.shape[1]:
            err = driver.avg_rel_error(traj.states, reference)
        else:
            err = float("inf")
        extra["avg_rel_error"] = err
        print(f"avg rel error ({config.strategy}): {err:.6g}")

    io.write_manifest(out_dir / "manifest.json", config, extra=extra)
    if traj.unstable:
        print(f"run unstable at step {traj.failed_step}: "
              f"{traj.diagnostics['abort_reason']}", file=sys.stderr)
        return 1
    return 0


def cmd_compare(args):
    ref = _load_reference(args.fom)
    test = _load_reference(args.rom)
    if ref.shape != test.shape:
        raise ConfigError(
            f"trajectory shapes differ: {ref.shape} vs {test.shape}")
    err = driver.avg_rel_error(test, ref)

    speedup = None
    times = {}
    for name, path in (("fom", args.fom), ("rom", args.rom)):
        man = Path(path) / "manifest.json" if Path(path).is_dir() else None
        if man and man.exists():
            times[name] = io.read_manifest(man)["run"]["wall_time"]
    if len(times) == 2 and times["rom"] > 0:
        speedup = times["fom"] / times["rom"]

    summary = {"avg_rel_error": err, "speedup": speedup,
               "wall_times": times or None}
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "compare.json", "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    print(f"avg rel error: {err:.6g}"
          + (f", speedup: {speedup:.2f}x" if speedup else ""))
    return 0


def cmd_bifurcation(args):
    doc, config, out_dir = _prepare(args)
    if args.mu_steps < 1:
        raise ConfigError("--mu-steps must be at least 1")
    if args.mu_max < args.mu_min:
        raise ConfigError("--mu-max must not be below --mu-min")
    mus = np.linspace(args.mu_min, args.mu_max, args.mu_steps)
    results = driver.bifurcation_sweep(mus, config,
                                       use_rom=(args.model == "rom"),
                                       jobs=args.jobs)
    max_eta = [rec.get("max_eta", float("nan")) for rec in results]
    io.write_csv(out_dir / "bifurcation.csv",
                 [[rec["mu"] for rec in results], max_eta],
                 ["mu", "max_eta"])
    failures = [rec for rec in results if not rec["ok"]]
    io.write_manifest(out_dir / "manifest.json", config, extra={
        "command": "bifurcation", "config_file": doc,
        "model": args.model, "mu_values": [rec["mu"] for rec in results],
        "failures": failures or None,
        "files": {"bifurcation": str(out_dir / "bifurcation.csv")}})
    for rec in results:
        tag = f"{rec['mu']:.4g}: "
        tag += f"max eta {rec['max_eta']:.4f}" if rec["ok"] \
            else f"FAILED ({rec['error']})"
        print(tag)
    return 0 if not failures else 1


def cmd_bench(args):
    doc, config, out_dir = _prepare(args)
    report = driver.bench(config, repeats=args.repeats)
    report["config_file"] = doc
    with open(out_dir / "bench.json", "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    spd = report["speedup"]
    print(f"speedup full/reduced: min {spd['min']:.2f}x, "
          f"median {spd['median']:.2f}x, max {spd['max']:.2f}x")
    return 0


def cmd_bench_kernels(args):
    from .kernels import backends
    from .model import RdeModel, initial_condition

    found = backends()
    grid = Grid1D(args.grid_points)
    params = RdeParams()
    q = initial_condition(grid)
    rows = np.arange(0, grid.num_dofs, 2, dtype=np.int64)
    p = params
    kargs = (grid.dx, p.nu, p.k_pre, p.alpha, p.eta_c, p.eta_p, p.r,
             p.epsilon, p.mu)

    report = {"grid_points": args.grid_points, "backends": {}}
    for name, mod in found.items():
        timings = {}
        for label, fn, fargs in (
                ("rhs_full", mod.rhs_full, (q, grid.num_points) + kargs),
                ("rhs_rows", mod.rhs_rows, (q, rows, grid.num_points) + kargs),
                ("jac_coeffs", mod.jac_coeffs, (q, grid.num_points) + kargs)):
            fn(*fargs)
            t0 = time.perf_counter()
            for _ in range(args.repeats):
                fn(*fargs)
            timings[label] = (time.perf_counter() - t0) / args.repeats
        report["backends"][name] = timings
        line = ", ".join(f"{k} {v * 1e6:.1f} us" for k, v in timings.items())
        print(f"{name:>8}: {line}")
    if "compiled" in found and "python" in found:
        ratios = {k: report["backends"]["python"][k]
                  / report["backends"]["compiled"][k]
                  for k in report["backends"]["python"]}
        report["python_over_compiled"] = ratios
        print("   ratio: " + ", ".join(f"{k} {v:.1f}x"
                                       for k, v in ratios.items()))
    else:
        print("compiled backend not available; showing python only")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "bench_kernels.json", "w") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="adrom",
        description="Adaptive model reduction benchmark driver")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, jobs=False):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output directory (default from config)")
        p.add_argument("--mu", type=float, help="injection parameter")
        p.add_argument("--grid-points", type=int, dest="grid_points")
        p.add_argument("--seed", type=int)
        p.add_argument("--c-tau", type=int, dest="c_tau",
                       help="predictor substeps per model step")
        p.add_argument("--sampling-frac", type=float, dest="sampling_frac",
                       help="sampling points as a fraction of N")
        p.add_argument("--update-freq", type=int, dest="update_freq",
                       help="sampling-point update frequency z")
        p.add_argument("--steps", type=int, help="number of time steps K")
        p.add_argument("--w-init", type=int, dest="w_init",
                       help="full-model initialization steps")
        if jobs:
            p.add_argument("--jobs", type=int, default=1,
                           help="parallel runs for sweeps")

    p_fom = sub.add_parser("fom", help="run the full-order model")
    common(p_fom)
    p_fom.set_defaults(func=cmd_fom)

    p_rom = sub.add_parser("rom", help="run the adaptive reduced model")
    common(p_rom)
    p_rom.add_argument("--strategy", choices=("lookahead", "lookback"),
                       default=None)
    p_rom.add_argument("--reference",
                       help="directory or matrix file with the full-model "
                            "trajectory for error metrics")
    p_rom.add_argument("--no-reference", action="store_true",
                       help="skip the error computation")
    p_rom.set_defaults(func=cmd_rom)

    p_cmp = sub.add_parser("compare",
                           help="error and speedup of a run pair")
    p_cmp.add_argument("fom", help="full-model run directory or matrix file")
    p_cmp.add_argument("rom", help="reduced run directory or matrix file")
    p_cmp.add_argument("--out", help="directory for compare.json")
    p_cmp.set_defaults(func=cmd_compare)

    p_bif = sub.add_parser("bifurcation",
                           help="sweep the injection parameter")
    common(p_bif, jobs=True)
    p_bif.add_argument("--mu-min", type=float, required=True)
    p_bif.add_argument("--mu-max", type=float, required=True)
    p_bif.add_argument("--mu-steps", type=int, required=True)
    p_bif.add_argument("--model", choices=("fom", "rom"), default="rom")
    p_bif.set_defaults(func=cmd_bifurcation)

    p_bench = sub.add_parser("bench",
                             help="wall-clock full vs reduced comparison")
    common(p_bench)
    p_bench.add_argument("--repeats", type=int, default=1)
    p_bench.set_defaults(func=cmd_bench)

    p_bk = sub.add_parser("bench-kernels",
                          help="compare compiled and python kernel backends")
    p_bk.add_argument("--grid-points", type=int, dest="grid_points",
                      default=1024)
    p_bk.add_argument("--repeats", type=int, default=200)
    p_bk.add_argument("--out", help="directory for bench_kernels.json")
    p_bk.set_defaults(func=cmd_bench_kernels)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 2
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except NewtonError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
