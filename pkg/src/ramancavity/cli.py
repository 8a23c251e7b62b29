"""Command-line front end: experiment orchestration, sweeps and file output.

Subcommands
-----------
spectrum   Raman spectrum scan over detector frequencies
steady     steady-state fluctuation observables at one parameter point
sweep2d    (omega_c, g) map of the steady-state observables
polariton  closed-form polariton branches along an omega_c sweep
gaussian   frequency-resolved Gaussian fluctuation spectra n(w), f(w)
coupling   material-parameter estimate of g/omega_R
reproduce  frozen full-scale configs for the reference figures

Every run is configured by a single JSON document (all fields optional, with
defaults reproducing the reference spectrum panel), may be overridden with
--set dotted.key=value, and writes an RFC-4180 CSV plus a JSON sidecar
<out>.meta.json holding the fully resolved configuration for bit-exact
reruns.  Exit codes: 0 success, 1 I/O error, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import gaussian as gt
from .dynamics import DivergedTrajectory
from .ensemble import (
    AllTrajectoriesDiverged,
    EnsembleConfig,
    steady_observables,
)
from .material import (
    MaterialParams,
    cavity_field_noise,
    coupling_decade_bounds,
    coupling_from_material,
)
from .model import ModelParams, ProbeParams, ScheduleParams
from .spectroscopy import SpectrumRequest, raman_spectrum, shift_grid_to_omega_s

SCHEMA_VERSION = "1"

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    pass


# Defaults reproduce the reference resonant spectrum: g = 0.04,
# g4 = kappa = gamma = kappa_s = 0.01, probe gs_Ep0 = 0.04 at omega_p = 5,
# omega_c chosen so the renormalized cavity frequency sits at omega_R/2.
DEFAULT_CONFIG = {
    "experiment": "spectrum",
    "model": {
        "omega_c": 0.4892,
        "omega_R": 1.0,
        "g": 0.04,
        "g4": 0.01,
        "kappa": 0.01,
        "gamma": 0.01,
        "temperature": 0.0,
    },
    "probe": {
        "gs_Ep0": 0.04,
        "omega_p": 5.0,
        "kappa_s": 0.01,
    },
    "schedule": {
        "t0": 10.0,
        "tp": 100.0,
        "tstar": 250.0,
        "tau": 1.0,
        "dt": None,           # null -> 0.002 * shortest period
    },
    "ensemble": {
        "n_traj": 15000,
        "seed": 0,
        "time_window": True,
    },
    "spectrum": {
        "shift_min": 0.7,     # Raman-shift scan range, units of omega_R
        "shift_max": 1.3,
        "n_points": 80,
    },
    "sweep": {
        "omega_c_min": 0.3,
        "omega_c_max": 0.7,
        "omega_c_count": 21,
        "g_min": 0.0,
        "g_max": 0.05,
        "g_count": 6,
    },
    "material": {
        "R_tilde": 1.0,
        "A_cell": 1.0e-16,    # 10 nm x 10 nm
        "A_samp": 1.6e-11,    # 4 um x 4 um sample footprint
        "A_eff": 1.0e-12,     # 1 um^2 cavity mode area
        "omega_c_hz": math.pi * 1.0e12,   # angular, = 2*pi*0.5 THz
        "V_eff": 1.0e-18,
    },
    "gaussian": {
        "mode": "selfconsistent",   # or "perturbative"
        "tol": 1.0e-8,
        "max_iter": 500,
    },
    "workers": None,
    "out": "out.csv",
}


def deep_update(base: dict, override: dict, path=""):
    for key, val in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown configuration key: {where}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"expected a table for key: {where}")
            deep_update(base[key], val, where)
        else:
            base[key] = val
    return base


def parse_set_override(expr: str):
    if "=" not in expr:
        raise ConfigError(f"--set expects key=value, got: {expr}")
    key, raw = expr.split("=", 1)
    try:
        val = json.loads(raw)
    except json.JSONDecodeError:
        val = raw
    out: dict = {}
    node = out
    parts = key.strip().split(".")
    for part in parts[:-1]:
        node[part] = {}
        node = node[part]
    node[parts[-1]] = val
    return out


def resolve_config(args) -> dict:
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if args.config:
        try:
            with open(args.config) as fh:
                user = json.load(fh)
        except OSError as exc:
            raise OSError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if isinstance(user, dict) and "schema_version" in user and "config" in user:
            user = user["config"]   # accept a sidecar for exact reruns
        deep_update(cfg, user)
    for expr in args.set or []:
        deep_update(cfg, parse_set_override(expr))
    if args.seed is not None:
        cfg["ensemble"]["seed"] = args.seed
    if args.out is not None:
        cfg["out"] = args.out
    if args.workers is not None:
        cfg["workers"] = args.workers
    elif cfg["workers"] is None and os.environ.get("RCS_WORKERS"):
        try:
            cfg["workers"] = int(os.environ["RCS_WORKERS"])
        except ValueError as exc:
            raise ConfigError("RCS_WORKERS must be an integer") from exc
    return cfg


def build_model(cfg) -> ModelParams:
    try:
        return ModelParams(**cfg["model"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"model: {exc}") from exc


def build_probe(cfg, omega_s: float) -> ProbeParams:
    try:
        return ProbeParams(omega_s=omega_s, **cfg["probe"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"probe: {exc}") from exc


def build_schedule(cfg, model, probe) -> ScheduleParams:
    sch = dict(cfg["schedule"])
    if sch.get("dt") is None:
        sch["dt"] = ScheduleParams.default_dt(model, probe)
    try:
        sched = ScheduleParams(**sch)
        sched.validate_against(model, probe)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"schedule: {exc}") from exc
    return sched


def format_float(x) -> str:
    return f"{float(x):.17g}"


def write_csv(path, header, rows):
    try:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(format_float(v) for v in row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def write_sidecar(path, cfg, columns, extra=None):
    meta = {
        "schema_version": SCHEMA_VERSION,
        "columns": list(columns),
        "config": cfg,
    }
    if extra:
        meta.update(extra)
    try:
        with open(str(path) + ".meta.json", "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write sidecar: {exc}") from exc


def progress(msg):
    print(msg, file=sys.stderr, flush=True)


def make_pool(cfg):
    workers = cfg.get("workers")
    if workers is None:
        workers = os.cpu_count() or 1
    workers = max(1, int(workers))
    if workers == 1:
        return None
    return ProcessPoolExecutor(max_workers=workers)


def run_spectrum(cfg) -> int:
    model = build_model(cfg)
    sp = cfg["spectrum"]
    shifts = np.linspace(sp["shift_min"] * model.omega_R,
                         sp["shift_max"] * model.omega_R, int(sp["n_points"]))
    probe = build_probe(cfg, omega_s=cfg["probe"]["omega_p"] - shifts[0])
    sched = build_schedule(cfg, model, probe)
    req = SpectrumRequest(
        model=model, probe=probe, schedule=sched,
        omega_s_grid=shift_grid_to_omega_s(shifts, probe.omega_p),
        n_traj=int(cfg["ensemble"]["n_traj"]),
        master_seed=int(cfg["ensemble"]["seed"]),
    )
    pool = make_pool(cfg)
    progress(f"spectrum: {len(req.omega_s_grid)} detector frequencies x "
             f"{req.n_traj} trajectories")
    try:
        spec = raman_spectrum(req, pool_map=pool.map if pool else None)
    finally:
        if pool:
            pool.shutdown()
    header = ["omega_s", "raman_shift", "n_s_mean", "n_s_stderr"]
    write_csv(cfg["out"], header, spec.rows())
    write_sidecar(cfg["out"], cfg, header,
                  extra={"n_diverged": [int(n) for n in spec.n_diverged]})
    return EXIT_OK


def _steady_point(job):
    cfg, omega_c, g = job
    model_kw = dict(cfg["model"])
    model_kw["omega_c"] = omega_c
    model_kw["g"] = g
    model = ModelParams(**model_kw)
    sched = build_schedule(cfg, model, None)
    ens = EnsembleConfig(
        model=model, schedule=sched, probe=None,
        n_traj=int(cfg["ensemble"]["n_traj"]),
        master_seed=int(cfg["ensemble"]["seed"]),
    )
    obs = steady_observables(ens, time_window=bool(cfg["ensemble"]["time_window"]))
    return obs


STEADY_COLUMNS = [
    "omega_c", "g", "deltaQ2", "deltaQ2_stderr", "deltax2", "deltax2_stderr",
    "Q_over_Q0", "Q_over_Q0_stderr", "n_diverged", "n_valid",
]


def _steady_row(omega_c, g, obs):
    return [omega_c, g, obs.deltaQ2, obs.deltaQ2_stderr, obs.deltax2,
            obs.deltax2_stderr, obs.Q_over_Q0, obs.Q_over_Q0_stderr,
            obs.n_diverged, obs.n_valid]


def run_steady(cfg) -> int:
    model = build_model(cfg)
    obs = _steady_point((cfg, model.omega_c, model.g))
    write_csv(cfg["out"], STEADY_COLUMNS, [_steady_row(model.omega_c, model.g, obs)])
    write_sidecar(cfg["out"], cfg, STEADY_COLUMNS,
                  extra={"near_instability": obs.near_instability})
    if obs.n_diverged > obs.n_valid:
        progress(
            f"instability detected: {obs.n_diverged}/{obs.n_diverged + obs.n_valid} "
            f"trajectories diverged (g={model.g}, g_max={model.g_max:.6g})"
        )
    elif obs.near_instability:
        progress(f"warning: g={model.g} within 5% of g_max={model.g_max:.6g}; "
                 "divergence-selection bias possible")
    return EXIT_OK


def run_sweep2d(cfg) -> int:
    sw = cfg["sweep"]
    omega_cs = np.linspace(sw["omega_c_min"], sw["omega_c_max"],
                           int(sw["omega_c_count"]))
    gs = np.linspace(sw["g_min"], sw["g_max"], int(sw["g_count"]))
    jobs = [(cfg, float(wc), float(g)) for g in gs for wc in omega_cs]
    pool = make_pool(cfg)
    progress(f"sweep2d: {len(jobs)} points x {cfg['ensemble']['n_traj']} trajectories")
    try:
        mapper = pool.map if pool else map
        results = list(mapper(_steady_point, jobs))
    finally:
        if pool:
            pool.shutdown()
    rows = [_steady_row(job[1], job[2], obs) for job, obs in zip(jobs, results)]
    write_csv(cfg["out"], STEADY_COLUMNS, rows)
    write_sidecar(cfg["out"], cfg, STEADY_COLUMNS)
    n_div = sum(r[8] for r in rows)
    if n_div:
        progress(f"instability detected on {sum(1 for r in rows if r[8])} "
                 f"sweep points ({n_div} trajectories total)")
    return EXIT_OK


POLARITON_COLUMNS = ["omega_c", "omega_minus", "omega_plus", "omega_c_bar"]


def run_polariton(cfg) -> int:
    sw = cfg["sweep"]
    omega_cs = np.linspace(sw["omega_c_min"], sw["omega_c_max"],
                           int(sw["omega_c_count"]))
    rows = []
    for wc in omega_cs:
        model_kw = dict(cfg["model"])
        model_kw["omega_c"] = float(wc)
        m = ModelParams(**model_kw)
        pb = gt.polariton_frequencies(m)
        rows.append([wc, pb.omega_minus, pb.omega_plus,
                     gt.renormalized_cavity_freq(m)])
    write_csv(cfg["out"], POLARITON_COLUMNS, rows)
    write_sidecar(cfg["out"], cfg, POLARITON_COLUMNS)
    return EXIT_OK


def run_gaussian(cfg) -> int:
    model = build_model(cfg)
    grid = gt.FrequencyGrid.for_model(model)
    mode = cfg["gaussian"]["mode"]
    if mode == "perturbative":
        sol = gt.perturbative_fluctuations(model, grid)
    elif mode == "selfconsistent":
        sol = gt.selfconsistent_fluctuations(
            model, grid,
            tol=float(cfg["gaussian"]["tol"]),
            max_iter=int(cfg["gaussian"]["max_iter"]),
        )
    else:
        raise ConfigError(f"gaussian.mode must be 'perturbative' or "
                          f"'selfconsistent', got {mode!r}")
    header = ["omega", "n", "re_f", "im_f"]
    rows = zip(grid.omega, sol.n, sol.f.real, sol.f.imag)
    write_csv(cfg["out"], header, rows)
    write_sidecar(cfg["out"], cfg, header, extra={
        "x2": sol.x2,
        "omega_c_bar": sol.omega_c_bar,
        "Delta": [sol.Delta.real, sol.Delta.imag],
        "converged": sol.converged,
        "iterations": sol.iterations,
    })
    return EXIT_OK


def run_coupling(cfg) -> int:
    mt = cfg["material"]
    mat = MaterialParams.from_areas(
        R_tilde=float(mt["R_tilde"]),
        A_cell=float(mt["A_cell"]),
        A_samp=float(mt["A_samp"]),
        A_eff=float(mt["A_eff"]),
    )
    g = coupling_from_material(mat)
    lo, hi = coupling_decade_bounds(mat)
    e0 = cavity_field_noise(float(mt["omega_c_hz"]), float(mt["V_eff"]))
    header = ["g_over_omega_R", "decade_low", "decade_high", "E0_V_per_m"]
    write_csv(cfg["out"], header, [[g, lo, hi, e0]])
    write_sidecar(cfg["out"], cfg, header)
    progress(f"g/omega_R = {g:.4g} (order-of-magnitude estimate, "
             f"about one decade of uncertainty either way)")
    return EXIT_OK


# Frozen full-scale figure recipes (15000 trajectories, reference params).
def reproduce_config(target: str) -> dict:
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if target in ("fig2a", "figS1"):
        cfg["experiment"] = "spectrum"
    elif target == "fig2b":
        cfg["experiment"] = "spectrum"
        cfg["spectrum"]["shift_min"] = 0.85
        cfg["spectrum"]["shift_max"] = 1.15
    elif target == "fig3":
        cfg["experiment"] = "sweep2d"
    elif target == "figS2":
        cfg["experiment"] = "sweep2d"
        cfg["model"]["g4"] = 0.04
    elif target == "figS3":
        cfg["experiment"] = "sweep2d"
        cfg["model"]["temperature"] = 0.5
    else:
        raise ConfigError(
            f"unknown reproduce target {target!r} "
            "(expected fig2a|fig2b|fig3|figS1|figS2|figS3)")
    return cfg


RUNNERS = {
    "spectrum": run_spectrum,
    "steady": run_steady,
    "sweep2d": run_sweep2d,
    "polariton": run_polariton,
    "gaussian": run_gaussian,
    "coupling": run_coupling,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rcs",
        description="Raman-cavity simulator: spectra, steady-state maps and "
                    "Gaussian analytics",
    )
    parser.add_argument("command",
                        choices=sorted(RUNNERS) + ["reproduce"])
    parser.add_argument("target", nargs="?",
                        help="figure name for the reproduce command")
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--seed", type=int, help="master seed override")
    parser.add_argument("--workers", type=int,
                        help="worker processes (default: all cores, or "
                             "RCS_WORKERS)")
    parser.add_argument("--out", help="output CSV path")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="dotted-path config override, repeatable")
    args = parser.parse_args(argv)

    try:
        if args.command == "reproduce":
            if not args.target:
                raise ConfigError("reproduce requires a figure target")
            cfg = reproduce_config(args.target)
            for expr in args.set or []:
                deep_update(cfg, parse_set_override(expr))
            if args.seed is not None:
                cfg["ensemble"]["seed"] = args.seed
            if args.out is not None:
                cfg["out"] = args.out
            if args.workers is not None:
                cfg["workers"] = args.workers
            command = cfg["experiment"]
        else:
            cfg = resolve_config(args)
            cfg["experiment"] = args.command
            command = args.command
        return RUNNERS[command](cfg)
    except ConfigError as exc:
        progress(f"configuration error: {exc}")
        return EXIT_CONFIG
    except (AllTrajectoriesDiverged, DivergedTrajectory, gt.NotConverged) as exc:
        progress(f"numerical failure: {exc}")
        return EXIT_NUMERICAL
    except OSError as exc:
        progress(f"i/o error: {exc}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
