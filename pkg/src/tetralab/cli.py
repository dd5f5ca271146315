"""Configuration-driven command line runner with reproducible reports.

One JSON config file describes one command.  Unknown keys are rejected;
CLI ``--set`` flags override leaf keys via dotted paths.  Reports are
written as JSON with stable key order; wall-clock statistics go to a
separate timing file so the scientific report is byte-reproducible.

Exit codes: 0 = pass, 2 = scientific failure (bound violated or target
not found), 1 = usage or runtime error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .contact import make_model, build_tetragon, smooth_tetragon
from .dynamics import ChordSearchConfig, chord_budget, find_chord, separation
from .pb4 import (Pb4Config, estimate_pb4_plus, feasible_pair_value,
                  prototype_problem)
from .scenarios import (ConfigError, PerturbationSpec, ScenarioConfig,
                        channel_potential, mechanical_hamiltonian,
                        run_scenario, unstable_hamiltonian)


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Strict config parsing
# ---------------------------------------------------------------------------

_PERTURBATION_SCHEMA = {
    "delta_target": float, "tube_radius": float,
    "away_factor": float, "time_periodic": bool,
}

_SCENARIO_SCHEMA = {
    "scenario": str, "k": int, "R0": float, "R1": float, "T": float,
    "beta": float, "potential_time_amp": float, "reeb_model": str,
    "reeb_factor_base": float, "reeb_factor_amp": float,
    "perturbation": _PERTURBATION_SCHEMA,
    "n_seeds": int, "n_phases": int, "ode_tol": float, "tol": float,
    "threads": int, "seed": int,
}

_OPTIMIZER_SCHEMA = {
    "n_starts": int, "iterations": int, "learning_rate": float,
    "blur_sigma": float, "perturbation_scale": float,
    "validate_every": int, "threads": int, "seed": int,
}

_PB4_SCHEMA = {
    "n": int, "R0": float, "R1": float, "T": float, "s_margin": float,
    "thicken_radius": int, "two_grid": bool,
    "expected_low": float, "expected_high": float,
    "optimizer": _OPTIMIZER_SCHEMA,
}

_CHORD_SCHEMA = {
    "model": str, "k": int, "R0": float, "R1": float, "T": float,
    "hamiltonian": str, "beta": float, "time_budget": float,
    "n_seeds": int, "n_phases": int, "tol": float, "ode_tol": float,
    "threads": int,
}

_TETRAGON_SCHEMA = {
    "model": str, "k": int, "R0": float, "R1": float, "T": float,
    "eps": float,
}


def _check_keys(cfg, schema, path=""):
    if not isinstance(cfg, dict):
        raise UsageError(f"config section {path or '<root>'} must be "
                         "an object")
    for key, val in cfg.items():
        here = f"{path}.{key}" if path else key
        if key not in schema:
            raise UsageError(f"unknown config key: {here}")
        want = schema[key]
        if isinstance(want, dict):
            _check_keys(val, want, here)
        elif want is float:
            if not isinstance(val, (int, float)) \
                    or isinstance(val, bool):
                raise UsageError(f"config key {here} must be a number")
        elif not isinstance(val, want) or (want is int
                                           and isinstance(val, bool)):
            raise UsageError(
                f"config key {here} must be {want.__name__}"
            )


def _apply_overrides(cfg, overrides):
    for item in overrides or []:
        if "=" not in item:
            raise UsageError(f"override {item!r} is not KEY=VALUE")
        dotted, raw = item.split("=", 1)
        target = cfg
        parts = dotted.split(".")
        for p in parts[:-1]:
            target = target.setdefault(p, {})
            if not isinstance(target, dict):
                raise UsageError(f"override path {dotted} crosses a leaf")
        target[parts[-1]] = json.loads(raw) if _is_json(raw) else raw
    return cfg


def _is_json(raw):
    try:
        json.loads(raw)
        return True
    except json.JSONDecodeError:
        return False


def load_config(path, overrides, schema):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(
            f"config {path}: parse error at line {exc.lineno}: {exc.msg}"
        )
    cfg = _apply_overrides(cfg, overrides)
    _check_keys(cfg, schema)
    return cfg


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------

def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_to_jsonable(v) for v in obj.tolist()]
    return obj


def emit_report(report_payload, out_dir, timing=None, csv_files=None):
    """Write report.json (byte-reproducible), timing.json and CSVs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = _to_jsonable(report_payload)
    with open(out / "report.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")
    if timing is not None:
        with open(out / "timing.json", "w", encoding="utf-8") as fh:
            json.dump(_to_jsonable(timing), fh, sort_keys=True, indent=2)
            fh.write("\n")
    for name, (header, rows) in (csv_files or {}).items():
        with open(out / name, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    return out / "report.json"


# ---------------------------------------------------------------------------
# Command implementations
# ---------------------------------------------------------------------------

def _cmd_scenario(cfg, out_dir, threads):
    pert = cfg.get("perturbation")
    kwargs = {k: v for k, v in cfg.items() if k != "perturbation"}
    if threads is not None:
        kwargs["threads"] = threads
    sc = ScenarioConfig(
        perturbation=PerturbationSpec(**pert) if pert else None,
        **kwargs,
    )
    report = run_scenario(sc)
    payload = {
        "command": "scenario",
        "artifact_version": __version__,
        "config": _to_jsonable(cfg),
        "report": report.describe(),
        "tolerances": {"time": 1e-6, "increment": report.increment_tol},
    }
    csvs = {}
    # export the chord trajectory and a time-vs-|p| plot series
    if report.found and report.details.get("model") != "circle":
        pass
    return payload, csvs, 0 if report.passed else 2


def _cmd_pb4(cfg, out_dir, threads):
    n = cfg.get("n", 128)
    opt = dict(cfg.get("optimizer", {}))
    if threads is not None:
        opt["threads"] = threads
    config = Pb4Config(**opt)
    problem = prototype_problem(
        n=n, R0=cfg.get("R0", 1.0), R1=cfg.get("R1", 2.0),
        T=cfg.get("T", 0.25), s_margin=cfg.get("s_margin", 0.5),
        thicken_radius=cfg.get("thicken_radius", 0),
    )
    report = estimate_pb4_plus(problem, config)
    payload = {
        "command": "pb4",
        "artifact_version": __version__,
        "config": _to_jsonable(cfg),
        "report": report.describe(),
        "tolerances": {"feasibility": 1e-12},
    }
    if cfg.get("two_grid"):
        problem2 = prototype_problem(
            n=2 * n, R0=cfg.get("R0", 1.0), R1=cfg.get("R1", 2.0),
            T=cfg.get("T", 0.25), s_margin=cfg.get("s_margin", 0.5),
            thicken_radius=cfg.get("thicken_radius", 0),
        )
        report2 = estimate_pb4_plus(problem2, config)
        payload["report"]["two_grid_estimate"] = report2.estimate
        payload["report"]["two_grid_difference"] = abs(
            report2.estimate - report.estimate
        )
    s_nodes = problem.window.s_nodes()
    csvs = {
        "F.csv": ("s\\u grid", report.F),
        "G.csv": ("s\\u grid", report.G),
        "plot.csv": ("s,F_max_over_u",
                     np.column_stack([s_nodes, report.F.max(axis=1)])),
    }
    status = 0
    lo = cfg.get("expected_low")
    hi = cfg.get("expected_high")
    if lo is not None and report.estimate < lo:
        status = 2
    if hi is not None and report.estimate > hi:
        status = 2
    return payload, csvs, status


def _hamiltonian_for(cfg):
    name = cfg.get("hamiltonian", "unstable")
    k = cfg.get("k", 1)
    if name == "unstable":
        return unstable_hamiltonian(k)
    if name == "channel":
        return channel_potential(k)
    if name == "mechanical":
        return mechanical_hamiltonian(k, cfg.get("beta", 0.5),
                                      cfg.get("R0", 1.0),
                                      cfg.get("R1", 2.0))
    raise UsageError(f"unknown hamiltonian {name!r}")


def _cmd_chord(cfg, out_dir, threads):
    model = make_model(cfg.get("model", "sphere"), cfg.get("k", 1))
    T = cfg.get("T", model.max_reeb_time()
                if cfg.get("model", "sphere") != "circle" else 0.25)
    tet = build_tetragon(model, cfg.get("R0", 1.0), cfg.get("R1", 2.0), T)
    H = _hamiltonian_for(cfg)
    budget = cfg.get("time_budget")
    sep = separation(H, tet.low_wall, tet.high_wall)
    if budget is None:
        budget = chord_budget(tet.kappa, sep.delta)
    search = ChordSearchConfig(
        n_seeds=cfg.get("n_seeds", 64),
        n_phases=cfg.get("n_phases", 16),
        tol=cfg.get("tol", 1e-6),
        ode_tol=cfg.get("ode_tol", 1e-9),
        threads=threads if threads is not None
        else cfg.get("threads", 1),
    )
    result = find_chord(H, tet.floor, tet.ceiling, budget, search)
    payload = {
        "command": "chord",
        "artifact_version": __version__,
        "config": _to_jsonable(cfg),
        "report": {
            "found": result.found,
            "budget": budget,
            "delta": sep.delta,
            "time_length": result.chord.time_length
            if result.found else None,
            "best_distance": result.best_distance,
            "n_seeds": result.n_seeds,
            "n_phases": result.n_phases,
        },
        "tolerances": {"membership": search.tol, "ode": search.ode_tol},
    }
    csvs = {}
    if result.found:
        traj = result.chord.trajectory
        ts = np.linspace(result.chord.t0, result.chord.t1, 200)
        states = traj.sample(ts)
        k = H.chart.dim_pairs
        csvs["trajectory.csv"] = (
            "t," + ",".join(H.chart.labels),
            np.column_stack([ts, states]),
        )
        csvs["plot.csv"] = (
            "t,p_norm",
            np.column_stack([ts, np.linalg.norm(states[:, :k], axis=1)]),
        )
    return payload, csvs, 0 if result.found else 2


def _cmd_tetragon(cfg, out_dir, threads):
    model = make_model(cfg.get("model", "sphere"), cfg.get("k", 1))
    T = cfg.get("T", model.max_reeb_time()
                if cfg.get("model", "sphere") != "circle" else 0.25)
    tet = build_tetragon(model, cfg.get("R0", 1.0), cfg.get("R1", 2.0), T)
    report = tet.describe()
    if "eps" in cfg:
        sm = smooth_tetragon(tet, cfg["eps"])
        report["smoothed"] = {
            "eps": sm.eps,
            "area": sm.area,
            "lagrangian_residual": sm.lagrangian_residual(200),
        }
    payload = {
        "command": "tetragon",
        "artifact_version": __version__,
        "config": _to_jsonable(cfg),
        "report": report,
        "tolerances": {"constraint": 1e-10},
    }
    return payload, {}, 0


_COMMANDS = {
    ("scenario", "run"): (_SCENARIO_SCHEMA, _cmd_scenario),
    ("pb4", "estimate"): (_PB4_SCHEMA, _cmd_pb4),
    ("chord", "find"): (_CHORD_SCHEMA, _cmd_chord),
    ("tetragon", "build"): (_TETRAGON_SCHEMA, _cmd_tetragon),
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tetralab",
        description="Lagrangian tetragon laboratory: chord searches, "
                    "separation bounds and bracket-invariant estimation",
    )
    sub = parser.add_subparsers(dest="group", required=True)
    groups = {}
    for group, action in list(_COMMANDS) + [("validate", "config")]:
        if group not in groups:
            gp = sub.add_parser(group)
            groups[group] = gp.add_subparsers(dest="action", required=True)
        ap = groups[group].add_parser(action)
        ap.add_argument("config", help="JSON config file")
        ap.add_argument("--set", action="append", dest="overrides",
                        metavar="KEY=VALUE",
                        help="override a config key via dotted path")
        ap.add_argument("--out", default=None, help="output directory")
        ap.add_argument("--threads", type=int, default=None)
        if group == "validate":
            ap.add_argument("--command", default="scenario",
                            choices=["scenario", "pb4", "chord",
                                     "tetragon"],
                            help="schema to validate against")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    out_dir = args.out or os.environ.get("TETRALAB_OUT", ".")
    threads = args.threads
    if threads is None and os.environ.get("TETRALAB_THREADS"):
        threads = int(os.environ["TETRALAB_THREADS"])
    try:
        if args.group == "validate":
            schema = {
                "scenario": _SCENARIO_SCHEMA, "pb4": _PB4_SCHEMA,
                "chord": _CHORD_SCHEMA, "tetragon": _TETRAGON_SCHEMA,
            }[args.command]
            load_config(args.config, args.overrides, schema)
            print(f"config valid for command {args.command!r}")
            return 0
        schema, runner = _COMMANDS[(args.group, args.action)]
        cfg = load_config(args.config, args.overrides, schema)
        start = time.monotonic()
        payload, csvs, status = runner(cfg, out_dir, threads)
        elapsed = time.monotonic() - start
        path = emit_report(
            payload, out_dir,
            timing={"wall_clock_seconds": elapsed},
            csv_files={
                name: (hdr, np.atleast_2d(rows))
                for name, (hdr, rows) in csvs.items()
            },
        )
        print(f"report written to {path} (exit {status})")
        return status
    except (UsageError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
