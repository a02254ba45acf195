"""Command-line front end: plan, simulate (replay), evaluate, check-terminal.

Exit codes: 0 when the run satisfies its goal, 2 when the computation
finished but the goal is unsatisfied (budget exhausted, infeasible
clearance), 1 on any error. All artifacts land in --out, written as
temp-plus-rename except the append-only progress log.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .cmaes import decode, optimize
from .dynamics import (ControlInput, ControlSchedule, SimulationDiverged, simulate)
from .domain import domain_vertices
from .feasibility import InfeasibleClearance, max_heading_tolerance_deg
from .objective import evaluate_J, score_states
from .scenario import (ScenarioError, _atomic_write, load_scenario,
                       read_trajectory, write_report, write_trajectory)

CHANNEL_NAMES = ("delta", "n_p", "n_s", "n_bt", "n_st")


def _apply_dt_c(scenario, dt_c):
    ratio = dt_c / scenario.dt_s
    if dt_c <= 0 or abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
        raise ScenarioError("--dt-c must be a positive multiple of the scenario dt_s")
    scenario.dt_c = float(dt_c)
    scenario._prep = None
    if scenario.m < 1:
        raise ScenarioError("--dt-c leaves an empty schedule")


def _domain_snapshots(traj, scenario):
    """Active domain polygon every 100 s along the trajectory."""
    berthed = scenario.berthed_state()
    step = max(1, int(round(100.0 / scenario.dt_s)))
    out = []
    for i in range(0, len(traj), step):
        st = traj.state_at(i)
        kind, verts = domain_vertices(st, scenario.ship, scenario.ell,
                                      scenario.rect, scenario.rule, berthed)
        out.append({"t_s": float(traj.t[i]), "kind": kind,
                    "vertices_m": verts.tolist()})
    return out


def _dominant_term(rep, weights):
    contributions = {
        "collision": weights.w_c * rep.c if math.isfinite(rep.c) else math.inf,
        "terminal": rep.t_f * rep.terminal_value if math.isfinite(rep.terminal_value) else math.inf,
        "checkpoint": sum(c["penalty"] for c in rep.checkpoints),
    }
    return max(contributions, key=contributions.get)


def _write_run_artifacts(out_dir, scenario, best_x, rep, run_info):
    rep_d = rep.to_dict()
    rep_d["run"] = run_info
    rep_d["run"]["dominant_term"] = _dominant_term(rep, scenario.weights)
    write_report(rep_d, os.path.join(out_dir, "report.json"))
    _atomic_write(os.path.join(out_dir, "best_vector.json"),
                  json.dumps({"X": [float(v) for v in best_x], "J": rep.j,
                              "dimension": len(best_x)}, indent=2) + "\n")
    if not rep.diverged:
        schedule = decode(best_x, scenario.dt_c)
        traj = simulate(scenario.initial, schedule, scenario.wind, scenario.ship,
                        scenario.dt_s, cutoff_speed=scenario.cutoff_speed,
                        wind_feedback=scenario.wind_feedback)
        write_trajectory(traj, schedule, os.path.join(out_dir, "trajectory.csv"))
        _atomic_write(os.path.join(out_dir, "domain_snapshots.json"),
                      json.dumps(_domain_snapshots(traj, scenario), indent=2) + "\n")


def cmd_plan(args) -> int:
    t0 = time.perf_counter()
    scenario = load_scenario(args.scenario)
    if args.dt_c is not None:
        _apply_dt_c(scenario, args.dt_c)
    cfg = scenario.optimizer
    if args.seed is not None:
        cfg.seed = args.seed
    if args.max_evals is not None:
        cfg.max_evals = args.max_evals
    os.makedirs(args.out, exist_ok=True)
    threads = args.threads if args.threads else (os.cpu_count() or 1)

    best = {"j": math.inf, "report": None}

    def objective(X):
        J, rep = evaluate_J(X, scenario)
        if J < best["j"]:
            best["j"] = J
            best["report"] = rep
        return J

    every = max(1, args.progress_every)
    plog = open(os.path.join(args.out, "progress.log"), "w", encoding="utf-8")

    def sink(rec):
        if rec.generation % every == 0:
            plog.write(f"gen={rec.generation} evals={rec.evaluations} "
                       f"best_j={rec.best_j:.8g} sigma={rec.sigma:.3e} "
                       f"restarts={rec.restarts}\n")
            plog.flush()
        rep = best["report"]
        return rep is not None and rep.fully_satisfied

    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        best_x, best_j, history = optimize(objective, scenario.bounds(), cfg,
                                           progress=sink,
                                           map_fn=pool.map if pool else None)
    finally:
        if pool:
            pool.shutdown()
        plog.close()

    J, rep = evaluate_J(best_x, scenario)
    run_info = {
        "evaluations": history[-1].evaluations if history else 0,
        "generations": history[-1].generation if history else 0,
        "restarts": history[-1].restarts if history else 0,
        "wall_time_s": time.perf_counter() - t0,
        "seed": cfg.seed,
        "max_evals": cfg.max_evals,
    }
    _write_run_artifacts(args.out, scenario, best_x, rep, run_info)
    if rep.fully_satisfied:
        return 0
    print(f"budget exhausted without full satisfaction (best J = {J:.6g})",
          file=sys.stderr)
    return 2


def _load_vector(path):
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if isinstance(data, dict):
        data = data["X"]
    return np.asarray(data, dtype=np.float64)


def _replay_schedule(path, scenario):
    """Build a per-sample schedule from a recorded trajectory CSV."""
    rt = read_trajectory(path)
    n = rt.states.shape[0]
    if n > 1:
        dt = float(rt.t[1] - rt.t[0])
        if abs(dt - scenario.dt_s) > 1e-9:
            raise ValueError(f"CSV sample spacing {dt} differs from scenario dt_s")
    for ci, name in enumerate(CHANNEL_NAMES):
        lo, hi = scenario.channel_bounds[name]
        col = rt.controls[:, ci]
        if np.any(col < lo - 1e-9) or np.any(col > hi + 1e-9):
            raise ValueError(f"replay control '{name}' violates bound [{lo:.4g}, {hi:.4g}]")
    m = max(1, n - 1)
    segments = [ControlInput(*rt.controls[i]) for i in range(m)]
    initial = rt.state_at(0)
    return initial, ControlSchedule(dt_c=scenario.dt_s, segments=segments,
                                    t_f=float(rt.t[-1]))


def cmd_simulate(args) -> int:
    scenario = load_scenario(args.scenario)
    os.makedirs(args.out, exist_ok=True)
    if args.schedule.endswith(".csv"):
        initial, schedule = _replay_schedule(args.schedule, scenario)
        traj = simulate(initial, schedule, scenario.wind, scenario.ship,
                        scenario.dt_s, cutoff_speed=scenario.cutoff_speed,
                        wind_feedback=scenario.wind_feedback)
        J, rep = score_states(traj.states, schedule.t_f, scenario)
    else:
        X = _load_vector(args.schedule)
        J, rep = evaluate_J(X, scenario)  # validates dimension and bounds
        schedule = decode(X, scenario.dt_c)
        traj = simulate(scenario.initial, schedule, scenario.wind, scenario.ship,
                        scenario.dt_s, cutoff_speed=scenario.cutoff_speed,
                        wind_feedback=scenario.wind_feedback)
    write_trajectory(traj, schedule, os.path.join(args.out, "trajectory.csv"))
    write_report(rep, os.path.join(args.out, "report.json"))
    print(f"J = {J:.8g}")
    return 0


def cmd_evaluate(args) -> int:
    scenario = load_scenario(args.scenario)
    X = _load_vector(args.vector)
    J, rep = evaluate_J(X, scenario)
    print(json.dumps(rep.to_dict(), indent=2, sort_keys=True))
    return 0


def cmd_check_terminal(args) -> int:
    try:
        bound = max_heading_tolerance_deg(
            args.clearance, args.domain_margin, args.ship_length,
            args.berth_angle, args.berthed_heading, args.x_tol1, args.x_tol3)
    except InfeasibleClearance as e:
        print(f"infeasible: {e}")
        return 2
    print(f"max_heading_tolerance_deg = {bound:.4f}")
    if args.x_tol5 is not None:
        if args.x_tol5 <= bound:
            print(f"x_tol5 = {args.x_tol5:.4f} deg satisfies the bound")
            return 0
        print(f"x_tol5 = {args.x_tol5:.4f} deg exceeds the bound")
        return 2
    return 0


def _evals(s: str) -> int:
    return int(float(s))  # accepts 2e5 style


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="berthplan",
        description="checkpoint-constrained berthing/unberthing trajectory planning")
    sub = p.add_subparsers(dest="command", required=True)

    plan = sub.add_parser("plan", help="optimize a schedule for a scenario")
    plan.add_argument("--scenario", required=True)
    plan.add_argument("--out", required=True)
    plan.add_argument("--seed", type=int, default=None)
    plan.add_argument("--max-evals", type=_evals, default=None)
    plan.add_argument("--threads", type=int, default=None)
    plan.add_argument("--dt-c", type=float, default=None)
    plan.add_argument("--progress-every", type=int, default=10)
    plan.set_defaults(func=cmd_plan)

    sim = sub.add_parser("simulate", help="simulate a schedule without optimizing")
    sim.add_argument("--scenario", required=True)
    sim.add_argument("--schedule", required=True,
                     help="decision-vector JSON or trajectory CSV to replay")
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=cmd_simulate)

    ev = sub.add_parser("evaluate", help="score one decision vector")
    ev.add_argument("--scenario", required=True)
    ev.add_argument("--vector", required=True)
    ev.set_defaults(func=cmd_evaluate)

    ck = sub.add_parser("check-terminal",
                        help="closed-form heading-tolerance bound at the berth")
    ck.add_argument("--clearance", type=float, required=True,
                    help="berth clearance D [m]")
    ck.add_argument("--domain-margin", type=float, required=True,
                    help="rectangular domain margin l [m]")
    ck.add_argument("--ship-length", type=float, required=True, help="L [m]")
    ck.add_argument("--berth-angle", type=float, required=True,
                    help="berth line angle [deg]")
    ck.add_argument("--berthed-heading", type=float, required=True,
                    help="berthed heading [deg]")
    ck.add_argument("--x-tol1", type=float, required=True,
                    help="north position tolerance [m]")
    ck.add_argument("--x-tol3", type=float, required=True,
                    help="east position tolerance [m]")
    ck.add_argument("--x-tol5", type=float, default=None,
                    help="heading tolerance to check [deg]")
    ck.set_defaults(func=cmd_check_terminal)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as e:
        print(f"scenario error: {e}", file=sys.stderr)
        return 1
    except SimulationDiverged as e:
        print(f"simulation diverged: {e}", file=sys.stderr)
        return 1
    except (ValueError, OSError, json.JSONDecodeError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
