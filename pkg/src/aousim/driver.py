"""End-to-end scheduling loop, baseline policies, trace persistence and CLI.

Each communication round: assemble the convex program from realized state,
solve it with the barrier method (warm-started from the previous round when
still strictly feasible), realize associations from the optimized
probabilities, advance the age state, and record a trace row.

Policies: "jas" samples associations from the optimized probabilities
(I2U/U2B); "deterministic" solves the same programs but thresholds the
probabilities at 0.5; "random" skips solving and draws a uniformly random
strictly feasible decision vector each round.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, replace

import numpy as np

from . import aou
from .aou import AoUState, AssociationOutcome
from .association import RandomStream, deterministic_policy, sample_outcome
from .channel import sample_fading
from .energy import RoundEnergy, round_energy
from .program import DecisionVector, assemble_round_program, make_round_context
from .scenario import (ConfigError, Position3, ScenarioConfig, load_config,
                       make_default_scenario, validate, write_config)
from .solver import (InfeasibleError, SolveOptions, phase_one,
                     sample_strictly_feasible, solve, strictly_feasible)

POLICIES = ("jas", "deterministic", "random")

# Stream purposes; ids feed the counter-based generator keying.
_PURPOSE = {"fading": 0, "i2u": 1, "u2b": 2, "hitrun": 3, "mc": 4}


@dataclass
class RoundTrace:
    """Everything recorded about one round of one run."""

    round: int
    expected_aou: float          # closed-form expectation at the solved probabilities
    realized_aou: float          # base-station AoU after sampling
    device_aou: float            # realized device-level freshness sum (diagnostic)
    device_age: np.ndarray       # (I, U) post-round ages
    pending_age: np.ndarray      # (U,) post-round pending ages
    positions: np.ndarray        # (U, 3)
    energies: list[RoundEnergy]
    outcome: AssociationOutcome
    a_prob: np.ndarray           # (I, U) solved/drawn association probabilities
    b_prob: np.ndarray           # (U,)
    solver_outer_iters: int
    solver_gap: float
    solver_status: str

    @property
    def realized_total(self) -> float:
        return self.realized_aou + self.device_aou


@dataclass
class RunSummary:
    policy: str
    seeds: list[int]
    rounds: int
    mean_realized_by_round: list[float]
    std_realized_by_round: list[float]
    mean_total_by_round: list[float]
    std_total_by_round: list[float]
    per_seed_mean_realized: list[float]
    per_seed_mean_total: list[float]
    energy_total_per_uav: list[float]   # mean across seeds of per-run energy sums
    wall_time_s: float
    mc_max_abs_error: float | None = None


def _initial_positions(cfg: ScenarioConfig) -> np.ndarray:
    return np.stack([u.initial_position.array() for u in cfg.uavs])


def _fading_powers(cfg: ScenarioConfig, streams: RandomStream, k: int):
    """Per-(link, round) fading powers, or None in expected mode."""
    if cfg.fading_mode != "sampled":
        return None, None
    rng = streams.stream(_PURPOSE["fading"], k)
    dev = np.empty((cfg.n_devices, cfg.n_uavs))
    for i in range(cfg.n_devices):
        for u in range(cfg.n_uavs):
            dev[i, u] = sample_fading(cfg.rician_factor, rng).power
    uav = np.array([sample_fading(cfg.rician_factor, rng).power
                    for _ in range(cfg.n_uavs)])
    return dev, uav


def _check_round_invariants(cfg: ScenarioConfig, k: int, positions: np.ndarray,
                            energies: list[RoundEnergy]) -> None:
    for u, e in enumerate(energies):
        if e.total > cfg.uavs[u].energy_budget + 1e-6:
            raise RuntimeError(
                f"round {k}: uav {u} consumed {e.total:.3f} J over budget "
                f"{cfg.uavs[u].energy_budget} (internal invariant)")
    for u in range(cfg.n_uavs):
        for v in range(u + 1, cfg.n_uavs):
            d = float(np.linalg.norm(positions[u] - positions[v]))
            if d < cfg.min_separation - 1e-6:
                raise RuntimeError(
                    f"round {k}: uavs {u},{v} separated by {d:.4f} m "
                    f"< {cfg.min_separation} (internal invariant)")


def run_round_loop(cfg: ScenarioConfig, policy: str, *, exact_sampling: bool = False,
                   opts: SolveOptions | None = None, mc_samples: int = 0,
                   collect_solver_rows: bool = False):
    """Run one replication; returns (traces, solver_rows, mc_max_abs_error)."""
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    opts = opts or SolveOptions()
    ndev, nuav = cfg.n_devices, cfg.n_uavs
    streams = RandomStream(cfg.seed)
    state = AoUState.initial(ndev, nuav)
    ages_prev = np.zeros((ndev, nuav))
    assoc_prev = np.zeros((ndev, nuav))
    w_prev = _initial_positions(cfg)
    warm: np.ndarray | None = None
    traces: list[RoundTrace] = []
    solver_rows: list[tuple] = []
    mc_err = None

    for k in range(1, cfg.horizon + 1):
        dev_fp, uav_fp = _fading_powers(cfg, streams, k)
        ctx = make_round_context(cfg, state.device_age, ages_prev, assoc_prev,
                                 w_prev, dev_fp, uav_fp)
        prog = assemble_round_program(ctx, cfg)

        if policy == "random":
            if warm is None or not strictly_feasible(prog, warm, margin=1e-10):
                p1 = phase_one(prog, opts)
                if not p1.feasible:
                    raise InfeasibleError(
                        f"round {k}: no strictly feasible point "
                        f"(max violation {p1.max_violation:.3e})")
                start = p1.x
            else:
                start = warm
            x = sample_strictly_feasible(prog, start,
                                         streams.stream(_PURPOSE["hitrun"], k),
                                         n_samples=1, burn=48, thin=1)[0]
            dv = DecisionVector.from_flat(x, prog.packing, assoc_prev)
            outer_iters, gap, status = 0, float("nan"), "sampled"
            warm = x
        else:
            if warm is not None and strictly_feasible(prog, warm, margin=1e-10):
                x0 = warm
            else:
                p1 = phase_one(prog, opts)
                if not p1.feasible:
                    raise InfeasibleError(
                        f"round {k}: no strictly feasible point "
                        f"(max violation {p1.max_violation:.3e})")
                x0 = p1.x
            res = solve(prog, x0, opts)
            if res.status != "optimal":
                raise RuntimeError(f"round {k}: solver status {res.status}")
            dv = res.decision_vector(prog, assoc_prev)
            outer_iters, gap, status = res.outer_iters, res.gap_bound, res.status
            warm = res.x
            if collect_solver_rows:
                solver_rows.extend((k,) + row for row in res.outer_rows)

        a = np.clip(dv.a, 0.0, 1.0)
        b = np.clip(dv.b, 0.0, 1.0)
        w = dv.w

        if policy == "deterministic":
            outcome = deterministic_policy(a, b)
        else:
            outcome = sample_outcome(a, b, cfg.i2u_resolution,
                                     streams.stream(_PURPOSE["i2u"], k),
                                     streams.stream(_PURPOSE["u2b"], k),
                                     exact=exact_sampling)

        expected = aou.expected_aou(ages_prev, assoc_prev, b)
        realized = aou.global_aou(state, outcome)

        if mc_samples > 0:
            rng = streams.stream(_PURPOSE["mc"], k)
            draws = rng.uniform(size=(mc_samples, nuav)) < b[np.newaxis, :]
            per_uav = state.pending_age - 1.0 + ndev
            mc_mean = float((per_uav[np.newaxis, :] * (1.0 - draws)).sum(axis=1).mean())
            err = abs(mc_mean - expected)
            mc_err = err if mc_err is None else max(mc_err, err)

        new_state = state.advance(outcome)
        device_sum = float(new_state.device_age.sum())
        energies = [round_energy(Position3(*w_prev[u]), Position3(*w[u]),
                                 cfg.uavs[u], cfg.slot_duration)
                    for u in range(nuav)]
        _check_round_invariants(cfg, k, w, energies)

        traces.append(RoundTrace(
            round=k, expected_aou=expected, realized_aou=realized,
            device_aou=device_sum, device_age=new_state.device_age.copy(),
            pending_age=new_state.pending_age.copy(), positions=w.copy(),
            energies=energies, outcome=outcome, a_prob=a.copy(), b_prob=b.copy(),
            solver_outer_iters=outer_iters, solver_gap=gap, solver_status=status))

        ages_prev = state.device_age
        assoc_prev = outcome.matrix(nuav)
        state = new_state
        w_prev = w

    return traces, solver_rows, mc_err


def run_jas(cfg: ScenarioConfig, **kw) -> list[RoundTrace]:
    """Joint probabilistic association and position scheduling."""
    return run_round_loop(cfg, "jas", **kw)[0]


def run_baseline(cfg: ScenarioConfig, policy: str, **kw) -> list[RoundTrace]:
    if policy not in ("deterministic", "random"):
        raise ValueError(f"baseline policy must be deterministic or random, got {policy!r}")
    return run_round_loop(cfg, policy, **kw)[0]


def run_replications(cfg: ScenarioConfig, policy: str, n_seeds: int, **kw):
    """Run n_seeds replications with seeds cfg.seed, cfg.seed+1, ...

    Returns (list of trace lists, RunSummary).
    """
    started = time.perf_counter()
    runs: list[list[RoundTrace]] = []
    seeds = [cfg.seed + r for r in range(n_seeds)]
    mc_errs = []
    for s in seeds:
        cfg_r = validate(replace(cfg, seed=s))
        traces, _, mc_err = run_round_loop(cfg_r, policy, **kw)
        runs.append(traces)
        if mc_err is not None:
            mc_errs.append(mc_err)
    summary = summarize(runs, policy, seeds, time.perf_counter() - started,
                        max(mc_errs) if mc_errs else None)
    return runs, summary


def summarize(runs: list[list[RoundTrace]], policy: str, seeds: list[int],
              wall_time_s: float, mc_max_abs_error: float | None = None) -> RunSummary:
    realized = np.array([[t.realized_aou for t in run] for run in runs])   # (R, K)
    totals = np.array([[t.realized_total for t in run] for run in runs])
    energy = np.array([[sum(e.total for e in t.energies) for t in run] for run in runs])
    per_uav = np.array([[ [e.total for e in t.energies] for t in run] for run in runs])
    return RunSummary(
        policy=policy,
        seeds=list(seeds),
        rounds=realized.shape[1],
        mean_realized_by_round=realized.mean(axis=0).tolist(),
        std_realized_by_round=realized.std(axis=0).tolist(),
        mean_total_by_round=totals.mean(axis=0).tolist(),
        std_total_by_round=totals.std(axis=0).tolist(),
        per_seed_mean_realized=realized.mean(axis=1).tolist(),
        per_seed_mean_total=totals.mean(axis=1).tolist(),
        energy_total_per_uav=per_uav.sum(axis=1).mean(axis=0).tolist(),
        wall_time_s=wall_time_s,
        mc_max_abs_error=mc_max_abs_error,
    )


# ---------------------------------------------------------------------------
# Persistence.  One CSV per run with a fixed, documented column order:
# round, expected_aou, realized_aou, u{u}_x/_y/_z for each UAV, u{u}_energy,
# u{u}_bs, d{i}_uav (-1 when unassociated).  Floats are written with repr so
# a round-trip read reproduces the exact values.
# ---------------------------------------------------------------------------

def trace_columns(n_devices: int, n_uavs: int) -> list[str]:
    cols = ["round", "expected_aou", "realized_aou"]
    for u in range(n_uavs):
        cols += [f"u{u}_x", f"u{u}_y", f"u{u}_z"]
    cols += [f"u{u}_energy" for u in range(n_uavs)]
    cols += [f"u{u}_bs" for u in range(n_uavs)]
    cols += [f"d{i}_uav" for i in range(n_devices)]
    return cols


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_trace_csv(traces: list[RoundTrace], path) -> None:
    if traces:
        ndev = traces[0].outcome.device_to_uav.shape[0]
        nuav = traces[0].pending_age.shape[0]
    else:
        ndev = nuav = 0
    cols = trace_columns(ndev, nuav)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        for t in traces:
            row = [t.round, t.expected_aou, t.realized_aou]
            for u in range(nuav):
                row += [t.positions[u, 0], t.positions[u, 1], t.positions[u, 2]]
            row += [t.energies[u].total for u in range(nuav)]
            row += [int(t.outcome.uav_to_bs[u]) for u in range(nuav)]
            row += [int(t.outcome.device_to_uav[i]) for i in range(ndev)]
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_trace_csv(path) -> dict[str, np.ndarray]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    data = np.array(rows, dtype=float) if rows else np.empty((0, len(header)))
    return {name: data[:, j] for j, name in enumerate(header)}


def write_traces(runs: list[list[RoundTrace]], summary: RunSummary, out_dir) -> None:
    """Persist one CSV per run plus a JSON summary for the policy."""
    os.makedirs(out_dir, exist_ok=True)
    for seed, traces in zip(summary.seeds, runs):
        write_trace_csv(traces, os.path.join(out_dir, f"trace_{summary.policy}_seed{seed}.csv"))
    doc = {k: v for k, v in summary.__dict__.items()}
    with open(os.path.join(out_dir, f"summary_{summary.policy}.json"), "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def write_solver_rows(rows: list[tuple], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("round,outer_iter,t_barrier,objective,newton_steps,kkt_residual\n")
        for r in rows:
            fh.write(",".join(_fmt(v) for v in r) + "\n")


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="aousim",
        description="Multi-UAV data-collection scheduling simulator "
                    "(expected Age-of-Updates minimization)")
    p.add_argument("--config", help="path to scenario JSON")
    p.add_argument("--init-config", metavar="PATH",
                   help="write the default benchmark scenario to PATH and exit")
    p.add_argument("--policy", choices=POLICIES, default="jas")
    p.add_argument("--seeds", type=int, default=1,
                   help="number of replications (seeds config.seed, +1, ...)")
    p.add_argument("--rounds", type=int, default=None,
                   help="override the config horizon")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--mc-samples", type=int, default=0,
                   help="verify the closed-form expected AoU against this many "
                        "Monte-Carlo draws per round")
    p.add_argument("--dump-solver", action="store_true",
                   help="write per-round solver iterate CSVs")
    p.add_argument("--exact-sampling", action="store_true",
                   help="use exact categorical device sampling instead of the "
                        "bucketed multiset")
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.init_config:
            write_config(make_default_scenario(), args.init_config)
            print(f"wrote default scenario to {args.init_config}")
            return 0
        if not args.config:
            print("error: --config is required (or use --init-config)", file=sys.stderr)
            return 1
        cfg = load_config(args.config)
        if args.rounds is not None:
            cfg = validate(replace(cfg, horizon=args.rounds))
        runs = []
        seeds = [cfg.seed + r for r in range(args.seeds)]
        started = time.perf_counter()
        mc_errs = []
        all_solver_rows = {}
        for s in seeds:
            cfg_r = validate(replace(cfg, seed=s))
            traces, solver_rows, mc_err = run_round_loop(
                cfg_r, args.policy, exact_sampling=args.exact_sampling,
                mc_samples=args.mc_samples, collect_solver_rows=args.dump_solver)
            runs.append(traces)
            if mc_err is not None:
                mc_errs.append(mc_err)
            if args.dump_solver:
                all_solver_rows[s] = solver_rows
        summary = summarize(runs, args.policy, seeds,
                            time.perf_counter() - started,
                            max(mc_errs) if mc_errs else None)
        write_traces(runs, summary, args.out)
        if args.dump_solver:
            for s, rows in all_solver_rows.items():
                write_solver_rows(rows, os.path.join(
                    args.out, f"solver_{args.policy}_seed{s}.csv"))
        mean_tot = float(np.mean(summary.per_seed_mean_total))
        mean_bs = float(np.mean(summary.per_seed_mean_realized))
        print(f"{args.policy}: {len(seeds)} seed(s) x {summary.rounds} rounds; "
              f"mean realized AoU {mean_bs:.4f} (BS term), "
              f"{mean_tot:.4f} (with device term); traces in {args.out}")
        if summary.mc_max_abs_error is not None:
            print(f"expectation check: max |MC - closed form| = "
                  f"{summary.mc_max_abs_error:.6f}")
        return 0
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except InfeasibleError as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"io error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
