"""Command-line front end.

Subcommands: generate, plan, frontier, simulate, transform, select, bench,
oracle.  Exit codes: 0 success, 2 validation error, 3 infeasible problem,
4 I/O error.  When no ``--seed`` is given, the ``MPCOMM_SEED`` environment
variable is consulted before falling back to the scenario's master seed.

All floats print with 9 significant digits; CSV output is comma-separated
with a header row and LF line endings so repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import channel, pareto, planfile, sim
from .errors import (
    AoiPlanError,
    BudgetInfeasibleError,
    NoFeasiblePlanError,
    OracleBudgetError,
    PlanFormatError,
    ScenarioParseError,
    ScenarioValidationError,
)
from .inner import Infeasible, IntervalSpec, solve_interval
from .oracle import OracleBudget, oracle_inner, oracle_plan
from .scenario import (
    Scenario,
    default_patrol_scenario,
    energy_to_dbm,
    load_scenario,
    save_scenario,
    scenario_digest,
)
from .timing import EdgeMemo, build_graph, export_graph_csv, shortest_path

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4

_G_MAPS = {
    "identity": lambda x: x,
    "square": lambda x: x * x,
    "log1p": lambda x: math.log1p(x),
    "sqrt": lambda x: math.sqrt(x),
}


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def _resolve_seed(args, scenario: Scenario | None) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("MPCOMM_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ScenarioValidationError([f"MPCOMM_SEED is not an integer: {env!r}"]) from exc
    if scenario is not None:
        return scenario.master_seed
    return 0


def _load_inputs(args):
    """Resolve (scenario, profile) from --scenario/--profile/--seed flags."""
    if args.scenario:
        scenario = load_scenario(args.scenario)
    else:
        scenario = default_patrol_scenario(_resolve_seed(args, None))
    seed = _resolve_seed(args, scenario)
    if getattr(args, "profile", None):
        profile = channel.load_profile(args.profile)
        if profile.dims != (scenario.num_bs_N, scenario.num_rb_K, scenario.horizon_T):
            raise ScenarioValidationError(
                [f"profile dims {profile.dims} do not match the scenario"]
            )
    else:
        profile = channel.build_profile(scenario, seed)
    return scenario, profile, seed


def _parse_g(spec: str):
    """Parse a monotone-map spec: a named map, `scale:a`, or `pow:p`."""
    if spec in _G_MAPS:
        return _G_MAPS[spec]
    if spec.startswith("scale:"):
        a = float(spec.split(":", 1)[1])
        return lambda x: a * x
    if spec.startswith("pow:"):
        p = float(spec.split(":", 1)[1])
        return lambda x: x**p
    raise ScenarioValidationError(
        [f"unknown map {spec!r}; choose from {sorted(_G_MAPS)} or scale:a / pow:p"]
    )


# ----------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------

def cmd_generate(args) -> int:
    if args.preset == "table1":
        scenario = default_patrol_scenario(_resolve_seed(args, None))
    else:
        scenario = load_scenario(args.scenario) if args.scenario else \
            default_patrol_scenario(_resolve_seed(args, None))
    seed = _resolve_seed(args, scenario)
    out = Path(args.out)
    if not out.parent.exists():
        print(f"error: output directory {out.parent} does not exist", file=sys.stderr)
        return EXIT_IO
    out.mkdir(exist_ok=True)
    scen_path = out / "scenario.json"
    prof_path = out / "profile.npz"
    save_scenario(scenario, scen_path)
    profile = channel.build_profile(scenario, seed)
    channel.save_profile(profile, prof_path)
    print(f"scenario: {scen_path}")
    print(f"profile:  {prof_path} (seed {seed})")
    return EXIT_OK


def cmd_plan(args) -> int:
    scenario, profile, seed = _load_inputs(args)
    if args.epsilon_theta < 1:
        raise ScenarioValidationError([f"--epsilon-theta must be >= 1, got {args.epsilon_theta}"])
    graph = build_graph(scenario, profile, args.epsilon_theta,
                        jobs=args.jobs, rate_margin=args.margin)
    if args.graph_csv:
        export_graph_csv(graph, args.graph_csv)
    plan = shortest_path(graph)
    policy = sim.policy_plan_from_sampling(plan, scenario)
    if args.out:
        planfile.save_plan(policy, args.out, scenario_digest(scenario),
                           scenario.power_budget_pbar, seed=seed)
    print(
        f"plan energy {_fmt(plan.total_energy)} mW-slots "
        f"({_fmt(energy_to_dbm(plan.total_energy, scenario.horizon_T))} dBm avg), "
        f"binary {_fmt(plan.binary_energy)} mW-slots, "
        f"samples {len(plan.instants)}, "
        f"instants {';'.join(str(t) for t in plan.instants)}, "
        f"rb-load {policy.worst_rb_load()}"
    )
    return EXIT_OK


def cmd_frontier(args) -> int:
    scenario, profile, _ = _load_inputs(args)
    frontier = pareto.compute_frontier(scenario, profile, jobs=args.jobs)
    pareto.export_frontier_csv(frontier, args.out, scenario)
    print(
        f"frontier: {len(frontier)} points over load caps "
        f"[{frontier.theta_lo}, {frontier.theta_hi}] -> {args.out}"
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    scenario, profile, seed = _load_inputs(args)
    if args.replicas < 1:
        raise ScenarioValidationError([f"--replicas must be >= 1, got {args.replicas}"])
    if args.plan:
        policy, _header = planfile.load_plan(args.plan)
        planfile.validate_plan_rates(policy, profile)
    else:
        cap = args.epsilon_theta if args.epsilon_theta else scenario.num_rb_K
        builders = {
            "age-aware": sim.age_aware_plan,
            "periodic": sim.baseline_periodic,
            "instantaneous": sim.baseline_instantaneous,
            "average": sim.baseline_average,
        }
        policy = builders[args.policy](scenario, profile, cap, rate_margin=args.margin)
    report = sim.simulate(policy, profile, args.replicas, seed,
                          keep_traces=bool(args.trace))
    if args.trace:
        sim.export_trace_csv(report.traces, args.trace)
    doc = {
        "policy": report.plan_kind,
        "replicas": report.replicas,
        "success_rate": report.success_rate,
        "mean_energy": report.mean_energy,
        "worst_rb_load": report.worst_rb_load,
        "mean_peak_age": report.mean_peak_age,
        "expected_peak_age": report.expected_peak_age,
        "expected_satisfied": report.expected_satisfied,
        "aoi_bound": policy.aoi_bound,
        "seed": seed,
    }
    text = json.dumps(doc, indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return EXIT_INFEASIBLE if not policy.feasible else EXIT_OK


def _read_frontier_csv(path):
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append((int(row["epsilon_theta"]), float(row["energy_linear"])))
    if not rows:
        raise PlanFormatError(f"frontier file {path} has no rows")
    return rows


def cmd_transform(args) -> int:
    rows = _read_frontier_csv(args.frontier)
    g1, g2 = _parse_g(args.g1), _parse_g(args.g2)
    caps = [c for c, _ in rows]
    energies = [e for _, e in rows]
    from .pareto import _check_strictly_increasing

    _check_strictly_increasing(g1, min(caps), max(caps), "g1")
    _check_strictly_increasing(g2, min(energies), max(energies), "g2")
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["g1_load", "g2_energy"])
        for cap, energy in rows:
            writer.writerow([_fmt(g1(float(cap))), _fmt(g2(energy))])
    print(f"transformed {len(rows)} frontier points -> {args.out}")
    return EXIT_OK


def cmd_select(args) -> int:
    rows = _read_frontier_csv(args.frontier)
    if args.budget is not None:
        g1 = _parse_g(args.g1)
        admissible = [(c, e) for c, e in rows if g1(float(c)) <= args.budget]
        if not admissible:
            raise BudgetInfeasibleError(f"no frontier point fits budget {args.budget}")
        cap, energy = min(admissible, key=lambda ce: ce[1])
        mode = f"budget {args.budget}"
    else:
        util = pareto.weighted_lp_utility(args.alpha, args.p,
                                          args.theta_target, args.energy_target)
        cap, energy = min(rows, key=lambda ce: util(ce[0], ce[1]))
        mode = f"weighted-Lp alpha={args.alpha} p={args.p}"
    print(f"selected ({mode}): epsilon_theta {cap}, energy {_fmt(energy)}")
    return EXIT_OK


def cmd_bench(args) -> int:
    """Time the interval solver across RB counts and fit the log-log slope."""
    k_list = [int(k) for k in args.k_list.split(",")]
    seed = args.seed if args.seed is not None else 0
    rows = []
    for K in k_list:
        rng = np.random.default_rng([seed, K])
        gain = 10.0 ** rng.uniform(-9.5, -7.5, size=(args.n, K, args.slots))
        shape = rng.uniform(1.0, 30.0, size=(args.n, K, args.slots))
        profile = channel.ChannelProfile.from_arrays(gain, shape, noise_power=1e-9)
        target = 0.6 * K * args.slots * 0.5
        spec = IntervalSpec(start=1, end=args.slots + 1, rb_cap=args.cap,
                            rate_target=target, power_cap=200.0)
        elapsed = []
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            solve_interval(spec, profile)
            elapsed.append(time.perf_counter() - t0)
        rows.append((K, min(elapsed)))
    logs = np.log([r[0] for r in rows])
    logt = np.log([r[1] for r in rows])
    slope = float(np.polyfit(logs, logt, 1)[0])
    print("K,seconds")
    for K, sec in rows:
        print(f"{K},{_fmt(sec)}")
    print(f"log-log slope: {slope:.3f}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    scenario, profile, _ = _load_inputs(args)
    budget = OracleBudget()
    if args.op == "inner":
        spec = IntervalSpec(start=args.start, end=args.end,
                            rb_cap=args.epsilon_theta or 1,
                            rate_target=scenario.payload_threshold_vbar,
                            power_cap=scenario.power_budget_pbar)
        ours = solve_interval(spec, profile)
        ref = oracle_inner(spec, profile, budget)
        if isinstance(ref, Infeasible) or isinstance(ours, Infeasible):
            print(f"oracle: infeasible={isinstance(ref, Infeasible)} "
                  f"solver: infeasible={isinstance(ours, Infeasible)}")
            return EXIT_INFEASIBLE
        print(f"oracle energy {_fmt(ref)}, solver energy {_fmt(ours.energy)}")
    else:  # plan
        cap = args.epsilon_theta or scenario.num_rb_K
        budget.check_plan(scenario.horizon_T, scenario.aoi_bound_tau)
        memo = EdgeMemo()
        graph = build_graph(scenario, profile, cap, memo=memo)

        def weight(i, j):
            return graph.edges[(i, j)].weight

        instants, energy, count = oracle_plan(scenario.horizon_T,
                                              scenario.aoi_bound_tau, weight, budget)
        plan = shortest_path(graph)
        print(f"oracle energy {_fmt(energy)} over {count} sequences, "
              f"solver energy {_fmt(plan.total_energy)}; "
              f"instants {';'.join(str(t) for t in instants)}")
    return EXIT_OK


# ----------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aoiplan",
        description="Freshness-aware UAV communication planner",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, profile_flag=True):
        p.add_argument("--scenario", help="scenario JSON file")
        if profile_flag:
            p.add_argument("--profile", help="channel profile .npz file")
        p.add_argument("--seed", type=int, help="seed override (else MPCOMM_SEED)")

    p = sub.add_parser("generate", help="write scenario + channel profile files")
    common(p, profile_flag=False)
    p.add_argument("--preset", choices=["table1"], help="named default scenario")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("plan", help="solve the full planning problem for one load cap")
    common(p)
    p.add_argument("--epsilon-theta", type=int, required=True, help="per-BS RB load cap")
    p.add_argument("--margin", type=float, default=1.0, help="rate-target margin >= 1")
    p.add_argument("--jobs", type=int, default=1, help="concurrent edge solves")
    p.add_argument("--out", help="plan file destination")
    p.add_argument("--graph-csv", help="also dump the timing graph edges")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("frontier", help="sweep the load cap and export the frontier")
    common(p)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="frontier CSV destination")
    p.set_defaults(func=cmd_frontier)

    p = sub.add_parser("simulate", help="Monte Carlo a plan file or a named policy")
    common(p)
    p.add_argument("--plan", help="plan file to evaluate")
    p.add_argument("--policy", choices=["age-aware", "periodic", "instantaneous", "average"],
                   help="build and evaluate a named policy")
    p.add_argument("--epsilon-theta", type=int, help="load cap for named policies")
    p.add_argument("--margin", type=float, default=1.0)
    p.add_argument("--replicas", type=int, required=True)
    p.add_argument("--out", help="report JSON destination")
    p.add_argument("--trace", help="trace CSV destination")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("transform", help="map a frontier through monotone objectives")
    p.add_argument("--frontier", required=True, help="frontier CSV from `frontier`")
    p.add_argument("--g1", required=True, help="load map (identity|square|log1p|sqrt|scale:a|pow:p)")
    p.add_argument("--g2", required=True, help="energy map (same forms)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("select", help="pick one frontier point by preference or budget")
    p.add_argument("--frontier", required=True)
    p.add_argument("--alpha", type=float, default=0.5, help="load weight in [0, 1]")
    p.add_argument("--p", type=float, default=1.0, help="Lp exponent >= 1")
    p.add_argument("--theta-target", type=float, default=0.0)
    p.add_argument("--energy-target", type=float, default=0.0)
    p.add_argument("--budget", type=float, help="switch to budget mode: max g1(load)")
    p.add_argument("--g1", default="identity", help="load map for budget mode")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("bench", help="runtime scaling of the interval solver vs K")
    p.add_argument("--k-list", default="10,20,40,80,160")
    p.add_argument("--n", type=int, default=5, help="number of base stations")
    p.add_argument("--slots", type=int, default=2, help="interval length")
    p.add_argument("--cap", type=int, default=4, help="load cap")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("oracle", help="brute-force cross-checks (hard size caps)")
    common(p)
    p.add_argument("--op", choices=["inner", "plan"], required=True)
    p.add_argument("--start", type=int, default=1)
    p.add_argument("--end", type=int, default=2)
    p.add_argument("--epsilon-theta", type=int)
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioParseError, ScenarioValidationError, PlanFormatError,
            OracleBudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NoFeasiblePlanError, BudgetInfeasibleError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except AoiPlanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
