"""Command-line entry point for solver and benchmark runs.

Subcommands: solve-avg, solve-disc, meta-avg, meta-disc, bench-queue,
eval-policy, print-grid. Runs are configured by a single JSON document, with
the master seed overridable by --seed or the DUALALP_SEED environment
variable (seed only; everything else comes from the config). Every run writes
a summary JSON that embeds the fully resolved configuration, so it can be
replayed from the summary alone, plus trace tables for solver runs. Outputs
are byte-identical across reruns with the same config and seed; wall time is
reported on stderr only.

Exit codes: 0 success, 2 configuration error, 3 capacity error,
4 convergence error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import avgcost, discounted, fixtures, queueing
from .errors import CapacityError, ConfigError, ConvergenceError, DualAlpError
from .features import make_norm_proportional_sampling, make_uniform_sampling
from .grid import build_penalty_grid
from .mdp import average_cost, value_function
from .trace import MetaResult, RunTrace

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAPACITY = 3
EXIT_CONVERGENCE = 4

SEED_ENV_VAR = "DUALALP_SEED"

SOLVER_DEFAULTS = {
    "penalty": 1.0,
    "radius": 2.0,
    "iterations": 1000,
    "learning_rate": "auto",
    "lr_halving_period": None,
    "minibatch": 1,
    "tolerance": 0.05,
    "failure_prob": 0.1,
    "seed": 0,
    "sum_target": 1.0,
    "discount": 0.9,
    "initial_dist": "uniform",
    "enforce_sum_constraint": False,
    "trace_violation_samples": 64,
}
SAMPLING_DEFAULTS = {"scheme": "uniform"}
EVAL_DEFAULTS = {"mode": "none", "horizon": 20000, "burn_in": 2000, "reps": 3}
META_DEFAULTS = {"violation_bound": 1.0, "selection_weight": 1.0}
BENCH_DEFAULTS = {
    "penalty": 2.0,
    "minibatch": 1000,
    "learning_rate": 1e-4,
    "lr_halving_period": 2000,
    "iterations": 20000,
    "radius": 2.0,
    "seed": 0,
    "trace_stride": None,
    "sampling": "norm-proportional",
    # baseline occupancy: start from the better heuristic and let the solver
    # adjust within zero-sum feature directions ("zero" starts from scratch
    # with the sum-one constraint instead)
    "mu0": "LBFS",
}

QUEUE_PRESETS = {
    "desk": (queueing.DESK_SPEC, queueing.DESK_LOSS_INTERVALS,
             queueing.DESK_COMPONENT_INTERVALS),
    "paper": (queueing.PAPER_SPEC, queueing.PAPER_LOSS_INTERVALS,
              queueing.PAPER_COMPONENT_INTERVALS),
}


def _resolve_section(config: dict, key: str, defaults: dict) -> dict:
    section = dict(defaults)
    extra = config.get(key) or {}
    unknown = set(extra) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown keys in config section {key!r}: {sorted(unknown)}")
    section.update(extra)
    return section


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as handle:
            return json.load(handle)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc


def _resolve_problem(config: dict):
    """Returns (model, queue_spec_or_None, problem_section)."""
    problem = config.get("problem") or {}
    if "mdp_path" in problem:
        model = fixtures.load_mdp_fixture(problem["mdp_path"])
        return model, None, {"mdp_path": problem["mdp_path"]}
    preset = problem.get("queue_preset")
    if preset is not None:
        if preset not in QUEUE_PRESETS:
            raise ConfigError(f"unknown queue preset {preset!r}")
        spec = QUEUE_PRESETS[preset][0]
        model = queueing.build_mdp(spec)
        return model, spec, {"queue_preset": preset}
    raise ConfigError("config needs problem.mdp_path or problem.queue_preset")


def _resolve_features(config: dict, model, spec):
    features = config.get("features") or {}
    if "path" in features:
        return fixtures.load_feature_fixture(features["path"], model), {"path": features["path"]}
    if spec is not None:
        builder = features.get("queue_builder") or {}
        preset = (config.get("problem") or {}).get("queue_preset", "desk")
        _, loss_iv, comp_iv = QUEUE_PRESETS[preset]
        loss_iv = [tuple(p) for p in builder.get("loss_intervals", loss_iv)]
        comp_iv = [tuple(p) for p in builder.get("component_intervals", comp_iv)]
        heuristics = tuple(builder.get("heuristics", ("LONGER", "LBFS")))
        fs, dropped = queueing.build_features(
            spec, model=model, heuristics=heuristics, loss_intervals=loss_iv,
            component_intervals=comp_iv,
            normalize=bool(builder.get("normalize", True)))
        resolved = {"queue_builder": {"loss_intervals": [list(p) for p in loss_iv],
                                      "component_intervals": [list(p) for p in comp_iv],
                                      "heuristics": list(heuristics),
                                      "normalize": bool(builder.get("normalize", True)),
                                      "dropped_columns": len(dropped)}}
        return fs, resolved
    raise ConfigError("config needs features.path (or a queue problem for the builder)")


def _resolve_sampling(config: dict, model, fs, kappa: float):
    sampling = _resolve_section(config, "sampling", SAMPLING_DEFAULTS)
    scheme = sampling["scheme"]
    if scheme == "uniform":
        return make_uniform_sampling(model, fs, kappa), sampling
    if scheme == "norm-proportional":
        return make_norm_proportional_sampling(model, fs, kappa), sampling
    raise ConfigError(f"unknown sampling scheme {scheme!r}")


def _resolve_initial_dist(solver: dict, model):
    spec = solver.get("initial_dist", "uniform")
    if spec == "uniform" or spec is None:
        return None
    return np.asarray(spec, dtype=float)


def _make_eval_hook(mode_cfg: dict, model, spec, gamma=None, alpha=None):
    mode = mode_cfg["mode"]
    if mode == "none":
        return None
    if mode == "exact":
        if gamma is None:
            return lambda theta, policy: average_cost(model, policy)
        weights = alpha if alpha is not None else np.full(model.num_states,
                                                          1.0 / model.num_states)
        return lambda theta, policy: float(weights @ value_function(model, policy, gamma))
    if mode == "simulated":
        if spec is None:
            raise ConfigError("simulated evaluation needs a queue problem")
        return lambda theta, policy: queueing.evaluate_policy_simulated(
            spec, policy, mode_cfg["horizon"], mode_cfg["burn_in"],
            mode_cfg["reps"], seed=mode_cfg.get("seed", 0))[0]
    raise ConfigError(f"unknown eval mode {mode!r}")


def _write_json(doc: dict, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as handle:
        json.dump(doc, handle, sort_keys=True, indent=2)
        handle.write("\n")


def _summary_base(mode: str, resolved_config: dict, seed, iterations: int) -> dict:
    return {"config": {"mode": mode, **resolved_config},
            "provenance": {"seed": seed, "iterations": int(iterations)}}


def _trace_summary(trace: RunTrace) -> dict:
    last = -1 if len(trace.iterations) else None
    return {
        "theta": [float(v) for v in trace.theta],
        "final_objective": float(trace.objective[last]) if last is not None else None,
        "final_violation_estimate": float(trace.v_hat[last]) if last is not None else None,
        "final_eval_cost": (None if last is None or np.isnan(trace.eval_cost[last])
                            else float(trace.eval_cost[last])),
    }


def _meta_summary(result: MetaResult) -> dict:
    return {
        "grid_points": [float(h) for h in result.grid_points],
        "selection_weight": float(result.selection_weight),
        "linear_objectives": [float(v) for v in result.linear_objectives],
        "violation_estimates": [float(v) for v in result.violation_estimates],
        "selection_values": [float(v) for v in result.selection_values],
        "chosen_index": int(result.chosen_index),
        "chosen_penalty": float(result.chosen_penalty),
        "iterations_per_point": [int(v) for v in result.iterations_per_point],
        "violation_samples": int(result.violation_samples),
        "theta": [float(v) for v in result.theta],
    }


def run_solve_avg(config: dict, out_dir: Path) -> dict:
    model, spec, problem_cfg = _resolve_problem(config)
    fs, features_cfg = _resolve_features(config, model, spec)
    sampler, sampling_cfg = _resolve_sampling(config, model, fs, kappa=1.0)
    solver = _resolve_section(config, "solver", SOLVER_DEFAULTS)
    eval_cfg = _resolve_section(config, "eval", EVAL_DEFAULTS)
    cfg = avgcost.AvgSolverConfig(
        penalty=solver["penalty"], radius=solver["radius"],
        iterations=int(solver["iterations"]), learning_rate=solver["learning_rate"],
        lr_halving_period=solver["lr_halving_period"], minibatch=int(solver["minibatch"]),
        tolerance=solver["tolerance"], failure_prob=solver["failure_prob"],
        seed=int(solver["seed"]), sum_target=solver["sum_target"],
        trace_stride=config.get("trace_stride"),
        trace_violation_samples=int(solver["trace_violation_samples"]))
    hook = _make_eval_hook(eval_cfg, model, spec)
    trace = avgcost.sgd_solve_avg(model, fs, sampler, cfg, eval_hook=hook)
    trace.write_csv(out_dir / "trace.csv")
    resolved = {"problem": problem_cfg, "features": features_cfg,
                "sampling": sampling_cfg, "solver": solver, "eval": eval_cfg,
                "trace_stride": config.get("trace_stride")}
    summary = _summary_base("solve-avg", resolved, solver["seed"], cfg.iterations)
    summary["result"] = {"penalty": solver["penalty"], **_trace_summary(trace)}
    if model.num_pairs <= avgcost.DENSE_GUARD:
        v1, v2 = avgcost.violations_exact(model, fs, trace.theta)
        summary["result"]["violations_exact"] = [v1, v2]
    _write_json(summary, out_dir / "summary.json")
    return summary


def run_solve_disc(config: dict, out_dir: Path) -> dict:
    model, spec, problem_cfg = _resolve_problem(config)
    fs, features_cfg = _resolve_features(config, model, spec)
    solver = _resolve_section(config, "solver", SOLVER_DEFAULTS)
    gamma = float(solver["discount"])
    sampler, sampling_cfg = _resolve_sampling(config, model, fs, kappa=gamma)
    eval_cfg = _resolve_section(config, "eval", EVAL_DEFAULTS)
    alpha = _resolve_initial_dist(solver, model)
    cfg = discounted.DiscSolverConfig(
        discount=gamma, penalty=solver["penalty"], radius=solver["radius"],
        iterations=int(solver["iterations"]), initial_dist=alpha,
        learning_rate=solver["learning_rate"],
        lr_halving_period=solver["lr_halving_period"], minibatch=int(solver["minibatch"]),
        tolerance=solver["tolerance"], failure_prob=solver["failure_prob"],
        seed=int(solver["seed"]), trace_stride=config.get("trace_stride"),
        trace_violation_samples=int(solver["trace_violation_samples"]),
        enforce_sum_constraint=bool(solver["enforce_sum_constraint"]))
    hook = _make_eval_hook(eval_cfg, model, spec, gamma=gamma, alpha=alpha)
    trace = discounted.sgd_solve_disc(model, fs, sampler, cfg, eval_hook=hook)
    trace.write_csv(out_dir / "trace.csv")
    resolved = {"problem": problem_cfg, "features": features_cfg,
                "sampling": sampling_cfg, "solver": solver, "eval": eval_cfg,
                "trace_stride": config.get("trace_stride")}
    summary = _summary_base("solve-disc", resolved, solver["seed"], cfg.iterations)
    summary["result"] = {"penalty": solver["penalty"], "discount": gamma,
                         "alpha_spec": solver.get("initial_dist", "uniform"),
                         **_trace_summary(trace)}
    if model.num_pairs <= avgcost.DENSE_GUARD:
        v3, v4 = discounted.violations_exact_disc(model, fs, gamma, alpha, trace.theta)
        summary["result"]["violations_exact"] = [v3, v4]
    _write_json(summary, out_dir / "summary.json")
    return summary


def run_meta_avg(config: dict, out_dir: Path) -> dict:
    model, spec, problem_cfg = _resolve_problem(config)
    fs, features_cfg = _resolve_features(config, model, spec)
    sampler, sampling_cfg = _resolve_sampling(config, model, fs, kappa=1.0)
    solver = _resolve_section(config, "solver", SOLVER_DEFAULTS)
    meta = _resolve_section(config, "meta", META_DEFAULTS)
    eval_cfg = _resolve_section(config, "eval", EVAL_DEFAULTS)
    hook = _make_eval_hook(eval_cfg, model, spec)
    result = avgcost.meta_solve_avg(
        model, fs, sampler, violation_bound=meta["violation_bound"],
        selection_weight=meta["selection_weight"], tolerance=solver["tolerance"],
        failure_prob=solver["failure_prob"], seed=int(solver["seed"]),
        radius=solver["radius"], sum_target=solver["sum_target"],
        learning_rate=solver["learning_rate"], minibatch=int(solver["minibatch"]),
        trace_stride=config.get("trace_stride"), eval_hook=hook)
    for k, trace in enumerate(result.traces):
        trace.write_csv(out_dir / f"trace_{k:03d}.csv")
    resolved = {"problem": problem_cfg, "features": features_cfg,
                "sampling": sampling_cfg, "solver": solver, "meta": meta,
                "eval": eval_cfg, "trace_stride": config.get("trace_stride")}
    total_iters = int(result.iterations_per_point.sum())
    summary = _summary_base("meta-avg", resolved, solver["seed"], total_iters)
    summary["result"] = _meta_summary(result)
    _write_json(summary, out_dir / "summary.json")
    return summary


def run_meta_disc(config: dict, out_dir: Path) -> dict:
    model, spec, problem_cfg = _resolve_problem(config)
    fs, features_cfg = _resolve_features(config, model, spec)
    solver = _resolve_section(config, "solver", SOLVER_DEFAULTS)
    gamma = float(solver["discount"])
    sampler, sampling_cfg = _resolve_sampling(config, model, fs, kappa=gamma)
    meta = _resolve_section(config, "meta", META_DEFAULTS)
    eval_cfg = _resolve_section(config, "eval", EVAL_DEFAULTS)
    alpha = _resolve_initial_dist(solver, model)
    hook = _make_eval_hook(eval_cfg, model, spec, gamma=gamma, alpha=alpha)
    result = discounted.meta_solve_disc(
        model, fs, sampler, gamma=gamma, alpha=alpha,
        tolerance=solver["tolerance"], failure_prob=solver["failure_prob"],
        seed=int(solver["seed"]), radius=solver["radius"],
        violation_bound=meta["violation_bound"],
        selection_weight=meta["selection_weight"],
        learning_rate=solver["learning_rate"], minibatch=int(solver["minibatch"]),
        trace_stride=config.get("trace_stride"), eval_hook=hook,
        enforce_sum_constraint=bool(solver["enforce_sum_constraint"]))
    for k, trace in enumerate(result.traces):
        trace.write_csv(out_dir / f"trace_{k:03d}.csv")
    resolved = {"problem": problem_cfg, "features": features_cfg,
                "sampling": sampling_cfg, "solver": solver, "meta": meta,
                "eval": eval_cfg, "trace_stride": config.get("trace_stride")}
    total_iters = int(result.iterations_per_point.sum())
    summary = _summary_base("meta-disc", resolved, solver["seed"], total_iters)
    summary["result"] = {**_meta_summary(result), "discount": gamma,
                         "alpha_spec": solver.get("initial_dist", "uniform")}
    _write_json(summary, out_dir / "summary.json")
    return summary


def run_bench_queue(config: dict, out_dir: Path, preset: str = "desk") -> dict:
    """Queue benchmark. The desk preset solves the exact model with the
    benchmark SGD settings and reports exact average losses of the two
    heuristics and of the solved policy; the paper preset is trajectory-only
    (simulated heuristic baselines, no exact solve)."""
    if preset not in QUEUE_PRESETS:
        raise ConfigError(f"unknown queue preset {preset!r}")
    spec, loss_iv, comp_iv = QUEUE_PRESETS[preset]
    bench = _resolve_section(config, "bench", BENCH_DEFAULTS)
    eval_cfg = _resolve_section(config, "eval", EVAL_DEFAULTS)
    resolved = {"problem": {"queue_preset": preset}, "bench": bench, "eval": eval_cfg}
    if preset == "paper":
        results = {}
        for kind in ("LONGER", "LBFS"):
            policy = queueing.heuristic_policy(spec, kind)
            mean, std = queueing.evaluate_policy_simulated(
                spec, policy, eval_cfg["horizon"], eval_cfg["burn_in"],
                eval_cfg["reps"], seed=int(bench["seed"]))
            results[kind] = {"simulated_loss": mean, "std": std}
        summary = _summary_base("bench-queue", resolved, bench["seed"], 0)
        summary["result"] = {"baselines": results, "solved": None}
        _write_json(summary, out_dir / "summary.json")
        return summary
    model = queueing.build_mdp(spec)
    if bench["mu0"] in ("LONGER", "LBFS"):
        from .mdp import stationary_state_action
        mu0 = stationary_state_action(model, queueing.heuristic_policy(spec, bench["mu0"]))
        sum_target = 0.0  # mu0 already carries the unit mass
    elif bench["mu0"] in ("zero", None):
        mu0, sum_target = None, 1.0
    else:
        raise ConfigError(f"unknown bench mu0 {bench['mu0']!r}")
    fs, dropped = queueing.build_features(spec, model=model, loss_intervals=loss_iv,
                                          component_intervals=comp_iv, mu0=mu0)
    if bench["sampling"] == "norm-proportional":
        sampler = make_norm_proportional_sampling(model, fs, kappa=1.0)
    else:
        sampler = make_uniform_sampling(model, fs, kappa=1.0)
    cfg = avgcost.AvgSolverConfig(
        penalty=bench["penalty"], radius=bench["radius"],
        iterations=int(bench["iterations"]), learning_rate=bench["learning_rate"],
        lr_halving_period=bench["lr_halving_period"], minibatch=int(bench["minibatch"]),
        seed=int(bench["seed"]), sum_target=sum_target,
        trace_stride=bench["trace_stride"])
    trace = avgcost.sgd_solve_avg(model, fs, sampler, cfg)
    trace.write_csv(out_dir / "trace.csv")
    baselines = {}
    for kind in ("LONGER", "LBFS"):
        policy = queueing.heuristic_policy(spec, kind)
        baselines[kind] = {"exact_loss": average_cost(model, policy) * spec.total_capacity}
    solved_loss = average_cost(model, trace.policy) * spec.total_capacity
    summary = _summary_base("bench-queue", resolved, bench["seed"], cfg.iterations)
    summary["result"] = {
        "baselines": baselines,
        "solved": {"exact_loss": solved_loss, **_trace_summary(trace)},
        "num_features": fs.dim, "dropped_columns": len(dropped),
    }
    _write_json(summary, out_dir / "summary.json")
    return summary


def run_eval_policy(config: dict, out_dir: Path) -> dict:
    model, spec, problem_cfg = _resolve_problem(config)
    policy_cfg = config.get("policy") or {}
    eval_cfg = _resolve_section(config, "eval", EVAL_DEFAULTS)
    if "heuristic" in policy_cfg:
        if spec is None:
            raise ConfigError("heuristic policies need a queue problem")
        policy = queueing.heuristic_policy(spec, policy_cfg["heuristic"])
        label = policy_cfg["heuristic"]
    elif "theta" in policy_cfg:
        fs, _ = _resolve_features(config, model, spec)
        theta = np.asarray(policy_cfg["theta"], dtype=float)
        from .mdp import policy_from_occupancy
        policy = policy_from_occupancy(fs.occupancy_vector(theta), model.num_actions)
        label = "theta"
    else:
        raise ConfigError("config needs policy.heuristic or policy.theta")
    result: dict = {"policy": label}
    mode = eval_cfg["mode"] if eval_cfg["mode"] != "none" else "exact"
    if mode == "exact":
        result["average_loss"] = average_cost(model, policy)
    elif mode == "simulated":
        if spec is None:
            raise ConfigError("simulated evaluation needs a queue problem")
        mean, std = queueing.evaluate_policy_simulated(
            spec, policy, eval_cfg["horizon"], eval_cfg["burn_in"], eval_cfg["reps"],
            seed=int(eval_cfg.get("seed", 0)))
        result["simulated_loss"] = mean
        result["std"] = std
    resolved = {"problem": problem_cfg, "policy": policy_cfg, "eval": eval_cfg}
    summary = _summary_base("eval-policy", resolved, eval_cfg.get("seed", 0), 0)
    summary["result"] = result
    _write_json(summary, out_dir / "summary.json")
    return summary


def run_print_grid(violation_bound: float, weight: float, tolerance: float,
                   out_dir: Path | None) -> dict:
    grid = build_penalty_grid(violation_bound, weight, tolerance)
    for point in grid.points:
        print(repr(float(point)))
    summary = {"config": {"mode": "print-grid", "violation_bound": violation_bound,
                          "selection_weight": weight, "tolerance": tolerance},
               "result": {"points": [float(p) for p in grid.points]},
               "provenance": {"seed": None, "iterations": 0}}
    if out_dir is not None:
        _write_json(summary, out_dir / "summary.json")
    return summary


def _apply_seed_override(config: dict, cli_seed: int | None) -> None:
    seed = cli_seed
    if seed is None and SEED_ENV_VAR in os.environ:
        try:
            seed = int(os.environ[SEED_ENV_VAR])
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer") from exc
    if seed is not None:
        config.setdefault("solver", {})["seed"] = seed
        config.setdefault("bench", {})["seed"] = seed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualalp",
                                     description="Dual-ALP planners for large MDPs")
    sub = parser.add_subparsers(dest="mode", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="path to the JSON run configuration")
    common.add_argument("--seed", type=int, default=None, help="master seed override")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--trace-stride", type=int, default=None,
                        help="record every N-th iteration")
    for mode in ("solve-avg", "solve-disc", "meta-avg", "meta-disc", "eval-policy"):
        sub.add_parser(mode, parents=[common])
    bench = sub.add_parser("bench-queue", parents=[common])
    bench.add_argument("--preset", choices=("paper", "desk"), default="desk")
    grid = sub.add_parser("print-grid")
    grid.add_argument("--v-max", type=float, required=True, dest="v_max")
    grid.add_argument("--beta", type=float, required=True)
    grid.add_argument("--epsilon", type=float, required=True)
    grid.add_argument("--out", default=None)
    return parser


def run(args) -> int:
    if args.mode == "print-grid":
        out_dir = Path(args.out) if args.out else None
        run_print_grid(args.v_max, args.beta, args.epsilon, out_dir)
        return EXIT_OK
    config = _load_config(args.config)
    _apply_seed_override(config, args.seed)
    if args.trace_stride is not None:
        config["trace_stride"] = args.trace_stride
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    if args.mode == "solve-avg":
        run_solve_avg(config, out_dir)
    elif args.mode == "solve-disc":
        run_solve_disc(config, out_dir)
    elif args.mode == "meta-avg":
        run_meta_avg(config, out_dir)
    elif args.mode == "meta-disc":
        run_meta_disc(config, out_dir)
    elif args.mode == "bench-queue":
        run_bench_queue(config, out_dir, preset=args.preset)
    elif args.mode == "eval-policy":
        run_eval_policy(config, out_dir)
    else:
        raise ConfigError(f"unknown mode {args.mode!r}")
    elapsed = time.perf_counter() - started
    print(f"{args.mode}: done in {elapsed:.2f}s, outputs in {out_dir}", file=sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except ConvergenceError as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except DualAlpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
