"""Command-line front end for desk-scale experiments.

Subcommands:
  run         play one matchup over many seeded runs, export CSV + JSON
  complexity  sweep epsilon (and n) and estimate empirical query complexity
  breaker     build the breaker pair for a deterministic baseline and report
  replay      re-run an algorithm against an exported sample sequence file

Component specs are names with optional parameters, e.g. ``cdfest``,
``point-mass:1``, ``cdf-lb:epsilon=0.05,sigma=+``, ``quantile:tau=0.75``,
``boosted:delta=0.05,inner=meanest``. Experiment fields may also come from a
JSON config file (--config); explicit flags win. The master seed falls back
to the THRESHOLD_ARENA_SEED environment variable, then to 0.

Exit codes: 0 success, 1 a reported check failed, 2 invalid specification,
3 protocol violation (including nondeterminism where determinism is required).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from .core import ArenaError, ProtocolError, ValidationError
from . import arena
from .adversaries import load_sample_sequence

SEED_ENV_VAR = "THRESHOLD_ARENA_SEED"

_POSITIONAL_PARAM = {
    "point-mass": "j",
    "quantile": "tau",
    "boosted": "delta",
    "sequence": "path",
    "cdf-lb": "epsilon",
}


def _coerce(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def parse_component(text: str) -> tuple[str, dict]:
    """Parse 'name' or 'name:key=value,...' (one bare value allowed)."""
    name, _, rest = text.partition(":")
    name = name.strip()
    params: dict = {}
    if rest:
        for token in rest.split(","):
            token = token.strip()
            if not token:
                continue
            if "=" in token:
                key, _, value = token.partition("=")
                params[key.strip()] = _coerce(value.strip())
            else:
                key = _POSITIONAL_PARAM.get(name)
                if key is None:
                    raise ValidationError(
                        f"component {name!r} takes no positional parameter; use key=value"
                    )
                params[key] = _coerce(token)
    return name, params


def _algorithm_spec(text: str) -> arena.AlgorithmSpec:
    name, params = parse_component(text)
    if "inner" in params and isinstance(params["inner"], str):
        inner_name, inner_params = parse_component(params["inner"])
        params["inner"] = arena.AlgorithmSpec(inner_name, inner_params)
    return arena.AlgorithmSpec(name, params)


def _adversary_spec(text: str) -> arena.AdversarySpec:
    name, params = parse_component(text)
    if "inner" in params and isinstance(params["inner"], str):
        inner_name, inner_params = parse_component(params["inner"])
        params["inner"] = arena.AdversarySpec(inner_name, inner_params)
    return arena.AdversarySpec(name, params)


def _resolve(args, config_file: dict, key: str, default):
    value = getattr(args, key.replace("-", "_"), None)
    if value is not None:
        return value
    if key in config_file:
        return config_file[key]
    return default


def _load_config_file(path) -> dict:
    if path is None:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config file {path}: {exc}")


def _default_seed() -> int:
    env = os.environ.get(SEED_ENV_VAR)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ValidationError(f"{SEED_ENV_VAR}={env!r} is not an integer seed")


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="threshold-arena",
        description="Online estimation from threshold queries: games, sweeps, breakers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="play one matchup over many seeded runs")
    run.add_argument("--algo", help="algorithm spec, e.g. cdfest or quantile:tau=0.75")
    run.add_argument("--adv", help="adversary spec, e.g. uniform or point-mass:1")
    run.add_argument("--n", type=int, help="support parameter")
    run.add_argument("--T", type=int, dest="horizon", help="rounds per run")
    run.add_argument("--runs", type=int, help="number of Monte Carlo runs")
    run.add_argument("--metric", choices=["cdf", "median", "mean", "quantile"])
    run.add_argument("--eps", type=float, help="success threshold for rate reporting")
    run.add_argument("--seed", type=int, help=f"master seed (default ${SEED_ENV_VAR} or 0)")
    run.add_argument("--workers", type=int, help="worker processes (default all cores)")
    run.add_argument("--out-dir", help="output directory (default arena-out)")
    run.add_argument("--reveal-samples", action="store_true", default=None,
                     help="include hidden samples in the trajectory CSV")
    run.add_argument("--config", help="JSON file with any of the above fields")

    comp = sub.add_parser("complexity", help="estimate empirical query complexity")
    comp.add_argument("--algo")
    comp.add_argument("--adv")
    comp.add_argument("--n", help="comma-separated support sizes, e.g. 8,16")
    comp.add_argument("--eps", help="comma-separated epsilons, e.g. 0.2,0.1")
    comp.add_argument("--runs", type=int)
    comp.add_argument("--target", type=float, help="required success probability (default 0.75)")
    comp.add_argument("--t-cap", type=int, dest="t_cap", help="largest horizon to probe")
    comp.add_argument("--metric", choices=["cdf", "median", "mean", "quantile"])
    comp.add_argument("--seed", type=int)
    comp.add_argument("--workers", type=int)
    comp.add_argument("--out-dir")
    comp.add_argument("--config")

    brk = sub.add_parser("breaker", help="defeat a registered deterministic baseline")
    brk.add_argument("--baseline", help="deterministic algorithm name (midpoint, halving)")
    brk.add_argument("--n", type=int)
    brk.add_argument("--T", type=int, dest="horizon")
    brk.add_argument("--out-dir")
    brk.add_argument("--config")

    rep = sub.add_parser("replay", help="re-run an algorithm against an exported sequence")
    rep.add_argument("--file", help="newline-delimited sample file")
    rep.add_argument("--algo")
    rep.add_argument("--n", type=int)
    rep.add_argument("--T", type=int, dest="horizon", help="rounds (default: file length)")
    rep.add_argument("--runs", type=int)
    rep.add_argument("--metric", choices=["cdf", "median", "mean", "quantile"])
    rep.add_argument("--eps", type=float)
    rep.add_argument("--seed", type=int)
    rep.add_argument("--out-dir")
    rep.add_argument("--reveal-samples", action="store_true", default=None)
    rep.add_argument("--config")

    return parser


def _require(value, name: str):
    if value is None:
        raise ValidationError(f"missing required field --{name}")
    return value


def cmd_run(args) -> int:
    file_cfg = _load_config_file(args.config)
    algo = _require(_resolve(args, file_cfg, "algo", None), "algo")
    adv = _require(_resolve(args, file_cfg, "adv", None), "adv")
    n = int(_require(_resolve(args, file_cfg, "n", None), "n"))
    horizon = int(_require(_resolve(args, file_cfg, "horizon", file_cfg.get("T")), "T"))
    runs = int(_resolve(args, file_cfg, "runs", 1))
    seed = int(_resolve(args, file_cfg, "seed", _default_seed()))
    eps = _resolve(args, file_cfg, "eps", None)
    metric = _resolve(args, file_cfg, "metric", None)
    workers = int(_resolve(args, file_cfg, "workers", arena.default_workers()))
    reveal = bool(_resolve(args, file_cfg, "reveal-samples", file_cfg.get("reveal_samples", False)))
    out = _out_dir(_resolve(args, file_cfg, "out-dir", file_cfg.get("out_dir", "arena-out")))

    config = arena.GameConfig(
        n=n,
        horizon=horizon,
        algorithm=_algorithm_spec(algo) if isinstance(algo, str) else algo,
        adversary=_adversary_spec(adv) if isinstance(adv, str) else adv,
        metric=metric,
        seed=seed,
    )
    arena.validate_config(config)
    if runs < 1:
        raise ValidationError(f"runs must be >= 1, got {runs}")

    csv_path = out / "trajectory.csv"
    json_path = out / "summary.json"
    with open(csv_path, "w") as fh:
        fh.write(arena.trajectory_csv_header(reveal) + "\n")

        def sink(run_id, trajectory):
            for row in arena.trajectory_csv_rows(run_id, trajectory, reveal):
                fh.write(row + "\n")

        summary = arena.monte_carlo(config, runs, epsilon=eps, workers=workers, sink=sink)
    arena.write_summary_json(json_path, summary)
    print(f"wrote {csv_path} and {json_path}")
    if eps is not None:
        print(f"success rate at horizon: {summary.success_at_horizon:.3f}")
    return 0


def cmd_complexity(args) -> int:
    file_cfg = _load_config_file(args.config)
    algo = _require(_resolve(args, file_cfg, "algo", None), "algo")
    adv = _require(_resolve(args, file_cfg, "adv", None), "adv")
    n_field = _require(_resolve(args, file_cfg, "n", None), "n")
    eps_field = _require(_resolve(args, file_cfg, "eps", None), "eps")
    runs = int(_resolve(args, file_cfg, "runs", 400))
    target = float(_resolve(args, file_cfg, "target", 0.75))
    t_cap = int(_resolve(args, file_cfg, "t_cap", 1 << 20))
    metric = _resolve(args, file_cfg, "metric", None)
    seed = int(_resolve(args, file_cfg, "seed", _default_seed()))
    workers = int(_resolve(args, file_cfg, "workers", arena.default_workers()))
    out = _out_dir(_resolve(args, file_cfg, "out-dir", file_cfg.get("out_dir", "arena-out")))

    ns = [int(v) for v in str(n_field).split(",")]
    epss = [float(v) for v in str(eps_field).split(",")]
    algo_spec = _algorithm_spec(algo) if isinstance(algo, str) else algo
    adv_spec = _adversary_spec(adv) if isinstance(adv, str) else adv

    cells = []
    for n in ns:
        for eps in epss:
            config = arena.GameConfig(
                n=n, horizon=1, algorithm=algo_spec, adversary=adv_spec, metric=metric, seed=seed
            )
            arena.validate_config(config)
            est = arena.estimate_query_complexity(
                config, eps, target=target, runs=runs, t_cap=t_cap, workers=workers
            )
            cells.append(
                {
                    "n": n,
                    "epsilon": eps,
                    "t_hat": est.t_hat,
                    "resolved": est.resolved,
                    "curve": est.curve,
                    "reference_cdf_budget": math.ceil(3 * n * math.log(8 * n) / eps**2),
                    "reference_mean_budget": math.ceil(1 / eps**2),
                }
            )
            print(f"n={n} eps={eps}: t_hat={est.t_hat}{'' if est.resolved else ' (unresolved)'}")

    table = {
        "algorithm": arena._jsonable(algo_spec),
        "adversary": arena._jsonable(adv_spec),
        "target": target,
        "runs": runs,
        "cells": cells,
    }
    path = out / "complexity.json"
    path.write_text(json.dumps(table, indent=2) + "\n")
    print(f"wrote {path}")
    return 0


def cmd_breaker(args) -> int:
    file_cfg = _load_config_file(args.config)
    baseline = _require(_resolve(args, file_cfg, "baseline", None), "baseline")
    n = int(_require(_resolve(args, file_cfg, "n", None), "n"))
    horizon = int(_require(_resolve(args, file_cfg, "horizon", file_cfg.get("T")), "T"))

    report = arena.breaker_report(baseline, n, horizon)
    payload = report.to_dict()
    print(json.dumps(payload, indent=2))
    out_dir = _resolve(args, file_cfg, "out-dir", file_cfg.get("out_dir", None))
    if out_dir is not None:
        path = _out_dir(out_dir) / "breaker.json"
        path.write_text(json.dumps(payload, indent=2) + "\n")
        print(f"wrote {path}")
    return 0 if report.broken else 1


def cmd_replay(args) -> int:
    file_cfg = _load_config_file(args.config)
    path = _require(_resolve(args, file_cfg, "file", None), "file")
    algo = _require(_resolve(args, file_cfg, "algo", None), "algo")
    n = int(_require(_resolve(args, file_cfg, "n", None), "n"))
    samples = load_sample_sequence(path)
    horizon = _resolve(args, file_cfg, "horizon", file_cfg.get("T"))
    horizon = int(horizon) if horizon is not None else len(samples)
    if horizon > len(samples):
        raise ValidationError(f"horizon {horizon} exceeds sequence length {len(samples)}")
    runs = int(_resolve(args, file_cfg, "runs", 1))
    seed = int(_resolve(args, file_cfg, "seed", _default_seed()))
    eps = _resolve(args, file_cfg, "eps", None)
    metric = _resolve(args, file_cfg, "metric", None)
    reveal = bool(_resolve(args, file_cfg, "reveal-samples", file_cfg.get("reveal_samples", False)))
    out = _out_dir(_resolve(args, file_cfg, "out-dir", file_cfg.get("out_dir", "arena-out")))

    config = arena.GameConfig(
        n=n,
        horizon=horizon,
        algorithm=_algorithm_spec(algo) if isinstance(algo, str) else algo,
        adversary=arena.AdversarySpec("sequence", {"samples": samples}),
        metric=metric,
        seed=seed,
    )
    arena.validate_config(config)

    csv_path = out / "replay.csv"
    json_path = out / "replay-summary.json"
    with open(csv_path, "w") as fh:
        fh.write(arena.trajectory_csv_header(reveal) + "\n")

        def sink(run_id, trajectory):
            for row in arena.trajectory_csv_rows(run_id, trajectory, reveal):
                fh.write(row + "\n")

        summary = arena.monte_carlo(config, runs, epsilon=eps, sink=sink)
    arena.write_summary_json(json_path, summary)
    print(f"wrote {csv_path} and {json_path}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": cmd_run,
        "complexity": cmd_complexity,
        "breaker": cmd_breaker,
        "replay": cmd_replay,
    }
    try:
        return handlers[args.command](args)
    except ValidationError as exc:
        print(f"invalid specification: {exc}", file=sys.stderr)
        return 2
    except ProtocolError as exc:
        print(f"protocol violation: {exc}", file=sys.stderr)
        return 3
    except ArenaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
