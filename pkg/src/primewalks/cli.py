"""Configuration-driven command line: sample laws, run walks and
experiments, check the transfer conditions, and emit reproducible
reports.

Commands
--------
sample            draw integers from a step law, one per line
walk              run one trajectory; print the final state as JSON
experiment        run an experiment config; write report.json/plots.csv
check-conditions  evaluate the perturbation-negligibility conditions

Every command is deterministic given (argv, config file, seed). Exit
codes: 0 pass or advisory, 1 assertion failure, 2 usage or config error.
PRIMEWALKS_SEED and PRIMEWALKS_THREADS override seed/threads when the
flags are absent (flags win over the environment, which wins over the
config file).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .engine import replica_rng
from .experiments import ExperimentConfig, run_experiment
from .laws import (
    ConfigError,
    IdenticalCoupling,
    JointStepLaw,
    check_negligibility,
    coupling_from_spec,
    frequent_boundary,
    law_from_spec,
)
from .reporting import (
    build_manifest,
    canonical_json_bytes,
    conditions_dict,
    render_conditions_text,
    render_report_text,
    write_json,
    write_plot_csv,
)
from .walks import run_trajectory, write_trace_csv

__all__ = ["main"]

_SEED_ENV = "PRIMEWALKS_SEED"
_THREADS_ENV = "PRIMEWALKS_THREADS"


def _env_int(name: str) -> int | None:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"environment variable {name} must be an integer, got {raw!r}")


def _resolve_seed(flag: int | None, fallback: int = 0) -> int:
    if flag is not None:
        return flag
    env = _env_int(_SEED_ENV)
    return env if env is not None else fallback


def _resolve_threads(flag: int | None) -> int:
    if flag is None:
        flag = _env_int(_THREADS_ENV)
    if flag is None:
        return 1
    if flag < 1:
        raise ConfigError("threads must be >= 1")
    return flag


def _load_document(path: str) -> tuple[dict, bytes]:
    """Read a config document (JSON, or TOML by extension)."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    if path.endswith(".toml"):
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib

        try:
            doc = tomllib.loads(raw.decode())
        except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
            raise ConfigError(f"invalid TOML in {path}: {exc}")
    else:
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}")
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {path} must hold a mapping")
    return doc, raw


def _coupling_from_doc(doc: dict) -> JointStepLaw:
    if "coupling" in doc:
        return coupling_from_spec(doc)
    return IdenticalCoupling(law_from_spec(doc))


def _law_spec_from_args(args) -> dict:
    spec: dict = {"kind": args.law}
    for key in ("alpha", "beta", "rate", "value", "prime", "tail_exponent"):
        v = getattr(args, key, None)
        if v is not None:
            spec[key] = v
    return spec


# --- commands ------------------------------------------------------------------


def _cmd_sample(args) -> int:
    if args.config:
        doc, _ = _load_document(args.config)
        law = law_from_spec(doc)
    elif args.law:
        law = law_from_spec(_law_spec_from_args(args))
    else:
        raise ConfigError("sample needs --law KIND or --config FILE")
    if args.count < 1:
        raise ConfigError("count must be >= 1")
    seed = _resolve_seed(args.seed)
    rng = replica_rng(seed, 0)
    values = [law.sample(rng) for _ in range(args.count)]
    if args.format == "json":
        print(json.dumps(values))
    elif args.format == "csv":
        print("value")
        for v in values:
            print(v)
    else:
        for v in values:
            print(v)
    return 0


def _cmd_walk(args) -> int:
    doc, _ = _load_document(args.config)
    joint = _coupling_from_doc(doc)
    if args.n < 1:
        raise ConfigError("n must be >= 1")
    seed = _resolve_seed(args.seed)
    rng = replica_rng(seed, 0)
    state, _ = run_trajectory(joint, args.n, rng, trace=args.trace is not None)
    if args.trace is not None:
        write_trace_csv(state, args.trace)
    doc_out = {
        "n": state.n,
        "log_product": state.log_product,
        "log_lcm": state.log_lcm,
        "max_counts": {str(p): int(e) for p, e in sorted(state.perturbed_max.items())},
        "seed": seed,
    }
    sys.stdout.write(canonical_json_bytes(doc_out).decode())
    return 0


def _cmd_experiment(args) -> int:
    doc, raw = _load_document(args.config)
    if args.seed is not None:
        doc["seed"] = args.seed
    else:
        env = _env_int(_SEED_ENV)
        if env is not None:
            doc["seed"] = env
    config = ExperimentConfig.from_dict(doc)
    threads = _resolve_threads(args.threads)
    report = run_experiment(config, threads=threads)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "report.json"
    plot_path = out_dir / "plots.csv"
    manifest_path = out_dir / "manifest.json"
    write_json(report_path, report.to_json_dict())
    write_plot_csv(report, plot_path)
    manifest = build_manifest(
        config_path=args.config,
        config_bytes=raw,
        report=report,
        outputs={"report_json": str(report_path), "plots_csv": str(plot_path)},
        seed=config.seed,
        threads=threads,
    )
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    if args.format == "json":
        sys.stdout.write(canonical_json_bytes(report.to_json_dict()).decode())
    else:
        sys.stdout.write(render_report_text(report))
        print(f"outputs: {report_path} {plot_path} {manifest_path}")
    return 0 if report.status in ("pass", "advisory") else 1


def _cmd_check_conditions(args) -> int:
    doc, _ = _load_document(args.config)
    joint = _coupling_from_doc(doc)
    try:
        n_grid = tuple(int(part) for part in args.n_grid.split(","))
    except ValueError:
        raise ConfigError(f"--n-grid must be comma-separated integers, got {args.n_grid!r}")
    if not n_grid or any(n < 1 for n in n_grid):
        raise ConfigError("--n-grid entries must be positive")
    if args.prime_limit < 2:
        raise ConfigError("--prime-limit must be >= 2")
    report = check_negligibility(joint, n_grid, prime_limit=args.prime_limit)
    factor = joint.factor_marginal()
    boundaries = {n: frequent_boundary(factor, n, args.prime_limit) for n in sorted(set(n_grid))}
    if args.format == "json":
        sys.stdout.write(canonical_json_bytes(conditions_dict(report, boundaries)).decode())
    else:
        sys.stdout.write(render_conditions_text(report, boundaries))
    return 0


# --- parser ---------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="primewalks",
        description="simulate perturbed multiplicative random walks and "
        "verify their limit theorems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw integers from a step law")
    p.add_argument("--law", help="law kind (zeta, geometric, truncated_poisson, "
                                 "pareto_exponent, degenerate, ...)")
    p.add_argument("--config", help="law spec file (JSON/TOML) instead of flags")
    p.add_argument("--alpha", type=float, help="zeta exponent (> 1) or pareto tail index")
    p.add_argument("--beta", type=float, help="geometric parameter in (0, 1)")
    p.add_argument("--rate", type=float, help="truncated poisson rate (> 0)")
    p.add_argument("--value", type=int, help="degenerate law value (>= 1)")
    p.add_argument("--prime", type=int, help="prime carrying a pareto exponent")
    p.add_argument("--tail-exponent", dest="tail_exponent", type=float,
                   help="prime power law exponent (> 1)")
    p.add_argument("--count", type=int, default=10, help="number of draws (default 10)")
    p.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.set_defaults(fn=_cmd_sample)

    p = sub.add_parser("walk", help="run one trajectory and print the final state")
    p.add_argument("--config", required=True,
                   help="joint law spec file (bare law specs couple identically)")
    p.add_argument("--n", type=int, required=True, help="number of steps (>= 1)")
    p.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    p.add_argument("--trace", default=None, metavar="CSV",
                   help="write the per-step trace to this CSV path")
    p.set_defaults(fn=_cmd_walk)

    p = sub.add_parser("experiment", help="run an experiment config")
    p.add_argument("--config", required=True, help="experiment config file (JSON/TOML)")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (cannot change the results; default 1)")
    p.add_argument("--out-dir", default=".", help="directory for report.json/plots.csv/manifest.json")
    p.add_argument("--format", choices=("text", "json"), default="text",
                   help="stdout summary format")
    p.set_defaults(fn=_cmd_experiment)

    p = sub.add_parser("check-conditions", help="evaluate the transfer conditions")
    p.add_argument("--config", required=True, help="joint law spec file")
    p.add_argument("--n-grid", default="100,1000,10000,100000,1000000",
                   help="comma-separated walk lengths (default decade grid)")
    p.add_argument("--prime-limit", type=int, default=100_000,
                   help="truncate prime sums here (default 100000)")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(fn=_cmd_check_conditions)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
