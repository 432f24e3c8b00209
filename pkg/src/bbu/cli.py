"""Command line entry point: ``bbu audit|plan|simulate|table``.

Exit codes: 0 success, 2 parse or config error, 3 empty group,
4 planner infeasible, 5 I/O error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

from . import __version__
from .bounds import BoundParams, required_sample_size
from .data import (
    SyntheticPopulationConfig,
    cost_table,
    generate_population,
    load_examples,
    load_population,
    mnli_analog_config,
)
from .estimator import BernsteinBoundedUnfairness, GammaWarning
from .exceptions import (
    BBUError,
    EmptyGroupError,
    InvalidParamsError,
    NonPositiveDeltaError,
)
from .measures import MEASURE_ALIASES
from .simulation import emit_interval_data, emit_plot_data, run_coverage_grid, sweep_sample_size

EXIT_OK, EXIT_CONFIG, EXIT_EMPTY_GROUP, EXIT_INFEASIBLE, EXIT_IO = 0, 2, 3, 4, 5

BUILTIN_POPULATIONS = {"synthetic:mnli": mnli_analog_config}


class CLIError(Exception):
    def __init__(self, message, code=EXIT_CONFIG):
        super().__init__(message)
        self.code = code


def _sig(x) -> str:
    return f"{x:.4g}"


def _emit(pairs, as_json, summary=None, stream=None):
    stream = stream or sys.stdout
    if as_json:
        stream.write(json.dumps(dict(pairs), sort_keys=False) + "\n")
        return
    for key, value in pairs:
        if isinstance(value, float):
            value = _sig(value)
        stream.write(f"{key}={value}\n")
    if summary:
        stream.write(f"# {summary}\n")


def _seed(value):
    if value is not None:
        return value
    env = os.environ.get("BBU_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise CLIError(f"BBU_SEED must be an integer, got {env!r}") from None


def _grid(values, cast):
    out = []
    for item in values:
        for part in str(item).split(","):
            part = part.strip()
            if part:
                try:
                    out.append(cast(part))
                except ValueError:
                    raise CLIError(f"invalid grid value {part!r}") from None
    if not out:
        raise CLIError("grid is empty")
    return out


def _population(source: str, size=None, seed=None):
    if source in BUILTIN_POPULATIONS:
        kwargs = {}
        if size is not None:
            kwargs["population_size"] = size
        if seed is not None:
            kwargs["seed"] = seed
        return generate_population(BUILTIN_POPULATIONS[source](**kwargs))
    path = Path(source)
    if not path.exists():
        raise CLIError(f"no such file: {source}", EXIT_IO)
    if path.suffix.lower() == ".json":
        try:
            config = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CLIError(f"{source}: invalid JSON config: {exc}") from None
        if not isinstance(config, dict):
            raise CLIError(f"{source}: config must be a JSON object")
        if size is not None:
            config["population_size"] = size
        if seed is not None:
            config["seed"] = seed
        return generate_population(SyntheticPopulationConfig.from_dict(config))
    return load_population(path)


def cmd_audit(args) -> int:
    path = Path(args.input)
    if not path.exists():
        raise CLIError(f"no such file: {args.input}", EXIT_IO)
    examples = load_examples(path, args.format, max_cost=args.max_cost)
    audit = BernsteinBoundedUnfairness(
        measure=MEASURE_ALIASES[args.measure],
        confidence=args.rho,
        gamma=args.gamma,
        max_cost=args.max_cost,
        variance=args.variance,
        direction=args.direction,
        bound=args.bound,
    )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", GammaWarning)
        audit.fit(examples)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    rep = audit.report()
    summary = (
        f"delta_bar {_sig(rep['delta_bar'])} +/- {_sig(rep['half_width'])} "
        f"({rep['rho']:.0%} {rep['family']}) -> [{_sig(rep['lower'])}, {_sig(rep['upper'])}]: {rep['verdict']}"
    )
    _emit(rep.items(), args.json, summary)
    return EXIT_OK


def _plan_params(args) -> BoundParams:
    if args.variance == "worst-case":
        return BoundParams.worst_case(args.max_cost, args.gamma, args.rho)
    try:
        value = float(args.variance)
    except ValueError:
        raise CLIError(f"--variance must be worst-case or a number, got {args.variance!r}") from None
    return BoundParams(args.max_cost, args.gamma, args.rho, value)


def cmd_plan(args) -> int:
    params = _plan_params(args)
    try:
        n = required_sample_size(args.delta, params)
    except NonPositiveDeltaError:
        raise CLIError("no finite sample size certifies bias (delta must be > 0)", EXIT_INFEASIBLE) from None
    pairs = [("delta_bar", args.delta), ("rho", args.rho), ("gamma", args.gamma),
             ("max_cost", args.max_cost), ("variance", params.variance), ("required_n", n)]
    summary = f"at least {n} annotated examples certify bias {_sig(args.delta)} at {args.rho:.0%}"
    if args.reference is not None:
        if args.reference < 1:
            raise CLIError("--reference must be a positive integer")
        ratio = n / args.reference
        pairs += [("reference", args.reference), ("ratio", ratio)]
        summary += f"; {ratio:.1f}x the reference size {args.reference}"
    _emit(pairs, args.json, summary)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.trials < 1:
        raise CLIError("--trials must be at least 1")
    seed = _seed(args.seed)
    n_grid = _grid(args.n_grid, int)
    gamma_grid = _grid(args.gamma_grid, float)
    population = _population(args.population, args.population_size, args.population_seed)
    report = run_coverage_grid(
        population, n_grid, gamma_grid, groups=args.groups, rho=args.rho, trials=args.trials,
        seed=seed, variance=args.variance, sampling=args.sampling, max_cost=args.max_cost,
        n_jobs=args.n_jobs,
    )
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        files = [emit_plot_data(report, out / "coverage.csv"),
                 emit_interval_data(report, out / "half_width.csv")]
        if args.delta_grid:
            curve = sweep_sample_size(_grid(args.delta_grid, float), args.rho, args.max_cost,
                                      max(gamma_grid), args.variance)
            files.append(emit_plot_data(curve, out / "sample_size.csv"))
    except OSError as exc:
        raise CLIError(f"cannot write output: {exc}", EXIT_IO) from None
    pairs = [("cells", len(report)), ("trials_per_cell", report.cells[0].trials),
             ("min_coverage", report.min_coverage), ("seed", seed)]
    pairs += [(f"file_{f.stem}", str(f)) for f in files]
    _emit(pairs, args.json, f"minimum observed coverage {report.min_coverage:.3f} over {len(report)} cells")
    return EXIT_OK


def cmd_table(args) -> int:
    population = _population(args.input, args.population_size, args.population_seed)
    if len(population.group_names) < 2:
        raise EmptyGroupError("cost table needs at least two groups")
    rows = cost_table(population)
    if args.json:
        _emit([("rows", [r.__dict__ for r in rows])], True)
        return EXIT_OK
    width = max(len(r.group) for r in rows)
    for r in rows:
        print(f"group={r.group} in={r.in_group_mean_cost:.3f} out={r.out_group_mean_cost:.3f} delta={r.delta:.3f}")
    print(f"# {'group':<{width}}  in-group  out-group   delta")
    for r in rows:
        print(f"# {r.group:<{width}}  {r.in_group_mean_cost:8.3f}  {r.out_group_mean_cost:9.3f}  {r.delta:6.3f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bbu", description="Bernstein-bounded disparity audits.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="emit one JSON object at full precision")

    p = sub.add_parser("audit", help="estimate disparity and its confidence interval")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("csv", "jsonl"))
    p.add_argument("--measure", choices=sorted(MEASURE_ALIASES), default="custom")
    p.add_argument("--rho", type=float, default=0.95)
    p.add_argument("--gamma", type=float, help="assumed lower bound on group frequency")
    p.add_argument("--max-cost", type=float, default=1.0)
    p.add_argument("--variance", choices=("empirical", "worst-case"), default="empirical")
    p.add_argument("--direction", choices=("cost_is_failure", "cost_is_success"), default="cost_is_failure")
    p.add_argument("--bound", choices=("bernstein", "hoeffding"), default="bernstein")
    common(p)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("plan", help="annotation budget needed to certify a disparity")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--rho", type=float, default=0.95)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--max-cost", type=float, default=1.0)
    p.add_argument("--variance", default="worst-case", help="worst-case or a numeric sigma^2")
    p.add_argument("--reference", type=int, help="existing dataset size to compare against")
    common(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="Monte Carlo coverage of the interval")
    p.add_argument("--population", default="synthetic:mnli",
                   help="population file, JSON config, or synthetic:mnli")
    p.add_argument("--population-size", type=int)
    p.add_argument("--population-seed", type=int)
    p.add_argument("--n-grid", nargs="+", default=["100,250,500,1000"])
    p.add_argument("--gamma-grid", nargs="+", default=["0.1,0.3,0.5"])
    p.add_argument("--delta-grid", nargs="+", help="also write the sample-size curve for these disparities")
    p.add_argument("--groups", nargs="+", help="groups to protect in turn (default: all)")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, help="defaults to $BBU_SEED, then 0")
    p.add_argument("--rho", type=float, default=0.95)
    p.add_argument("--max-cost", type=float, default=1.0)
    p.add_argument("--variance", choices=("empirical", "worst-case"), default="worst-case")
    p.add_argument("--sampling", choices=("stratified", "iid"), default="stratified")
    p.add_argument("--n-jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("table", help="per-group in/out mean cost")
    p.add_argument("--input", required=True, help="population file, JSON config, or synthetic:mnli")
    p.add_argument("--population-size", type=int)
    p.add_argument("--population-seed", type=int)
    common(p)
    p.set_defaults(func=cmd_table)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except EmptyGroupError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY_GROUP
    except NonPositiveDeltaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (BBUError, InvalidParamsError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
