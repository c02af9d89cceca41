"""Command-line harness.

Subcommands cover the pipeline stages (gen-universe, build-pool, evolve,
refine, evaluate) plus the full `experiment` protocol. Every flag can also
be supplied through a plain-text key=value config file (`--config`); file
values take precedence over flags, so a saved config fully pins a run.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .evolution import GAConfig, evolve
from .experiment import (
    ExperimentConfig,
    coverage,
    derived_rng,
    emit_reports,
    run_experiment,
)
from .gene_library import build_libraries, generate_pool, save_pool
from .local_search import GDConfig, NeighborOperator, SAConfig, refine_population
from .matching import AntigenSample
from .population import load_population, sample_initial, save_population
from .scheduling import (
    default_base_problem,
    generate_universe,
    load_base_problem,
    load_universe,
    save_universe,
)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config_file(args)
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="immunesched",
        description="Evolve and refine partial job-shop schedules against a "
        "universe of disturbance schedules.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-universe", help="generate a ten-antigen universe file")
    p.add_argument("--base-problem", help="base-problem file (default: built-in instance)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="universe file to write")
    _add_config_flag(p)
    p.set_defaults(func=_cmd_gen_universe)

    p = sub.add_parser("build-pool", help="build a typed antibody pool from a universe")
    _add_universe_source_flags(p)
    p.add_argument("--type", default="a", help="population type: a, b or c")
    p.add_argument("--out", required=True, help="pool dump file to write")
    _add_config_flag(p)
    p.set_defaults(func=_cmd_build_pool)

    p = sub.add_parser("evolve", help="run the evolutionary phase on a fresh population")
    p.add_argument("--universe", required=True, help="universe file")
    p.add_argument("--type", default="a")
    p.add_argument("--ag-sample", type=int, choices=(1, 4, 8), default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--generations", type=int, default=GAConfig.generations)
    p.add_argument("--crossover-rate", type=float, default=GAConfig.crossover_rate)
    p.add_argument("--mutation-rate", type=float, default=GAConfig.mutation_rate)
    p.add_argument("--out", required=True, help="population file to write")
    p.add_argument("--stats", help="optional per-generation statistics CSV")
    _add_config_flag(p)
    p.set_defaults(func=_cmd_evolve)

    p = sub.add_parser("refine", help="refine an evolved population (phase two)")
    p.add_argument("--universe", required=True)
    p.add_argument("--population", required=True, help="population file to refine")
    p.add_argument("--ag-sample", type=int, choices=(1, 4, 8), default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--phase2", choices=("sa", "gd"), required=True)
    p.add_argument("--operator", choices=("change", "swap"), default="change")
    p.add_argument("--out", required=True)
    _add_config_flag(p)
    p.set_defaults(func=_cmd_refine)

    p = sub.add_parser("evaluate", help="coverage of all ten antigens by a population")
    p.add_argument("--universe", required=True)
    p.add_argument("--population", required=True)
    p.add_argument("--out", help="optional CSV of unmatched counts per threshold")
    _add_config_flag(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("experiment", help="full replicate protocol with CSV reports")
    _add_universe_source_flags(p)
    p.add_argument("--type", default="a")
    p.add_argument(
        "--ag-sample",
        type=int,
        choices=(1, 4, 8),
        action="append",
        help="antigen sample size; repeatable (default: 1 4 8)",
    )
    p.add_argument("--generations", type=int, default=GAConfig.generations)
    p.add_argument("--crossover-rate", type=float, default=GAConfig.crossover_rate)
    p.add_argument("--mutation-rate", type=float, default=GAConfig.mutation_rate)
    p.add_argument("--phase2", choices=("none", "sa", "gd"), default="none")
    p.add_argument("--operator", choices=("change", "swap"), default="change")
    p.add_argument("--replicates", type=int, default=10)
    p.add_argument("--out", required=True, help="output directory for the reports")
    _add_config_flag(p)
    p.set_defaults(func=_cmd_experiment)

    return parser


def _add_universe_source_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--universe", help="universe file (default: generate from base problem)")
    p.add_argument("--base-problem", help="base-problem file used when generating")
    p.add_argument("--seed", type=int, default=0)


def _add_config_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file; values override flags")


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Read a plain-text key=value config file ('#' comments allowed)."""
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}: line {lineno}: expected key=value")
        key, _, value = line.partition("=")
        pairs[key.strip()] = value.strip()
    return pairs


_INT_KEYS = {"seed", "generations", "replicates"}
_FLOAT_KEYS = {"crossover_rate", "mutation_rate"}


def _apply_config_file(args: argparse.Namespace) -> None:
    path = getattr(args, "config", None)
    if not path:
        return
    for key, raw in parse_config_file(path).items():
        attr = key.replace("-", "_")
        if attr in ("config", "func", "command") or not hasattr(args, attr):
            raise ValueError(f"{path}: unknown config key {key!r} for '{args.command}'")
        setattr(args, attr, _coerce_config_value(attr, raw, args))


def _coerce_config_value(attr: str, raw: str, args: argparse.Namespace):
    if attr == "ag_sample":
        values = [int(tok) for tok in raw.replace(",", " ").split()]
        if args.command == "experiment":
            return values
        if len(values) != 1:
            raise ValueError(f"ag_sample must be a single value for '{args.command}'")
        return values[0]
    if attr in _INT_KEYS:
        return int(raw)
    if attr in _FLOAT_KEYS:
        return float(raw)
    return raw


def _resolve_universe_args(args: argparse.Namespace):
    if args.universe:
        return load_universe(args.universe)
    base = load_base_problem(args.base_problem) if args.base_problem else default_base_problem()
    return generate_universe(base, derived_rng(args.seed, "universe"))


def _cmd_gen_universe(args: argparse.Namespace) -> int:
    base = load_base_problem(args.base_problem) if args.base_problem else default_base_problem()
    universe = generate_universe(base, derived_rng(args.seed, "universe"))
    save_universe(universe, args.out)
    print(f"wrote {args.out}: {len(universe.antigens)} antigens")
    return 0


def _cmd_build_pool(args: argparse.Namespace) -> int:
    universe = _resolve_universe_args(args)
    pool = generate_pool(build_libraries(universe), args.type.upper())
    save_pool(pool, args.out)
    print(f"wrote {args.out}: type {pool.population_type} pool with {len(pool)} antibodies")
    return 0


def _cmd_evolve(args: argparse.Namespace) -> int:
    universe = load_universe(args.universe)
    pool = generate_pool(build_libraries(universe), args.type.upper())
    cfg = GAConfig(
        generations=args.generations,
        crossover_rate=args.crossover_rate,
        mutation_rate=args.mutation_rate,
    )
    sample = AntigenSample.draw(args.ag_sample, derived_rng(args.seed, "sample", args.ag_sample))
    pop = sample_initial(pool, cfg.population_size, derived_rng(args.seed, "init", args.ag_sample))
    pop.evaluate(universe, sample)
    started_best = pop.best_fitness
    ga_rng = derived_rng(args.seed, "ga", args.ag_sample)
    if args.stats:
        with open(args.stats, "w") as stream:
            final = evolve(pop, universe, sample, cfg, ga_rng, stats_stream=stream)
    else:
        final = evolve(pop, universe, sample, cfg, ga_rng)
    save_population(final, args.out)
    print(
        f"wrote {args.out}: best fitness {final.best_fitness} "
        f"(started {started_best}), total {final.total_fitness}"
    )
    return 0


def _cmd_refine(args: argparse.Namespace) -> int:
    universe = load_universe(args.universe)
    pop = load_population(args.population)
    sample = AntigenSample.draw(args.ag_sample, derived_rng(args.seed, "sample", args.ag_sample))
    pop.evaluate(universe, sample)
    before = pop.total_fitness
    operator = NeighborOperator(args.operator)
    cfg = SAConfig(operator=operator) if args.phase2 == "sa" else GDConfig(operator=operator)
    refined = refine_population(
        pop, universe, sample, cfg, derived_rng(args.seed, "refine", args.ag_sample)
    )
    save_population(refined, args.out)
    after = refined.total_fitness
    pct = 100.0 * (after - before) / before if before else float("nan")
    print(f"wrote {args.out}: total fitness {before} -> {after} ({pct:+.1f}%)")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    universe = load_universe(args.universe)
    pop = load_population(args.population)
    rows = []
    for threshold in (2, 3, 4, 5):
        unmatched = coverage(pop, universe, threshold)
        rows.append((threshold, unmatched))
        print(f"threshold {threshold}: {unmatched} of {len(universe.antigens)} antigens unmatched")
    if args.out:
        lines = ["threshold,unmatched"] + [f"{t},{u}" for t, u in rows]
        Path(args.out).write_text("\n".join(lines) + "\n")
        print(f"wrote {args.out}")
    return 0


def _cmd_experiment(args: argparse.Namespace) -> int:
    operator = NeighborOperator(args.operator)
    cfg = ExperimentConfig(
        universe_path=args.universe,
        base_problem_path=args.base_problem,
        population_type=args.type,
        ag_sample_sizes=tuple(args.ag_sample) if args.ag_sample else (1, 4, 8),
        replicates=args.replicates,
        phase2=args.phase2,
        ga=GAConfig(
            generations=args.generations,
            crossover_rate=args.crossover_rate,
            mutation_rate=args.mutation_rate,
        ),
        sa=SAConfig(operator=operator),
        gd=GDConfig(operator=operator),
        master_seed=args.seed,
    )
    table, report = run_experiment(cfg)
    emit_reports(table, report, cfg, args.out)
    print(f"wrote reports to {args.out}")
    header = "threshold " + " ".join(f"ag={ag:>2}" for ag in table.ag_sizes)
    print(header)
    for t in table.thresholds:
        cells = " ".join(f"{table.cell(t, ag):>5.1f}" for ag in table.ag_sizes)
        print(f"{t:>9} {cells}")
    for ag, pct in sorted(report.improvements.items()):
        print(f"fitness improvement (ag={ag}): {pct:.1f}%")
    return 0


if __name__ == "__main__":
    sys.exit(main())
