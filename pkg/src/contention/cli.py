"""Command-line front end.

Subcommands mirror the library: exact schedules, feasibility verdicts,
closed-form bounds, persistent/deadline analysis, recurrence enclosures,
and Monte Carlo simulation.  Reports are JSON by default; `schedule` and
`simulate` can also emit CSV.  Rational parameters are passed as
"num/den" text so exactness survives the command line.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from . import analysis, engine, protocols
from .schedule import build_schedule, parse_rational


def _add_cp(parser, default_c="11/10", default_p=0.75):
    parser.add_argument("--c", default=default_c, help="growth factor as a rational, e.g. 11/10")
    parser.add_argument("--p", type=float, default=default_p, help="scheduled-slot transmission probability")


def _add_output(parser):
    parser.add_argument("--output-format", choices=("json", "csv"), default="json")
    parser.add_argument("--output-path", default=None, help="write the report here instead of stdout")


def _emit(args, text: str) -> None:
    if args.output_path:
        with open(args.output_path, "w") as fh:
            fh.write(text)
    else:
        print(text)


def _json(payload) -> str:
    return json.dumps(payload, indent=2)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().rstrip("\n")


def cmd_schedule(args) -> int:
    sched = build_schedule(parse_rational(args.c), args.k)
    if args.output_format == "csv":
        rows = [(k, sched.x[k], sched.s[k]) for k in range(len(sched.s))]
        _emit(args, _csv(rows, ("k", "x", "s")))
    else:
        _emit(args, _json(sched.to_json()))
    return 0


def cmd_feasibility(args) -> int:
    report = analysis.feasibility(parse_rational(args.c), args.p)
    _emit(args, _json(report.to_json()))
    return 0


def cmd_bounds(args) -> int:
    report = analysis.bound_report(parse_rational(args.c), args.p, k1_prime=args.k1, k_max=args.kmax)
    _emit(args, _json(report.to_json()))
    return 0


def cmd_analyze(args) -> int:
    c = parse_rational(args.c)
    if args.persistent:
        dist = analysis.persistent_distribution(c, args.p, args.zmax)
        if args.output_format == "csv":
            rows = [
                (z, dist.support[z], float(dist.pmf[z]), float(dist.partial_expectations[z]))
                for z in range(len(dist.support))
            ]
            _emit(args, _csv(rows, ("z", "support", "pmf", "partial_expectation")))
        else:
            _emit(args, _json(dist.to_json()))
        return 0
    table = analysis.solve_expectations(c, args.p, semantics=args.semantics, truncation_K=args.K)
    _emit(args, _json(table.to_json()))
    return 0


def _load_config(path: str) -> engine.GameConfig:
    with open(path) as fh:
        data = json.load(fh)
    profile = protocols.profile_from_json(data)
    return engine.GameConfig(
        n=int(data.get("n", len(profile))),
        profile=tuple(profile),
        seed=int(data["seed"]),
        slot_cap=int(data.get("slot_cap", 10**6)),
    )


def cmd_simulate(args) -> int:
    config = _load_config(args.config)
    if args.seed is not None:
        config = engine.GameConfig(
            n=config.n, profile=config.profile, seed=args.seed, slot_cap=config.slot_cap
        )
    outcomes = engine.run_trials(config, args.trials, n_jobs=args.jobs)
    stats = engine.summarize(outcomes, args.player, config.slot_cap)
    if args.samples_path:
        with open(args.samples_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("trial_index", "player", "latency", "censored"))
            writer.writerows(engine.outcomes_to_csv_rows(outcomes))
    if args.output_format == "csv":
        _emit(args, _csv(list(engine.outcomes_to_csv_rows(outcomes)),
                         ("trial_index", "player", "latency", "censored")))
    else:
        _emit(args, _json(stats.to_json()))
    return 0


def cmd_compare_deadline(args) -> int:
    report = analysis.deadline_comparison(
        parse_rational(args.c), args.p, args.t0, z_grid=tuple(args.zmax_grid)
    )
    _emit(args, _json(report.to_json()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contention",
        description="Exact schedules, bounds, and Monte Carlo for the 3-player contention game.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("schedule", help="print the exact non-trivial slot schedule")
    sp.add_argument("--c", default="11/10")
    sp.add_argument("--k", type=int, default=8, help="schedule horizon index")
    _add_output(sp)
    sp.set_defaults(handler=cmd_schedule)

    fp = sub.add_parser("feasibility", help="exact parameter-region verdict")
    _add_cp(fp)
    _add_output(fp)
    fp.set_defaults(handler=cmd_feasibility)

    bp = sub.add_parser("bounds", help="closed-form latency upper bounds")
    _add_cp(bp)
    bp.add_argument("--k1", type=int, default=None, help="truncation index (defaults to the minimum feasible)")
    bp.add_argument("--kmax", type=int, default=10, help="table horizon for the lone-player bound")
    _add_output(bp)
    bp.set_defaults(handler=cmd_bounds)

    ap = sub.add_parser("analyze", help="exact distributions and recurrence enclosures")
    _add_cp(ap)
    ap.add_argument("--persistent", action="store_true", help="persistent-deviator latency law")
    ap.add_argument("--zmax", type=int, default=200, help="support points for --persistent")
    ap.add_argument("--semantics", choices=analysis.SEMANTICS, default="literal")
    ap.add_argument("--K", type=int, default=60, help="truncation for the expectation enclosures")
    _add_output(ap)
    ap.set_defaults(handler=cmd_analyze)

    mp = sub.add_parser("simulate", help="Monte Carlo latency estimation")
    mp.add_argument("--config", required=True, help="game config JSON (players, seed, slot_cap)")
    mp.add_argument("--trials", type=int, default=100_000)
    mp.add_argument("--player", type=int, default=0, help="player whose latency is summarized")
    mp.add_argument("--jobs", type=int, default=1)
    mp.add_argument("--seed", type=int, default=None, help="override the config seed")
    mp.add_argument("--samples-path", default=None, help="also write per-trial CSV samples here")
    _add_output(mp)
    mp.set_defaults(handler=cmd_simulate)

    dp = sub.add_parser("compare-deadline", help="lower-bound evidence against a deadline deviator")
    _add_cp(dp)
    dp.add_argument("--t0", type=int, required=True)
    dp.add_argument("--zmax-grid", type=int, nargs="+", default=[25, 50, 100, 200, 400])
    _add_output(dp)
    dp.set_defaults(handler=cmd_compare_deadline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (analysis.AnalysisError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
