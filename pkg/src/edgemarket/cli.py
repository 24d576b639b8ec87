"""Command line front end.

Subcommands::

    run            run a registered scenario and write the metrics file
    sweep          sweep one config field across values with fresh runs
    verify         spot-check mechanism properties on random instances
    trace convert  turn a raw whitespace workload dump into the trace CSV
    report         render figures from a metrics file

Exit codes: 0 on success, 1 when a verify suite finds a violation, 2 on
usage or input errors.  The ``EDGEMARKET_CONFIG`` environment variable
supplies a default config path; an explicit ``--config`` wins.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .auction import (
    AuctionState,
    brute_force_welfare,
    clarke_payment,
    determine_winners,
    incentive_payment,
    run_auction_round,
    screen_participants,
    verify_envy_free,
    verify_truthfulness,
)
from .harness import (
    MetricsRow,
    _synthetic_auction,
    emit_csv,
    run_scenario,
    scenario_names,
    simulate_run,
)
from .model import ConfigError, SystemConfig, config_to_dict, validate_config

__all__ = ["main", "entry"]

_PAY_TOL = 1e-9


def _load_config(path: str | None) -> SystemConfig:
    path = path or os.environ.get("EDGEMARKET_CONFIG")
    if not path:
        return SystemConfig()
    with open(path) as fh:
        raw = json.load(fh)
    return validate_config(raw)


def _parse_seeds(text: str) -> list[int]:
    text = text.strip()
    if ".." in text:
        lo_text, hi_text = text.split("..", 1)
        lo, hi = int(lo_text), int(hi_text)
        if hi < lo:
            raise ValueError(f"empty seed range: {text}")
        return list(range(lo, hi + 1))
    seeds = [int(tok) for tok in text.split(",") if tok.strip()]
    if not seeds:
        raise ValueError("no seeds given")
    return seeds


def _parse_value(token: str):
    for cast in (int, float):
        try:
            return cast(token)
        except ValueError:
            continue
    return token


# ---------------------------------------------------------------------------
# subcommands


def _cmd_run(args) -> int:
    cfg = _load_config(args.config)
    seeds = _parse_seeds(args.seeds)
    rows = run_scenario(args.scenario, cfg, seeds)
    if not args.timing:
        # measured wall time is the one non-deterministic column; keep
        # default output byte-reproducible and make timing an opt-in
        for row in rows:
            row.runtime_ms = 0.0
    out = args.out or f"{args.scenario}_metrics.csv"
    emit_csv(rows, out)
    print(f"wrote {len(rows)} rows to {out}")
    if args.figures:
        from .plots import render_report

        for path in render_report(out, args.figures):
            print(f"figure: {path}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    seeds = _parse_seeds(args.seeds)
    values = [_parse_value(tok) for tok in args.values.split(",") if tok.strip()]
    if not values:
        raise ValueError("no sweep values given")
    raw = config_to_dict(cfg)
    if args.param not in raw:
        raise ValueError(f"unknown config field: {args.param}")
    rows = []
    for value in values:
        point = dict(raw)
        point[args.param] = value
        local = validate_config(point)
        for seed in seeds:
            summary = simulate_run(local, seed, num_tasks=args.num_tasks,
                                   epochs=args.epochs)
            rows.append(MetricsRow(
                scenario="sweep", seed=seed, num_tasks=summary.num_tasks,
                num_ues=summary.num_ues,
                social_welfare=summary.social_welfare,
                success_rate=summary.success,
                mean_latency=summary.mean_latency,
                runtime_ms=0.0,
                oversupply=summary.oversupply,
                unmet_demand=summary.unmet_demand,
                method=str(value) if isinstance(value, str) else "vcg",
                param_name=args.param,
                param_value=float(value) if isinstance(value, (int, float))
                else math.nan))
    out = args.out or f"sweep_{args.param}_metrics.csv"
    emit_csv(rows, out)
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def _exact_state(cfg, seed, n_bidders=6):
    bids, asks = _synthetic_auction(cfg, seed, n_bidders)
    return AuctionState(bids=bids, asks=asks, mode="exact")


def _verify_oracle(cfg, seeds):
    failures = []
    for seed in seeds:
        bids, asks = _synthetic_auction(cfg, seed, 5)
        reference = brute_force_welfare(bids, asks)
        exact = determine_winners(bids, asks, "exact").declared_welfare
        if abs(exact - reference) > 1e-9:
            failures.append(
                f"seed {seed}: exact welfare {exact} != optimum {reference}")
        greedy = determine_winners(bids, asks, "greedy").declared_welfare
        if greedy > reference + 1e-9:
            failures.append(
                f"seed {seed}: greedy welfare {greedy} above optimum {reference}")
    return failures


def _verify_truthfulness(cfg, seeds):
    failures = []
    misreports = [float(v) for v in np.linspace(
        cfg.valuation_min, cfg.valuation_max, 11)]
    for seed in seeds:
        state = _exact_state(cfg, seed)
        for bid in state.bids:
            ok, lie = verify_truthfulness(state, bid.ue_id, misreports, cfg)
            if not ok:
                failures.append(
                    f"seed {seed}: bidder {bid.ue_id} gains by declaring {lie}")
    return failures


def _verify_envy(cfg, seeds):
    failures = []
    for seed in seeds:
        state = _exact_state(cfg, seed)
        bids, asks = screen_participants(state.bids, state.asks, {}, cfg)
        result = run_auction_round(
            AuctionState(bids=bids, asks=asks,
                         true_values=state.true_values, mode="exact"), cfg)
        ok, pairs = verify_envy_free(result.outcome, bids)
        if not ok:
            failures.append(f"seed {seed}: envious pairs {pairs}")
    return failures


def _verify_incentive(cfg, seeds):
    failures = []
    lambdas = (0.0, 0.25, 0.5, 0.75)
    for seed in seeds:
        state = _exact_state(cfg, seed)
        outcome = determine_winners(state.bids, state.asks, "exact")
        by_id = {b.ue_id: b for b in state.bids}
        for ue_id in sorted(outcome.allocation):
            base = clarke_payment(state.bids, state.asks, outcome, ue_id,
                                  "exact")
            trail = [incentive_payment(state.bids, state.asks, outcome, ue_id,
                                       lam, "exact") for lam in lambdas]
            if trail[0] != base:
                failures.append(
                    f"seed {seed}: bidder {ue_id} pivot mismatch at factor 0")
            if any(b > a + _PAY_TOL for a, b in zip(trail, trail[1:])):
                failures.append(
                    f"seed {seed}: bidder {ue_id} payment not non-increasing "
                    f"in the incentive factor: {trail}")
            units = outcome.allocation[ue_id][1]
            declared = units * by_id[ue_id].valuation
            if base < -_PAY_TOL or base > declared + _PAY_TOL:
                failures.append(
                    f"seed {seed}: bidder {ue_id} payment {base} outside "
                    f"[0, {declared}]")
    return failures


_SUITES = {
    "oracle": _verify_oracle,
    "truthfulness": _verify_truthfulness,
    "envy": _verify_envy,
    "incentive": _verify_incentive,
}


def _cmd_verify(args) -> int:
    cfg = _load_config(args.config)
    seeds = _parse_seeds(args.seeds)
    failures = _SUITES[args.suite](cfg, seeds)
    if failures:
        for line in failures:
            print(f"FAIL {args.suite}: {line}", file=sys.stderr)
        return 1
    print(f"{args.suite}: ok over {len(seeds)} instances")
    return 0


def _cmd_trace(args) -> int:
    from .harness import convert_raw_trace

    written = convert_raw_trace(args.input, args.output,
                                max_rows=args.max_rows)
    print(f"wrote {written} trace rows to {args.output}")
    return 0


def _cmd_report(args) -> int:
    from .plots import render_report

    for path in render_report(args.metrics, args.out_dir):
        print(f"figure: {path}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgemarket",
        description="Edge compute market simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="config JSON path")
        p.add_argument("--seeds", default="0",
                       help="seed list '0,1,2' or inclusive range '0..4'")

    p_run = sub.add_parser("run", help="run a scenario")
    common(p_run)
    p_run.add_argument("--scenario", required=True, choices=scenario_names())
    p_run.add_argument("--out", help="metrics file path")
    p_run.add_argument("--figures", help="also render figures to this directory")
    p_run.add_argument("--timing", action="store_true",
                       help="record measured wall time per row (output is "
                            "then not byte-reproducible)")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep one config field")
    common(p_sweep)
    p_sweep.add_argument("--param", required=True, help="config field to vary")
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated values")
    p_sweep.add_argument("--num-tasks", type=int, default=None)
    p_sweep.add_argument("--epochs", type=int, default=None)
    p_sweep.add_argument("--out", help="metrics file path")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_verify = sub.add_parser("verify", help="check mechanism properties")
    common(p_verify)
    p_verify.add_argument("--suite", required=True, choices=sorted(_SUITES))
    p_verify.set_defaults(func=_cmd_verify)

    p_trace = sub.add_parser("trace", help="workload trace tools")
    trace_sub = p_trace.add_subparsers(dest="trace_command", required=True)
    p_convert = trace_sub.add_parser(
        "convert", help="raw whitespace dump to trace CSV")
    p_convert.add_argument("input")
    p_convert.add_argument("output")
    p_convert.add_argument("--max-rows", type=int, default=None)
    p_convert.set_defaults(func=_cmd_trace)

    p_report = sub.add_parser("report", help="render figures from metrics")
    p_report.add_argument("metrics")
    p_report.add_argument("--out-dir", default="figures")
    p_report.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
