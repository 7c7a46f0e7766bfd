"""Command-line interface.

Subcommands:
    gen        build one seeded instance and write it as JSON
    auction    run the greedy mechanism with payments on an instance file
    sweep      run an experiment sweep and write the rows CSV
    summarize  aggregate a rows CSV over seeds
    verify     run the truthfulness / IR / dual / sandwich suites
    report     summarize a rows CSV and render figures next to it
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import storage
from .auction import approx_bound, critical_payments, dual_feasible, greedy_allocate
from .experiments import (
    default_experiment_config,
    experiment_config_from_dict,
    experiment_config_to_dict,
    generate_instance,
    run_sweep,
    summarize_rows,
    verify_all,
)


def _load_experiment_config(path: str | None):
    if path is None:
        return default_experiment_config()
    return experiment_config_from_dict(storage.load_json(path))


def cmd_gen(args: argparse.Namespace) -> int:
    config = _load_experiment_config(args.config)
    instance = generate_instance(config, args.seed)
    storage.dump_json(storage.instance_to_dict(instance), args.out)
    print(f"wrote instance with {instance.n_users} users to {args.out}")
    return 0


def cmd_auction(args: argparse.Namespace) -> int:
    instance = storage.instance_from_dict(storage.load_json(args.instance))
    allocation = greedy_allocate(instance)
    payments = critical_payments(instance, allocation)
    try:
        alpha = approx_bound(instance, allocation)
    except ValueError:
        alpha = None
    certificate = dual_feasible(instance, allocation, tol=1e-9)
    storage.dump_json(
        storage.result_to_dict(instance, allocation, payments, alpha, certificate.feasible),
        args.out,
    )
    print(
        f"welfare={allocation.welfare:.6g} winners={len(allocation.order)} "
        f"payments={payments.total_payment:.6g} dual_feasible={certificate.feasible}"
    )
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _load_experiment_config(args.config)
    rows = run_sweep(config)
    storage.write_csv_rows(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_summarize(args: argparse.Namespace) -> int:
    rows = storage.read_csv_rows(args.infile)
    storage.write_csv_rows(summarize_rows(rows), args.out)
    print(f"wrote summary to {args.out}")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    config = _load_experiment_config(args.config)
    reports = verify_all(config, args.trials)
    failed = False
    for report in reports:
        status = "PASS" if report.ok else "FAIL"
        print(f"[{status}] {report.name}: {report.detail} = {report.worst:.3e} "
              f"({report.trials} trials)")
        for line in report.failures[:10]:
            print(f"         {line}")
        failed |= not report.ok
    return 1 if failed else 0


def cmd_report(args: argparse.Namespace) -> int:
    from .plots import render_figures

    rows = storage.read_csv_rows(args.infile)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    summary_path = outdir / "summary.csv"
    storage.write_csv_rows(summarize_rows(rows), summary_path)
    figures = render_figures(rows, outdir)
    print(f"wrote {summary_path}")
    for path in figures:
        print(f"wrote {path}")
    return 0


def cmd_init_config(args: argparse.Namespace) -> int:
    config = default_experiment_config(seed=args.seed)
    storage.dump_json(experiment_config_to_dict(config), args.out)
    print(f"wrote default config to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fedauction",
        description="Auction-based incentive simulator for federated learning",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a seeded instance")
    p.add_argument("--config", help="experiment config JSON (defaults used if omitted)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("auction", help="run the greedy auction on an instance file")
    p.add_argument("--instance", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_auction)

    p = sub.add_parser("sweep", help="run an experiment sweep to CSV")
    p.add_argument("--config", help="experiment config JSON (defaults used if omitted)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("summarize", help="aggregate sweep rows over seeds")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("verify", help="run the property-check suites")
    p.add_argument("--config", help="experiment config JSON (defaults used if omitted)")
    p.add_argument("--trials", type=int, default=20)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="summarize a rows CSV and render figures")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("init-config", help="write the default experiment config")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_init_config)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
