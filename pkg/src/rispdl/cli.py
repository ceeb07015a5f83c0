"""Command line entry point.

    rispdl mean-snr CONFIG
    rispdl simulate CONFIG --trials T --seed S
    rispdl sweep CONFIG [--out DIR] [--plot-data]
    rispdl preset fig3|fig4 [--out DIR]
    rispdl verify CONFIG|fig3|fig4

Exit codes: 0 success, 1 invalid input, 2 verification failure,
3 numerical tolerance failure.
"""
import argparse
import json
import logging
import os
import sys
from dataclasses import replace

from . import analytic, sweep
from .channel import linear_to_db
from .errors import (ConfigError, ConvergenceError, DomainError,
                     QuadratureError)
from .montecarlo import estimate_mean_snr

log = logging.getLogger("rispdl")

EXIT_OK, EXIT_INVALID, EXIT_VERIFY, EXIT_NUMERIC = 0, 1, 2, 3


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    log.info("wrote %s", path)


def _emit_rows(rows, args, stem):
    csv_text = sweep.rows_to_csv(rows, timestamp=not args.no_timestamp)
    if args.out is None:
        sys.stdout.write(csv_text)
        return
    _write(os.path.join(args.out, f"{stem}.csv"), csv_text)
    if getattr(args, "plot_data", False):
        for (series, output), pts in sweep.plot_series(rows).items():
            name = f"{stem}_{series or 'series'}_{output}".replace("=", "").replace(",", "_")
            body = "".join(f"{x!r} {y!r}\n" for x, y in pts)
            _write(os.path.join(args.out, "plot", name + ".dat"), "# x y\n" + body)


def _specs_for(target, trials=None, seed=None):
    if target in sweep.PRESETS:
        kw = {}
        if trials is not None:
            kw["trials"] = trials
        if seed is not None:
            kw["seed"] = seed
        return sweep.PRESETS[target](**kw)
    _, specs = sweep.load_config(target)
    if not specs:
        raise ConfigError(f"{target}: no [sweep] table")
    if trials is not None or seed is not None:
        specs = [replace(s, trials=trials if trials is not None else s.trials,
                         seed=seed if seed is not None else s.seed) for s in specs]
    return specs


def cmd_mean_snr(args):
    base, _ = sweep.load_config(args.config)
    br = analytic.mean_snr(base, coupling=args.coupling)
    out = br.as_dict()
    out["total_db"] = float(linear_to_db(br.total))
    out["mu1_approx"] = analytic.mu1_scaling_approximation(base)
    out["pdl_penalty"] = analytic.pdl_penalty(base)
    _write(args.out, json.dumps(out, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_simulate(args):
    base, _ = sweep.load_config(args.config)
    est = estimate_mean_snr(base, args.trials, args.seed,
                            partitions=args.partitions, workers=args.workers)
    row = {"series": "", "axis": "", "value": "", "output": "simulated",
           "linear": est.mean, "db": float(linear_to_db(est.mean)),
           "std_error": est.std_error, "trials": est.trials, "seed": est.seed,
           "route": ""}
    _write(args.out, sweep.rows_to_csv([row], timestamp=not args.no_timestamp))
    return EXIT_OK


def cmd_sweep(args):
    specs = _specs_for(args.config, args.trials, args.seed)
    rows = sweep.run_sweeps(specs, workers=args.workers)
    _emit_rows(rows, args, "sweep")
    return EXIT_OK


def cmd_preset(args):
    specs = _specs_for(args.name, args.trials, args.seed)
    rows = sweep.run_sweeps(specs, workers=args.workers)
    _emit_rows(rows, args, args.name)
    return EXIT_OK


def cmd_verify(args):
    specs = _specs_for(args.config, args.trials, args.seed)
    summary = sweep.verify_report(specs, workers=args.workers)
    text = sweep.format_report(summary)
    if args.out:
        _write(os.path.join(args.out, "verify.json"), sweep.summary_json(summary))
        _write(os.path.join(args.out, "verify.txt"), text + "\n")
    print(text)
    return EXIT_OK if summary["passed"] else EXIT_VERIFY


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rispdl",
        description="Mean SNR of RIS-aided uplinks with phase-dependent loss")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, trials_default=None):
        p.add_argument("--trials", type=int, default=trials_default)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--no-timestamp", action="store_true",
                       help="omit the timestamp comment line from CSV output")

    p = sub.add_parser("mean-snr", help="closed-form mean SNR of a scenario")
    p.add_argument("config")
    p.add_argument("--coupling", choices=("theorem", "joint"), default="theorem")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_mean_snr)

    p = sub.add_parser("simulate", help="Monte Carlo mean SNR of a scenario")
    p.add_argument("config")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--partitions", type=int, default=1)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--no-timestamp", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run the [sweep] tables of a config")
    p.add_argument("config")
    common(p)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--plot-data", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("preset", help="run a named reference sweep")
    p.add_argument("name", choices=sorted(sweep.PRESETS))
    common(p)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--plot-data", action="store_true")
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("verify", help="analytic vs simulated at the 3-sigma policy")
    p.add_argument("config", help="config file or preset name")
    common(p)
    p.add_argument("--out", default=None, help="directory for JSON/text summary")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ConvergenceError, QuadratureError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
