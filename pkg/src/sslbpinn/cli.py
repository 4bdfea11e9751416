"""Command-line entry point: ``sslbpinn {run,compare,check,plot}``."""

import argparse
import logging
import os
import sys

from . import io
from .config import dump_config, load_config
from .errors import ConfigError
from .metrics import METRICS, summarize

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def parse_seeds(text):
    """``"a..b"`` (inclusive), ``"a,b,c"`` or a single integer."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed range {text!r}; expected a..b or a,b,c") from None


def _build_parser():
    parser = argparse.ArgumentParser(prog="sslbpinn", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one configuration")
    p.add_argument("--config", help="config file (shipped defaults if omitted)")
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=("developed", "baseline", "oracle_feedforward"))
    p.add_argument("--out", help="directory for trace.csv, weights.csv and the resolved config")

    p = sub.add_parser("compare", help="developed vs baseline over several seeds")
    p.add_argument("--config")
    p.add_argument("--seeds", type=parse_seeds, default=list(range(10)))
    p.add_argument("--out", help="directory for report.txt, report.csv and plots")
    p.add_argument("--workers", type=int, default=1)

    sub.add_parser("check", help="run the property and invariant suite")

    p = sub.add_parser("plot", help="SVG plots from trace CSV files")
    p.add_argument("--trace", required=True, help="trace CSV (developed arm or a single run)")
    p.add_argument("--baseline", help="optional second trace CSV to overlay")
    p.add_argument("--out", required=True, help="output path prefix")
    return parser


def _summary_lines(summary):
    return [f"{METRICS[m][0]:>12} [{METRICS[m][1]}] = {summary[m]:.6g}" for m in METRICS]


def cmd_run(args):
    from .simulator import run

    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.mode:
        cfg.mode = args.mode
    cfg.validate()
    trace = run(cfg)
    print(f"mode={cfg.mode} seed={cfg.seed} steps={len(trace)} config={trace.config_hash[:12]}")
    if trace.aborted:
        print(f"aborted: {trace.abort_reason}", file=sys.stderr)
    elif len(trace):
        print("\n".join(_summary_lines(summarize(trace))))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        io.export_csv(trace, os.path.join(args.out, "trace.csv"))
        io.export_weights(trace, os.path.join(args.out, "weights.csv"))
        with open(os.path.join(args.out, "config.toml"), "w") as fh:
            fh.write(dump_config(cfg))
        print(f"wrote {args.out}")
    return EXIT_FAIL if trace.aborted else EXIT_OK


def cmd_compare(args):
    from .simulator import compare

    cfg = load_config(args.config)
    if not args.seeds:
        raise ConfigError("--seeds selects no seeds")
    keep = {args.seeds[0]} if args.out else False
    report, traces = compare(cfg, args.seeds, workers=args.workers, keep_traces=keep)
    table = report.to_table()
    print(table)
    wins = report.wins("f_tilde")
    print(f"developed ||f~|| <= baseline in {wins}/{len(report.values('developed', 'f_tilde'))} seeds; "
          f"median per-seed improvement {report.median_improvement('f_tilde'):.2f}%")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "report.txt"), "w") as fh:
            fh.write(table + "\n")
        report.to_csv(os.path.join(args.out, "report.csv"))
        seed = args.seeds[0]
        pair = {arm: traces[(seed, arm)] for arm in ("developed", "baseline") if (seed, arm) in traces}
        for arm, trace in pair.items():
            io.export_csv(trace, os.path.join(args.out, f"trace_seed{seed}_{arm}.csv"))
        io.export_svg_plots(pair, os.path.join(args.out, f"seed{seed}"))
        print(f"wrote {args.out}")
    return EXIT_FAIL if report.aborted else EXIT_OK


def cmd_check(args):
    from .checks import run_all

    results = run_all()
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.ok]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_plot(args):
    series = {"developed" if args.baseline else "run": io.read_csv(args.trace)}
    if args.baseline:
        series["baseline"] = io.read_csv(args.baseline)
    for path in io.export_svg_plots(series, args.out):
        print(f"wrote {path}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "compare": cmd_compare, "check": cmd_check, "plot": cmd_plot}


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"sslbpinn {args.command}: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"sslbpinn {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
