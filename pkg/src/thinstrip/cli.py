"""Command-line entry point: ``thinstrip {simulate,sweep,check,validate,export}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from thinstrip import __version__
from thinstrip.config import DEFAULT_MONITORS, ConfigError, RunConfig, load, validate, with_overrides
from thinstrip.convergence import WORKERS_ENV, worker_count
from thinstrip.harness import EXIT_ACCEPTANCE, EXIT_CONFIG, EXIT_OK, export, run_sweep, simulate

EPILOG = f"""exit codes:
  0  ok
  2  configuration error (field-level messages on stderr)
  3  blow-up (non-finite state)
  4  analytic band exhaustion
  5  acceptance or check failure

environment:
  {WORKERS_ENV}  number of worker processes for eps sweeps (default 1)
"""


def _eps_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"bad eps list {text!r}") from err


def _add_run_options(p: argparse.ArgumentParser, eps_list: bool = False):
    p.add_argument("--config", "-c", help="TOML config file")
    p.add_argument("--system", choices=["hydrostatic", "anisotropic", "paired"])
    p.add_argument("--data", help="catalog entry name")
    p.add_argument("--t-end", type=float)
    p.add_argument("--dt", type=float)
    if eps_list:
        p.add_argument("--eps", type=_eps_list, dest="eps_list", help="comma-separated, strictly decreasing")
    else:
        p.add_argument("--eps", type=float)
    p.add_argument("--out", help="output directory (overrides run.output_dir)")
    p.add_argument("--no-figures", action="store_true", help="skip the matplotlib report figures")


def _config(args) -> RunConfig:
    cfg = load(args.config) if args.config else RunConfig()
    over = {"system": args.system, "data": args.data, "t_end": args.t_end, "dt": args.dt,
            "eps": getattr(args, "eps", None), "eps_list": getattr(args, "eps_list", None), "output_dir": args.out}
    if args.data and args.data != cfg.data:
        over["data_params"] = {}
    if args.system and args.system != cfg.system:
        over["monitors"] = list(DEFAULT_MONITORS[args.system])
    return with_overrides(cfg, **over)


def cmd_simulate(args) -> int:
    cfg = _config(args)
    rep = simulate(cfg, figures=not args.no_figures)
    s = rep.summary
    print(f"run written to {rep.out_dir} (exit {rep.exit_code})")
    if "clock_final" in s:
        print(f"{s['clock_kind']}(t_end) = {s['clock_final']:.6e}  band width {s['band_width_final']:.6e}")
        for name, led in s["ledgers"].items():
            print(f"ratio[{name}] = {led['ratio']:.6e}")
    return rep.exit_code


def cmd_sweep(args) -> int:
    cfg = _config(args)
    eps_list = cfg.eps_list
    if not eps_list or len(eps_list) < 3:
        raise ConfigError(["eps.list: a sweep needs at least three values (use --eps)"])
    workers = args.workers if args.workers is not None else worker_count()
    rep = run_sweep(cfg, eps_list, gate=not args.no_gate, figures=not args.no_figures, workers=workers)
    sw = rep.summary["sweep"]
    slope = sw["slope"]
    print(f"sweep written to {rep.out_dir}")
    print("slope = " + ("n/a" if slope is None else f"{slope:.6f}"))
    if "gate" in rep.summary:
        print(f"refinement gate: change {rep.summary['gate']['relative_change']:.4f} "
              f"{'passed' if rep.summary['gate']['passed'] else 'FAILED'}")
    return rep.exit_code


def cmd_check(args) -> int:
    from thinstrip import acceptance

    ids = acceptance.SUITES[args.suite] if not args.only else tuple(args.only.split(","))
    workdir = Path(args.workdir)
    results = acceptance.run_criteria(ids, workdir, golden_path=args.golden, workers=args.workers,
                                      calibrate=args.calibrate, emit=lambda c: print(c.line(), flush=True))
    failed = [c.id for c in results if not c.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_ACCEPTANCE if failed else EXIT_OK


def cmd_validate(args) -> int:
    text = Path(args.config).read_text(encoding="utf-8")
    problems = validate(text)
    for p in problems:
        print(p, file=sys.stderr)
    if problems:
        return EXIT_CONFIG
    print("config ok")
    return EXIT_OK


def cmd_export(args) -> int:
    for path in export(args.run_dir, args.format, args.out):
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thinstrip", description=__doc__, epilog=EPILOG,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"thinstrip {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one system and write ledgers, report and figures", epilog=EPILOG,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_run_options(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="paired eps sweep with slope fit", epilog=EPILOG,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_run_options(p, eps_list=True)
    p.add_argument("--workers", type=int, help=f"worker processes (default from {WORKERS_ENV})")
    p.add_argument("--no-gate", action="store_true", help="skip the refinement gate")
    p.set_defaults(func=cmd_sweep, system="paired")

    p = sub.add_parser("check", help="run a property or acceptance suite", epilog=EPILOG,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--suite", default="lp",
                   choices=["lp", "vertical", "hydro", "aniso", "convergence", "ratios", "determinism", "acceptance"])
    p.add_argument("--only", help="comma-separated criterion ids, e.g. AC-1,AC-5")
    p.add_argument("--workdir", default="runs/acceptance")
    p.add_argument("--golden", default="tests/golden/ratios.json", help="energy-ratio calibration file")
    p.add_argument("--calibrate", action="store_true", help="rewrite the calibration file from this run")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("validate", help="field-level config diagnostics (no physics)", epilog=EPILOG,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("export", help="convert a run's ledgers to plot-ready JSON or CSV", epilog=EPILOG,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("run_dir")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as err:
        for p in err.problems:
            print(f"config error: {p}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
