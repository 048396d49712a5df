"""Command-line entry point: ``gppf {trial,campaign,surface-info,export-curves}``."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .campaign import (CampaignConfig, export_curves, persist, run_campaign, write_trace)
from .explorer import TrialConfig, run_trial, stopping_count
from .metrics import full_report, normalization_for
from .policies import Policy, default_policies
from .surfaces import SurfaceKind, build_surface, count_local_extrema

SURFACES = ("parabola", "townsend", "lunar")
ROW_METRICS = ("e_c", "e_n", "i_c", "d_c", "e_dc", "e_ic")


class _HelpFormatter(argparse.ArgumentDefaultsHelpFormatter):
    # unset optional flags describe their fallback in the help text
    def _get_help_string(self, action):
        if action.default is None or action.default is False:
            return action.help
        return super()._get_help_string(action)


def _policy(text):
    try:
        return Policy.parse(text)
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {v}")
    return v


def _seed(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _noise(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not v >= 0:
        raise argparse.ArgumentTypeError("noise std must be non-negative")
    return v


def _add_surface_flags(p, required=True):
    p.add_argument("--surface", choices=SURFACES, required=required,
                   help="environment to explore")
    p.add_argument("--dem", type=Path, default=None,
                   help="DEM file for --surface lunar (default: synthetic crater)")
    p.add_argument("--noise-std", type=_noise, default=None,
                   help="measurement noise std (default: 0.01 x target range)")
    p.add_argument("--townsend-classic", action="store_true",
                   help="square the cosine term of the Townsend surface")


def _add_run_flags(p):
    p.add_argument("--seed", type=_seed, default=0, help="base seed")
    p.add_argument("--stopping", choices=("paper", "computed"), default="paper",
                   help="sample budget: published counts or grid/4")
    p.add_argument("--norm", choices=("computed", "paper"), default="computed",
                   help="NRMSE target range source")
    p.add_argument("--out", type=Path, default=Path(os.environ.get("GPPF_OUT", "runs")),
                   help="output directory ($GPPF_OUT if set)")
    p.add_argument("--cold-start", action="store_true",
                   help="retrain hyperparameters from the initial values every step")


def build_parser() -> argparse.ArgumentParser:
    fmt = _HelpFormatter
    parser = argparse.ArgumentParser(
        prog="gppf", description="Cost-aware active learning exploration simulator.",
        formatter_class=fmt)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("trial", formatter_class=fmt, help="run one trial of one policy")
    _add_surface_flags(p)
    _add_run_flags(p)
    p.add_argument("--policy", type=_policy, required=True,
                   help="conventional | normalized | constrained:<m>")

    p = sub.add_parser("campaign", formatter_class=fmt,
                       help="run every policy over several trials")
    _add_surface_flags(p)
    _add_run_flags(p)
    p.add_argument("--policy", type=_policy, action="append", default=None,
                   help="policy to include, repeatable (default: the 8 standard strategies)")
    p.add_argument("--trials", type=_positive_int, default=10, help="trials per policy")
    p.add_argument("--jobs", type=_positive_int, default=1,
                   help="concurrent trial processes; results do not depend on it")

    p = sub.add_parser("surface-info", formatter_class=fmt, help="describe an environment")
    _add_surface_flags(p)

    p = sub.add_parser("export-curves", formatter_class=fmt,
                       help="rebuild mean/std curves from a run directory")
    p.add_argument("--in", dest="run_dir", type=Path, required=True,
                   help="campaign output directory")
    p.add_argument("--metric", choices=("nrmse-vs-distance",), default="nrmse-vs-distance")
    p.add_argument("--out", type=Path, default=None,
                   help="where to write curve files (default: <in>/curves)")
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "dem", None) is not None and args.surface != "lunar":
        parser.error("--dem only applies to --surface lunar")
    return args


def _surface_kind(args) -> SurfaceKind:
    if args.surface == "lunar":
        if args.dem is None:
            print("warning: no --dem given; using the synthetic crater surface",
                  file=sys.stderr)
            return SurfaceKind("crater")
        return SurfaceKind("dem", args.dem)
    return SurfaceKind(args.surface)


def _row(label, values, extra=""):
    cells = " ".join(f"{values[m]:>10.5f}" for m in ROW_METRICS)
    return f"{label:<16} {cells}{extra}"


def _header():
    return f"{'policy':<16} " + " ".join(f"{m:>10}" for m in ROW_METRICS)


def _cmd_surface_info(args) -> int:
    surface = build_surface(_surface_kind(args), args.noise_std, args.townsend_classic)
    n2, n1 = surface.shape
    print(f"surface: {surface.name}")
    print(f"grid: {n1} x {n2} ({surface.n_points} points), step {surface.step:g}")
    print(f"domain: [{surface.axis1[0]:g}, {surface.axis1[-1]:g}] x "
          f"[{surface.axis2[0]:g}, {surface.axis2[-1]:g}]")
    print(f"target range: {surface.target_range:.2f} ({surface.target_range!r})")
    print(f"local extrema (min, max): {count_local_extrema(surface)}")
    print(f"noise std: {surface.noise_std:g}")
    print(f"stopping: paper {stopping_count(surface, 'paper')}, "
          f"computed {stopping_count(surface, 'computed')}")
    return 0


def _cmd_trial(args) -> int:
    surface = build_surface(_surface_kind(args), args.noise_std, args.townsend_classic)
    n = stopping_count(surface, args.stopping)
    config = TrialConfig(surface, args.policy, n, args.seed, warm_start=not args.cold_start)
    record = run_trial(config)
    report = full_report(record, normalization_for(surface, n, args.norm))
    path = args.out / f"trial_{args.policy.slug}_seed{args.seed}.csv"
    write_trace(record, surface, path)
    print(_header())
    print(_row(args.policy.label, report.as_dict()))
    print(f"trace written to {path}", file=sys.stderr)
    return 0


def _cmd_campaign(args) -> int:
    config = CampaignConfig(
        surface=_surface_kind(args),
        policies=tuple(args.policy) if args.policy else tuple(default_policies()),
        n_trials=args.trials, base_seed=args.seed, normalization=args.norm,
        stopping=args.stopping, noise_std=args.noise_std,
        townsend_classic=args.townsend_classic, warm_start=not args.cold_start,
        jobs=args.jobs)
    surface = config.build_surface()
    summaries = run_campaign(config, surface)
    persist(summaries, config, args.out, surface)
    print(_header())
    for s in summaries:
        means = {m: s.mean(m) for m in ROW_METRICS}
        print(_row(s.policy, means, f"  ({s.n_ok}/{len(s.reports)} ok)"))
    for s in summaries:
        for t in s.failed_trials:
            print(f"warning: {s.policy} trial {t} failed: {s.errors[t]}", file=sys.stderr)
    return 0


def _cmd_export_curves(args) -> int:
    written = export_curves(args.run_dir, args.out)
    for path in written:
        print(path)
    return 0


COMMANDS = {
    "trial": _cmd_trial,
    "campaign": _cmd_campaign,
    "surface-info": _cmd_surface_info,
    "export-curves": _cmd_export_curves,
}


def run(args: argparse.Namespace) -> int:
    try:
        return COMMANDS[args.command](args)
    except Exception as err:
        msg = " ".join(str(err).split()) or type(err).__name__
        print(f"error: {msg}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    return run(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
