"""Command line interface.

Subcommands: simulate, schedule, sweep, fit, tomography.  A flat key=value
config file can preset any flag; explicit flags win.  Exit codes: 0 success,
1 usage error, 2 certification found the pair incapable.
"""

import argparse
import sys

import numpy as np

from .harness import (
    SweepConfig,
    collect_scaling_curves,
    emit_report,
    fit_scaling,
    propagator_pair,
    run_sweep,
)
from .protocol import LogicalQubit, run_transfer, transfer_rng
from .scheduler import SchedulerConfig, build_schedule
from .tomography import EndpointFunctions, certify, estimate_endpoints


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _read_config_file(path):
    values = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def _add_common(p):
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--n", type=int, default=10, help="chain length")
    p.add_argument("--delta", type=float, default=0.0, help="disorder strength")
    p.add_argument("--c", type=float, default=0.5, help="sign correlation")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--target-failure", type=float, default=0.01)
    p.add_argument("--time-step", type=float, default=0.05)
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--tolerance", type=float, default=1e-3)
    p.add_argument("--slope-match", type=float, default=None,
                   help="enable slope matching with this tolerance")
    p.add_argument("--max-measurements", type=int, default=400)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=["csv", "svg"], default="csv")


def build_parser():
    parser = _Parser(prog="dualrail")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="one chain pair, one transfer")
    _add_common(p)
    p.add_argument("--alpha", type=float, default=1 / np.sqrt(2))
    p.add_argument("--beta", type=float, default=1 / np.sqrt(2))

    p = sub.add_parser("schedule", help="emit a measurement schedule CSV")
    _add_common(p)

    p = sub.add_parser("sweep", help="disorder sweep and aggregate tables")
    _add_common(p)
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--deltas", default=None,
                   help="comma separated list overriding --delta")
    p.add_argument("--cs", default=None,
                   help="comma separated list overriding --c")

    p = sub.add_parser("fit", help="scaling-law fit over chain lengths")
    _add_common(p)
    p.add_argument("--lengths", default="5,8,11,14,17,20")
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--p-grid", default="0.3,0.1,0.05,0.02,0.01")

    p = sub.add_parser("tomography", help="endpoint estimation / certification")
    _add_common(p)
    p.add_argument("action", choices=["estimate", "certify"])
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--grid-step", type=float, default=0.02)
    p.add_argument("--grid-max", type=float, default=None)
    p.add_argument("--endpoints", default=None,
                   help="endpoint CSV from an external source")
    return parser


def _apply_config_file(parser, args, argv):
    if args.config is None:
        return args
    preset = _read_config_file(args.config)
    explicit = {a.lstrip("-").replace("-", "_").split("=")[0] for a in argv
                if a.startswith("--")}
    for key, raw in preset.items():
        if key in explicit or not hasattr(args, key):
            continue
        current = getattr(args, key)
        if isinstance(current, bool):
            setattr(args, key, raw.lower() in ("1", "true", "yes"))
        elif isinstance(current, int):
            setattr(args, key, int(raw))
        elif isinstance(current, float):
            setattr(args, key, float(raw))
        else:
            setattr(args, key, raw)
    return args


def _scheduler_config(args):
    return SchedulerConfig(
        time_step=args.time_step,
        horizon=args.horizon,
        amplitude_tolerance=args.tolerance,
        slope_tolerance=args.slope_match,
        target_failure=args.target_failure,
        max_measurements=args.max_measurements,
    )


def _pair(args):
    return propagator_pair(args.n, args.delta, args.c, args.seed, args.seed + 1)


def _parse_list(text, cast=float):
    return tuple(cast(x) for x in text.split(",") if x.strip())


def cmd_simulate(args):
    prop1, prop2 = _pair(args)
    sched = build_schedule(prop1, prop2, _scheduler_config(args))
    norm = np.sqrt(args.alpha**2 + args.beta**2)
    q = LogicalQubit(args.alpha / norm, args.beta / norm)
    rec = run_transfer(q, sched, prop1, prop2, transfer_rng(args.seed))
    print(f"schedule: M={sched.n_measurements} t={sched.total_time:.3f} "
          f"achieved={sched.achieved}")
    if rec.success_round is None:
        print("transfer: no success within the schedule")
    else:
        print(f"transfer: success at round {rec.success_round}, "
              f"fidelity {rec.fidelity:.12f}")
    return 0


def cmd_schedule(args):
    prop1, prop2 = _pair(args)
    cfg = _scheduler_config(args)
    sched = build_schedule(prop1, prop2, cfg)
    out = args.out or "schedule.csv"
    sched.to_csv(out, config=cfg)
    print(f"wrote {out}: M={sched.n_measurements} t={sched.total_time:.3f} "
          f"achieved={sched.achieved}")
    return 0


def cmd_sweep(args):
    deltas = _parse_list(args.deltas) if args.deltas else (args.delta,)
    cs = _parse_list(args.cs) if args.cs else (args.c,)
    cfg = SweepConfig(
        lengths=(args.n,),
        strengths=deltas,
        correlations=cs,
        samples=args.samples,
        scheduler=_scheduler_config(args),
        base_seed=args.seed,
    )
    records = run_sweep(cfg)
    axis = "correlation" if len(cs) > 1 else "strength"
    out = args.out or "sweep_out"
    written = emit_report(records, out, axis=axis, fmt=args.format)
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_fit(args):
    lengths = _parse_list(args.lengths, int)
    p_grid = _parse_list(args.p_grid)
    curves = collect_scaling_curves(
        lengths, p_grid, strength=args.delta, correlation=args.c,
        samples=args.samples, scheduler=_scheduler_config(args),
        base_seed=args.seed,
    )
    fit = fit_scaling(curves)
    print(f"t(P) = {fit.prefactor:.3g} N^{fit.exponent:.3g} |ln P|  "
          f"(rms log residual {fit.residual_rms:.3g})")
    if args.out:
        emit_report([], args.out, fits={"fit": fit}, curves=curves,
                    fmt=args.format)
    return 0


def cmd_tomography(args):
    if args.endpoints:
        endpoints = EndpointFunctions.from_csv(args.endpoints)
    else:
        prop1, prop2 = _pair(args)
        grid_max = args.grid_max or 4.0 * args.n * 2
        grid = np.arange(0.0, grid_max + args.grid_step / 2, args.grid_step)
        rng = np.random.default_rng(args.seed)
        endpoints = estimate_endpoints(prop1, prop2, grid,
                                       shots=args.shots, rng=rng)
    if args.action == "estimate":
        out = args.out or "endpoints.csv"
        endpoints.to_csv(out)
        print(f"wrote {out}")
        return 0
    horizon = args.horizon or 4.0 * args.n
    report = certify(endpoints, _scheduler_config(args), horizon=horizon)
    sched = report.schedule
    print(f"capable={report.capable} M={sched.n_measurements} "
          f"t={sched.total_time:.3f} P={report.failure_reached:.3g}")
    if args.out:
        sched.to_csv(args.out)
    return 0 if report.capable else 2


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args = _apply_config_file(parser, args, argv)
    handlers = {
        "simulate": cmd_simulate,
        "schedule": cmd_schedule,
        "sweep": cmd_sweep,
        "fit": cmd_fit,
        "tomography": cmd_tomography,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
