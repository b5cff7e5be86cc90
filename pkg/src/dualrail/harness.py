"""Monte Carlo disorder sweeps, aggregate tables, and scaling-law fits."""

import csv
import os
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import diagonalize
from .hamiltonians import DisorderConfig, build_chain, single_excitation_matrix
from .scheduler import SchedulerConfig, build_schedule

__all__ = [
    "SweepConfig",
    "SweepRecord",
    "ScalingFit",
    "propagator_pair",
    "run_sweep",
    "summarize",
    "schedule_times_at",
    "collect_scaling_curves",
    "fit_scaling",
    "emit_report",
]


@dataclass(frozen=True)
class SweepConfig:
    lengths: tuple
    strengths: tuple = (0.0,)
    correlations: tuple = (0.5,)
    samples: int = 10
    scheduler: SchedulerConfig = SchedulerConfig()
    base_seed: int = 0

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")

    def cells(self):
        for n in self.lengths:
            for delta in self.strengths:
                for c in self.correlations:
                    yield (n, delta, c)


@dataclass(frozen=True)
class SweepRecord:
    n: int
    strength: float
    correlation: float
    seed: int
    n_measurements: int
    total_time: float
    achieved: bool
    failure_reached: float


@dataclass(frozen=True)
class ScalingFit:
    prefactor: float
    exponent: float
    residual_rms: float

    def time(self, n, p):
        return self.prefactor * n**self.exponent * abs(np.log(p))


def _pair_seeds(base_seed, cell_index, sample_index):
    ss = np.random.SeedSequence([base_seed, cell_index, sample_index])
    a, b = ss.spawn(2)
    return a.generate_state(1)[0], b.generate_state(1)[0]


def propagator_pair(n, strength, correlation, seed1, seed2):
    """Two independently disordered chains of the same model, diagonalized."""
    props = []
    for seed in (seed1, seed2):
        cfg = DisorderConfig(
            strength=strength, sign_correlation=correlation, seed=int(seed)
        )
        spec = build_chain(n, cfg)
        props.append(diagonalize(single_excitation_matrix(spec)))
    return props[0], props[1]


def run_sweep(config, keep_schedules=False):
    """One schedule search per (cell, sample); never aborts on junk samples."""
    records = []
    schedules = []
    for cell_index, (n, delta, c) in enumerate(config.cells()):
        for k in range(config.samples):
            s1, s2 = _pair_seeds(config.base_seed, cell_index, k)
            prop1, prop2 = propagator_pair(n, delta, c, s1, s2)
            sched = build_schedule(prop1, prop2, config.scheduler)
            reached = (
                float(sched.trace.P[-1]) if sched.n_measurements else 1.0
            )
            records.append(
                SweepRecord(
                    n=n,
                    strength=delta,
                    correlation=c,
                    seed=int(s1),
                    n_measurements=sched.n_measurements,
                    total_time=sched.total_time,
                    achieved=sched.achieved,
                    failure_reached=reached,
                )
            )
            if keep_schedules:
                schedules.append(sched)
    return (records, schedules) if keep_schedules else records


def summarize(records, axis="strength"):
    """Per-cell mean and sample std of t and M, plus the junk fraction.

    Returns {axis value: dict} ordered by axis value; single-sample cells
    report a std of 0.
    """
    cells = {}
    for rec in records:
        cells.setdefault(getattr(rec, axis), []).append(rec)
    out = {}
    for key in sorted(cells):
        recs = cells[key]
        good = [r for r in recs if r.achieved]
        ts = np.array([r.total_time for r in good])
        ms = np.array([r.n_measurements for r in good])
        out[key] = {
            "t_mean": float(ts.mean()) if good else np.nan,
            "t_std": float(ts.std(ddof=1)) if len(good) > 1 else 0.0,
            "m_mean": float(ms.mean()) if good else np.nan,
            "m_std": float(ms.std(ddof=1)) if len(good) > 1 else 0.0,
            "junk_fraction": 1.0 - len(good) / len(recs),
            "samples": len(recs),
        }
    return out


def schedule_times_at(schedule, p_grid):
    """Total time to push the joint failure below each p (NaN if not reached)."""
    taus = schedule.trace.cumulative_times
    P = schedule.trace.P
    out = []
    for p in p_grid:
        hit = np.nonzero(P <= p)[0]
        out.append(float(taus[hit[0]]) if hit.size else np.nan)
    return np.array(out)


def collect_scaling_curves(
    lengths, p_grid, strength=0.0, correlation=0.5, samples=1,
    scheduler=None, base_seed=0,
):
    """Rows (N, P, t) averaged over disorder samples, for the scaling fit."""
    p_grid = np.asarray(p_grid, dtype=float)
    scheduler = scheduler or SchedulerConfig()
    scheduler = replace(scheduler, target_failure=float(p_grid.min()))
    rows = []
    for ci, n in enumerate(lengths):
        times = []
        for k in range(samples):
            s1, s2 = _pair_seeds(base_seed, ci, k)
            prop1, prop2 = propagator_pair(n, strength, correlation, s1, s2)
            sched = build_schedule(prop1, prop2, scheduler)
            if sched.achieved:
                times.append(schedule_times_at(sched, p_grid))
        if not times:
            continue
        mean_t = np.nanmean(np.vstack(times), axis=0)
        for p, t in zip(p_grid, mean_t):
            if np.isfinite(t):
                rows.append((n, float(p), float(t)))
    return rows


def fit_scaling(rows):
    """Least squares for t = a N^b |ln P| with the |ln P| exponent fixed at 1."""
    ns = sorted({r[0] for r in rows})
    if len(ns) < 4:
        raise ValueError("need at least 4 distinct chain lengths to fit")
    y = np.array([np.log(t) - np.log(abs(np.log(p))) for n, p, t in rows])
    x = np.array([np.log(n) for n, p, t in rows])
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    return ScalingFit(
        prefactor=float(np.exp(coef[0])),
        exponent=float(coef[1]),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
    )


def _format_cell(mean, std, samples):
    if np.isnan(mean):
        return "n/a"
    if samples <= 1:
        return f"{mean:.6g}"
    return f"{mean:.6g}+-{std:.3g}"


def emit_report(records, out_dir, axis="strength", fits=None, curves=None,
                fmt="csv"):
    """Write the aggregate table, junk fractions, fit constants, and curves."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    summary = summarize(records, axis=axis) if records else {}
    keys = list(summary)

    table = os.path.join(out_dir, f"table_by_{axis}.csv")
    with open(table, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([""] + [f"{axis}={k:g}" for k in keys])
        writer.writerow(
            ["t"]
            + [
                _format_cell(
                    summary[k]["t_mean"], summary[k]["t_std"], summary[k]["samples"]
                )
                for k in keys
            ]
        )
        writer.writerow(
            ["M"]
            + [
                _format_cell(
                    summary[k]["m_mean"], summary[k]["m_std"], summary[k]["samples"]
                )
                for k in keys
            ]
        )
    written.append(table)

    junk = os.path.join(out_dir, "junk_fractions.csv")
    with open(junk, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([axis, "junk_fraction", "samples"])
        for k in keys:
            writer.writerow(
                [f"{k:g}", f"{summary[k]['junk_fraction']:.6g}", summary[k]["samples"]]
            )
    written.append(junk)

    if fits:
        path = os.path.join(out_dir, "scaling_fits.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["label", "prefactor", "exponent", "residual_rms"])
            for label, fit in fits.items():
                writer.writerow(
                    [
                        label,
                        f"{fit.prefactor:.6g}",
                        f"{fit.exponent:.6g}",
                        f"{fit.residual_rms:.6g}",
                    ]
                )
        written.append(path)

    if curves:
        path = os.path.join(out_dir, "time_vs_failure.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["N", "P", "t"])
            for n, p, t in curves:
                writer.writerow([n, f"{p:.6g}", f"{t:.6g}"])
        written.append(path)
        if fmt == "svg":
            written.append(_plot_curves(curves, out_dir))

    return written


def _plot_curves(curves, out_dir):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots()
    by_n = {}
    for n, p, t in curves:
        by_n.setdefault(n, []).append((abs(np.log(p)), t))
    for n in sorted(by_n):
        pts = sorted(by_n[n])
        ax.plot([x for x, _ in pts], [y for _, y in pts], "o-", label=f"N={n}")
    ax.set_xlabel("|ln P|")
    ax.set_ylabel("t [hbar/J]")
    ax.legend()
    path = os.path.join(out_dir, "time_vs_failure.svg")
    fig.savefig(path)
    plt.close(fig)
    return path
