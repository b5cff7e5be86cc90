"""Greedy search for unbiased measurement times.

Each step scans a uniform time grid for candidate measurement times where the
two branch arrival amplitudes have (nearly) equal modulus.  Candidates come
from two sources: local payoff maxima inside contiguous in-tolerance runs
(the generic situation for identical or near-identical chains, where the
condition holds on whole intervals) and isolated crossings of |F| - |G|
refined by bisection (the generic situation for differing chains).  The step
takes the earliest candidate whose success probability is adequate, both in
absolute terms and relative to the best candidate on offer; run candidates
are additionally deferred past a short pacing delay so that the schedule does
not burn cheap early arrivals.  The acceptance thresholds and the pacing
delay are calibrated against the published disorder statistics.
"""

import csv
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .dynamics import ProjectedTrace, TraceBuilder

__all__ = [
    "SchedulerConfig",
    "MeasurementSchedule",
    "find_next_time",
    "build_schedule",
    "drive_engine",
]


@dataclass(frozen=True)
class SchedulerConfig:
    time_step: float = 0.05
    horizon: float = None           # None -> 2 N, set at build time
    amplitude_tolerance: float = 1e-3
    amplitude_floor: float = 1e-6
    slope_tolerance: float = None   # None disables slope matching
    target_failure: float = 0.01
    max_measurements: int = 400
    min_step_success: float = 1e-6
    # earliest-adequate selection: accept a candidate once its payoff reaches
    # max(payoff_floor, acceptance_ratio * best available payoff)
    acceptance_ratio: float = 0.4
    payoff_floor: float = 0.06
    # run candidates (condition satisfied on a whole interval) are deferred
    # until pacing_offset + pacing_ratio * horizon
    pacing_offset: float = 2.0
    pacing_ratio: float = 0.225

    def __post_init__(self):
        if self.time_step <= 0:
            raise ValueError("time_step must be positive")
        if not 0.0 < self.target_failure <= 1.0:
            raise ValueError("target_failure must be in (0, 1]")
        if self.amplitude_tolerance <= 0 or self.amplitude_floor <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_measurements < 0:
            raise ValueError("max_measurements must be >= 0")
        if not 0.0 <= self.acceptance_ratio <= 1.0:
            raise ValueError("acceptance_ratio must be in [0, 1]")


@dataclass
class MeasurementSchedule:
    intervals: np.ndarray
    trace: ProjectedTrace
    achieved: bool

    @property
    def n_measurements(self):
        return self.intervals.size

    @property
    def total_time(self):
        return float(self.intervals.sum())

    def to_csv(self, path, config=None):
        with open(path, "w", newline="") as fh:
            if config is not None:
                fh.write(f"# time_step={config.time_step}\n")
                fh.write(f"# target_failure={config.target_failure}\n")
                fh.write(f"# amplitude_tolerance={config.amplitude_tolerance}\n")
            fh.write(f"# achieved={self.achieved}\n")
            writer = csv.writer(fh)
            writer.writerow(["l", "t_l", "tau_l", "absF", "absG", "phi", "p", "P"])
            taus = self.trace.cumulative_times
            for i in range(self.n_measurements):
                writer.writerow(
                    [
                        i + 1,
                        f"{self.intervals[i]:.17g}",
                        f"{taus[i]:.17g}",
                        f"{abs(self.trace.F[i]):.17g}",
                        f"{abs(self.trace.G[i]):.17g}",
                        f"{self.trace.phi[i]:.17g}",
                        f"{self.trace.p[i]:.17g}",
                        f"{self.trace.P[i]:.17g}",
                    ]
                )

    @staticmethod
    def read_intervals(path):
        """Intervals and phases back from a schedule CSV."""
        intervals, phis = [], []
        with open(path) as fh:
            rows = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
        for row in csv.DictReader(rows):
            intervals.append(float(row["t_l"]))
            phis.append(float(row["phi"]))
        return np.asarray(intervals), np.asarray(phis)


def _slope_ok(engine, t, config, h=1e-5):
    if config.slope_tolerance is None:
        return True
    ts = np.array([max(t - h, h / 10), t + h])
    f, g = engine.peek(ts)
    df = (np.abs(f[1]) - np.abs(f[0])) / (ts[1] - ts[0])
    dg = (np.abs(g[1]) - np.abs(g[0])) / (ts[1] - ts[0])
    return abs(df - dg) <= config.slope_tolerance


def find_next_time(engine, config, horizon=None):
    """Pick the next measurement interval, or None if nothing useful exists."""
    if horizon is None:
        horizon = config.horizon
    if horizon is None:
        raise ValueError("no horizon given and none set in the config")
    dt = config.time_step
    ts = np.arange(dt, horizon + 0.5 * dt, dt)
    f, g = engine.peek(ts)
    a, b = np.abs(f), np.abs(g)
    d = a - b
    scale = np.maximum(np.maximum(a, b), config.amplitude_floor)
    ok = np.abs(d) <= config.amplitude_tolerance * scale
    survival = engine.survival
    payoff = np.minimum(a, b) ** 2 / survival
    run_min = config.pacing_offset + config.pacing_ratio * horizon

    def eval_at(t):
        ff, gg = engine.peek(np.array([t]))
        return abs(ff[0]), abs(gg[0])

    def refine_crossing(i):
        # the scalar re-evaluation can disagree with the vectorized scan in
        # the last ulp near a root, so fall back to linear interpolation if
        # the bracket does not survive
        try:
            root = brentq(
                lambda t: eval_at(t)[0] - eval_at(t)[1],
                ts[i],
                ts[i + 1],
                xtol=1e-12,
            )
        except ValueError:
            root = ts[i] + dt * abs(d[i]) / (abs(d[i]) + abs(d[i + 1]))
        fa, ga = eval_at(root)
        return (float(root), min(fa, ga) ** 2 / survival, False)

    candidates = []  # (t, payoff, is_run)
    for i in range(1, ts.size - 1):
        if ok[i] and payoff[i] >= payoff[i - 1] and payoff[i] >= payoff[i + 1]:
            if ts[i] >= run_min:
                candidates.append((ts[i], payoff[i], True))
        elif d[i] * d[i + 1] < 0:
            candidates.append(refine_crossing(i))
    if d[0] * d[1] < 0:  # leading crossing the loop above skips
        candidates.append(refine_crossing(0))

    candidates = [
        c
        for c in candidates
        if c[1] >= config.min_step_success and _slope_ok(engine, c[0], config)
    ]
    if not candidates:
        return None
    candidates.sort()
    best = max(c[1] for c in candidates)
    threshold = max(config.payoff_floor, config.acceptance_ratio * best)
    adequate = [c for c in candidates if c[1] >= threshold]
    pick = adequate[0] if adequate else max(candidates, key=lambda c: (c[1], -c[0]))

    t_pick, _, is_run = pick
    if is_run:
        # local refinement of the payoff maximum within the grid neighborhood
        lo, hi = max(t_pick - dt, dt / 10), min(t_pick + dt, horizon)
        res = minimize_scalar(
            lambda t: -min(eval_at(t)) ** 2,
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-10},
        )
        fa, ga = eval_at(res.x)
        cond = abs(fa - ga) <= config.amplitude_tolerance * max(
            fa, ga, config.amplitude_floor
        )
        if cond:
            t_pick = float(res.x)
    return t_pick


def drive_engine(engine, config, horizon):
    """Append greedy steps until the failure target, the cap, or exhaustion."""
    intervals = []
    achieved = engine.survival <= config.target_failure
    while not achieved and len(intervals) < config.max_measurements:
        t = find_next_time(engine, config, horizon)
        if t is None:
            break
        engine.commit(t)
        intervals.append(t)
        achieved = engine.survival <= config.target_failure
    return MeasurementSchedule(
        intervals=np.asarray(intervals, dtype=float),
        trace=engine.trace(),
        achieved=achieved,
    )


def build_schedule(prop1, prop2, config):
    """Greedy measurement schedule for a pair of diagonalized chains."""
    horizon = config.horizon
    if horizon is None:
        horizon = 2.0 * max(prop1.n_sites, prop2.n_sites)
    engine = TraceBuilder(prop1, prop2)
    return drive_engine(engine, config, horizon)
