"""End-only characterization of a chain pair.

Only four time-dependent matrix elements matter for conclusive transfer: the
amplitudes to arrive at, and to stay on, the receiving site of each chain.
They can be measured locally (excitation statistics for the modulus, the
off-diagonal of the receiver's reduced density matrix for the phase, using
superpositions with the vacuum) and are reported in each chain's vacuum-phase
gauge.  From them alone the arrival amplitudes of the full repeated
measurement sequence follow by a renewal-type recursion, so a schedule can be
searched without any knowledge of the Hamiltonians ("black box" middle).
"""

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .dynamics import ProjectedTrace
from .scheduler import drive_engine

__all__ = [
    "EndpointFunctions",
    "EndpointTraceEngine",
    "CapabilityReport",
    "estimate_endpoints",
    "reconstruct_F_G",
    "failure_probabilities",
    "certify",
]

_NAMES = ("f_n1", "f_nn", "g_n1", "g_nn")


@dataclass
class EndpointFunctions:
    """The four endpoint amplitude functions on a uniform time grid.

    In exact mode the true functions are also kept as callables, so that
    off-grid times carry no interpolation error; sampled (finite-shot)
    estimates fall back to cubic-spline interpolation.
    """

    grid: np.ndarray
    f_n1: np.ndarray
    f_nn: np.ndarray
    g_n1: np.ndarray
    g_nn: np.ndarray
    errors: dict = None            # name -> per-point std of the modulus^2
    exact: dict = None             # name -> callable t -> complex
    _splines: dict = field(default=None, repr=False)

    def evaluate(self, name, ts):
        """One of the four functions at arbitrary times >= 0."""
        if name not in _NAMES:
            raise KeyError(name)
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        if self.exact is not None:
            return self.exact[name](ts)
        if ts.max(initial=0.0) > self.grid[-1] + 1e-9:
            raise ValueError(
                f"requested time {ts.max():.3g} beyond the tabulated grid "
                f"(max {self.grid[-1]:.3g})"
            )
        step = self.grid[1] - self.grid[0] if self.grid.size > 1 else np.inf
        if step > 0.1:
            warnings.warn(
                f"endpoint grid step {step:.3g} is coarse; interpolated "
                "amplitudes may exceed the scheduler tolerance",
                stacklevel=2,
            )
        if self._splines is None:
            self._splines = {
                n: CubicSpline(self.grid, getattr(self, n)) for n in _NAMES
            }
        return self._splines[name](ts)

    @property
    def horizon(self):
        return np.inf if self.exact is not None else float(self.grid[-1])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            header = ["t"]
            for n in _NAMES:
                header += [f"re_{n}", f"im_{n}"]
            if self.errors is not None:
                header += [f"err_{n}" for n in _NAMES]
            writer.writerow(header)
            for i, t in enumerate(self.grid):
                row = [f"{t:.12g}"]
                for n in _NAMES:
                    z = getattr(self, n)[i]
                    row += [f"{z.real:.12g}", f"{z.imag:.12g}"]
                if self.errors is not None:
                    row += [f"{self.errors[n][i]:.12g}" for n in _NAMES]
                writer.writerow(row)

    @classmethod
    def from_csv(cls, path):
        with open(path) as fh:
            reader = csv.DictReader(fh)
            rows = list(reader)
        grid = np.array([float(r["t"]) for r in rows])
        values = {
            n: np.array(
                [float(r[f"re_{n}"]) + 1j * float(r[f"im_{n}"]) for r in rows]
            )
            for n in _NAMES
        }
        errors = None
        if rows and f"err_{_NAMES[0]}" in rows[0]:
            errors = {
                n: np.array([float(r[f"err_{n}"]) for r in rows]) for n in _NAMES
            }
        return cls(grid=grid, errors=errors, **values)


def _gauge_amplitude(prop, frm, ts):
    """<N| U(t) |frm> relative to the chain's vacuum phase, vectorized."""
    coeffs = prop.modes[-1, :] * prop.modes[frm - 1, :]
    phases = np.exp(
        -1j * np.outer(np.atleast_1d(ts), prop.energies - prop.vacuum_energy)
    )
    return phases @ coeffs


def _sampled(prop, frm, ts, shots, rng):
    exact = _gauge_amplitude(prop, frm, ts)
    prob = np.clip(np.abs(exact) ** 2, 0.0, 1.0)
    mag = np.sqrt(rng.binomial(shots, prob) / shots)
    # phase from <sigma_x>, <sigma_y> of the receiver qubit after starting in
    # the equal superposition with the vacuum: expectation values Re f, Im f
    px = np.clip((1.0 + exact.real) / 2.0, 0, 1)
    py = np.clip((1.0 + exact.imag) / 2.0, 0, 1)
    x = 2.0 * rng.binomial(shots, px) / shots - 1.0
    y = 2.0 * rng.binomial(shots, py) / shots - 1.0
    est = mag * np.exp(1j * np.angle(x + 1j * y))
    err = np.sqrt(prob * (1.0 - prob) / shots)
    return est, err


def estimate_endpoints(prop1, prop2, grid, shots=None, rng=None):
    """Estimate the four endpoint functions on a time grid.

    shots=None gives the exact (infinite-shot) functions; a finite shot count
    simulates the binomial statistics of the end-site tomography.
    """
    grid = np.asarray(grid, dtype=float)
    if shots is not None and shots < 1:
        raise ValueError("shots must be >= 1 (or None for exact mode)")
    sources = {
        "f_n1": (prop1, 1),
        "f_nn": (prop1, prop1.n_sites),
        "g_n1": (prop2, 1),
        "g_nn": (prop2, prop2.n_sites),
    }
    if shots is None:
        values = {
            n: _gauge_amplitude(prop, frm, grid) for n, (prop, frm) in sources.items()
        }
        exact = {
            n: (lambda ts, prop=prop, frm=frm: _gauge_amplitude(prop, frm, ts))
            for n, (prop, frm) in sources.items()
        }
        return EndpointFunctions(grid=grid, exact=exact, **values)
    rng = rng if rng is not None else np.random.default_rng(0)
    values, errors = {}, {}
    for n, (prop, frm) in sources.items():
        values[n], errors[n] = _sampled(prop, frm, grid, shots, rng)
    return EndpointFunctions(grid=grid, errors=errors, **values)


def reconstruct_F_G(endpoints, intervals):
    """Arrival amplitudes of the projected sequence from end data alone.

    F(l) = f_n1(tau_l) - sum_{k<l} F(k) f_nn(tau_l - tau_k), with tau the
    cumulative measurement times; same recursion for G with the g functions.
    """
    intervals = np.asarray(intervals, dtype=float)
    taus = np.cumsum(intervals)
    F = np.zeros(taus.size, dtype=complex)
    G = np.zeros(taus.size, dtype=complex)
    for l in range(taus.size):
        f = endpoints.evaluate("f_n1", taus[l])[0]
        g = endpoints.evaluate("g_n1", taus[l])[0]
        if l > 0:
            lags = taus[l] - taus[:l]
            f -= np.sum(F[:l] * endpoints.evaluate("f_nn", lags))
            g -= np.sum(G[:l] * endpoints.evaluate("g_nn", lags))
        F[l] = f
        G[l] = g
    return F, G


def failure_probabilities(F):
    """Joint failure probability after each step: P(l) = 1 - sum |F(k)|^2."""
    return 1.0 - np.cumsum(np.abs(np.asarray(F)) ** 2)


class EndpointTraceEngine:
    """Scheduler backend driven purely by the four endpoint functions."""

    def __init__(self, endpoints):
        self.endpoints = endpoints
        self.taus = []
        self._F = []
        self._G = []
        self._p = []
        self._P = []
        self._phi = []

    @property
    def survival(self):
        return self._P[-1] if self._P else 1.0

    def _arrivals(self, taus_cand):
        f = self.endpoints.evaluate("f_n1", taus_cand)
        g = self.endpoints.evaluate("g_n1", taus_cand)
        if self.taus:
            prev = np.asarray(self.taus)
            lags = taus_cand[:, None] - prev[None, :]
            f = f - self.endpoints.evaluate("f_nn", lags.ravel()).reshape(
                lags.shape
            ) @ np.asarray(self._F)
            g = g - self.endpoints.evaluate("g_nn", lags.ravel()).reshape(
                lags.shape
            ) @ np.asarray(self._G)
        return f, g

    def peek(self, ts):
        base = self.taus[-1] if self.taus else 0.0
        return self._arrivals(np.atleast_1d(ts) + base)

    def commit(self, t):
        if t < 0:
            raise ValueError("measurement intervals must be nonnegative")
        tau = (self.taus[-1] if self.taus else 0.0) + t
        f, g = self._arrivals(np.array([tau]))
        f, g = complex(f[0]), complex(g[0])
        p_prev = self.survival
        p = 1.0 - abs(f) ** 2 / p_prev
        self.taus.append(tau)
        self._F.append(f)
        self._G.append(g)
        self._p.append(p)
        self._P.append(p_prev * p)
        self._phi.append(float(np.angle(g) - np.angle(f)))

    def trace(self):
        taus = np.asarray(self.taus)
        intervals = np.diff(taus, prepend=0.0)
        F = np.asarray(self._F, dtype=complex)
        G = np.asarray(self._G, dtype=complex)
        P = np.asarray(self._P, dtype=float)
        v = np.concatenate(([1.0], P[:-1])) if P.size else P
        w = 1.0 - np.concatenate(([0.0], np.cumsum(np.abs(G) ** 2)[:-1]))
        return ProjectedTrace(
            intervals=intervals,
            F=F,
            G=G,
            v=v,
            w=w if P.size else P,
            v_next=P,
            w_next=1.0 - np.cumsum(np.abs(G) ** 2) if P.size else P,
            p=np.asarray(self._p, dtype=float),
            P=P,
            phi=np.asarray(self._phi, dtype=float),
        )


@dataclass
class CapabilityReport:
    capable: bool
    schedule: object               # MeasurementSchedule from the greedy search
    failure_reached: float


def certify(endpoints, config, horizon=None):
    """Decide from end data alone whether the pair supports conclusive transfer.

    Runs the same greedy schedule search as the Hamiltonian-level scheduler,
    but against the reconstructed F and G only.
    """
    if horizon is None:
        horizon = config.horizon
    if horizon is None:
        if not np.isfinite(endpoints.horizon):
            raise ValueError("no horizon given and endpoint grid is unbounded")
        horizon = endpoints.horizon / max(config.max_measurements, 1)
    engine = EndpointTraceEngine(endpoints)
    schedule = drive_engine(engine, config, horizon)
    return CapabilityReport(
        capable=schedule.achieved,
        schedule=schedule,
        failure_reached=float(schedule.trace.P[-1]) if schedule.n_measurements else 1.0,
    )
