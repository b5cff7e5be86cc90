"""Exact spectral evolution and the projector-interleaved arrival amplitudes.

All evolution happens inside the single-excitation block of each chain, in the
raw block frame (no vacuum-phase rotation).  The repeated-measurement protocol
alternates unitary evolution with the projector that removes the excitation
from the receiving site of either chain; because the excitation number of each
chain is conserved, the two logical branches never mix and can be propagated
as two independent N-component vectors.
"""

import csv
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpectralPropagator",
    "ExcitationState",
    "ProjectedTrace",
    "TraceBuilder",
    "diagonalize",
    "amplitude",
    "projected_trace",
    "norm_identities",
]


@dataclass(frozen=True)
class SpectralPropagator:
    """Eigendecomposition of a chain's excitation block, for exact U(t)."""

    energies: np.ndarray       # ascending, units J
    modes: np.ndarray          # orthonormal columns
    vacuum_energy: float

    @property
    def n_sites(self):
        return self.energies.size

    def evolve(self, psi, t):
        """Apply exp(-i H t) to an excitation-block vector."""
        coeffs = self.modes.T @ psi
        coeffs = coeffs * np.exp(-1j * self.energies * t)
        return self.modes @ coeffs

    def end_amplitude_curve(self, psi, ts):
        """<N| exp(-i H t) |psi> for an array of times, O(N) per time."""
        coeffs = self.modes.T @ psi
        weights = self.modes[-1, :] * coeffs
        phases = np.exp(-1j * np.outer(np.atleast_1d(ts), self.energies))
        return phases @ weights


def diagonalize(h):
    """Spectral decomposition of the excitation block of a chain Hamiltonian."""
    block = np.asarray(h.block)
    if block.shape[0] != block.shape[1] or not np.allclose(block, block.T):
        raise ValueError("excitation block must be real symmetric")
    energies, modes = np.linalg.eigh(block)
    return SpectralPropagator(
        energies=energies, modes=modes, vacuum_energy=h.vacuum_energy
    )


def amplitude(prop, frm, to, t):
    """Transition amplitude <to| exp(-i H t) |frm>, sites 1-based."""
    n = prop.n_sites
    if not (1 <= frm <= n and 1 <= to <= n):
        raise IndexError(f"site indices must be in 1..{n}")
    phases = np.exp(-1j * prop.energies * t)
    return complex(np.sum(prop.modes[to - 1, :] * phases * prop.modes[frm - 1, :]))


@dataclass
class ExcitationState:
    """One excitation shared between the two chains.

    chain1 carries the beta branch (excitation injected at site 1 of chain 1),
    chain2 the alpha branch.  The joint squared norm is the current survival
    probability of the protocol.
    """

    chain1: np.ndarray
    chain2: np.ndarray

    def norm_squared(self):
        return float(
            np.sum(np.abs(self.chain1) ** 2) + np.sum(np.abs(self.chain2) ** 2)
        )


@dataclass
class ProjectedTrace:
    """Per-step record of the evolve-and-project sequence.

    F and G are the receiving-site amplitudes of the two branches immediately
    before the l-th projection; v and w the squared branch norms at the same
    instant; p the per-step failure probability and P its running product;
    phi the relative phase arg G - arg F that the receiver must undo.
    """

    intervals: np.ndarray
    F: np.ndarray
    G: np.ndarray
    v: np.ndarray
    w: np.ndarray
    v_next: np.ndarray   # squared norms right after the l-th projection
    w_next: np.ndarray
    p: np.ndarray
    P: np.ndarray
    phi: np.ndarray

    @property
    def n_steps(self):
        return self.intervals.size

    @property
    def cumulative_times(self):
        return np.cumsum(self.intervals)

    def to_csv(self, path):
        taus = self.cumulative_times
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["l", "t_l", "tau_l", "absF", "absG", "phi", "p", "P"])
            for i in range(self.n_steps):
                writer.writerow(
                    [
                        i + 1,
                        f"{self.intervals[i]:.12g}",
                        f"{taus[i]:.12g}",
                        f"{abs(self.F[i]):.12g}",
                        f"{abs(self.G[i]):.12g}",
                        f"{self.phi[i]:.12g}",
                        f"{self.p[i]:.12g}",
                        f"{self.P[i]:.12g}",
                    ]
                )


class TraceBuilder:
    """Incremental evolve-then-project simulation of the two branches.

    The internal vectors are kept in the post-projection state, so the
    arrival amplitudes for a candidate next interval t are plain matrix
    elements of U(t) acting on them (``peek``).  ``commit`` performs the
    actual step and appends to the trace.
    """

    def __init__(self, prop1, prop2, weight1=1.0, weight2=1.0):
        self.prop1 = prop1
        self.prop2 = prop2
        self.psi1 = np.zeros(prop1.n_sites, dtype=complex)
        self.psi2 = np.zeros(prop2.n_sites, dtype=complex)
        self.psi1[0] = weight1
        self.psi2[0] = weight2
        self.intervals = []
        self._F = []
        self._G = []
        self._v = []
        self._w = []
        self._v_next = []
        self._w_next = []
        self._p = []
        self._P = []
        self._phi = []

    @property
    def survival(self):
        """P(l) after the steps committed so far (1 before any step)."""
        return self._v_next[-1] if self._v_next else 1.0

    def peek(self, ts):
        """Receiving-site amplitudes (F, G) for candidate next intervals ts."""
        f = self.prop1.end_amplitude_curve(self.psi1, ts)
        g = self.prop2.end_amplitude_curve(self.psi2, ts)
        return f, g

    def commit(self, t):
        if t < 0:
            raise ValueError("measurement intervals must be nonnegative")
        self.psi1 = self.prop1.evolve(self.psi1, t)
        self.psi2 = self.prop2.evolve(self.psi2, t)
        f = complex(self.psi1[-1])
        g = complex(self.psi2[-1])
        v = float(np.sum(np.abs(self.psi1) ** 2))
        w = float(np.sum(np.abs(self.psi2) ** 2))
        p_prev = self._P[-1] if self._P else 1.0
        p = 1.0 - abs(f) ** 2 / p_prev
        self.intervals.append(t)
        self._F.append(f)
        self._G.append(g)
        self._v.append(v)
        self._w.append(w)
        self._p.append(p)
        self._P.append(p_prev * p)
        self._phi.append(float(np.angle(g) - np.angle(f)))
        # projection Q: remove the receiving-site component of both branches
        self.psi1[-1] = 0.0
        self.psi2[-1] = 0.0
        self._v_next.append(float(np.sum(np.abs(self.psi1) ** 2)))
        self._w_next.append(float(np.sum(np.abs(self.psi2) ** 2)))

    def trace(self):
        return ProjectedTrace(
            intervals=np.asarray(self.intervals, dtype=float),
            F=np.asarray(self._F, dtype=complex),
            G=np.asarray(self._G, dtype=complex),
            v=np.asarray(self._v, dtype=float),
            w=np.asarray(self._w, dtype=float),
            v_next=np.asarray(self._v_next, dtype=float),
            w_next=np.asarray(self._w_next, dtype=float),
            p=np.asarray(self._p, dtype=float),
            P=np.asarray(self._P, dtype=float),
            phi=np.asarray(self._phi, dtype=float),
        )


def projected_trace(prop1, prop2, intervals):
    """Run the full evolve-and-project sequence for the given intervals."""
    builder = TraceBuilder(prop1, prop2)
    for t in intervals:
        builder.commit(t)
    return builder.trace()


def norm_identities(trace):
    """Residuals of the norm bookkeeping identities.

    Checks |F(l)|^2 = v(l) - v(l+1), |G(l)|^2 = w(l) - w(l+1), and that the
    running product of per-step failure probabilities equals the squared norm
    of the (l+1)-times projected state.
    """
    res_f = np.abs(np.abs(trace.F) ** 2 - (trace.v - trace.v_next))
    res_g = np.abs(np.abs(trace.G) ** 2 - (trace.w - trace.w_next))
    res_p = np.abs(trace.P - trace.v_next)
    return {
        "F": float(res_f.max(initial=0.0)),
        "G": float(res_g.max(initial=0.0)),
        "P": float(res_p.max(initial=0.0)),
    }
