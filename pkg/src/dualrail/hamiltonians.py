"""Disordered Heisenberg chains and their single-excitation matrices.

Chains are uniform Heisenberg chains with fluctuating bond strengths
J_n = J (1 + delta_n), delta_n drawn uniformly from [-Delta, Delta] with an
optional spatial correlation of the signs along the chain.  Units are J = 1,
hbar = 1 throughout, and Pauli matrices (not spin-1/2 operators) are used in
the coupling term, so hopping matrix elements are 2 J.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DisorderConfig",
    "ChainSpec",
    "SingleExcitationHamiltonian",
    "sample_disorder",
    "build_chain",
    "single_excitation_matrix",
    "save_chain",
    "load_chain",
]


@dataclass(frozen=True)
class DisorderConfig:
    """Coupling-fluctuation model: strength Delta, sign correlation c, seed."""

    strength: float = 0.0
    sign_correlation: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.strength < 1.0:
            raise ValueError(
                f"disorder strength must be in [0, 1), got {self.strength}"
            )
        if not 0.0 <= self.sign_correlation <= 1.0:
            raise ValueError(
                f"sign correlation must be in [0, 1], got {self.sign_correlation}"
            )


@dataclass(frozen=True)
class ChainSpec:
    """A single chain: N sites and N-1 bond strengths in units of J."""

    couplings: tuple

    def __post_init__(self):
        if len(self.couplings) < 1:
            raise ValueError("a chain needs at least one bond (N >= 2)")
        if any(j <= 0 for j in self.couplings):
            raise ValueError("all couplings must be strictly positive")

    @property
    def length(self):
        return len(self.couplings) + 1


@dataclass(frozen=True)
class SingleExcitationHamiltonian:
    """(N+1)x(N+1) real symmetric matrix over {vacuum, one excitation at m}.

    Row/column 0 is the all-down vacuum; rows 1..N are the single-excitation
    sites.  The excitation block is tridiagonal.
    """

    matrix: np.ndarray

    @property
    def vacuum_energy(self):
        return float(self.matrix[0, 0])

    @property
    def block(self):
        """The N x N excitation block."""
        return self.matrix[1:, 1:]

    @property
    def n_sites(self):
        return self.matrix.shape[0] - 1


def sample_disorder(config, n_bonds):
    """Draw n_bonds coupling fluctuations delta_n.

    Magnitudes are uniform on [0, Delta]; the sign of delta_n repeats the
    sign of delta_{n-1} with probability c (first sign equiprobable).  At
    c = 0.5 this reduces to i.i.d. uniform draws from [-Delta, Delta].
    """
    if n_bonds < 1:
        raise ValueError("n_bonds must be >= 1")
    if config.strength == 0.0:
        return np.zeros(n_bonds)
    rng = np.random.default_rng(config.seed)
    magnitudes = rng.uniform(0.0, config.strength, n_bonds)
    signs = np.empty(n_bonds)
    signs[0] = 1.0 if rng.random() < 0.5 else -1.0
    keep = rng.random(n_bonds - 1) < config.sign_correlation
    for n in range(1, n_bonds):
        signs[n] = signs[n - 1] if keep[n - 1] else -signs[n - 1]
    return magnitudes * signs


def build_chain(n, config):
    """Chain of n sites with couplings 1 + delta_n (units J = 1)."""
    if n < 2:
        raise ValueError(f"chain length must be >= 2, got {n}")
    deltas = sample_disorder(config, n - 1)
    return ChainSpec(couplings=tuple(1.0 + d for d in deltas))


def single_excitation_matrix(spec):
    """Matrix of H = sum_n J_n sigma_n . sigma_{n+1} on the 0/1-excitation space.

    Off-diagonal hopping is 2 J_n; a diagonal entry for the excitation at m is
    sum over bonds of J_b with sign -1 if bond b touches m, +1 otherwise.  The
    vacuum entry is the plain sum of couplings.
    """
    n = spec.length
    j = np.asarray(spec.couplings)
    total = j.sum()
    h = np.zeros((n + 1, n + 1))
    h[0, 0] = total
    for m in range(1, n + 1):
        # bonds are (m-1, m) and (m, m+1) in 1-based site labels
        touching = 0.0
        if m >= 2:
            touching += j[m - 2]
        if m <= n - 1:
            touching += j[m - 1]
        h[m, m] = total - 2.0 * touching
    for b in range(n - 1):
        h[b + 1, b + 2] = 2.0 * j[b]
        h[b + 2, b + 1] = 2.0 * j[b]
    return SingleExcitationHamiltonian(matrix=h)


def save_chain(spec, path, comment=""):
    """Write a chain spec as flat text: header with N, one coupling per line."""
    with open(path, "w") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write(f"N={spec.length}\n")
        for j in spec.couplings:
            fh.write(f"{j:.17g}\n")


def load_chain(path):
    """Read a chain spec written by save_chain (or by hand)."""
    n = None
    couplings = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("N="):
                n = int(line[2:])
                continue
            couplings.append(float(line))
    if n is None:
        raise ValueError(f"{path}: missing 'N=' header line")
    if len(couplings) != n - 1:
        raise ValueError(
            f"{path}: expected {n - 1} couplings for N={n}, got {len(couplings)}"
        )
    return ChainSpec(couplings=tuple(couplings))
