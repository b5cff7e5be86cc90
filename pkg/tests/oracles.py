"""Independent reference implementations used only by the tests.

Everything here deliberately avoids the code paths of the package: the full
many-body Hamiltonian is assembled from explicit Pauli matrices on the whole
2^N space, time evolution uses dense matrix exponentials, and the projected
sequence is evaluated as a literal product of dense matrices.
"""

import numpy as np
from scipy.linalg import expm

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
ID = np.eye(2, dtype=complex)


def _site_operator(op, site, n):
    """op acting on 1-based site of an n-qubit register (site 1 leftmost)."""
    mats = [ID] * n
    mats[site - 1] = op
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def pauli_hamiltonian(couplings):
    """Full 2^N-dimensional H = sum_n J_n sigma_n . sigma_{n+1}."""
    n = len(couplings) + 1
    dim = 2**n
    h = np.zeros((dim, dim), dtype=complex)
    for b, j in enumerate(couplings):
        for op in (SX, SY, SZ):
            h += j * _site_operator(op, b + 1, n) @ _site_operator(op, b + 2, n)
    return h


def basis_index(n, site=None):
    """Computational-basis index: all spins down, optionally site flipped up.

    Spin down is the |0> component of each qubit, site 1 is the leftmost
    (most significant) qubit.
    """
    if site is None:
        return 0
    return 1 << (n - site)


def sector_matrix(couplings):
    """(N+1)x(N+1) restriction of the full H to {vacuum, one excitation}."""
    n = len(couplings) + 1
    h = pauli_hamiltonian(couplings)
    idx = [basis_index(n)] + [basis_index(n, m) for m in range(1, n + 1)]
    return h[np.ix_(idx, idx)].real


def full_space_evolution(couplings, site, t):
    """exp(-i H t) applied to the one-excitation-at-site state, full space."""
    n = len(couplings) + 1
    h = pauli_hamiltonian(couplings)
    psi = np.zeros(2**n, dtype=complex)
    psi[basis_index(n, site)] = 1.0
    return expm(-1j * h * t) @ psi


def single_excitation_components(psi_full, n):
    """The N single-excitation amplitudes of a full-space state."""
    return np.array([psi_full[basis_index(n, m)] for m in range(1, n + 1)])


def dense_projected_trace(block1, block2, intervals):
    """The projected sequence as literal dense matrix products.

    Returns per-step dicts with F, G, branch norms before/after projection,
    and the survival probability of the joint (dual-rail) state.
    """
    n1 = block1.shape[0]
    n2 = block2.shape[0]
    q1 = np.eye(n1, dtype=complex)
    q1[-1, -1] = 0.0
    q2 = np.eye(n2, dtype=complex)
    q2[-1, -1] = 0.0
    psi1 = np.zeros(n1, dtype=complex)
    psi2 = np.zeros(n2, dtype=complex)
    psi1[0] = 1.0
    psi2[0] = 1.0
    steps = []
    for t in intervals:
        psi1 = expm(-1j * block1 * t) @ psi1
        psi2 = expm(-1j * block2 * t) @ psi2
        rec = {
            "F": psi1[-1],
            "G": psi2[-1],
            "v": float(np.vdot(psi1, psi1).real),
            "w": float(np.vdot(psi2, psi2).real),
        }
        psi1 = q1 @ psi1
        psi2 = q2 @ psi2
        rec["v_next"] = float(np.vdot(psi1, psi1).real)
        rec["w_next"] = float(np.vdot(psi2, psi2).real)
        steps.append(rec)
    return steps


def random_chain_pair(rng, n1, n2, strength=0.2):
    """Two coupling tuples with uniform fluctuations, for oracle tests."""
    j1 = 1.0 + rng.uniform(-strength, strength, n1 - 1)
    j2 = 1.0 + rng.uniform(-strength, strength, n2 - 1)
    return tuple(j1), tuple(j2)
