import numpy as np
import pytest
from scipy.linalg import expm

from dualrail import (
    ChainSpec,
    TraceBuilder,
    amplitude,
    norm_identities,
    diagonalize,
    projected_trace,
    single_excitation_matrix,
)
from oracles import (
    dense_projected_trace,
    full_space_evolution,
    random_chain_pair,
    single_excitation_components,
)


def _propagator(couplings):
    return diagonalize(single_excitation_matrix(ChainSpec(couplings=couplings)))


def test_two_site_end_amplitude_is_sine():
    prop = _propagator((1.0,))
    ts = np.linspace(0.0, 10.0, 200)
    psi = np.array([1.0, 0.0], dtype=complex)
    f = prop.end_amplitude_curve(psi, ts)
    assert np.max(np.abs(np.abs(f) - np.abs(np.sin(2.0 * ts)))) < 1e-12


def test_first_arrival_maximum_at_pi_over_4():
    prop = _propagator((1.0,))
    t = np.pi / 4.0
    assert abs(amplitude(prop, 1, 2, t)) == pytest.approx(1.0, abs=1e-12)


def test_evolution_matches_dense_expm():
    rng = np.random.default_rng(0)
    j, _ = random_chain_pair(rng, 7, 2)
    h = single_excitation_matrix(ChainSpec(couplings=j))
    prop = diagonalize(h)
    psi = rng.normal(size=7) + 1j * rng.normal(size=7)
    psi /= np.linalg.norm(psi)
    for t in (0.3, 1.7, 8.9):
        dense = expm(-1j * np.asarray(h.block) * t) @ psi
        assert np.max(np.abs(prop.evolve(psi, t) - dense)) < 1e-10


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_block_evolution_matches_full_space(n):
    rng = np.random.default_rng(n + 10)
    j = tuple(1.0 + rng.uniform(-0.2, 0.2, n - 1))
    h = single_excitation_matrix(ChainSpec(couplings=j))
    prop = diagonalize(h)
    psi0 = np.zeros(n, dtype=complex)
    psi0[0] = 1.0
    for t in (0.5, 2.3):
        full = full_space_evolution(j, 1, t)
        # the full space accumulates the vacuum-free sector phases directly
        block = prop.evolve(psi0, t)
        assert np.max(np.abs(single_excitation_components(full, n) - block)) < 1e-10


def test_end_amplitude_curve_matches_evolve():
    rng = np.random.default_rng(4)
    j, _ = random_chain_pair(rng, 9, 2)
    prop = _propagator(j)
    psi = rng.normal(size=9) + 1j * rng.normal(size=9)
    ts = np.array([0.2, 1.1, 3.3, 7.7])
    curve = prop.end_amplitude_curve(psi, ts)
    direct = np.array([prop.evolve(psi, t)[-1] for t in ts])
    assert np.max(np.abs(curve - direct)) < 1e-12


def test_evolution_is_unitary():
    rng = np.random.default_rng(5)
    j, _ = random_chain_pair(rng, 6, 2)
    prop = _propagator(j)
    psi = rng.normal(size=6) + 1j * rng.normal(size=6)
    psi /= np.linalg.norm(psi)
    out = prop.evolve(psi, 13.7)
    assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-12)


def test_amplitude_index_validation():
    prop = _propagator((1.0, 1.0))
    with pytest.raises(IndexError):
        amplitude(prop, 0, 2, 1.0)
    with pytest.raises(IndexError):
        amplitude(prop, 1, 4, 1.0)


def test_projected_trace_matches_dense_oracle():
    rng = np.random.default_rng(12)
    j1, j2 = random_chain_pair(rng, 5, 4)
    b1 = np.asarray(single_excitation_matrix(ChainSpec(couplings=j1)).block)
    b2 = np.asarray(single_excitation_matrix(ChainSpec(couplings=j2)).block)
    intervals = rng.uniform(0.3, 4.0, 6)
    trace = projected_trace(
        diagonalize(single_excitation_matrix(ChainSpec(couplings=j1))),
        diagonalize(single_excitation_matrix(ChainSpec(couplings=j2))),
        intervals,
    )
    steps = dense_projected_trace(b1, b2, intervals)
    for l, step in enumerate(steps):
        assert abs(trace.F[l] - step["F"]) < 1e-10
        assert abs(trace.G[l] - step["G"]) < 1e-10
        assert abs(trace.v[l] - step["v"]) < 1e-10
        assert abs(trace.w[l] - step["w"]) < 1e-10
        assert abs(trace.v_next[l] - step["v_next"]) < 1e-10
        assert abs(trace.w_next[l] - step["w_next"]) < 1e-10


def test_norm_bookkeeping_identities_random_pairs():
    rng = np.random.default_rng(100)
    worst = {"F": 0.0, "G": 0.0, "P": 0.0}
    for _ in range(100):
        n1 = rng.integers(2, 13)
        n2 = rng.integers(2, 13)
        j1, j2 = random_chain_pair(rng, n1, n2, strength=0.2)
        prop1 = _propagator(j1)
        prop2 = _propagator(j2)
        intervals = rng.uniform(0.2, 5.0, 5)
        res = norm_identities(projected_trace(prop1, prop2, intervals))
        for k in worst:
            worst[k] = max(worst[k], res[k])
    assert max(worst.values()) < 1e-9


def test_trace_builder_peek_matches_commit():
    rng = np.random.default_rng(21)
    j1, j2 = random_chain_pair(rng, 6, 6)
    builder = TraceBuilder(_propagator(j1), _propagator(j2))
    builder.commit(1.3)
    t_next = 2.1
    f_peek, g_peek = builder.peek(np.array([t_next]))
    builder.commit(t_next)
    trace = builder.trace()
    assert abs(trace.F[-1] - f_peek[0]) < 1e-12
    assert abs(trace.G[-1] - g_peek[0]) < 1e-12


def test_survival_tracks_projected_norm():
    rng = np.random.default_rng(22)
    j1, j2 = random_chain_pair(rng, 5, 5)
    builder = TraceBuilder(_propagator(j1), _propagator(j2))
    assert builder.survival == 1.0
    for t in (1.0, 2.0, 1.5):
        builder.commit(t)
    trace = builder.trace()
    assert builder.survival == pytest.approx(trace.P[-1], abs=1e-12)


def test_negative_interval_rejected():
    prop = _propagator((1.0,))
    with pytest.raises(ValueError):
        TraceBuilder(prop, prop).commit(-0.1)


def test_diagonalize_rejects_asymmetric_block():
    class Fake:
        block = np.array([[0.0, 1.0], [2.0, 0.0]])
        vacuum_energy = 0.0

    with pytest.raises(ValueError):
        diagonalize(Fake())


def test_trace_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(30)
    j1, j2 = random_chain_pair(rng, 4, 4)
    trace = projected_trace(_propagator(j1), _propagator(j2), [1.0, 2.0])
    path = tmp_path / "trace.csv"
    trace.to_csv(path)
    rows = path.read_text().strip().splitlines()
    assert rows[0].startswith("l,")
    assert len(rows) == 3
