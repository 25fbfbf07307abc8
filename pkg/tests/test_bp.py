import itertools

import numpy as np
import pytest

from daz import MarginalTable, chain_bp_marginals, empirical_marginal_table, tv_chain
from daz.bp import read_marginals_csv, write_marginals_csv


def test_bp_matches_exhaustive_enumeration():
    m = tv_chain(np.array([0.1, -0.4, 0.9]), lam=1.7, sigma=0.6)
    tab = chain_bp_marginals(m, L=7)
    mid = tab.midpoints
    L = 7
    logp = np.zeros((L, L, L))
    for i, j, k in itertools.product(range(L), repeat=3):
        xs = np.array([mid[i], mid[j], mid[k]])
        u = np.sum((xs - m.y) ** 2) / (2 * m.sigma**2) + m.lam * (
            abs(mid[j] - mid[i]) + abs(mid[k] - mid[j])
        )
        logp[i, j, k] = -u
    p = np.exp(logp - logp.max())
    p /= p.sum()
    marg = np.stack([p.sum(axis=(1, 2)), p.sum(axis=(0, 2)), p.sum(axis=(0, 1))])
    assert np.max(np.abs(tab.probs - marg)) < 1e-10


def test_bp_single_node_is_discretized_gaussian():
    m = tv_chain(np.array([0.4]), lam=2.0, sigma=0.3)
    tab = chain_bp_marginals(m, L=41)
    g = np.exp(-((tab.midpoints - 0.4) ** 2) / (2 * 0.09))
    g /= g.sum()
    assert np.max(np.abs(tab.probs[0] - g)) < 1e-12


def test_bp_zero_coupling_factorizes():
    m = tv_chain(np.array([0.3, -0.2]), lam=1e-300, sigma=0.5)
    tab = chain_bp_marginals(m, L=31)
    for i in range(2):
        g = np.exp(-((tab.midpoints - m.y[i]) ** 2) / (2 * 0.25))
        g /= g.sum()
        assert np.max(np.abs(tab.probs[i] - g)) < 1e-12


def test_bp_reversal_symmetry():
    y = np.array([0.1, -0.4, 0.9, 0.3])
    a = chain_bp_marginals(tv_chain(y, lam=1.7, sigma=0.6), L=9)
    b = chain_bp_marginals(tv_chain(y[::-1].copy(), lam=1.7, sigma=0.6), L=9)
    assert np.max(np.abs(a.probs - b.probs[::-1])) < 1e-12


def test_bp_strong_coupling_stays_finite():
    m = tv_chain(np.array([0.0, 1.0, 0.0]), lam=1000.0, sigma=0.1)
    tab = chain_bp_marginals(m, L=64)
    assert np.all(np.isfinite(tab.probs))
    assert np.allclose(tab.probs.sum(axis=1), 1.0, atol=1e-10)


def test_bp_default_window_covers_data():
    m = tv_chain(np.array([-1.0, 2.0]), lam=1.0, sigma=0.5)
    tab = chain_bp_marginals(m, L=16)
    assert tab.edges[0] == pytest.approx(-3.0)
    assert tab.edges[-1] == pytest.approx(4.0)


def test_marginal_table_validation():
    edges = np.linspace(0, 1, 5)
    with pytest.raises(ValueError):
        MarginalTable(edges=edges, probs=np.full((2, 3), 0.25))
    bad = np.full((2, 4), 0.3)
    with pytest.raises(ValueError):
        MarginalTable(edges=edges, probs=bad)


def test_empirical_marginal_table_counts():
    states = np.array([[0.1, 0.9], [0.3, 0.9], [2.0, -1.0]])
    tab = empirical_marginal_table(states, 0.0, 1.0, 2)
    assert np.allclose(tab.probs[0], [2 / 3, 1 / 3])
    assert np.allclose(tab.probs[1], [1 / 3, 2 / 3])


def test_marginals_csv_round_trip(tmp_path):
    m = tv_chain(np.array([0.2, -0.1, 0.5]), lam=1.0, sigma=0.4)
    tab = chain_bp_marginals(m, L=12)
    path = tmp_path / "m.csv"
    write_marginals_csv(path, tab, comment="config_hash=xyz")
    mids, probs = read_marginals_csv(path)
    assert np.allclose(mids, tab.midpoints)
    assert np.allclose(probs, tab.probs)
    lines = path.read_text().splitlines()
    assert lines[0] == "# config_hash=xyz"
    assert len(lines[1].split(",")) == 12
