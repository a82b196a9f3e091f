import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from marketqubo.errors import DegenerateSeriesError, ValidationError
from marketqubo.ingest import ReturnsPanel
from marketqubo.market_graph import (
    build_market_graph,
    distance_from_correlation,
    pearson_correlation,
    read_matrix_csv,
    robust_delta,
    write_matrix_csv,
)

# mpmath, 40 digits
SQRT2 = 1.4142135623730950488
ONE_MINUS_INV_E = 0.63212055882855767840
DELTA_AT_SQRT2 = 0.50693130860476021215


def panel_of(rows):
    rows = np.asarray(rows, dtype=float)
    dates = np.arange(np.datetime64("2015-01-01"), np.datetime64("2015-01-01") + rows.shape[1])
    return ReturnsPanel(tuple(f"A{i}" for i in range(len(rows))), dates, rows)


def random_panel(n, T=60, seed=0):
    rng = np.random.default_rng(seed)
    common = rng.normal(size=T)
    return panel_of(rng.uniform(0, 1, (n, 1)) * common + rng.normal(size=(n, T)))


def test_identical_series_correlate_fully():
    rho = pearson_correlation(panel_of([[0.1, -0.2, 0.3], [0.1, -0.2, 0.3]]))
    assert rho[0, 1] == pytest.approx(1.0, abs=1e-15)


def test_negated_series_anticorrelate():
    a = [0.1, -0.2, 0.3, 0.05]
    rho = pearson_correlation(panel_of([a, [-x for x in a]]))
    assert rho[0, 1] == pytest.approx(-1.0, abs=1e-15)


def test_orthogonal_series():
    rho = pearson_correlation(panel_of([[1, -1, 1, -1], [1, 1, -1, -1]]))
    assert rho[0, 1] == 0.0


def test_matches_numpy_corrcoef():
    panel = random_panel(7, seed=3)
    np.testing.assert_allclose(pearson_correlation(panel), np.corrcoef(panel.returns), atol=1e-14)


def test_zero_variance_asset_named():
    with pytest.raises(DegenerateSeriesError, match="A1"):
        pearson_correlation(panel_of([[0.1, 0.2, 0.3], [0.01, 0.01, 0.01]]))


@pytest.mark.parametrize("rho, d", [(1.0, 0.0), (-1.0, 2.0), (0.0, SQRT2)])
def test_distance_examples(rho, d):
    assert distance_from_correlation(rho) == pytest.approx(d, rel=1e-15, abs=0)


def test_distance_clamps_and_rejects():
    assert distance_from_correlation(1 + 1e-12) == 0.0
    assert distance_from_correlation(-1 - 1e-12) == 2.0
    with pytest.raises(ValidationError):
        distance_from_correlation(1.1)


@pytest.mark.parametrize("d, delta", [(0.0, 0.0), (2.0, ONE_MINUS_INV_E), (SQRT2, DELTA_AT_SQRT2)])
def test_delta_examples(d, delta):
    assert robust_delta(d) == pytest.approx(delta, rel=1e-15, abs=0)


def test_delta_rejects_negative():
    with pytest.raises(ValidationError):
        robust_delta(-0.1)


def test_graph_identical_assets():
    g = build_market_graph(panel_of([[0.1, -0.2, 0.3], [0.1, -0.2, 0.3]]))
    np.testing.assert_allclose(g.dist, np.zeros((2, 2)), atol=1e-7)
    np.testing.assert_allclose(g.delta, np.zeros((2, 2)), atol=1e-7)


def test_graph_anticorrelated_assets():
    a = np.array([0.1, -0.2, 0.3, 0.05])
    g = build_market_graph(panel_of([a, -a]))
    assert g.dist[0, 1] == pytest.approx(2.0, rel=1e-15)
    assert g.delta[0, 1] == pytest.approx(ONE_MINUS_INV_E, rel=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_graph_structure(seed):
    g = build_market_graph(random_panel(3 + seed, seed=seed))
    for m in (g.rho, g.dist, g.delta):
        np.testing.assert_array_equal(m, m.T)
    assert np.all(np.diag(g.rho) == 1.0)
    assert np.all(np.diag(g.dist) == 0.0) and np.all(np.diag(g.delta) == 0.0)
    assert g.dist.min() >= 0 and g.dist.max() <= 2
    assert g.delta.min() >= 0 and g.delta.max() <= 1 - math.exp(-1)
    np.testing.assert_allclose(g.delta, 1 - np.exp(-g.dist / 2), rtol=1e-12, atol=0)


@settings(max_examples=100, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1))
def test_monotone_transforms(a, b):
    if a == b:
        return
    lo, hi = min(a, b), max(a, b)
    d_lo, d_hi = distance_from_correlation(lo), distance_from_correlation(hi)
    assert d_lo >= d_hi
    if d_lo != d_hi:
        assert robust_delta(d_hi) <= robust_delta(d_lo)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.permutations(range(6)))
def test_permutation_equivariance(seed, perm):
    panel = random_panel(6, T=40, seed=seed)
    perm = list(perm)
    permuted = panel_of(panel.returns[perm])
    g, gp = build_market_graph(panel), build_market_graph(permuted)
    for name in ("rho", "dist", "delta"):
        np.testing.assert_allclose(getattr(gp, name), getattr(g, name)[np.ix_(perm, perm)], atol=1e-12)


def test_matrix_csv_round_trip(tmp_path):
    g = build_market_graph(random_panel(4, seed=9))
    path = tmp_path / "delta.csv"
    write_matrix_csv(g.delta, g.assets, path)
    labels, m = read_matrix_csv(path)
    assert labels == g.assets
    np.testing.assert_array_equal(m, g.delta)
