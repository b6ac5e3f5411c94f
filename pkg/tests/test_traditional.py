import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvledger import market_data as md
from mvledger import traditional as tr
from mvledger.errors import DomainError
from mvledger.portfolio import Weights

from oracles import random_psd_instance, sliced_grid_min_variance, two_pass_moments
from reference_data import DECEMBER_DATES, DECEMBER_LABELS, DECEMBER_VALUES

# FBT and XBI annualized moments over 2014
FX = tr.MomentTable.from_moments(("FBT", "XBI"), [0.4245, 0.4324], [[0.0705, 0.0804], [0.0804, 0.1219]])


def test_moments_small_example():
    panel = md.PricePanel((0, 1, 2), ("A",), [[100.0], [110.0], [99.0]])
    mt = tr.estimate_moments(panel, periods_per_year=252)
    assert mt.E[0] == pytest.approx(0.0, abs=1e-12)
    assert mt.V[0, 0] == pytest.approx(252 * 0.01, rel=1e-12)
    assert mt.sigma[0] == pytest.approx(np.sqrt(2.52), rel=1e-12)


def test_moments_match_loop_oracle():
    panel = md.PricePanel(DECEMBER_DATES, DECEMBER_LABELS, DECEMBER_VALUES)
    mt = tr.estimate_moments(panel, 252)
    E, V = two_pass_moments(DECEMBER_VALUES, 252)
    np.testing.assert_allclose(mt.E, E, rtol=1e-12)
    np.testing.assert_allclose(mt.V, V, rtol=1e-10, atol=1e-15)
    np.testing.assert_allclose(mt.sigma, np.sqrt(np.diag(V)), rtol=1e-10)


def test_moments_need_three_dates():
    with pytest.raises(DomainError):
        tr.estimate_moments(md.PricePanel((0, 1), ("A",), [[1.0], [2.0]]))


def test_two_fund_frontier_is_linear_in_weights():
    fr = tr.efficient_frontier(FX, 5)
    np.testing.assert_allclose(fr.weights[:, 0], [1, 0.75, 0.5, 0.25, 0], atol=1e-9)
    np.testing.assert_allclose(fr.targets, np.linspace(0.4245, 0.4324, 5), atol=1e-12)
    np.testing.assert_allclose(fr.achieved[:, 0], fr.targets, atol=1e-12)


def test_reallocated_blend_stats():
    e, s = tr.portfolio_stats(FX, Weights(("FBT", "XBI"), [0.75, 0.25]))
    assert e == pytest.approx(0.426475, abs=1e-12)
    assert s == pytest.approx(np.sqrt(0.077425), abs=1e-12)
    path = tr.reallocated_esig_path(FX, "FBT", "XBI", 5)
    assert path[3][0] == 0.75
    assert path[3][1] == pytest.approx(e)


def test_unattended_esig_path_endpoints():
    panel = md.PricePanel(DECEMBER_DATES, DECEMBER_LABELS, DECEMBER_VALUES)
    mt = tr.estimate_moments(panel)
    path = tr.unattended_esig_path(panel, "FBT", "XBI", 3)
    assert path[0][1:] == pytest.approx((mt.E[1], mt.sigma[1]))
    assert path[-1][1:] == pytest.approx((mt.E[0], mt.sigma[0]))


def test_min_variance_interior():
    mt = tr.MomentTable.from_moments(("A", "B"), [0.1, 0.2], [[0.04, 0.0], [0.0, 0.04]])
    np.testing.assert_allclose(tr.min_variance_portfolio(mt), [0.5, 0.5], atol=1e-12)


def test_non_psd_rejected():
    mt = tr.MomentTable.from_moments(("A", "B"), [0.1, 0.2], [[0.01, 0.1], [0.1, 0.01]])
    with pytest.raises(DomainError, match="positive semidefinite"):
        tr.efficient_frontier(mt, 3)


def test_too_many_assets_rejected():
    m = tr.MAX_ASSETS + 1
    mt = tr.MomentTable.from_moments([f"A{i}" for i in range(m)], np.linspace(0.1, 0.2, m), np.eye(m))
    with pytest.raises(DomainError, match="limited"):
        tr.efficient_frontier(mt, 3)


def test_tie_break_prefers_smallest_lexicographic_support():
    # identical assets: any split is optimal, the single asset "A" wins
    mt = tr.MomentTable.from_moments(("B", "A"), [0.1, 0.1], [[0.04, 0.04], [0.04, 0.04]])
    np.testing.assert_allclose(tr.min_variance_portfolio(mt), [0.0, 1.0])


@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3]))
@settings(max_examples=25, deadline=None)
def test_frontier_against_grid(seed, m):
    rng = np.random.default_rng(seed)
    E, V = random_psd_instance(rng, m)
    mt = tr.MomentTable.from_moments([f"A{i}" for i in range(m)], E, V)
    fr = tr.efficient_frontier(mt, 5)
    assert np.all(fr.weights >= 0)
    np.testing.assert_allclose(fr.weights.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(np.diff(fr.achieved[:, 0]) >= -1e-12)
    for t, p in zip(fr.targets[1:], fr.weights[1:]):
        assert E @ p == pytest.approx(t, abs=1e-9)
        assert p @ mt.V @ p <= sliced_grid_min_variance(E, mt.V, t) + 1e-6
