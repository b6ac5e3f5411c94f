import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mvledger import returns as rt
from mvledger.errors import DomainError

from reference_data import SWING_PRICES

prices = arrays(np.float64, st.integers(2, 60), elements=st.floats(0.5, 500))


def test_swing_returns_and_discounts():
    r = rt.periodic_returns(SWING_PRICES).values
    d = rt.periodic_discounts(SWING_PRICES).values
    np.testing.assert_allclose(r, [0.5, -2 / 3, 2.0, -1 / 6])
    np.testing.assert_allclose(d, [1 / 3, -2.0, 2 / 3, -0.2])


def test_swing_identity_report():
    rep = rt.interest_identity_report(SWING_PRICES, periods_per_year=4)
    assert rep.e_r == pytest.approx(5 / 3, abs=1e-12)
    assert rep.e_d == pytest.approx(-1.2, abs=1e-12)
    assert rep.e0 == pytest.approx(0.25, abs=1e-12)
    assert rep.e1 == pytest.approx(0.20, abs=1e-12)
    assert rep.product_0_1 == pytest.approx(1.0, abs=1e-12)
    assert rep.product_r_d == pytest.approx(88 / 15, abs=1e-12)
    assert set(rep.as_dict()) == {"e_r", "e_d", "e0", "e1", "product_r_d", "product_0_1"}


def test_effective_return_and_discount():
    assert rt.effective_return(100, 125) == 0.25
    assert rt.effective_discount(100, 125) == 0.2
    with pytest.raises(DomainError):
        rt.effective_return(0, 1)


def test_annualized_std_is_population():
    ps = rt.PeriodicSeries("return", [0.1, -0.1], periods_per_year=4)
    assert rt.annualized_std(ps) == pytest.approx(2 * 0.1)
    assert rt.annualized_mean(ps) == 0.0


def test_bad_inputs():
    with pytest.raises(DomainError):
        rt.periodic_returns([1.0])
    with pytest.raises(DomainError):
        rt.periodic_returns([1.0, -2.0])
    with pytest.raises(DomainError):
        rt.anchored_increments([1.0, 2.0], "middle")
    with pytest.raises(DomainError):
        rt.PeriodicSeries("log", [0.1])


@given(prices)
@settings(max_examples=100, deadline=None)
def test_return_discount_conjugate_each_period(a):
    r = rt.periodic_returns(a).values
    d = rt.periodic_discounts(a).values
    np.testing.assert_allclose((1 + r) * (1 - d), 1.0, rtol=1e-12)


@given(prices)
@settings(max_examples=100, deadline=None)
def test_anchored_increments_telescope(a):
    rep = rt.interest_identity_report(a)
    assert rep.e0 == pytest.approx(rt.effective_return(a[0], a[-1]), rel=1e-9, abs=1e-12)
    assert rep.e1 == pytest.approx(rt.effective_discount(a[0], a[-1]), rel=1e-9, abs=1e-12)
    assert abs(rep.product_0_1 - 1) <= 1e-12 * max(1.0, a.max() / a.min())
