import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvledger import linear as ln
from mvledger import market_data as md
from mvledger.errors import DomainError, ParseError

from reference_data import SWING_PRICES

LABELS4 = ("FBT", "XBI", "ZNS", "CRP")
# published risk coordinates (rows x, y, z) and the matching Gram block
ZTILDE4 = np.array(
    [
        [-0.0514, -0.2530, 0.0, -0.1030],
        [0.3163, 0.3163, 0.3163, 0.3171],
        [0.0, 0.0, 0.0, 0.0024],
    ]
)
V0_4 = np.array(
    [
        [0.1027, 0.1131, 0.1001, 0.1056],
        [0.1131, 0.1641, 0.1001, 0.1264],
        [0.1001, 0.1001, 0.1001, 0.1003],
        [0.1056, 0.1264, 0.1003, 0.1112],
    ]
)
SIGMA0_4 = np.array([0.3205, 0.4050, 0.3163, 0.3334])


def random_panel(rng, n, m, base=100.0):
    r = rng.normal(0.0005, 0.02, size=(n, m))
    a = base * np.vstack([np.ones(m), np.cumprod(1 + r, axis=0)])
    return md.PricePanel(tuple(range(n + 1)), tuple(f"F{j}" for j in range(m)), a, md.Anchor(0, base))


def zero_mean_orthonormal(rng, n, k):
    A = rng.normal(size=(n, k))
    A -= A.mean(axis=0)
    return np.linalg.qr(A)[0]


def test_published_coordinates_reproduce_gram_block():
    rng = np.random.default_rng(7)
    U = zero_mean_orthonormal(rng, 252, 3)
    basis = ln.OrthoBasis(U, ZTILDE4, LABELS4)
    Z0 = basis.risk_matrix()
    rt = ln.RiskTable(LABELS4, np.zeros(4), np.linalg.norm(Z0, axis=0), Z0)
    np.testing.assert_allclose(ln.gram(rt), V0_4, atol=3e-4)
    np.testing.assert_allclose(rt.sigma0, SIGMA0_4, atol=3e-4)


def test_swing_linear_moments():
    panel = md.PricePanel(tuple(range(5)), ("S",), np.array(SWING_PRICES).reshape(-1, 1), md.Anchor(0, 100.0))
    rt = ln.linear_moments(panel)
    assert rt.E0[0] == pytest.approx(0.25)
    np.testing.assert_allclose(rt.Z0[:, 0], [0.5, -1.0, 1.0, -0.25] - np.float64(0.0625))
    assert rt.sigma0[0] == pytest.approx(np.linalg.norm(rt.Z0[:, 0]))


def test_linear_window_must_start_at_anchor():
    panel = md.PricePanel((0, 1, 2), ("A",), [[1.0], [2.0], [3.0]], md.Anchor(1, 2.0))
    with pytest.raises(DomainError, match="anchor"):
        ln.linear_moments(panel)


def two_fund_family(rng, n=120):
    base = random_panel(rng, n, 2)
    fbt, xbi = base.column("F0"), base.column("F1")
    cols = {
        "FBT": fbt,
        "XBI": xbi,
        "UIP": 0.75 * fbt + 0.25 * xbi,
        "UIP2": 0.5 * fbt + 0.5 * xbi,
    }
    r = 0.75 * (fbt[1:] / fbt[:-1] - 1) + 0.25 * (xbi[1:] / xbi[:-1] - 1)
    cols["CRP"] = 100 * np.concatenate([[1.0], np.cumprod(1 + r)])
    return md.PricePanel(base.dates, tuple(cols), np.column_stack(list(cols.values())), base.anchor)


def test_unattended_blends_are_dependent_pivots():
    panel = two_fund_family(np.random.default_rng(1))
    rt = ln.linear_moments(panel)
    basis = ln.orthogonalize(rt)
    # FBT-XBI and FBT span the unattended blends; CRP adds a third direction
    assert basis.k == 3
    assert [s.split()[1] for s in basis.skipped] == ["UIP", "UIP2"]
    x, y = basis.Ztilde[0], basis.Ztilde[1]
    # first direction points from XBI to FBT
    diff = np.linalg.norm(rt.column("FBT") - rt.column("XBI"))
    assert x[0] - x[1] == pytest.approx(diff, rel=1e-12)
    # every unattended blend shares the second coordinate
    np.testing.assert_allclose(y[:4], y[0], rtol=1e-10)
    np.testing.assert_allclose(basis.Ztilde[2, :4], 0.0, atol=1e-12)
    assert abs(basis.Ztilde[2, 4]) > 1e-8


def test_custom_pivots():
    panel = two_fund_family(np.random.default_rng(2))
    rt = ln.linear_moments(panel)
    basis = ln.orthogonalize(rt, ["XBI", {"FBT": 1.0, "XBI": -1.0}, "CRP"])
    assert basis.k == 3
    np.testing.assert_allclose(basis.risk_matrix(), rt.Z0, atol=1e-12)
    with pytest.raises(DomainError):
        ln.orthogonalize(rt, [3.0])


def test_bundle_round_trip_is_exact():
    panel = two_fund_family(np.random.default_rng(3), n=30)
    rt = ln.linear_moments(panel)
    basis = ln.orthogonalize(rt)
    text = ln.save_bundle(basis, rt.E0, dates=panel.dates)
    b = ln.load_bundle(text)
    np.testing.assert_array_equal(b.basis.U, basis.U)
    np.testing.assert_array_equal(b.basis.Ztilde, basis.Ztilde)
    np.testing.assert_array_equal(b.E0, rt.E0)
    assert b.labels == panel.labels
    assert b.dates == panel.dates
    assert b.legend == ln.DEFAULT_LEGEND
    assert ln.save_bundle(b.basis, b.E0, dates=b.dates) == text
    rebuilt = ln.reconstruct_panel(b)
    np.testing.assert_allclose(rebuilt.values, panel.values, rtol=1e-12)


def test_bundle_date_count_checked():
    panel = two_fund_family(np.random.default_rng(4), n=10)
    rt = ln.linear_moments(panel)
    with pytest.raises(DomainError, match="dates"):
        ln.save_bundle(ln.orthogonalize(rt), rt.E0, dates=panel.dates[1:])


@pytest.mark.parametrize(
    "mutate",
    [
        lambda t: t.replace("#E0,1,", "#E0,1,9"),
        lambda t: t.replace("#Ztilde", "#Zt"),
        lambda t: t[: len(t) // 3],
        lambda t: t.replace(",", ";", 1),
    ],
)
def test_bundle_corruption_detected(mutate):
    panel = two_fund_family(np.random.default_rng(5), n=8)
    rt = ln.linear_moments(panel)
    text = ln.save_bundle(ln.orthogonalize(rt), rt.E0, dates=panel.dates)
    with pytest.raises(ParseError):
        ln.load_bundle(mutate(text))


def test_risk_coordinates_of_series():
    rc = ln.risk_coordinates(np.array(SWING_PRICES))
    assert rc.e0 == pytest.approx(0.25)
    assert rc.n == 4


@given(st.integers(0, 2**32 - 1), st.integers(2, 6), st.integers(8, 80))
@settings(max_examples=40, deadline=None)
def test_factorization_invariants(seed, m, n):
    rng = np.random.default_rng(seed)
    panel = random_panel(rng, n, m)
    rt = ln.linear_moments(panel)
    np.testing.assert_allclose(rt.Z0.sum(axis=0), 0.0, atol=1e-12)
    basis = ln.orthogonalize(rt)
    assert basis.orthonormality_error() <= 1e-12
    np.testing.assert_allclose(basis.column_means(), 0.0, atol=1e-12)
    np.testing.assert_allclose(basis.risk_matrix(), rt.Z0, atol=1e-12)
    np.testing.assert_allclose(basis.Ztilde.T @ basis.Ztilde, ln.gram(rt), atol=1e-12)
