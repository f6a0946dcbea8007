import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import kstest

from oracles import (
    PUBLISHED_TW1_QUANTILES,
    goe_scaled_largest,
    mp_median_quadpack,
    shape_constants_mp,
    tw1_cdf_painleve,
    tw1_quantile_painleve,
)
from rmtnoise.errors import InvalidArgumentError
from rmtnoise.rmt_core import (
    TWTable,
    adaptive_simpson,
    mp_cdf,
    mp_density,
    mp_edges,
    mp_median,
    shape_params,
    tw1_cdf,
    tw1_quantile,
    tw1_table,
)


def test_table_spans_required_range():
    table = tw1_table()
    assert table.z[0] <= -5.5 and table.z[-1] >= 3.5
    assert np.all(np.diff(table.p) > 0)
    assert table.p[0] < 0.001 and table.p[-1] > 0.999


def test_table_text_round_trip():
    table = tw1_table()
    again = TWTable.from_text(table.to_text())
    np.testing.assert_array_equal(again.z, table.z)
    np.testing.assert_array_equal(again.p, table.p)


def test_table_rejects_non_monotone():
    with pytest.raises(InvalidArgumentError):
        TWTable(z=np.array([0.0, 1.0, 2.0, 3.0]), p=np.array([0.1, 0.3, 0.2, 0.4]), resolution="x")


def test_cdf_round_trip_at_95():
    assert tw1_cdf(tw1_quantile(0.95)) == pytest.approx(0.95, abs=1e-6)


@pytest.mark.parametrize("z", np.linspace(-6.0, 4.0, 41))
def test_cdf_matches_painleve_oracle(z):
    assert tw1_cdf(z) == pytest.approx(tw1_cdf_painleve(z), abs=1e-6)


def test_cdf_at_published_95th_percentile():
    assert tw1_cdf(0.9793) == pytest.approx(0.95, abs=1e-4)


def test_tails_saturate():
    assert tw1_cdf(-10.0) == pytest.approx(0.0, abs=1e-6)
    assert tw1_cdf(10.0) == pytest.approx(1.0, abs=1e-6)
    assert tw1_cdf(-100.0) == 0.0
    assert tw1_cdf(100.0) == 1.0


def test_tail_extrapolation_continuous_at_table_edges():
    table = tw1_table()
    eps = 1e-9
    assert tw1_cdf(table.z[0] - eps) == pytest.approx(tw1_cdf(table.z[0]), rel=1e-6)
    assert tw1_cdf(table.z[-1] + eps) == pytest.approx(tw1_cdf(table.z[-1]), abs=1e-12)


def test_cdf_rejects_non_finite():
    with pytest.raises(InvalidArgumentError):
        tw1_cdf(float("nan"))
    with pytest.raises(InvalidArgumentError):
        tw1_cdf(np.array([0.0, np.inf]))


def test_cdf_array_input():
    z = np.array([[-2.0, 0.0], [1.0, 2.0]])
    out = tw1_cdf(z)
    assert out.shape == z.shape
    assert out[0, 1] == pytest.approx(tw1_cdf(0.0))


def test_cdf_monotone_on_dense_grid():
    p = tw1_cdf(np.linspace(-12.0, 12.0, 10_000))
    assert np.all(np.diff(p) >= 0)


@pytest.mark.parametrize("p, expected", sorted(PUBLISHED_TW1_QUANTILES.items()))
def test_quantile_published_values(p, expected):
    assert tw1_quantile(p) == pytest.approx(expected, abs=1e-4)


@pytest.mark.parametrize("p", [0.001, 0.01, 0.03, 0.1, 0.5, 0.9, 0.97, 0.999])
def test_quantile_matches_painleve_oracle(p):
    assert tw1_quantile(p) == pytest.approx(tw1_quantile_painleve(p), abs=1e-5)


def test_quantile_round_trip_at_one():
    assert tw1_quantile(tw1_cdf(1.0)) == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_quantile_domain(p):
    with pytest.raises(InvalidArgumentError):
        tw1_quantile(p)


@settings(max_examples=200, deadline=None, derandomize=True)
@given(st.floats(min_value=1e-3, max_value=0.999))
def test_quantile_cdf_identity(p):
    assert tw1_cdf(tw1_quantile(p)) == pytest.approx(p, abs=1e-4)


@settings(max_examples=200, deadline=None, derandomize=True)
@given(st.floats(min_value=-5.5, max_value=3.5))
def test_cdf_quantile_identity(z):
    assert tw1_quantile(tw1_cdf(z)) == pytest.approx(z, abs=1e-4)


@settings(max_examples=100, deadline=None, derandomize=True)
@given(st.floats(min_value=1e-3, max_value=0.998), st.floats(min_value=1e-4, max_value=1e-3))
def test_quantile_strictly_increasing(p, dp):
    assert tw1_quantile(p + dp) > tw1_quantile(p)


@pytest.mark.slow
def test_cdf_against_large_goe_monte_carlo():
    # KS critical value at the 0.001 level for the given number of draws
    draws = 4000
    sample = goe_scaled_largest(n=4000, draws=draws, seed=20171)
    assert kstest(sample, tw1_cdf).statistic < 1.95 / math.sqrt(draws)


def test_shape_symmetric_case():
    sp = shape_params(2, 2)
    assert sp.mu == pytest.approx(6.0, rel=1e-15)
    assert sp.gamma == 1.0


def test_shape_small_sample_operating_point():
    mu_ref, xi_ref = shape_constants_mp(256, 3)
    sp = shape_params(256, 3)
    assert mu_ref == pytest.approx(308.54700782440045, rel=1e-14)
    assert xi_ref == pytest.approx(15.559384289252028, rel=1e-14)
    assert sp.mu == pytest.approx(mu_ref, rel=1e-12)
    assert sp.xi == pytest.approx(xi_ref, rel=1e-12)
    assert round(sp.mu, 1) == 308.5 and round(sp.xi, 2) == 15.56


def test_shape_correction_undefined_at_small_sample():
    sp = shape_params(256, 3)
    assert sp.xi_corrected is None
    from rmtnoise.errors import DegenerateShapeError

    with pytest.raises(DegenerateShapeError):
        sp.require_xi_corrected()


def test_shape_corrected_scale_formula():
    sp = shape_params(256, 512)
    ns = 256 * 512
    expected = math.sqrt(ns / (2 + ns) * (sp.xi**2 - 2 * sp.mu**2 / ns))
    assert sp.xi_corrected == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("n, s", [(0, 5), (5, 1), (-3, 10), (2.5, 10)])
def test_shape_rejects_bad_dimensions(n, s):
    with pytest.raises(InvalidArgumentError):
        shape_params(n, s)


@settings(max_examples=150, deadline=None, derandomize=True)
@given(st.integers(1, 5000), st.integers(2, 5000))
def test_shape_invariants(n, s):
    sp = shape_params(n, s)
    assert sp.gamma == n / s
    assert shape_params(n + 1, s).mu > sp.mu
    if n >= 2:
        assert shape_params(s, n).mu == pytest.approx(sp.mu, rel=1e-13)
    if sp.xi_corrected is not None:
        assert 0 < sp.xi_corrected <= sp.xi


@pytest.mark.parametrize(
    "gamma, sigma_sq, expected",
    [(0.0, 7.0, (7.0, 7.0)), (1.0, 1.0, (0.0, 4.0)), (0.25, 1.0, (0.25, 2.25))],
)
def test_mp_edges_exact(gamma, sigma_sq, expected):
    assert mp_edges(gamma, sigma_sq) == pytest.approx(expected, abs=1e-15)


def test_mp_edges_errors():
    with pytest.raises(InvalidArgumentError):
        mp_edges(-0.1)
    with pytest.raises(InvalidArgumentError):
        mp_edges(0.5, 0.0)


@settings(max_examples=100, deadline=None, derandomize=True)
@given(st.floats(min_value=0.0, max_value=50.0), st.floats(min_value=1e-3, max_value=1e3))
def test_mp_edges_properties(gamma, sigma_sq):
    lo, hi = mp_edges(gamma, sigma_sq)
    assert lo <= hi
    assert (1 - math.sqrt(gamma)) ** 2 == pytest.approx((math.sqrt(gamma) - 1) ** 2)
    if gamma > 1e-12:
        assert lo < hi


@pytest.mark.parametrize("gamma", [0.1, 0.5, 0.9])
def test_mp_density_integrates_to_one(gamma):
    lo, hi = mp_edges(gamma)
    assert mp_cdf(hi, gamma) == pytest.approx(1.0, abs=1e-8)


def test_mp_cdf_matches_density_quadrature():
    # fine midpoint rule on the raw density as a sanity check away from the edges
    gamma = 0.5
    lo, hi = mp_edges(gamma)
    x = 1.2
    grid = np.linspace(lo, x, 400_001)
    mid = 0.5 * (grid[1:] + grid[:-1])
    approx = np.sum(mp_density(mid, gamma) * np.diff(grid))
    assert mp_cdf(x, gamma) == pytest.approx(approx, abs=1e-6)


def test_mp_median_against_quadpack_oracle():
    ref = mp_median_quadpack(0.5)
    assert ref == pytest.approx(0.83046588158136, abs=1e-10)
    assert mp_median(0.5) == pytest.approx(ref, abs=1e-6)


@pytest.mark.parametrize("gamma", [0.05, 0.3, 0.75, 1.0])
def test_mp_median_inside_support(gamma):
    lo, hi = mp_edges(gamma)
    med = mp_median(gamma)
    assert lo < med < hi
    assert mp_cdf(med, gamma) == pytest.approx(0.5, abs=1e-9)
    assert med == pytest.approx(mp_median_quadpack(gamma), abs=1e-6)


def test_mp_median_small_gamma_limit():
    assert mp_median(1e-10) == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("gamma", [0.0, -1.0, 1.01, float("nan")])
def test_mp_median_domain(gamma):
    with pytest.raises(InvalidArgumentError):
        mp_median(gamma)


def test_adaptive_simpson_polynomial_and_peak():
    assert adaptive_simpson(lambda x: x**3, 0.0, 2.0) == pytest.approx(4.0, abs=1e-12)
    assert adaptive_simpson(lambda x: math.exp(-100 * x * x), -3, 3) == pytest.approx(math.sqrt(math.pi / 100), abs=1e-9)
