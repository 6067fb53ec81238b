"""Multi-copy rate tables, exponents, counterexample regime, figure grids."""

import math

import numpy as np
import pytest

from loccdetect.asymptotics import (
    classical_chernoff,
    counterexample_check,
    counterexample_rates,
    cross_validate_small_n,
    figure1_csv,
    figure1_data,
    figure2_csv,
    figure2_data,
    rate_rows,
    rate_table,
)
from loccdetect.errors import ValidationError
from loccdetect.states import make_spectrum

S64 = make_spectrum([0.6, 0.4], 2)


# ---------------------------------------------------------------------------
# rate tables
# ---------------------------------------------------------------------------


def test_rate_table_frozen_row_values():
    t = rate_table(S64, 0.3, 10)
    assert abs(t.upper_rate[9] - 0.58064557) <= 1e-7
    assert abs(t.lower_rate[9] - 0.75513203) <= 1e-7
    assert abs(t.limit - (-math.log(0.6))) <= 1e-15
    n = 10
    direct_upper = (0.3**n + 0.6**n) / (2 * (1 + 0.6**n))
    assert abs(t.upper_bound[9] - direct_upper) <= 1e-15
    assert abs(t.upper_rate[9] + math.log(direct_upper) / n) <= 1e-12


def test_rate_table_branches():
    # Overlap dominates: limit is -log theta.
    t = rate_rows(0.3, 0.5, 0.5, 5)
    assert abs(t.limit - (-math.log(0.5))) <= 1e-15
    # Boundary theta = lam: both branches agree.
    t = rate_rows(0.4, 0.5, 0.4, 5)
    assert abs(t.limit - (-math.log(0.4))) <= 1e-15


def test_rate_table_lower_not_applicable_for_product_state():
    t = rate_rows(1.0, 0.0, 0.3, 5)
    assert not t.lower_applicable
    assert np.isnan(t.lower_bound).all() and np.isnan(t.lower_rate).all()


def test_rate_table_bounds_order_and_convergence():
    t = rate_table(S64, 0.3, 1000)
    assert np.all(t.lower_bound <= t.upper_bound + 1e-15)
    # Exact algebraic envelope of the upper-rate gap,
    # (1/n)(log 2 + log(1 + lam^n) - log(1 + (theta/lam)^n)), which decays
    # to log(2)/n; the bare log(2)/n bound itself only holds once lam^n
    # drops below (theta/lam)^n + tolerance (here from n ~ 35 on).
    gaps_upper = np.abs(t.upper_rate - t.limit)
    n = t.n.astype(float)
    with np.errstate(under="ignore"):
        exact = (math.log(2.0) + np.log1p(0.6**n) - np.log1p(0.5**n)) / n
    np.testing.assert_allclose(gaps_upper, exact, atol=1e-9)
    assert np.all(gaps_upper <= 2.0 * math.log(2.0) / n)
    assert np.all(gaps_upper[34:] <= math.log(2.0) / n[34:] + 1e-9)
    # Lower-rate gap window for n >= 5.
    alpha = S64.alpha
    envelope = (math.log((2 + 7 * alpha) / alpha**2) + 1.0) / n
    gaps_lower = t.lower_rate - t.limit
    tail = slice(4, None)
    assert np.all(gaps_lower[tail] >= 0.0)
    assert np.all(gaps_lower[tail] <= envelope[tail])
    # Monotone shrink of both gaps over the table.
    assert np.all(np.diff(gaps_upper) <= 1e-12)
    assert np.all(np.diff(gaps_lower) <= 1e-12)


def test_rate_table_csv_header():
    text = rate_table(S64, 0.3, 3).to_csv()
    lines = text.splitlines()
    assert lines[0] == "lambda,theta,n,upper_bound,lower_bound,upper_rate,lower_rate,limit"
    assert len(lines) == 4
    first = lines[1].split(",")
    assert first[0] == "0.6" and first[2] == "1"


def test_rate_table_validation():
    with pytest.raises(ValidationError):
        rate_rows(0.6, 0.5, 1.5, 5)
    with pytest.raises(ValidationError):
        rate_rows(0.6, 0.5, 0.3, 0)


# ---------------------------------------------------------------------------
# matrix cross-validation
# ---------------------------------------------------------------------------


def test_cross_validate_example_value():
    verdict = cross_validate_small_n(S64, 0.3, 2)
    assert verdict.passed
    assert "0.165441" in verdict.detail


def test_cross_validate_n1_reduces_to_single_copy():
    from loccdetect.analysis import error_report

    verdict = cross_validate_small_n(S64, 0.3, 1)
    assert verdict.passed
    report = error_report(S64, 0.3)
    assert abs(report.p_err - (0.3 + 0.6) / (2 * 1.6)) <= 1e-9


def test_cross_validate_maximally_entangled_two_copies():
    s = make_spectrum([0.5, 0.5], 2)
    verdict = cross_validate_small_n(s, 0.0, 2)
    assert verdict.passed
    assert "matrix=0.1 " in verdict.detail or "matrix=0.0999999" in verdict.detail


@pytest.mark.parametrize("theta", [0.0, 0.3, 0.7])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_cross_validate_grid(theta, n):
    for s in (S64, make_spectrum([0.5, 0.5], 2), make_spectrum([0.8, 0.2], 2)):
        assert cross_validate_small_n(s, theta, n).passed


def test_cross_validate_respects_entry_cap():
    from loccdetect.errors import SizeCapError

    # d = 2, n = 6 needs a 4096 x 4096 realization, past the default cap.
    with pytest.raises(SizeCapError):
        cross_validate_small_n(S64, 0.3, 6)


# ---------------------------------------------------------------------------
# classical exponent
# ---------------------------------------------------------------------------


def test_chernoff_symmetric_example():
    res = classical_chernoff((0.9, 0.1), (0.1, 0.9))
    assert abs(res.exponent - (-math.log(0.6))) <= 1e-9
    assert abs(res.s_star - 0.5) <= 1e-6
    # Grid-search oracle over s.
    grid = np.linspace(0, 1, 20001)
    vals = 0.9**grid * 0.1 ** (1 - grid) + 0.1**grid * 0.9 ** (1 - grid)
    assert abs(res.exponent - (-math.log(vals.min()))) <= 1e-9


def test_chernoff_equal_distributions():
    res = classical_chernoff((0.7, 0.3), (0.7, 0.3))
    assert abs(res.exponent) <= 1e-12
    assert not res.infinite


def test_chernoff_disjoint_support():
    res = classical_chernoff((1.0, 0.0), (0.0, 1.0))
    assert res.infinite and math.isinf(res.exponent)


def test_chernoff_one_sided_degeneracy():
    # Common support on one outcome only: exponent -log q0.
    res = classical_chernoff((1.0, 0.0), (0.5, 0.5))
    assert abs(res.exponent - math.log(2.0)) <= 1e-9


@pytest.mark.parametrize("lam", [0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95])
def test_chernoff_symmetric_closed_form_sweep(lam):
    res = classical_chernoff((lam, 1 - lam), (1 - lam, lam))
    closed = -math.log(2.0 * math.sqrt(lam * (1.0 - lam)))
    assert abs(res.exponent - closed) <= 1e-9


def test_chernoff_validation():
    with pytest.raises(ValidationError):
        classical_chernoff((0.9, 0.2), (0.5, 0.5))


# ---------------------------------------------------------------------------
# counterexample regime
# ---------------------------------------------------------------------------


def test_counterexample_pass_and_fail():
    assert counterexample_check(make_spectrum([0.9, 0.1], 2)).passed
    v = counterexample_check(make_spectrum([0.5, 0.5], 2))
    assert not v.passed
    # Both rates are reported: product rate 0, minimax ceiling log 2.
    assert abs(v.margin - (0.0 - math.log(2.0))) <= 1e-12


def test_counterexample_boundary_identity():
    a, b = counterexample_rates(0.8)
    assert abs(a - b) <= 1e-12


def test_counterexample_product_state_flagged():
    v = counterexample_check(make_spectrum([1.0, 0.0], 2))
    assert not v.applicable


def test_counterexample_numbers_reported():
    v = counterexample_check(make_spectrum([0.9, 0.1], 2))
    assert "minimax_rate=0.105360515658" in v.detail
    assert "product_rate=0.510825623766" in v.detail


# ---------------------------------------------------------------------------
# figure grids
# ---------------------------------------------------------------------------


def test_figure1_range_and_values():
    data = figure1_data(2, 0.6, grid_size=50)
    lam = data["lambda"]
    assert abs(lam[0] - 0.5) <= 1e-15
    assert abs(lam[-1] - 1.0 / 1.36) <= 1e-12
    assert abs(data["value_upper"][0] - 1.0 / 6.0) <= 1e-12
    assert np.all(np.diff(data["value_upper"]) > 0)
    assert np.all(np.diff(data["value_lower_simple"]) < 0)


def test_figure1_rejects_empty_range():
    with pytest.raises(ValidationError):
        figure1_data(2, 1.2, grid_size=10)  # 1 + alpha^2 > d


def test_figure1_csv_header():
    lines = figure1_csv(2, 0.6, grid_size=5).splitlines()
    assert lines[0] == "lambda,value_upper,value_lower_thm2,value_lower_simple"
    assert len(lines) == 6


def test_figure2_finite_n_membership():
    data = figure2_data(1, grid_size=21)
    idx = np.flatnonzero((np.abs(data["lambda"] - 0.5) < 1e-12) & (data["theta"] == 0.0))[0]
    assert abs(data["value"][idx] - 1.0 / 6.0) <= 1e-12
    assert data["level_02"][idx]
    assert not data["level_01"][idx]


def test_figure2_limit_membership():
    data = figure2_data(math.inf, grid_size=11)
    idx = np.flatnonzero((np.abs(data["lambda"] - 0.3) < 1e-12)
                         & (np.abs(data["theta"] - 0.2) < 1e-12))[0]
    assert abs(data["value"][idx] - 0.3) <= 1e-12
    assert data["level_03"][idx]  # boundary inclusive
    assert not data["level_02"][idx]


def test_figure2_csv_shape_and_header():
    lines = figure2_csv(4, grid_size=10).splitlines()
    assert lines[0] == "lambda,theta,value,level_01,level_02,level_03,level_04,level_05"
    assert len(lines) == 101
    cells = lines[1].split(",")
    assert cells[3] in ("0", "1")


def test_figure2_validation():
    with pytest.raises(ValidationError):
        figure2_data(0, grid_size=10)
