"""Error probabilities, the dual adversary search, and the bound verifiers."""

import numpy as np
import pytest

from loccdetect.analysis import (
    error_report,
    helstrom_error,
    prior_weighted_worst_case,
    verify_blind_spot_bound,
    verify_ppt_trace_bound,
    worst_case_value,
)
from loccdetect.errors import ContractError, ValidationError
from loccdetect.measurements import build_reference, build_t_tilde, build_t_tilde2
from loccdetect.operators import BipartiteOperator
from loccdetect.states import make_spectrum, schmidt_state, uniform_spectrum
from loccdetect.twirl import random_phi_symmetric_ppt

S64 = make_spectrum([0.6, 0.4], 2)
S55 = make_spectrum([0.5, 0.5], 2)


def random_spectrum(rng, d=None):
    d = d or int(rng.integers(2, 7))
    return make_spectrum(np.sort(rng.dirichlet(np.ones(d)))[::-1], d)


def feasible_random_search(t, ket, theta, rng, trials):
    """Independent brute-force adversary: random complement states mixed with
    the target to meet the overlap constraint, plus feasible raw pure states."""
    dim = len(ket)
    p_target = float(np.real(np.vdot(ket, t @ ket)))
    vs = rng.standard_normal((trials, dim)) + 1j * rng.standard_normal((trials, dim))
    vs /= np.linalg.norm(vs, axis=1)[:, None]
    comp = vs - np.outer(vs @ ket.conj(), ket)
    norms = np.linalg.norm(comp, axis=1)
    keep = norms > 1e-12
    comp = comp[keep] / norms[keep, None]
    comp_scores = np.real(np.einsum("ij,jk,ik->i", comp.conj(), t, comp))
    best = float((theta * p_target + (1.0 - theta) * comp_scores).max())
    overlaps = np.abs(vs @ ket.conj()) ** 2
    feas = overlaps <= theta
    if feas.any():
        raw = np.real(np.einsum("ij,jk,ik->i", vs[feas].conj(), t, vs[feas]))
        best = max(best, float(raw.max()))
    return best


# ---------------------------------------------------------------------------
# Helstrom baseline
# ---------------------------------------------------------------------------


def test_helstrom_orthogonal_alternative():
    rho = schmidt_state(S64).density
    sigma = BipartiteOperator(2, (np.eye(4) - rho.matrix) / 3.0)
    assert abs(helstrom_error(rho, sigma)) <= 1e-12


def test_helstrom_pure_overlap():
    # Two pure states with squared overlap 0.36: error (1 - 0.8)/2 = 0.1.
    rho = schmidt_state(S64).density
    ket = np.zeros(4, dtype=complex)
    ket[0] = np.sqrt(0.36) / np.sqrt(0.6)  # overlap with sqrt(0.6)|00>+sqrt(0.4)|11>
    ket[1] = np.sqrt(1 - abs(ket[0]) ** 2)
    sigma = BipartiteOperator(2, np.outer(ket, ket.conj()))
    theta = abs(np.vdot(schmidt_state(S64).ket, ket)) ** 2
    assert abs(theta - 0.36) <= 1e-12
    assert abs(helstrom_error(rho, sigma) - 0.1) <= 1e-12


def test_helstrom_identical_states():
    rho = schmidt_state(S64).density
    assert abs(helstrom_error(rho, rho) - 0.5) <= 1e-12


def test_helstrom_rejects_non_state():
    rho = schmidt_state(S64).density
    with pytest.raises(ContractError):
        helstrom_error(rho, BipartiteOperator(2, 2 * np.eye(4)))


# ---------------------------------------------------------------------------
# worst_case_value
# ---------------------------------------------------------------------------


def test_worst_case_t_tilde_closed_forms():
    rho = schmidt_state(S64).density
    t = build_t_tilde(S64).operator
    adv = worst_case_value(t, rho, 0.2)
    assert abs(adv.value - 0.5) <= 1e-9  # (theta + lam)/(1 + lam)
    adv0 = worst_case_value(t, rho, 0.0)
    assert abs(adv0.value - 0.375) <= 1e-9  # lam/(1 + lam)
    assert adv0.dual_mu == np.inf


def test_worst_case_helstrom_effect_saturates_overlap():
    rho = schmidt_state(S64).density
    t = build_reference(S64, "helstrom").operator
    for theta in (0.0, 0.3, 0.7):
        adv = worst_case_value(t, rho, theta)
        assert abs(adv.value - theta) <= 1e-9


def test_worst_case_rejects_bad_inputs():
    rho = schmidt_state(S64).density
    t = build_t_tilde(S64).operator
    with pytest.raises(ValidationError):
        worst_case_value(t, rho, 1.5)
    with pytest.raises(ContractError):
        worst_case_value(BipartiteOperator(2, 2 * np.eye(4)), rho, 0.2)


@pytest.mark.parametrize("seed", range(10))
def test_worst_case_primal_dual_agreement(seed):
    # 5 instances per seed: dual value, feasibility, and achievement by sigma*.
    rng = np.random.default_rng(300 + seed)
    for _ in range(5):
        d = int(rng.integers(2, 4))
        t = random_phi_symmetric_ppt(d, int(rng.integers(0, 10000)))
        s = random_spectrum(rng, d)
        st = schmidt_state(s)
        theta = float(rng.uniform(0.0, 1.0))
        adv = worst_case_value(t, st.density, theta)
        sig = adv.sigma_star.matrix
        assert abs(np.trace(sig).real - 1.0) <= 1e-10
        assert np.linalg.eigvalsh(sig)[0] >= -1e-10
        assert np.real(np.trace(st.density.matrix @ sig)) <= theta + 1e-8
        achieved = float(np.real(np.trace(t.matrix @ sig)))
        assert achieved >= adv.value - 1e-6


@pytest.mark.parametrize("seed", range(5))
def test_worst_case_never_beaten_by_random_search(seed):
    rng = np.random.default_rng(500 + seed)
    for _ in range(4):
        d = int(rng.integers(2, 4))
        t = random_phi_symmetric_ppt(d, int(rng.integers(0, 10000)))
        s = random_spectrum(rng, d)
        st = schmidt_state(s)
        theta = float(rng.uniform(0.0, 0.9))
        adv = worst_case_value(t, st.density, theta)
        brute = feasible_random_search(t.matrix, st.ket, theta, rng, trials=2000)
        assert brute <= adv.value + 1e-6


# ---------------------------------------------------------------------------
# error_report
# ---------------------------------------------------------------------------


def test_report_maximally_entangled_closed_form():
    report = error_report(S55, 0.0)
    assert abs(report.p_err - 1.0 / 6.0) <= 1e-9
    assert abs(report.max_entangled_value - 1.0 / 6.0) <= 1e-12


def test_report_064_values():
    report = error_report(S64, 0.0)
    assert abs(report.p_err - 0.1875) <= 1e-9
    assert abs(report.lower_thm2 - 0.6 * (2.0 / 3.0) / (2.0 + 7.0 * np.sqrt(2.0 / 3.0))) <= 1e-12
    assert abs(report.lower_thm2 - 0.051843852) <= 1e-8
    assert abs(report.lower_simple - 1.0 / 9.0) <= 1e-12
    assert report.max_entangled_value is None
    assert report.active_lower == "lower_simple"


def test_report_product_state_floor_vanishes():
    report = error_report(make_spectrum([1.0, 0.0], 2), 0.0)
    assert report.lower_thm2 == 0.0
    assert abs(report.p_err - 0.25) <= 1e-9  # (0 + 1)/(2 (1 + 1))


@pytest.mark.parametrize("theta", [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0])
def test_report_guarantee_equalities_on_theta_grid(theta):
    for s in (S64, S55, make_spectrum([0.5, 0.3, 0.2], 3)):
        r1 = error_report(s, theta, build_t_tilde(s))
        assert abs(r1.p_err - r1.upper_1way) <= 1e-9
        r2 = error_report(s, theta, build_t_tilde2(s))
        assert abs(r2.p_err - r2.upper_2way) <= 1e-9
        # Lower floor / upper guarantee sandwich and the unrestricted baseline.
        assert r1.lower_thm2 <= r1.p_err + 1e-12
        assert r1.helstrom <= r1.p_err + 1e-12


@pytest.mark.parametrize("name", ["q0", "q", "r", "t-tilde", "t-tilde2", "product"])
def test_report_never_beats_unrestricted_baseline(name):
    # Locally implementable (PPT) effects cannot undercut theta/2.
    from loccdetect.measurements import build_measurement

    for theta in (0.0, 0.3, 0.8):
        r = error_report(S64, theta, build_measurement(name, S64))
        assert r.helstrom <= r.p_err + 1e-9


def test_report_monotone_bound_shapes():
    # At fixed alpha = 0.6 the upper curve increases and the simple floor
    # decreases across the admissible lam range.
    alpha, d = 0.6, 2
    lams = np.linspace(1.0 / d, 1.0 / (1 + alpha**2), 100)
    upper = lams / (2.0 * (1.0 + lams))
    simple = (1.0 / lams - 1.0) / (2.0 * (d * d - 1))
    assert np.all(np.diff(upper) > 0)
    assert np.all(np.diff(simple) < 0)


def test_report_serialization_format():
    text = error_report(S55, 0.0).to_text()
    lines = dict(line.split(" = ") for line in text.splitlines())
    assert lines["p_err"] == "0.166666666667"
    assert lines["max_entangled_value"] == "0.166666666667"
    assert set(lines) == {
        "theta", "helstrom", "worst_case_value", "p_err", "upper_1way",
        "upper_2way", "lower_thm2", "lower_simple", "max_entangled_value",
        "active_lower",
    }


# ---------------------------------------------------------------------------
# verifiers
# ---------------------------------------------------------------------------


def test_trace_bound_t_tilde():
    t = build_t_tilde(S64).operator
    rho = schmidt_state(S64).density
    verdict = verify_ppt_trace_bound(t, rho)
    assert verdict.passed
    assert abs(verdict.margin - (2.0 - 1.0 / 0.6)) <= 1e-9


def test_trace_bound_identity():
    rho = schmidt_state(make_spectrum([0.5, 0.3, 0.2], 3)).density
    verdict = verify_ppt_trace_bound(BipartiteOperator(3, np.eye(9)), rho)
    assert verdict.passed


def test_trace_bound_rejects_non_ppt():
    rho = schmidt_state(S55).density
    with pytest.raises(ContractError):
        verify_ppt_trace_bound(rho, rho)  # entangled projector is not PPT


def test_blind_spot_bound_t_tilde():
    t = build_t_tilde(S64).operator
    verdict = verify_blind_spot_bound(t, S64)
    assert verdict.passed
    # One-sided case: norm 0.375 must reach (2/3) lam alpha ~ 0.3266.
    assert "one_sided_floor" in verdict.detail


def test_blind_spot_bound_not_applicable_for_product_state():
    s = make_spectrum([1.0, 0.0], 2)
    t = build_t_tilde(s).operator
    verdict = verify_blind_spot_bound(t, s)
    assert not verdict.applicable


def test_blind_spot_bound_rejects_asymmetric_effect():
    t = build_reference(S64, "helstrom").operator  # not PPT, fails contract
    with pytest.raises(ContractError):
        verify_blind_spot_bound(t, S64)


@pytest.mark.parametrize("d", [2, 3])
def test_verifier_corpus(d):
    rng = np.random.default_rng(40 + d)
    for seed in range(60):
        t = random_phi_symmetric_ppt(d, 7000 + seed)
        s = random_spectrum(rng, d)
        rho = schmidt_state(s).density
        assert verify_ppt_trace_bound(t, rho).passed
        verdict = verify_blind_spot_bound(t, s)
        assert verdict.passed
        assert verdict.margin >= -1e-9


# ---------------------------------------------------------------------------
# prior weighting
# ---------------------------------------------------------------------------


def test_priors_half_reduces_to_report():
    t = build_t_tilde(S64)
    rho = schmidt_state(S64).density
    weighted = prior_weighted_worst_case(t.operator, rho, 0.0, 0.5)
    report = error_report(S64, 0.0, t)
    assert abs(weighted - report.p_err) <= 1e-12


def test_priors_small_pi0_floor():
    t = build_t_tilde(S64)
    rho = schmidt_state(S64).density
    value = prior_weighted_worst_case(t.operator, rho, 0.0, 0.01)
    floor = min(0.01, 0.99 * 2.0 * 0.6 * (2.0 / 3.0) / (2.0 + 7.0 * np.sqrt(2.0 / 3.0)))
    assert abs(floor - 0.01) <= 1e-12
    assert value >= floor - 1e-9


def test_priors_near_one_limit():
    t = build_t_tilde(S64)
    rho = schmidt_state(S64).density
    value = prior_weighted_worst_case(t.operator, rho, 0.0, 1.0 - 1e-9)
    # One-sided measurement: only the vanishing-weight adversary term is left.
    assert value <= 1e-9


def test_priors_range_check():
    t = build_t_tilde(S64)
    rho = schmidt_state(S64).density
    with pytest.raises(ValidationError):
        prior_weighted_worst_case(t.operator, rho, 0.0, 0.0)
