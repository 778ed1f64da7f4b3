import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aoimac.analysis import (
    AnalyticInputs, avg_aoi_closed_form, avg_aoi_moment_path, avg_paoi_closed_form,
    grid_search_optimum, is_stable, optimal_probabilities, pmf_T, prob_queue_nonempty,
    renewal_moments, s2_success_prob, service_probability, stability_threshold,
)
from aoimac.channel import STRONG_MPR, WEAK_MPR, SuccessMatrix
from aoimac.errors import (
    DegenerateInputError, InfeasibleProblemError, InvalidParameterError, StabilityError,
    UnsupportedRegimeError,
)
from oracles import battery_gap_samples, gap_pmf_double_sum


def inp(lam, delta, q1, q2, matrix=STRONG_MPR):
    return AnalyticInputs(lam, delta, q1, q2, matrix)


def test_service_probability():
    assert service_probability(inp(0.3, 0.6, 1, 1)) == pytest.approx(0.758)
    assert service_probability(inp(0.3, 0.6, 0, 1)) == 0.0
    assert service_probability(inp(0.3, 0.0, 0.7, 0.5)) == pytest.approx(0.7 * 0.95)


def test_stability():
    assert stability_threshold(inp(0.3, 0.6, 0.5, 0.8)) == pytest.approx(0.3 / 0.758, abs=1e-4)
    assert is_stable(inp(0.3, 0.6, 0.5, 0.8))
    assert not is_stable(inp(0.3, 0.6, 0.3, 0.8))
    for q1 in np.linspace(0, 1, 11):
        assert not is_stable(inp(0.95, 0.6, q1, 0.5))
    assert is_stable(inp(0.0, 0.6, 0.0, 0.5))


def test_queue_nonempty():
    assert prob_queue_nonempty(inp(0.3, 0.6, 1, 1)) == pytest.approx(0.39578, abs=1e-5)
    assert prob_queue_nonempty(inp(0.0, 0.6, 1, 1)) == 0.0
    with pytest.raises(StabilityError):
        prob_queue_nonempty(inp(0.3, 0.6, 0.3, 0.8))


def test_s2_success_prob():
    assert s2_success_prob(inp(0.3, 0.6, 1, 1)) == pytest.approx(0.7206, abs=1e-4)
    assert s2_success_prob(inp(0.0, 0.6, 1, 1)) == STRONG_MPR.p22
    assert s2_success_prob(inp(0.3, 0.9, 1, 0.5)) == pytest.approx(0.7288, abs=1e-4)


def test_renewal_moments():
    mom = renewal_moments(inp(0.3, 0.6, 1, 0.8))
    assert mom.e_t == pytest.approx(1 / 0.6)
    assert mom.e_t2 == pytest.approx(3.8889, abs=1e-4)
    assert mom.e_x == pytest.approx(2.3130, abs=1e-4)
    one = renewal_moments(inp(0.0, 1.0, 1, 1))
    assert (one.e_t, one.e_t2) == (1.0, 1.0)


def test_average_age_examples():
    assert avg_aoi_closed_form(inp(0.3, 0.6, 1, 1)) == pytest.approx(2.3130, abs=1e-4)
    assert avg_aoi_closed_form(inp(0.0, 1.0, 1, 1)) == pytest.approx(1 / 0.924)
    weak = inp(0.7, 0.9, 1, 0.5467, WEAK_MPR)
    p2 = 0.882 - 0.582 * 0.7 / (0.924 - 0.5467 * 0.409)
    assert s2_success_prob(weak) == pytest.approx(p2, rel=1e-12)
    assert p2 == pytest.approx(0.30032, abs=2e-5)
    assert avg_aoi_closed_form(weak) == pytest.approx(6.091, abs=1e-3)
    for x in (inp(0.3, 0.6, 1, 1), inp(0.0, 1.0, 1, 1), weak):
        assert avg_paoi_closed_form(x) == avg_aoi_closed_form(x)
        assert avg_aoi_moment_path(x) == pytest.approx(avg_aoi_closed_form(x), rel=1e-12)


def test_degenerate_inputs():
    with pytest.raises(DegenerateInputError):
        avg_aoi_closed_form(inp(0.3, 0.0, 1, 1))
    with pytest.raises(DegenerateInputError):
        avg_aoi_closed_form(inp(0.3, 0.6, 1, 0))
    with pytest.raises(StabilityError):
        avg_aoi_closed_form(inp(0.3, 0.6, 0.1, 1))


def test_inputs_validated():
    with pytest.raises(InvalidParameterError):
        inp(1.2, 0.5, 1, 1)
    with pytest.raises(InvalidParameterError):
        inp(0.2, 0.5, -0.1, 1)


stable_points = st.tuples(
    st.floats(0.3, 1.0), st.floats(0.0, 1.0), st.floats(0.3, 1.0), st.floats(0.0, 1.0),
    st.floats(0.0, 0.99), st.floats(0.01, 1.0), st.floats(0.01, 1.0), st.floats(0.01, 1.0),
)


def _build(p):
    p11, f1, p22, f2, lam_frac, delta, q1, q2 = p
    m = SuccessMatrix(p11, f1 * p11, p22, f2 * p22)
    return AnalyticInputs(lam_frac * p11, delta, q1, q2, m)


@settings(max_examples=300, deadline=None)
@given(stable_points)
def test_two_formula_paths_agree(p):
    x = _build(p)
    if not is_stable(x) or s2_success_prob(x) <= 1e-9:
        return
    assert avg_aoi_moment_path(x) == pytest.approx(avg_aoi_closed_form(x), rel=1e-9)
    assert avg_paoi_closed_form(x) == avg_aoi_closed_form(x)


@settings(max_examples=200, deadline=None)
@given(stable_points, st.floats(0.3, 1.0))
def test_age_does_not_depend_on_q1_once_stable(p, q1b):
    x = _build(p)
    y = AnalyticInputs(x.lam, x.delta, q1b, x.q2, x.matrix)
    if not (is_stable(x) and is_stable(y)) or s2_success_prob(x) <= 1e-9:
        return
    assert avg_aoi_closed_form(y) == pytest.approx(avg_aoi_closed_form(x), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.001, 0.5), st.floats(0.01, 1.0))
def test_age_without_data_traffic_falls_with_energy(delta, bump, q2):
    lo = AnalyticInputs(0.0, delta, 1.0, q2, STRONG_MPR)
    hi = AnalyticInputs(0.0, min(1.0, delta + bump), 1.0, q2, STRONG_MPR)
    assert avg_aoi_closed_form(hi) <= avg_aoi_closed_form(lo)
    assert avg_aoi_closed_form(lo) == pytest.approx(1 / (STRONG_MPR.p22 * min(delta, q2)))


@pytest.mark.parametrize("delta,q2", [(0.6, 0.8), (0.3, 0.9), (0.2, 0.2), (1.0, 0.5), (1.0, 1.0)])
def test_pmf_matches_double_sum(delta, q2):
    k = np.arange(1, 60)
    direct = np.array([gap_pmf_double_sum(int(i), delta, q2) for i in k])
    np.testing.assert_allclose(pmf_T(k, delta, q2), direct, rtol=1e-10, atol=1e-15)


def test_pmf_edges():
    assert pmf_T(1, 0.6, 0.8) == pytest.approx(0.6)
    k = np.arange(1, 20)
    np.testing.assert_allclose(pmf_T(k, 1.0, 0.3), 0.7 ** (k - 1) * 0.3)
    with pytest.raises(UnsupportedRegimeError):
        pmf_T(1, 0.8, 0.5)
    with pytest.raises(InvalidParameterError):
        pmf_T(0, 0.5, 0.8)


@pytest.mark.parametrize("delta,q2", [(0.1, 0.1), (0.1, 0.9), (0.5, 0.7), (1.0, 0.1)])
def test_pmf_normalised(delta, q2):
    assert pmf_T(np.arange(1, 10_001), delta, q2).sum() >= 1 - 1e-6


@pytest.mark.parametrize("delta,q2", [(0.6, 0.8), (0.3, 0.9), (1.0, 0.5)])
def test_pmf_moments_match_battery_simulation(delta, q2):
    gaps = battery_gap_samples(delta, q2, 400_000, np.random.default_rng(5))
    k = np.arange(1, 500)
    pmf = pmf_T(k, delta, q2)
    m = min(delta, q2)
    assert gaps.mean() == pytest.approx(1 / m, rel=0.01)
    assert (pmf * k).sum() == pytest.approx(1 / m, rel=1e-9)
    assert (pmf * k * k).sum() == pytest.approx((2 - m) / m**2, rel=1e-9)


def test_optimizer_cases():
    opt = optimal_probabilities(0.3, 0.6, STRONG_MPR)
    assert (opt.q1_star, opt.q2_star, opt.case_id) == (1.0, 1.0, "OpenSet")
    opt = optimal_probabilities(0.7, 0.9, WEAK_MPR, 0.001)
    assert opt.case_id == "Boundary"
    assert opt.q1_star == 1.0
    assert opt.q2_star == pytest.approx(0.224 / 0.409 - 0.001, abs=1e-12)
    with pytest.raises(InfeasibleProblemError):
        optimal_probabilities(0.95, 0.5, STRONG_MPR)
    with pytest.raises(InvalidParameterError):
        optimal_probabilities(0.3, 0.5, STRONG_MPR, xi=0.0)


@pytest.mark.parametrize("lam,delta,matrix", [
    (0.3, 0.6, STRONG_MPR), (0.1, 0.9, WEAK_MPR), (0.6, 0.3, STRONG_MPR), (0.7, 0.9, WEAK_MPR),
])
def test_optimizer_against_grid_search(lam, delta, matrix):
    opt = optimal_probabilities(lam, delta, matrix)
    value = avg_aoi_closed_form(AnalyticInputs(lam, delta, opt.q1_star, opt.q2_star, matrix))
    _, gq2, gvalue = grid_search_optimum(lam, delta, matrix)
    if opt.case_id == "OpenSet":
        assert value == pytest.approx(gvalue, abs=1e-6)
    else:
        assert abs(gq2 - opt.q2_star) <= 0.01
        assert value <= gvalue + 1e-6


def test_boundary_not_always_global_minimum():
    # weak MPR near the feasibility edge with plenty of energy: the closed-form
    # age keeps falling below the stability boundary, so a smaller q2 wins
    lam, delta = 0.599, 0.99
    opt = optimal_probabilities(lam, delta, WEAK_MPR, xi=1e-9)
    boundary = avg_aoi_closed_form(AnalyticInputs(lam, delta, 1.0, opt.q2_star, WEAK_MPR))
    q2 = np.linspace(0.05, opt.q2_star, 2000)
    ages = [avg_aoi_closed_form(AnalyticInputs(lam, delta, 1.0, float(x), WEAK_MPR)) for x in q2]
    assert min(ages) < boundary
