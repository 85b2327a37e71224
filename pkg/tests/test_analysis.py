from fractions import Fraction

import pytest

from contention.analysis import (
    AnalysisError,
    DivergentSeriesError,
    InvalidTruncationError,
    NoFiniteTruncationError,
    bound_report,
    deadline_comparison,
    delta_bound,
    derive_constants,
    feasibility,
    min_truncation_k1,
    min_truncation_k2,
    persistent_distribution,
    solve_expectations,
    y1_upper,
    y30_upper,
)
from contention.schedule import build_schedule

C = Fraction(11, 10)
P = 0.75


def test_derive_constants_at_three_quarters():
    consts = derive_constants(P)
    assert consts.gamma == Fraction(15, 16)
    assert consts.delta == Fraction(5, 8)
    assert consts.beta == Fraction(55, 64)


@pytest.mark.parametrize("p,gamma,delta,beta", [(0, 0, 1, 1), (1, 1, 1, 1)])
def test_derive_constants_degenerate(p, gamma, delta, beta):
    consts = derive_constants(p)
    assert (consts.gamma, consts.delta, consts.beta) == (gamma, delta, beta)


def test_feasibility_reference_point():
    report = feasibility(C, P)
    assert report.thresholds["inv_1mp"] == 4
    assert report.thresholds["inv_delta"] == Fraction(8, 5)
    assert report.thresholds["inv_beta"] == Fraction(64, 55)
    assert report.thresholds["persist_lb"] == Fraction(16, 15)
    assert report.finite_all_P and report.persistent_diverges and report.feasible


def test_feasibility_below_persistence_threshold():
    report = feasibility(Fraction(21, 20), P)  # 1.05 < 16/15
    assert not report.persistent_diverges
    assert not report.feasible


def test_feasibility_above_finiteness_threshold():
    report = feasibility(Fraction(6, 5), P)  # 1.2 > 64/55
    assert not report.finite_all_P
    assert not report.feasible


def test_feasibility_flips_exactly_at_thresholds():
    eps = Fraction(1, 10**6)
    # persistence boundary at 16/15: c*gamma > 1 must be strict
    assert not feasibility(Fraction(16, 15), P).persistent_diverges
    assert feasibility(Fraction(16, 15) + eps, P).persistent_diverges
    # finiteness boundary at 64/55: c < 64/55 must be strict
    assert feasibility(Fraction(64, 55) - eps, P).finite_all_P
    assert not feasibility(Fraction(64, 55), P).finite_all_P


def test_y1_upper_values():
    assert y1_upper(C, P, 0) == pytest.approx(22.7586206896, rel=1e-9)
    assert y1_upper(C, P, 1) == pytest.approx(22.7586206896 * 4.4, rel=1e-9)


def test_y1_upper_divergent():
    with pytest.raises(DivergentSeriesError):
        y1_upper(Fraction(13, 10), 0.2, 0)  # c(1-p) = 1.04


def test_y1_upper_c1_guard():
    with pytest.raises(AnalysisError):
        y1_upper(Fraction(1), P, 0)


def test_min_truncation_k1():
    assert min_truncation_k1(C, P) == 2
    # k=1 fails the contraction inequality: 0.625 * 2.1 = 1.3125 >= 1
    delta = derive_constants(P).delta
    assert delta * (C + 1) >= 1


def test_min_truncation_k2_against_brute_force():
    beta = derive_constants(P).beta
    brute = next(k for k in range(1, 21) if beta**k * C ** (k - 1) * (C + 1) < 1)
    assert brute == 12
    assert min_truncation_k2(C, P) == brute


def test_min_truncation_no_finite_value():
    with pytest.raises(NoFiniteTruncationError):
        min_truncation_k1(Fraction(6, 5), 0.05)  # delta*c > 1


def test_delta_bound_reference_value():
    assert 755.0 <= delta_bound(C, P, 2) <= 756.0


def test_delta_bound_too_small_truncation():
    with pytest.raises(InvalidTruncationError):
        delta_bound(C, P, 1)


def test_delta_bound_larger_truncation_regression():
    # larger truncation tightens the bound; value frozen from exact evaluation
    assert delta_bound(C, P, 3) == pytest.approx(570.8645304357467, rel=1e-12)
    assert delta_bound(C, P, 3) < delta_bound(C, P, 2)


def test_y30_upper_reference_value():
    value = y30_upper(C, P, 2)
    assert 2700 <= value <= 2759
    assert value == pytest.approx(2756.5626009852213, rel=1e-12)


def test_y30_upper_larger_truncation_regression():
    assert y30_upper(C, P, 3) == pytest.approx(2091.6837381401165, rel=1e-12)


def test_y30_upper_divergent():
    with pytest.raises(DivergentSeriesError):
        y30_upper(Fraction(6, 5), 0.05, 2)


def test_bound_report_consistency():
    report = bound_report(C, P)
    assert report.k1_min == 2 and report.k1_used == 2
    assert report.y30_upper >= report.y1k_upper[0][1]
    ratios = [b / a for (_, a), (_, b) in zip(report.y1k_upper, report.y1k_upper[1:])]
    assert all(r == pytest.approx(4.4, rel=1e-9) for r in ratios)


def lone_player_series_oracle(c: Fraction, p: Fraction, k: int, terms: int = 200) -> float:
    # independent direct summation: sum_{l>=k} (s_l - s_{k-1}) p (1-p)^(l-k)
    sched = build_schedule(c, k + terms)
    s_prev = sched.s[k - 1] if k else 0
    total = Fraction(0)
    for ell in range(k, k + terms + 1):
        total += (sched.s[ell] - s_prev) * Fraction(p) * (1 - Fraction(p)) ** (ell - k)
    return float(total)


def test_paper_series_lone_player_expectation():
    table = solve_expectations(C, P, "paper-series", truncation_K=10)
    oracle = lone_player_series_oracle(C, Fraction(3, 4), 0)
    assert oracle == pytest.approx(2.668, abs=0.001)
    assert table.y1[0].lower <= oracle <= table.y1[0].upper
    assert table.y1[0].width < 1e-9
    for k in (1, 2, 5):
        assert table.y1[k].contains(lone_player_series_oracle(C, Fraction(3, 4), k), slack=1e-9)


def test_literal_lone_player_is_one():
    table = solve_expectations(C, P, "literal", truncation_K=20)
    assert all(iv.lower == iv.upper == 1.0 for iv in table.y1)


def test_enclosures_shrink_with_truncation():
    widths = [
        solve_expectations(C, P, "literal", truncation_K=K).y3[0].width for K in (20, 60, 150, 300)
    ]
    assert widths == sorted(widths, reverse=True)
    assert widths[-1] < 1e-3


def test_literal_enclosure_tight_reference():
    iv = solve_expectations(C, P, "literal", truncation_K=300).y3[0]
    assert iv.lower == pytest.approx(45.0398, abs=0.001)
    assert iv.width < 1e-3
    assert iv.upper < 2759


def test_paper_series_dominates_literal():
    lit = solve_expectations(C, P, "literal", truncation_K=300)
    pap = solve_expectations(C, P, "paper-series", truncation_K=300)
    for k in range(0, 301, 50):
        assert pap.y3[k].lower >= lit.y3[k].lower - 1e-9


def test_expectation_midpoints_satisfy_domination():
    table = solve_expectations(C, P, "paper-series", truncation_K=200)
    c = float(C)

    def mid(iv):
        return (iv.lower + iv.upper) / 2

    for rows in (table.y2, table.y3):
        for k, k_prime in [(0, 1), (0, 5), (2, 7), (3, 20)]:
            lo = c ** (k_prime - k - 1) * (c - 1) * mid(rows[k])
            hi = c ** (k_prime - k - 1) * (c + 1) * mid(rows[k])
            slack = rows[k].width + rows[k_prime].width + 1e-9
            assert lo - slack <= mid(rows[k_prime]) <= hi + slack


def test_solver_rejects_infeasible_parameters():
    with pytest.raises(DivergentSeriesError):
        solve_expectations(Fraction(6, 5), P, "literal", truncation_K=20)


def test_persistent_distribution_reference_point():
    dist = persistent_distribution(C, P, 200)
    assert dist.support[:6] == [2, 4, 6, 8, 10, 13]
    assert dist.pmf[0] == Fraction(1, 16)
    assert dist.expected_rounds == 16.0
    assert dist.jensen_lower == 64  # s_15
    assert dist.divergent and dist.growth_rate == pytest.approx(1.03125)


def test_persistent_partial_expectations_grow_past_all_p_bound():
    dist = persistent_distribution(C, P, 200)
    partials = dist.partial_expectations
    assert all(b > a for a, b in zip(partials, partials[1:]))
    assert partials[200] > 2759
    assert partials[120] < 2759 < partials[160]  # crossing near z ~ 140


def test_persistent_term_ratios_converge_to_growth_rate():
    dist = persistent_distribution(C, P, 400)
    assert dist.term_ratios[-1] == pytest.approx(dist.growth_rate, rel=1e-3)


def test_persistent_pmf_partial_sums_below_one():
    dist = persistent_distribution(C, P, 50)
    assert sum(dist.pmf) < 1
    assert float(sum(dist.pmf)) == pytest.approx(1 - 0.9375**51, rel=1e-12)


def test_persistent_convergent_case():
    dist = persistent_distribution(Fraction(21, 20), P, 50)  # c*gamma < 1
    assert not dist.divergent


def test_deadline_comparison_examples():
    r1 = deadline_comparison(C, P, 1)
    assert r1.xi == 0 and r1.prE_lower == 1.0 and r1.diverges
    r5 = deadline_comparison(C, P, 5)
    assert r5.xi == 2 and r5.prE_lower == pytest.approx(0.390625)
    r14 = deadline_comparison(C, P, 14)
    assert r14.xi == 6 and r14.prE_lower == pytest.approx(0.625**6)


def test_deadline_lower_bounds_unbounded_in_zmax():
    report = deadline_comparison(C, P, 5, z_grid=(50, 100, 200, 400, 800))
    bounds = [b for _, b in report.truncated_lower_bounds]
    assert bounds == sorted(bounds)
    assert bounds[-1] > 10**8
