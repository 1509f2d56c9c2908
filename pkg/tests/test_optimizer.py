import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import argmax_first
from risopt.channel import CascadedChannel, cascade, make_rng, sample
from risopt.exceptions import DomainError, InfeasibleInstanceError, OracleCapError, StaleOptimaError
from risopt.model import DerivedConstants, dbm_to_watts, derive_constants
from risopt.objectives import Objective, objective_curves
from risopt.optimizer import (
    Method,
    ParetoPoint,
    brute_force,
    check_assumption,
    default_weights,
    filter_dominated,
    greedy,
    greedy_stop,
    pareto_sweep,
)
from risopt.validation import counterexample_scan, is_unimodal, objectives_for, random_instance

ALL_KINDS = ("rate", "ee", "tradeoff_w0.1", "tradeoff_w0.5", "tradeoff_w0.9")


def dc_for(beta=1.0, c=1.0, d=0.0, gamma=1.0, psi=0.0, n_upper=10):
    n_frame = 10**9 if d == 0 else math.floor(c / d)
    return DerivedConstants(beta, c, d, gamma, psi, 0.0, 10**9, n_frame, n_upper)


@pytest.fixture(scope="module")
def reference(reference_params):
    ch = sample(reference_params, 42)
    cc = cascade(ch)
    return reference_params, cc, derive_constants(reference_params, ch.h_F, cc.alpha_max)


def test_single_candidate():
    cc = CascadedChannel.from_alpha([1.0])
    dc = dc_for(beta=2.0, d=0.1, gamma=1.0, psi=0.5, n_upper=1)
    for obj in (Objective.rate(), Objective.energy_efficiency(), Objective.tradeoff(0.5, 10.0, 10.0)):
        res = greedy(cc, dc, obj, 1.0)
        assert res.n_star == 1
        assert res.trace == ((1, res.value),)


def test_no_overhead_rate_uses_every_element():
    cc = CascadedChannel.from_alpha(np.linspace(3.0, 1.0, 12))
    dc = dc_for(beta=1.0, c=1.0, d=0.0, n_upper=12)
    assert greedy(cc, dc, Objective.rate(), 1.0).n_star == 12


def test_two_point_hand_example():
    cc = CascadedChannel.from_alpha([3.0, 2.0])
    dc = dc_for(beta=1.0, c=1.0, d=0.4, n_upper=2)
    res = brute_force(cc, dc, Objective.rate(), 1.0)
    assert res.trace[0][1] == pytest.approx(1.993, abs=1e-3)
    assert res.trace[1][1] == pytest.approx(0.940, abs=1e-3)
    assert res.n_star == 1
    assert greedy(cc, dc, Objective.rate(), 1.0).n_star == 1


def test_greedy_stops_one_past_optimum(reference):
    params, cc, dc = reference
    for obj in (Objective.rate(), Objective.energy_efficiency()):
        res = greedy(cc, dc, obj, params.B)
        assert res.method is Method.GREEDY
        assert len(res.trace) == min(res.n_star + 1, dc.n_upper)
        assert [n for n, _ in res.trace] == list(range(1, len(res.trace) + 1))
        values = [v for _, v in res.trace[: res.n_star]]
        assert all(b >= a for a, b in zip(values, values[1:]))
        if res.n_star < dc.n_upper:
            assert res.trace[-1][1] < res.value


def test_brute_force_dominates_greedy(reference):
    params, cc, dc = reference
    for obj in (Objective.rate(), Objective.energy_efficiency()):
        assert brute_force(cc, dc, obj, params.B).value >= greedy(cc, dc, obj, params.B).value


def test_greedy_result_carries_optimal_phases(reference):
    params, cc, dc = reference
    res = greedy(cc, dc, Objective.rate(), params.B)
    np.testing.assert_array_equal(res.phases.indices, cc.perm[: res.n_star])
    ch = cc.source
    gain = abs(np.conj(ch.g) @ (res.phases.coefficients(ch.n_elements) * ch.h))
    assert gain == pytest.approx(cc.prefix[res.n_star - 1], rel=1e-10)


def test_brute_force_cap():
    cc = CascadedChannel.from_alpha(np.ones(20))
    with pytest.raises(OracleCapError):
        brute_force(cc, dc_for(n_upper=20), Objective.rate(), 1.0, cap=10)


def test_brute_force_ties_go_to_smaller_n():
    cc = CascadedChannel.from_alpha([1.0, 0.0, 0.0])
    res = brute_force(cc, dc_for(beta=1.0, n_upper=3), Objective.rate(), 1.0)
    assert res.n_star == 1


def test_greedy_walks_through_plateaus():
    cc = CascadedChannel.from_alpha([1.0, 0.0, 0.0])
    assert greedy(cc, dc_for(beta=1.0, n_upper=3), Objective.rate(), 1.0).n_star == 3


def test_infeasible_instance_rejected():
    cc = CascadedChannel.from_alpha([1.0])
    with pytest.raises(InfeasibleInstanceError):
        greedy(cc, dc_for(n_upper=0), Objective.rate(), 1.0)


def test_stale_tradeoff_references_detected(reference):
    params, cc, dc = reference
    r = greedy(cc, dc, Objective.rate(), params.B)
    e = greedy(cc, dc, Objective.energy_efficiency(), params.B)
    stale = Objective.tradeoff(0.5, 0.5 * r.rate, e.ee)
    with pytest.raises(StaleOptimaError):
        greedy(cc, dc, stale, params.B)
    with pytest.raises(StaleOptimaError):
        brute_force(cc, dc, stale, params.B)


def test_assumption_boundary():
    cc = CascadedChannel.from_alpha([1.0, 0.5])
    assert check_assumption(cc, dc_for(beta=1.0)).ok
    check = check_assumption(cc, dc_for(beta=0.5))
    assert not check.ok and check.margin == pytest.approx(-0.5)


def test_assumption_flag_at_low_power(reference_params):
    params = reference_params.with_(p=dbm_to_watts(0.0))
    ch = sample(params, 42)
    cc = cascade(ch)
    dc = derive_constants(params, ch.h_F, cc.alpha_max)
    by_hand = params.p * params.delta / (params.B * params.N0) * np.max(np.abs(ch.h * ch.g)) ** 2
    check = check_assumption(cc, dc)
    assert check.peak_snr == pytest.approx(by_hand, rel=1e-12)
    assert check.ok == (by_hand >= 1)


def test_violating_instance_flagged_and_exact():
    cc = CascadedChannel.from_alpha([1.0, 0.9, 0.8, 0.1])
    dc = dc_for(beta=0.3, d=0.05, gamma=1.0, psi=0.2, n_upper=4)
    res = brute_force(cc, dc, Objective.energy_efficiency(), 1.0)
    assert not res.assumption_ok
    values, _, _ = objective_curves(cc, dc, 1.0, Objective.energy_efficiency())
    assert res.n_star == argmax_first(values)
    fallback = greedy(cc, dc, Objective.energy_efficiency(), 1.0)
    assert fallback.method is Method.BRUTE_FORCE and fallback.n_star == res.n_star
    plain = greedy(cc, dc, Objective.energy_efficiency(), 1.0, fallback_brute_force_on_assumption_violation=False)
    assert plain.method is Method.GREEDY


def test_greedy_agrees_with_independent_argmax():
    rng = make_rng(2024)
    for _ in range(200):
        inst = random_instance(rng)
        for name, obj in objectives_for(inst):
            if name not in ALL_KINDS:
                continue
            g = greedy(inst.cascade, inst.constants, obj, inst.params.B)
            values = [v for _, v in brute_force(inst.cascade, inst.constants, obj, inst.params.B).trace]
            assert g.n_star == argmax_first(values), name


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=60))
def test_greedy_stop_matches_scalar_ascent(values):
    n = 1
    while n < len(values) and values[n] >= values[n - 1]:
        n += 1
    assert greedy_stop(values) == n


@given(peak=st.integers(1, 40), size=st.integers(1, 40), data=st.data())
def test_greedy_stop_finds_peak_of_unimodal_sequence(peak, size, data):
    peak = min(peak, size)
    up = sorted(data.draw(st.lists(st.floats(0, 100), min_size=peak, max_size=peak, unique=True)))
    down = sorted(data.draw(st.lists(st.floats(-100, up[-1] - 1e-3), min_size=size - peak, max_size=size - peak)), reverse=True)
    seq = up + down
    assert is_unimodal(seq)
    assert greedy_stop(seq) == peak


def test_greedy_stop_batched():
    v = np.array([[1, 2, 3, 2], [4, 3, 2, 1], [1, 1, 1, 1]])
    np.testing.assert_array_equal(greedy_stop(v), [3, 1, 4])
    assert greedy_stop([5.0]) == 1


def test_pareto_weight_near_one_recovers_rate_maximizer(reference):
    params, cc, dc = reference
    n_rate = greedy(cc, dc, Objective.rate(), params.B).n_star
    pts = pareto_sweep(cc, dc, params.B, [1 - 1e-9], filtered=False)
    assert pts[0].n_star == n_rate


def test_pareto_weight_near_zero_recovers_ee_maximizer(reference):
    params, cc, dc = reference
    n_ee = greedy(cc, dc, Objective.energy_efficiency(), params.B).n_star
    pts = pareto_sweep(cc, dc, params.B, [1e-9], filtered=False)
    assert pts[0].n_star == n_ee


def test_pareto_endpoints_bracket(reference):
    params, cc, dc = reference
    n_rate = greedy(cc, dc, Objective.rate(), params.B).n_star
    n_ee = greedy(cc, dc, Objective.energy_efficiency(), params.B).n_star
    lo, hi = min(n_rate, n_ee), max(n_rate, n_ee)
    for p in pareto_sweep(cc, dc, params.B, [0.001, 0.999], filtered=False):
        assert lo <= p.n_star <= hi


def test_pareto_sweep_is_a_frontier(reference):
    params, cc, dc = reference
    pts = pareto_sweep(cc, dc, params.B)
    assert len(pts) > 1
    rates = [p.rate for p in pts]
    ees = [p.ee for p in pts]
    assert rates == sorted(rates)
    assert all(b <= a for a, b in zip(ees, ees[1:]))
    for p in pts:
        assert not any(q.rate >= p.rate and q.ee >= p.ee and (q.rate > p.rate or q.ee > p.ee) for q in pts)


def test_pareto_collapses_when_optima_coincide():
    cc = CascadedChannel.from_alpha([3.0, 1.0, 0.5])
    dc = dc_for(beta=1.0, c=1.0, d=0.3, gamma=1.0, psi=0.0, n_upper=3)
    # psi = 0 makes EE proportional to rate, so both maximizers coincide
    pts = pareto_sweep(cc, dc, 1.0, [0.5])
    assert len(pts) == 1
    r = greedy(cc, dc, Objective.rate(), 1.0)
    assert pts[0].n_star == r.n_star and pts[0].rate == r.rate


def test_pareto_weight_validation(reference):
    params, cc, dc = reference
    with pytest.raises(DomainError):
        pareto_sweep(cc, dc, params.B, [])
    with pytest.raises(DomainError):
        pareto_sweep(cc, dc, params.B, [0.0, 0.5])


def test_filter_dominated():
    pts = [ParetoPoint(0.1, 1, 1.0, 5.0), ParetoPoint(0.2, 2, 2.0, 4.0), ParetoPoint(0.3, 3, 1.5, 3.0),
           ParetoPoint(0.4, 2, 2.0, 4.0)]
    kept = filter_dominated(pts)
    assert [(p.rate, p.ee) for p in kept] == [(1.0, 5.0), (2.0, 4.0)]


def test_default_weights():
    w = default_weights()
    assert w.size == 99 and w[0] == 0.01 and w[-1] == 0.99


def test_counterexamples_are_only_recorded():
    # disagreements below the SNR assumption are logged, not asserted
    found = counterexample_scan(n_instances=30, seed=5)
    assert isinstance(found, list)
    for item in found:
        assert item["peak_snr"] < 1
