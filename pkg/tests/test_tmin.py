import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ehrelay import DEFAULT_MODEL, EhProfile, InfeasibleProblem, RelayConstraints, check_feasibility, compute_dwf, evaluate, rmax_throughput
from ehrelay.tmin import (
    constant_relay_power,
    dwf_points_power_constrained,
    tmin,
    tmin_energy_constrained,
    tmin_power_constrained,
)

from helpers import MJ, MW, constraints, profiles, random_constraints, random_profile

M = DEFAULT_MODEL
UNIT = EhProfile([0.0], [1 * MJ])


def test_power_constrained_unit_instance():
    res = tmin_power_constrained(UNIT, 1e6, 1 * MW, M)
    assert res.completion_time == pytest.approx(2.0, rel=1e-9)
    (sol,) = res.interval_solutions
    assert sol.source_time == pytest.approx(1.0, rel=1e-9)
    assert sol.relay_time == pytest.approx(1.0, rel=1e-9)


def test_energy_constrained_unit_instance():
    res = tmin_energy_constrained(UNIT, 1e6, 1 * MJ, M)
    assert res.completion_time == pytest.approx(2.0, rel=1e-9)
    assert res.interval_solutions[0].relay_power == pytest.approx(1 * MW, rel=1e-9)
    assert constant_relay_power(1e6, 1 * MJ, M) == pytest.approx(1 * MW, rel=1e-12)


@pytest.mark.parametrize("fn, arg", [(tmin_power_constrained, 1 * MW), (tmin_energy_constrained, 1 * MJ)])
def test_zero_data(fn, arg):
    res = fn(UNIT, 0.0, arg, M)
    assert res.completion_time == 0.0 and res.policy.stages == ()


def test_negative_data_rejected():
    with pytest.raises(ValueError):
        tmin_power_constrained(UNIT, -1.0, 1 * MW, M)


def test_unattainable_data():
    cap = UNIT.total_energy * M.slope_at_zero
    with pytest.raises(InfeasibleProblem):
        tmin_power_constrained(UNIT, cap * 1.01, 1 * MW, M)
    with pytest.raises(InfeasibleProblem):
        tmin_energy_constrained(UNIT, 1e6, 1e-3 * MJ, M)


def test_dispatch():
    p = EhProfile([0.0, 0.02, 0.05], [0.2 * MJ, 0.1 * MJ, 0.4 * MJ])
    d = 50e3
    assert tmin(p, d, RelayConstraints(peak_power=5 * MW), M).completion_time == tmin_power_constrained(p, d, 5 * MW, M).completion_time
    assert tmin(p, d, RelayConstraints(total_energy=0.2 * MJ), M).completion_time == tmin_energy_constrained(p, d, 0.2 * MJ, M).completion_time


def test_both_with_slack_peak_equals_energy_variant():
    p = EhProfile([0.0, 0.02, 0.05], [0.2 * MJ, 0.1 * MJ, 0.4 * MJ])
    d, budget = 50e3, 0.2 * MJ
    step1 = constant_relay_power(d, budget, M)
    energy_only = tmin_energy_constrained(p, d, budget, M).completion_time
    both = tmin(p, d, RelayConstraints(peak_power=2 * step1, total_energy=budget), M).completion_time
    assert both == pytest.approx(energy_only, rel=1e-9)


def test_both_with_binding_peak_equals_power_variant():
    p = EhProfile([0.0, 0.02, 0.05], [0.2 * MJ, 0.1 * MJ, 0.4 * MJ])
    d, budget = 50e3, 0.2 * MJ
    peak = 0.5 * constant_relay_power(d, budget, M)
    both = tmin(p, d, RelayConstraints(peak_power=peak, total_energy=budget), M).completion_time
    assert both == pytest.approx(tmin_power_constrained(p, d, peak, M).completion_time, rel=1e-12)


def check_result(p, data, c, res):
    T = res.completion_time
    d = res.decomposition
    assert T == d.horizon
    # the points found incrementally are the DWF points of the final horizon
    assert d.same_points(compute_dwf(p, T), rtol=1e-9)
    assert res.delivered == pytest.approx(data, rel=1e-9)
    thr, done = evaluate(res.policy, M, target=data)
    assert thr == pytest.approx(data, rel=1e-9)
    assert done == pytest.approx(T, rel=1e-9)
    assert res.policy.end_time == pytest.approx(T, rel=1e-9)
    assert check_feasibility(res.policy, p, c, T, M).ok
    for sol in res.interval_solutions:
        assert sol.source_time * M.rate(sol.source_power) == pytest.approx(sol.relay_time * M.rate(sol.relay_power), rel=1e-9)
    # duality and minimality
    assert rmax_throughput(p, T, c, M) == pytest.approx(data, rel=1e-6)
    assert rmax_throughput(p, T * (1 - 1e-4), c, M) < data


@settings(max_examples=40)
@given(profiles(), st.floats(1e3, 2e5), constraints())
def test_tmin_properties(p, data, c):
    try:
        res = tmin(p, data, c, M)
    except InfeasibleProblem:
        cap = p.total_energy * M.slope_at_zero
        if c.has_energy:
            cap = min(cap, c.total_energy * M.slope_at_zero)
        assert data >= cap * 0.5  # only near-impossible targets may fail
        return
    check_result(p, data, c, res)


def test_reverse_round_trip():
    rng = np.random.default_rng(3)
    for _ in range(20):
        p = random_profile(rng)
        c = random_constraints(rng)
        T = float(rng.uniform(0.02, 0.1))
        thr = rmax_throughput(p, T, c, M)
        assert tmin(p, thr, c, M).completion_time == pytest.approx(T, rel=1e-6)


def test_intermediate_points_are_epochs():
    p = EhProfile([0.0, 0.01, 0.03, 0.06], [0.05 * MJ, 0.2 * MJ, 0.5 * MJ, 1.0 * MJ])
    d = dwf_points_power_constrained(p, 150e3, 20 * MW, M)
    assert d.n_intervals > 1
    for t in d.point_times[:-1]:
        assert t in p.epochs
