import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ehrelay import (
    DEFAULT_MODEL,
    EhProfile,
    RelayConstraints,
    brute_force_rmax,
    check_feasibility,
    compute_dwf,
    dwf_eh_profile,
    evaluate,
    realize_policy,
    rmax,
    rmax_throughput,
)
from ehrelay.baselines import BaselineKind, run_baseline
from ehrelay.rmax import (
    marginal_throughput,
    solve_both,
    solve_energy_constrained,
    solve_intervals,
    solve_power_constrained,
)

from helpers import MJ, MW, constraints, profiles, random_constraints, random_profile

M = DEFAULT_MODEL


def one_interval(energy, length):
    return compute_dwf(EhProfile([0.0], [energy]), length)


# --- closed forms -------------------------------------------------------------


def test_power_constrained_unit_instance():
    (sol,) = solve_power_constrained(one_interval(1 * MJ, 2.0), 1 * MW, M)
    assert sol.source_time == pytest.approx(1.0, abs=1e-9)
    assert sol.source_power == pytest.approx(1 * MW, rel=1e-9)
    assert sol.relay_power == 1 * MW
    assert sol.bits == pytest.approx(1e6, rel=1e-9)


def test_power_constrained_three_milliwatt_instance():
    (sol,) = solve_power_constrained(one_interval(3 * MJ, 2.0), 3 * MW, M)
    assert sol.source_time == pytest.approx(1.0, abs=1e-9)
    assert sol.bits == pytest.approx(2e6, rel=1e-9)


def test_power_constrained_matches_bisection_oracle():
    # plain bisection on the balance equation
    e, length, peak = 2.5 * MJ, 0.7, 4 * MW
    lo, hi = 1e-12, length - 1e-12
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid * M.rate(e / mid) < (length - mid) * M.rate(peak):
            lo = mid
        else:
            hi = mid
    (sol,) = solve_power_constrained(one_interval(e, length), peak, M)
    assert sol.source_time == pytest.approx(lo, rel=1e-12)


def test_zero_peak_rejected():
    with pytest.raises(ValueError):
        solve_power_constrained(one_interval(1 * MJ, 2.0), 0.0, M)
    with pytest.raises(ValueError):
        RelayConstraints(peak_power=0.0)
    with pytest.raises(ValueError):
        RelayConstraints()


def test_energy_constrained_unit_instance():
    (sol,) = solve_energy_constrained(one_interval(1 * MJ, 2.0), 1 * MJ, M)
    assert sol.source_time == pytest.approx(1.0, abs=1e-9)
    assert sol.source_power == pytest.approx(1 * MW, rel=1e-9)
    assert sol.relay_power == pytest.approx(1 * MW, rel=1e-9)
    assert sol.bits == pytest.approx(1e6, rel=1e-9)


def test_zero_budget_gives_nothing():
    d = compute_dwf(EhProfile([0.0, 1.0], [1 * MJ, 3 * MJ]), 2.0)
    sols = solve_energy_constrained(d, 0.0, M)
    assert all(s.relay_energy == 0 and s.bits == 0 for s in sols)
    assert realize_policy(EhProfile([0.0, 1.0], [1 * MJ, 3 * MJ]), d, sols, M).stages == ()


def test_rmax_unit_instance():
    res = rmax(EhProfile([0.0], [1 * MJ]), 2.0, RelayConstraints(peak_power=1 * MW), M)
    assert res.throughput == pytest.approx(1e6, rel=1e-9)
    assert res.policy.alternates() and res.policy.pair_count == 1


# --- against brute force -------------------------------------------------------


def test_energy_constrained_two_intervals_brute_force():
    p = EhProfile([0.0, 1.0], [1 * MJ, 3 * MJ])
    c = RelayConstraints(total_energy=2 * MJ)
    d = compute_dwf(p, 2.0)
    assert d.n_intervals == 2
    got = sum(s.bits for s in solve_energy_constrained(d, 2 * MJ, M))
    ref = brute_force_rmax(p, 2.0, c, M, resolution=1e-3)
    assert ref <= got * (1 + 1e-9)
    assert got == pytest.approx(ref, rel=1e-3)


def test_both_tight_two_intervals_brute_force():
    p = EhProfile([0.0, 1.0], [1 * MJ, 3 * MJ])
    c = RelayConstraints(peak_power=1.05 * MW, total_energy=1.5 * MJ)
    d = compute_dwf(p, 2.0)
    sols = solve_both(d, c, M)
    pr = [s.relay_power for s in sols]
    assert pr[0] < pr[1] == 1.05 * MW
    assert sum(s.relay_energy for s in sols) == pytest.approx(1.5 * MJ, rel=1e-10)
    got = sum(s.bits for s in sols)
    unc = sum(s.bits for s in solve_energy_constrained(d, 1.5 * MJ, M))
    assert got < unc  # the peak binds
    assert sum(s.relay_energy for s in solve_power_constrained(d, 1.05 * MW, M)) > 1.5 * MJ  # and so does the budget
    ref = brute_force_rmax(p, 2.0, c, M, resolution=1e-3)
    assert ref <= got * (1 + 1e-9)
    assert got == pytest.approx(ref, rel=1e-3)


def test_random_small_instances_brute_force():
    rng = np.random.default_rng(5)
    done = 0
    while done < 15:
        p = random_profile(rng, n_max=4)
        if compute_dwf(p, 0.1).n_intervals > 3:
            continue
        c = random_constraints(rng)
        got = rmax_throughput(p, 0.1, c, M)
        ref = brute_force_rmax(p, 0.1, c, M, resolution=1e-2)
        assert ref <= got * (1 + 1e-9)
        done += 1


# --- solve_both limits ---------------------------------------------------------


def test_both_with_huge_peak_is_energy_solution():
    d = compute_dwf(EhProfile([0.0, 0.03, 0.06], [0.1 * MJ, 0.4 * MJ, 0.9 * MJ]), 0.1)
    a = solve_energy_constrained(d, 0.3 * MJ, M)
    b = solve_both(d, RelayConstraints(1e6, 0.3 * MJ), M)
    assert [s.bits for s in a] == [s.bits for s in b]


def test_both_with_huge_budget_is_power_solution():
    d = compute_dwf(EhProfile([0.0, 0.03, 0.06], [0.1 * MJ, 0.4 * MJ, 0.9 * MJ]), 0.1)
    a = solve_power_constrained(d, 5 * MW, M)
    b = solve_both(d, RelayConstraints(5 * MW, 1e6), M)
    assert [s.bits for s in a] == [s.bits for s in b]


def test_solve_both_requires_both():
    with pytest.raises(ValueError):
        solve_both(one_interval(1.0, 1.0), RelayConstraints(peak_power=1.0), M)


# --- structural invariants -----------------------------------------------------


def check_invariants(p, horizon, c, res, rtol=1e-9):
    d = res.decomposition
    csum_at = [p.energy_before(t) if k < d.n_intervals - 1 else p.energy_before(horizon) for k, t in enumerate(d.point_times)]
    policy = res.policy
    for k, tau in enumerate(d.point_times):
        used = policy.source_energy(tau)
        assert used == pytest.approx(csum_at[k], rel=rtol)
        ds, dr = policy.data(tau, M)
        assert dr == pytest.approx(ds, rel=rtol, abs=1e-9)
    # one source power and one relay power per interval
    for k, sol in enumerate(res.solutions):
        a, b = d.interval_starts[k], d.point_times[k]
        inside = [s for s in policy.stages if a - 1e-12 <= s.start < b - 1e-12 * b]
        assert {s.power for s in inside if s.kind == "source"} <= {sol.source_power}
        assert {s.power for s in inside if s.kind == "relay"} <= {sol.relay_power}
        if not sol.idle:
            assert 0 < sol.source_time < sol.interval_length
            assert sol.bits == pytest.approx(sol.relay_time * M.rate(sol.relay_power), rel=rtol)
            assert sol.source_energy == pytest.approx(d.interval_energies[k], rel=rtol)
    if c.has_peak and not c.has_energy:
        assert all(s.power == c.peak_power for s in policy.stages_of("relay"))
    if c.has_peak:
        assert all(s.power <= c.peak_power * (1 + 1e-12) for s in policy.stages_of("relay"))
    if c.has_energy:
        assert policy.relay_energy() <= c.total_energy * (1 + rtol)
    powers = [s.relay_power for s in res.solutions if not s.idle]
    assert np.all(np.diff(powers) >= -1e-9 * max(powers, default=1.0))
    assert policy.alternates()
    assert check_feasibility(policy, p, c, horizon, M).ok
    thr, _ = evaluate(policy, M)
    assert thr == pytest.approx(res.throughput, rel=1e-12)


@given(profiles(), st.floats(0.01, 0.3), constraints())
def test_invariants_property(p, horizon, c):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = rmax(p, horizon, c, M)
    check_invariants(p, horizon, c, res)


@given(profiles(), st.floats(0.01, 0.3), constraints())
def test_relaxed_profile_equivalence(p, horizon, c):
    relaxed = dwf_eh_profile(compute_dwf(p, horizon))
    a = rmax_throughput(p, horizon, c, M)
    b = rmax_throughput(relaxed, horizon, c, M)
    assert a == pytest.approx(b, rel=1e-9)


def test_energy_solution_equalises_marginals():
    rng = np.random.default_rng(11)
    for _ in range(30):
        p = random_profile(rng)
        d = compute_dwf(p, 0.1)
        budget = float(rng.uniform(0.05, 1.0)) * MJ
        sols = solve_energy_constrained(d, budget, M)
        assert sum(s.relay_energy for s in sols) == pytest.approx(budget, rel=1e-10)
        mu = marginal_throughput(d.interval_energies, d.interval_lengths, [s.source_time for s in sols], M)
        active = [m for m, s in zip(mu, sols) if not s.idle]
        assert max(active) == pytest.approx(min(active), rel=1e-6)


def test_marginal_matches_finite_difference():
    d = compute_dwf(EhProfile([0.0, 0.04], [0.2 * MJ, 0.5 * MJ]), 0.1)
    b, h = 0.3 * MJ, 1e-9 * MJ
    hi = sum(s.bits for s in solve_energy_constrained(d, b + h, M))
    lo = sum(s.bits for s in solve_energy_constrained(d, b - h, M))
    sols = solve_energy_constrained(d, b, M)
    mu = marginal_throughput(d.interval_energies, d.interval_lengths, [s.source_time for s in sols], M)
    assert (hi - lo) / (2 * h) == pytest.approx(mu[0], rel=1e-4)


# --- realisation on the original profile ---------------------------------------


def test_realize_verbatim_when_profiles_coincide():
    p = EhProfile([0.0, 1.0], [1 * MJ, 3 * MJ])
    res = rmax(p, 2.0, RelayConstraints(peak_power=2 * MW), M)
    assert res.policy.pair_count == res.decomposition.n_intervals == 2
    for stage_s, sol in zip(res.policy.stages_of("source"), res.solutions):
        assert stage_s.duration == pytest.approx(sol.source_time, rel=1e-12)


def test_realize_splits_overdrawn_interval():
    # constant-power interval whose second arrival comes too late for one pair
    p = EhProfile([0.0, 0.5], [2 * MJ, 1 * MJ])
    c = RelayConstraints(peak_power=1 * MW)
    res = rmax(p, 2.0, c, M)
    assert res.decomposition.n_intervals == 1
    assert res.policy.pair_count >= 2
    assert check_feasibility(res.policy, p, c, 2.0, M).ok
    relaxed = rmax_throughput(dwf_eh_profile(res.decomposition), 2.0, c, M)
    assert evaluate(res.policy, M)[0] == pytest.approx(relaxed, rel=1e-9)
    assert res.policy.stages[-1].kind == "relay"


def test_realize_rejects_unbalanced_solution():
    d = one_interval(1 * MJ, 2.0)
    (sol,) = solve_power_constrained(d, 1 * MW, M)
    from dataclasses import replace

    with pytest.raises(ValueError):
        realize_policy(EhProfile([0.0], [1 * MJ]), d, [replace(sol, relay_power=2 * MW)], M)


# --- monotone responses -------------------------------------------------------


@given(profiles(), st.floats(1.0, 50.0), st.floats(1.01, 3.0))
def test_monotone_in_peak(p, peak_mw, factor):
    lo = rmax_throughput(p, 0.1, RelayConstraints(peak_power=peak_mw * MW), M)
    hi = rmax_throughput(p, 0.1, RelayConstraints(peak_power=peak_mw * factor * MW), M)
    assert hi >= lo * (1 - 1e-12)


@settings(max_examples=30)
@given(profiles(), st.floats(0.05, 1.0), st.floats(1.01, 3.0))
def test_monotone_in_budget(p, budget_mj, factor):
    lo = rmax_throughput(p, 0.1, RelayConstraints(total_energy=budget_mj * MJ), M)
    hi = rmax_throughput(p, 0.1, RelayConstraints(total_energy=budget_mj * factor * MJ), M)
    assert hi >= lo * (1 - 1e-10)


@given(profiles(), constraints(), st.data())
def test_monotone_in_profile(p, c, data):
    i = data.draw(st.integers(0, len(p) - 1))
    extra = data.draw(st.floats(0.01, 1.0)) * MJ
    amounts = p.amounts.copy()
    amounts[i] += extra
    richer = EhProfile(p.epochs, amounts)
    assert rmax_throughput(richer, 0.1, c, M) >= rmax_throughput(p, 0.1, c, M) * (1 - 1e-10)


@given(profiles(), constraints(), st.floats(0.02, 0.2), st.floats(1.01, 2.0))
def test_monotone_in_horizon(p, c, horizon, factor):
    assert rmax_throughput(p, horizon * factor, c, M) >= rmax_throughput(p, horizon, c, M) * (1 - 1e-10)


def test_random_four_arrival_sandwich():
    rng = np.random.default_rng(21)
    for _ in range(40):
        p = random_profile(rng, n_max=4)
        c = random_constraints(rng)
        opt = rmax_throughput(p, 0.1, c, M)
        ub = run_baseline(BaselineKind.NON_EH_UPPER_BOUND, "rmax", p, 0.1, c, M).throughput
        assert ub >= opt * (1 - 1e-9)
        for kind in (BaselineKind.FIXED_SCHEDULING, BaselineKind.FIXED_POWER):
            assert run_baseline(kind, "rmax", p, 0.1, c, M).throughput <= opt * (1 + 1e-9)


def test_dispatch():
    d = compute_dwf(EhProfile([0.0, 0.05], [0.2 * MJ, 0.3 * MJ]), 0.1)
    assert solve_intervals(d, RelayConstraints(peak_power=5 * MW), M) == solve_power_constrained(d, 5 * MW, M)
    assert solve_intervals(d, RelayConstraints(total_energy=0.2 * MJ), M) == solve_energy_constrained(d, 0.2 * MJ, M)
