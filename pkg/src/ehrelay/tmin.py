"""Completion-time minimisation for a fixed amount of data.

With a peak-power relay the DWF points of the (unknown) optimal horizon
are found one at a time from a causal deadline, so no knowledge of the
final completion time is needed. With an energy budget the relay power
is first fixed to get an upper bound on the completion time, then the
true completion time is located by bisection on the RMAX throughput.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._roots import find_root
from .dwf import SLOPE_RTOL, DwfDecomposition, compute_dwf
from .exceptions import InfeasibleProblem
from .policy import TransmissionPolicy
from .profile import EhProfile, require_valid
from .rmax import (
    RelayConstraints,
    _power_split,
    realize_policy,
    rmax_throughput,
    solve_intervals,
    solve_power_constrained,
)

__all__ = [
    "TminResult",
    "constant_relay_power",
    "dwf_points_power_constrained",
    "tmin_power_constrained",
    "tmin_energy_constrained",
    "tmin",
]

MATCH_RTOL = 1e-12


@dataclass(frozen=True)
class TminResult:
    completion_time: float
    decomposition: Optional[DwfDecomposition]
    interval_solutions: list
    policy: TransmissionPolicy

    @property
    def delivered(self) -> float:
        return float(sum(s.bits for s in self.interval_solutions))


def _empty() -> TminResult:
    return TminResult(0.0, None, [], TransmissionPolicy())


def _source_time_for(data: float, energy: float, model, upper: Optional[float]) -> float:
    """Source period x with ``x g(energy / x) = data`` (left side increases in x)."""

    def f(x):
        return x * model.rate(energy / x) - data

    if upper is None:
        upper = 1.0
        while f(upper) < 0:
            upper *= 2.0
            if upper > 1e15:
                raise InfeasibleProblem("insufficient horizon/energy: data cannot be delivered")
    lower = 1e-9 * upper
    while f(lower) >= 0:
        lower *= 1e-3
    return find_root(f, lower, upper, xtol=1e-15 * upper)


def dwf_points_power_constrained(profile: EhProfile, data: float, peak: float, model) -> DwfDecomposition:
    """DWF points of the minimum-time schedule with the relay at ``peak`` power.

    Each step finds the first epoch by which the remaining data could be
    finished at constant source power (the deadline), then either
    finishes with constant power or fixes the next DWF point as the
    minimum-slope epoch before that deadline, and recurses on the
    remaining profile and data.
    """
    require_valid(profile)
    epochs = profile.epochs
    amounts = profile.amounts
    g0 = model.slope_at_zero
    relay_rate = model.rate(peak)
    remaining = float(data)
    relay_left = remaining / relay_rate
    base = 0
    times, energies, indices = [], [], []
    for _ in range(len(epochs) + 1):
        offset = float(epochs[base])
        t = epochs[base:] - offset
        e = amounts[base:]
        before = np.concatenate(([0.0], np.cumsum(e)))
        n = len(t)

        deadline = None
        for j in range(1, n):
            span = t[j] - relay_left
            if span <= 0:
                continue
            if span * model.inv_rate(remaining / span) <= before[j]:
                deadline = j
                break
        if deadline is None:
            if remaining >= before[n] * g0:
                raise InfeasibleProblem("insufficient horizon/energy: profile cannot deliver the data")
            deadline = n
            upper = None
        else:
            upper = t[deadline] - relay_left
        e_sum = before[deadline]
        finish = relay_left + _source_time_for(remaining, e_sum, model, upper)

        power = e_sum / finish
        inner = np.arange(1, deadline)
        if np.all(power * t[inner] <= before[inner] * (1 + 1e-12)):
            times.append(offset + finish)
            energies.append(e_sum)
            indices.append(base + deadline)
            break

        slopes = before[inner] / t[inner]
        best = slopes.min()
        i_k = int(inner[np.flatnonzero(slopes <= best + SLOPE_RTOL * best)[-1]])
        e_k, t_k = float(before[i_k]), float(t[i_k])
        relay_k = t_k - float(_power_split([e_k], [t_k], peak, model)[0])
        if not relay_k < relay_left:
            raise AssertionError("intermediate DWF interval would carry all remaining data")
        times.append(offset + t_k)
        energies.append(e_k)
        indices.append(base + i_k)
        remaining *= (relay_left - relay_k) / relay_left
        relay_left -= relay_k
        base += i_k
    else:
        raise AssertionError("DWF point search did not terminate")
    return DwfDecomposition.from_points(times, energies, indices)


def tmin_power_constrained(profile: EhProfile, data: float, peak: float, model) -> TminResult:
    """Minimum completion time with a relay limited to ``peak`` watts."""
    if data < 0:
        raise ValueError("data must be >= 0")
    if not peak > 0:
        raise ValueError("relay cannot forward: peak power must be positive")
    require_valid(profile)
    if data == 0:
        return _empty()
    d = dwf_points_power_constrained(profile, data, peak, model)
    sols = solve_power_constrained(d, peak, model)
    return TminResult(d.horizon, d, sols, realize_policy(profile, d, sols, model))


def constant_relay_power(data: float, budget: float, model) -> float:
    """Relay power P with ``(budget / P) g(P) = data``: spend the whole budget at one power."""
    if not data < budget * model.slope_at_zero:
        raise InfeasibleProblem("relay energy insufficient for the requested data")

    def f(log_p):
        p = math.exp(log_p)
        return budget * model.rate(p) / p - data

    hi = 0.0
    while f(hi) > 0:
        hi += 5.0
    lo = hi - 5.0
    while f(lo) < 0:
        lo -= 5.0
        if lo < -700:
            raise InfeasibleProblem("relay energy insufficient for the requested data")
    return math.exp(find_root(f, lo, hi, xtol=1e-15))


def _energy_variant(profile: EhProfile, data: float, c: RelayConstraints, model) -> TminResult:
    relay_power = constant_relay_power(data, c.total_energy, model)
    temp = dwf_points_power_constrained(profile, data, relay_power, model)
    taus = np.concatenate(([0.0], temp.point_times))

    def throughput(t):
        return 0.0 if t <= 0 else rmax_throughput(profile, t, c, model)

    cache = {0: 0.0}

    def r_of(k):
        if k not in cache:
            cache[k] = throughput(float(taus[k]))
        return cache[k]

    k_lo, k_hi = 0, len(taus) - 1
    if r_of(k_hi) < data * (1 - 1e-9):
        raise AssertionError("constant-power relay schedule does not deliver the data")
    if r_of(k_hi) <= data * (1 + MATCH_RTOL):
        finish = float(taus[k_hi])
    else:
        while k_hi - k_lo > 1:
            mid = (k_lo + k_hi) // 2
            if r_of(mid) <= data:
                k_lo = mid
            else:
                k_hi = mid
        if not r_of(k_lo) <= r_of(k_hi):
            raise AssertionError("throughput is not monotone in the horizon")
        if r_of(k_lo) >= data * (1 - MATCH_RTOL):
            finish = float(taus[k_lo])
        else:
            lo, hi = float(taus[k_lo]), float(taus[k_hi])
            finish = find_root(lambda t: throughput(t) - data, lo, hi, xtol=1e-15 * hi)
    d = compute_dwf(profile, finish)
    sols = solve_intervals(d, c, model)
    return TminResult(finish, d, sols, realize_policy(profile, d, sols, model))


def tmin_energy_constrained(profile: EhProfile, data: float, budget: float, model) -> TminResult:
    """Minimum completion time with a relay that may spend ``budget`` joules in total."""
    if data < 0:
        raise ValueError("data must be >= 0")
    require_valid(profile)
    if data == 0:
        return _empty()
    return _energy_variant(profile, data, RelayConstraints(total_energy=budget), model)


def tmin(profile: EhProfile, data: float, c: RelayConstraints, model) -> TminResult:
    """Minimum completion time under any combination of relay limits.

    With both limits: if spending the whole budget at one constant power
    would exceed the peak, the energy budget is slack and the peak-power
    algorithm applies; otherwise the energy-budget search runs with the
    throughput evaluated under both limits.
    """
    if c.has_peak and not c.has_energy:
        return tmin_power_constrained(profile, data, c.peak_power, model)
    if c.has_energy and not c.has_peak:
        return tmin_energy_constrained(profile, data, c.total_energy, model)
    if data < 0:
        raise ValueError("data must be >= 0")
    require_valid(profile)
    if data == 0:
        return _empty()
    if constant_relay_power(data, c.total_energy, model) > c.peak_power:
        return tmin_power_constrained(profile, data, c.peak_power, model)
    return _energy_variant(profile, data, c, model)
