"""Comparison policies: fixed scheduling, fixed source power, non-EH bound.

Every baseline returns a :class:`BaselineResult` carrying a policy that is
feasible for the original profile, except the upper bound whose policy is
feasible only for the collapsed (all energy at t=0) profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from ._roots import find_root
from .dwf import compute_dwf, single_hop_throughput
from .exceptions import InfeasibleProblem
from .policy import RELAY, SOURCE, Stage, TransmissionPolicy
from .profile import EhProfile, collapse, require_valid
from .rmax import RelayConstraints, rmax
from .tmin import constant_relay_power, tmin

__all__ = [
    "BaselineKind",
    "BaselineResult",
    "fixed_scheduling_rmax",
    "fixed_power_rmax",
    "upper_bound_rmax",
    "fixed_scheduling_tmin",
    "fixed_power_tmin",
    "upper_bound_tmin",
    "run_baseline",
]

SHORTFALL_RTOL = 1e-9


class BaselineKind(str, Enum):
    FIXED_SCHEDULING = "fixed_scheduling"
    FIXED_POWER = "fixed_power"
    NON_EH_UPPER_BOUND = "non_eh_upper_bound"


@dataclass(frozen=True)
class BaselineResult:
    kind: BaselineKind
    policy: TransmissionPolicy
    throughput: float
    completion_time: Optional[float] = None


def _source_stages(profile: EhProfile, horizon: float, model) -> tuple[list[Stage], float]:
    d = compute_dwf(profile, horizon)
    stages = [
        Stage(SOURCE, float(a), float(l), float(p))
        for a, l, p in zip(d.interval_starts, d.interval_lengths, d.single_hop_powers)
    ]
    return stages, float(np.sum(d.interval_lengths * model.rate(d.single_hop_powers)))


def fixed_scheduling_rmax(profile: EhProfile, horizon: float, c: RelayConstraints, model) -> BaselineResult:
    """Source on ``[0, T/2)`` with single-hop DWF power, relay on ``[T/2, T)``.

    The relay runs at the peak power, or spreads its budget uniformly
    over its half, whichever is lower. When the source delivers fewer
    bits than the relay could carry, the relay power is lowered to match.
    """
    require_valid(profile)
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    half = 0.5 * horizon
    stages, source_bits = _source_stages(profile, half, model)
    powers = []
    if c.has_peak:
        powers.append(c.peak_power)
    if c.has_energy:
        powers.append(c.total_energy / half)
    relay_power = min(powers)
    relay_bits = half * model.rate(relay_power)
    thr = min(source_bits, relay_bits)
    if source_bits < relay_bits:
        relay_power = min(relay_power, float(model.inv_rate(thr / half)))
    stages.append(Stage(RELAY, half, half, relay_power))
    policy = TransmissionPolicy.from_stages(stages)
    return BaselineResult(BaselineKind.FIXED_SCHEDULING, policy, float(thr))


def fixed_scheduling_tmin(profile: EhProfile, data: float, c: RelayConstraints, model) -> BaselineResult:
    """Shortest source stage that sends ``data`` by single-hop DWF, then one relay stage."""
    require_valid(profile)
    if data < 0:
        raise ValueError("data must be >= 0")
    if data == 0:
        return BaselineResult(BaselineKind.FIXED_SCHEDULING, TransmissionPolicy(), 0.0, 0.0)
    if not data < profile.total_energy * model.slope_at_zero:
        raise InfeasibleProblem("insufficient horizon/energy: profile cannot deliver the data")
    relay_power = _tmin_relay_power(data, c, model)

    hi = max(float(profile.epochs[-1]), 1e-3)
    while single_hop_throughput(profile, hi, model) < data:
        hi *= 2.0
    split = find_root(lambda x: single_hop_throughput(profile, x, model) - data, 0.5 * hi * 1e-12, hi, xtol=1e-15 * hi)
    stages, _ = _source_stages(profile, split, model)
    relay_time = data / model.rate(relay_power)
    stages.append(Stage(RELAY, split, relay_time, relay_power))
    finish = split + relay_time
    return BaselineResult(BaselineKind.FIXED_SCHEDULING, TransmissionPolicy.from_stages(stages), float(data), finish)


def _tmin_relay_power(data: float, c: RelayConstraints, model) -> float:
    powers = []
    if c.has_peak:
        powers.append(c.peak_power)
    if c.has_energy:
        powers.append(constant_relay_power(data, c.total_energy, model))
    return min(powers)


def _fixed_power_run(profile: EhProfile, ends, source_power: float, relay_power: float, model, target: Optional[float]):
    """Stall-on-empty schedule at constant source power, balanced S/R pair per arrival interval.

    ``ends[i]`` closes the interval opened by arrival ``i``. Returns the
    stages, delivered bits and, with a ``target``, the completion time.
    """
    gs = model.rate(source_power)
    gr = model.rate(relay_power)
    battery = 0.0
    delivered = 0.0
    stages = []
    finish = None
    for start, amount, end in zip(profile.epochs, profile.amounts, ends):
        battery += float(amount)
        length = end - start
        s = min(length * gr / (gs + gr), battery / source_power)
        if target is not None:
            needed = (target - delivered) / gs
            if needed <= s * (1 + SHORTFALL_RTOL):
                s = needed
                finish = start + s + s * gs / gr
        if s > 0:
            r = s * gs / gr
            stages.append(Stage(SOURCE, float(start), s, source_power))
            stages.append(Stage(RELAY, float(start) + s, r, relay_power))
            battery = max(battery - s * source_power, 0.0)
            delivered += s * gs
        if finish is not None:
            break
    return TransmissionPolicy.from_stages(stages), delivered, finish


def _relay_energy_of(profile, ends, source_power, relay_power, model) -> float:
    policy, _, _ = _fixed_power_run(profile, ends, source_power, relay_power, model, None)
    return policy.relay_energy()


def _fit_relay_power(profile, ends, source_power, budget, model) -> float:
    """Relay power at which the fixed-power schedule spends exactly ``budget``."""

    def excess(log_p):
        return _relay_energy_of(profile, ends, source_power, math.exp(log_p), model) - budget

    hi = math.log(source_power)
    while excess(hi) < 0:
        hi += 2.0
    lo = hi - 2.0
    while excess(lo) > 0:
        lo -= 2.0
        if lo < -700:
            raise AssertionError("relay power bracket search failed")
    return math.exp(find_root(excess, lo, hi, xtol=1e-14))


def fixed_power_rmax(profile: EhProfile, horizon: float, c: RelayConstraints, model) -> BaselineResult:
    """Constant source power with stalls when the battery is empty.

    The source power is the one the non-EH upper bound uses, so the
    baseline coincides with the optimum on single-arrival profiles.
    Inside each arrival interval one S-R pair moves equal data in each
    hop. The relay runs at its peak, or at the constant power that spends
    its budget exactly, whichever is lower.
    """
    require_valid(profile)
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    usable = profile.truncated(horizon)
    bound = rmax(collapse(profile, horizon), horizon, c, model)
    source_power = bound.solutions[0].source_power
    if not source_power > 0:
        return BaselineResult(BaselineKind.FIXED_POWER, TransmissionPolicy(), 0.0)
    ends = np.append(usable.epochs[1:], horizon)
    relay_power = c.peak_power if c.has_peak else math.inf
    if c.has_energy:
        relay_power = min(relay_power, _fit_relay_power(usable, ends, source_power, c.total_energy, model))
    policy, thr, _ = _fixed_power_run(usable, ends, source_power, relay_power, model, None)
    return BaselineResult(BaselineKind.FIXED_POWER, policy, float(thr))


def fixed_power_tmin(profile: EhProfile, data: float, c: RelayConstraints, model) -> BaselineResult:
    """TMIN counterpart of :func:`fixed_power_rmax`; the last interval is unbounded."""
    require_valid(profile)
    if data < 0:
        raise ValueError("data must be >= 0")
    if data == 0:
        return BaselineResult(BaselineKind.FIXED_POWER, TransmissionPolicy(), 0.0, 0.0)
    bound = tmin(collapse(profile), data, c, model)
    source_power = bound.interval_solutions[0].source_power
    relay_power = _tmin_relay_power(data, c, model)
    ends = np.append(profile.epochs[1:], math.inf)
    policy, delivered, finish = _fixed_power_run(profile, ends, source_power, relay_power, model, data)
    if finish is None:
        raise InfeasibleProblem("insufficient horizon/energy: fixed source power cannot deliver the data")
    return BaselineResult(BaselineKind.FIXED_POWER, policy, float(data), float(finish))


def upper_bound_rmax(profile: EhProfile, horizon: float, c: RelayConstraints, model) -> BaselineResult:
    """Optimal throughput with all usable energy available at t=0."""
    res = rmax(collapse(profile, horizon), horizon, c, model)
    return BaselineResult(BaselineKind.NON_EH_UPPER_BOUND, res.policy, res.throughput)


def upper_bound_tmin(profile: EhProfile, data: float, c: RelayConstraints, model) -> BaselineResult:
    """Optimal completion time with all energy available at t=0."""
    require_valid(profile)
    res = tmin(collapse(profile), data, c, model)
    return BaselineResult(BaselineKind.NON_EH_UPPER_BOUND, res.policy, float(data), res.completion_time)


_RMAX = {
    BaselineKind.FIXED_SCHEDULING: fixed_scheduling_rmax,
    BaselineKind.FIXED_POWER: fixed_power_rmax,
    BaselineKind.NON_EH_UPPER_BOUND: upper_bound_rmax,
}
_TMIN = {
    BaselineKind.FIXED_SCHEDULING: fixed_scheduling_tmin,
    BaselineKind.FIXED_POWER: fixed_power_tmin,
    BaselineKind.NON_EH_UPPER_BOUND: upper_bound_tmin,
}


def run_baseline(kind, objective: str, profile: EhProfile, target: float, c: RelayConstraints, model) -> BaselineResult:
    """Dispatch on ``kind`` and ``objective`` ("rmax": target is a horizon, "tmin": data in bits)."""
    kind = BaselineKind(kind)
    table = {"rmax": _RMAX, "tmin": _TMIN}.get(objective)
    if table is None:
        raise ValueError(f"unknown objective {objective!r}")
    return table[kind](profile, target, c, model)
