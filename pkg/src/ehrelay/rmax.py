"""Throughput maximisation over a fixed horizon.

Pipeline: DWF decomposition of the source profile, per-interval
source/relay split under the relay's peak-power and/or energy limits,
then realisation of that split as a causal schedule for the original
(non-relaxed) profile.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._roots import find_root
from .dwf import DwfDecomposition, compute_dwf
from .policy import RELAY, SOURCE, Stage, TransmissionPolicy
from .profile import EhProfile, require_valid

__all__ = [
    "RelayConstraints",
    "IntervalSolution",
    "RmaxResult",
    "solve_power_constrained",
    "solve_energy_constrained",
    "solve_both",
    "solve_intervals",
    "realize_policy",
    "rmax",
    "rmax_throughput",
    "marginal_throughput",
]

log = logging.getLogger(__name__)

BALANCE_RTOL = 1e-9
BUDGET_RTOL = 1e-10


@dataclass(frozen=True)
class RelayConstraints:
    """Relay limits: peak transmit power (W) and/or total energy (J)."""

    peak_power: Optional[float] = None
    total_energy: Optional[float] = None

    def __post_init__(self):
        if self.peak_power is None and self.total_energy is None:
            raise ValueError("at least one relay constraint is required")
        for name in ("peak_power", "total_energy"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive, got {v!r}")

    @property
    def has_peak(self) -> bool:
        return self.peak_power is not None

    @property
    def has_energy(self) -> bool:
        return self.total_energy is not None

    def to_dict(self) -> dict:
        return {"peak_power_w": self.peak_power, "total_energy_j": self.total_energy}

    @classmethod
    def from_dict(cls, data: dict) -> "RelayConstraints":
        return cls(data.get("peak_power_w"), data.get("total_energy_j"))


@dataclass(frozen=True)
class IntervalSolution:
    """Optimal single S-R pair for one DWF interval of the relaxed profile."""

    source_time: float
    relay_energy: float
    source_power: float
    relay_power: float
    interval_index: int
    interval_length: float
    bits: float

    @property
    def relay_time(self) -> float:
        return self.interval_length - self.source_time

    @property
    def source_energy(self) -> float:
        return self.source_power * self.source_time

    @property
    def idle(self) -> bool:
        return self.source_time == 0.0 and self.relay_energy == 0.0


@dataclass(frozen=True)
class RmaxResult:
    policy: TransmissionPolicy
    throughput: float
    decomposition: DwfDecomposition
    solutions: list


# --- power-limited relay -----------------------------------------------------


def _power_split(energies, lengths, peak, model) -> np.ndarray:
    """Source period per interval balancing source bits against relay bits at ``peak``."""
    relay_rate = model.rate(peak)
    out = np.empty(len(energies))
    for k, (e, length) in enumerate(zip(energies, lengths)):
        e, length = float(e), float(length)
        if not e > 0:
            raise AssertionError(f"DWF interval {k} carries no energy")

        def h(s):
            return s * model.rate(e / s) - (length - s) * relay_rate

        eps = 1e-12 * length
        out[k] = find_root(h, eps, length - eps, xtol=1e-15 * length)
    return out


def solve_power_constrained(d: DwfDecomposition, peak: float, model) -> list[IntervalSolution]:
    """Per-interval optimum when the relay always transmits at ``peak``."""
    if not peak > 0:
        raise ValueError("relay cannot forward: peak power must be positive")
    s = _power_split(d.interval_energies, d.interval_lengths, peak, model)
    return _pack(d, s, peak * (d.interval_lengths - s), model, relay_power=peak)


# --- energy-limited relay ----------------------------------------------------


def _point(u: float, e: float, length: float, model) -> tuple[float, float]:
    """Relay energy and marginal bits-per-joule of one interval at source fraction ``u``.

    The marginal comes from implicit differentiation of the data balance
    ``s g(e/s) = r g(E_R/r)``:
    ``dD/dE_R = a_s g'(p_r) / (a_s + a_r)`` with ``a_x = g(p_x) - p_x g'(p_x)``.
    """
    s = u * length
    r = length - s
    if s <= 0.0:
        return 0.0, model.slope_at_zero
    if r <= 0.0:
        return math.inf, 0.0
    ps = e / s
    pr = model.inv_rate(s * model.rate(ps) / r)
    if not math.isfinite(pr):
        return math.inf, 0.0
    a_s = model.rate_gap(ps)
    a_r = model.rate_gap(pr)
    return r * pr, a_s * model.rate_derivative(pr) / (a_s + a_r)


def marginal_throughput(energies, lengths, source_times, model) -> np.ndarray:
    """d(bits)/d(relay energy) of each interval at the given source periods."""
    return np.array(
        [_point(float(s) / float(L), float(e), float(L), model)[1] for e, L, s in zip(energies, lengths, source_times)]
    )


def _solve_fraction(e: float, length: float, model, which: int, target: float) -> float:
    """Source fraction at which relay energy (which=0) or marginal (which=1) hits ``target``."""
    sign = 1.0 if which == 0 else -1.0

    def f(u):
        return sign * (_point(u, e, length, model)[which] - target)

    if f(0.0) >= 0:
        return 0.0
    hi = 0.5
    while not f(hi) > 0:
        hi = 0.5 * (1.0 + hi)
        if hi >= 1.0:
            return 1.0
    return find_root(f, 0.0, hi, xtol=1e-16)


def _energy_split(energies, lengths, budget, model):
    """Source periods and relay energies maximising total bits under a relay energy budget.

    All intervals share one marginal value ``mu`` (outer root search in
    log mu, inner per-interval root search); the last interval then
    absorbs the rounding residual so the budget is met to machine
    precision.
    """
    energies = [float(x) for x in energies]
    lengths = [float(x) for x in lengths]
    n = len(energies)
    if any(e <= 0 for e in energies):
        raise AssertionError("DWF interval carries no energy")
    if budget == 0:
        return np.zeros(n), np.zeros(n)

    def fractions(mu):
        return [_solve_fraction(e, L, model, 1, mu) for e, L in zip(energies, lengths)]

    def relay_energies(us):
        return [_point(u, e, L, model)[0] for u, e, L in zip(us, energies, lengths)]

    if n == 1:
        us = [_solve_fraction(energies[0], lengths[0], model, 0, budget)]
        ers = [budget]
    else:
        def excess(log_mu):
            return math.fsum(relay_energies(fractions(math.exp(log_mu)))) - budget

        hi = math.log(model.slope_at_zero)
        lo = hi - math.log(2.0)
        while excess(lo) <= 0:
            lo -= math.log(100.0)
            if lo < hi - 700:
                raise AssertionError("could not bracket the relay energy budget")
        us = fractions(math.exp(find_root(excess, lo, hi, xtol=1e-15)))
        ers = relay_energies(us)
        rest = budget - math.fsum(ers[:-1])
        if rest > 0:
            us[-1] = _solve_fraction(energies[-1], lengths[-1], model, 0, rest)
            ers[-1] = rest
    return np.array(us) * np.array(lengths), np.array(ers)


def solve_energy_constrained(d: DwfDecomposition, budget: float, model) -> list[IntervalSolution]:
    """Per-interval optimum when the relay may spend at most ``budget`` joules in total."""
    if budget < 0:
        raise ValueError("relay energy budget must be >= 0")
    s, er = _energy_split(d.interval_energies, d.interval_lengths, float(budget), model)
    return _pack(d, s, er, model)


# --- both limits -------------------------------------------------------------


def _relay_powers(s, er, lengths):
    r = lengths - s
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(er > 0, er / r, 0.0)


def _split_both(d: DwfDecomposition, peak: float, budget: float, model):
    energies, lengths = d.interval_energies, d.interval_lengths
    n = len(energies)
    tol = 1 + 1e-12

    s, er = _energy_split(energies, lengths, budget, model)
    pr = _relay_powers(s, er, lengths)
    if np.all(pr <= peak * tol):
        return s, er, pr

    s_peak = _power_split(energies, lengths, peak, model)
    er_peak = peak * (lengths - s_peak)
    if np.sum(er_peak) <= budget:
        return s_peak, er_peak, np.full(n, peak)

    for k in range(1, n):
        split = n - k
        remaining = budget - float(np.sum(er_peak[split:]))
        if remaining <= 0:
            warnings.warn(
                f"pinning {k} trailing interval(s) to peak power exhausts the relay budget; "
                "returning the previous iterate",
                RuntimeWarning,
                stacklevel=3,
            )
            break
        s_pre, er_pre = _energy_split(energies[:split], lengths[:split], remaining, model)
        s = np.concatenate((s_pre, s_peak[split:]))
        er = np.concatenate((er_pre, er_peak[split:]))
        pr = np.concatenate((_relay_powers(s_pre, er_pre, lengths[:split]), np.full(k, peak)))
        if np.all(pr[:split] <= peak * tol):
            if np.any(np.diff(pr) < -1e-9 * peak):
                raise AssertionError("relay powers are not nondecreasing across DWF intervals")
            return s, er, pr
    else:
        warnings.warn(
            "no suffix of peak-power intervals satisfies both relay constraints; "
            "returning the last iterate",
            RuntimeWarning,
            stacklevel=3,
        )
    return s, er, pr


def solve_both(d: DwfDecomposition, c: RelayConstraints, model) -> list[IntervalSolution]:
    """Per-interval optimum with both a relay peak power and a relay energy budget."""
    if not (c.has_peak and c.has_energy):
        raise ValueError("solve_both needs both a peak power and an energy budget")
    s, er, pr = _split_both(d, c.peak_power, c.total_energy, model)
    return _pack(d, s, er, model, relay_power=pr)


def solve_intervals(d: DwfDecomposition, c: RelayConstraints, model) -> list[IntervalSolution]:
    if c.has_peak and c.has_energy:
        return solve_both(d, c, model)
    if c.has_peak:
        return solve_power_constrained(d, c.peak_power, model)
    return solve_energy_constrained(d, c.total_energy, model)


def _pack(d, s, er, model, relay_power=None) -> list[IntervalSolution]:
    lengths = d.interval_lengths
    energies = d.interval_energies
    if relay_power is None:
        relay_power = _relay_powers(s, er, lengths)
    relay_power = np.broadcast_to(np.asarray(relay_power, dtype=float), (len(s),))
    out = []
    for k in range(len(s)):
        if s[k] == 0.0:
            out.append(IntervalSolution(0.0, 0.0, 0.0, 0.0, k, float(lengths[k]), 0.0))
            continue
        ps = float(energies[k] / s[k])
        out.append(
            IntervalSolution(
                source_time=float(s[k]),
                relay_energy=float(er[k]),
                source_power=ps,
                relay_power=float(relay_power[k]),
                interval_index=k,
                interval_length=float(lengths[k]),
                bits=float(s[k] * model.rate(ps)),
            )
        )
    return out


# --- realisation on the original profile --------------------------------------


def _check_solution(sol: IntervalSolution, d: DwfDecomposition, model) -> None:
    k = sol.interval_index
    length = float(d.interval_lengths[k])
    if sol.idle:
        return
    if not 0 < sol.source_time < length:
        raise ValueError(f"interval {k}: source period {sol.source_time!r} outside (0, {length!r})")
    src_bits = sol.source_time * model.rate(sol.source_power)
    relay_bits = (length - sol.source_time) * model.rate(sol.relay_power)
    if abs(src_bits - relay_bits) > BALANCE_RTOL * max(src_bits, relay_bits):
        raise ValueError(f"interval {k}: source sends {src_bits!r} bits but relay forwards {relay_bits!r}")
    e_d = float(d.interval_energies[k])
    if abs(sol.source_power * sol.source_time - e_d) > BALANCE_RTOL * e_d:
        raise ValueError(f"interval {k}: source does not spend exactly the interval energy")


def realize_policy(original: EhProfile, d: DwfDecomposition, sols: list[IntervalSolution], model=None) -> TransmissionPolicy:
    """Schedule achieving the relaxed-profile optimum under the original arrivals.

    Inside each DWF interval the source transmits at its fixed power
    until the energy that has already arrived runs out, the relay then
    forwards that batch at its fixed power, and the cycle repeats. The
    relay-to-source time ratio is kept constant, so powers and total
    source time per interval match the relaxed solution.
    """
    if len(sols) != d.n_intervals:
        raise ValueError(f"expected {d.n_intervals} interval solutions, got {len(sols)}")
    if model is not None:
        for sol in sols:
            _check_solution(sol, d, model)
    usable = original.truncated(d.horizon)
    epochs = usable.epochs
    csum = np.concatenate(([0.0], np.cumsum(usable.amounts)))
    starts = d.interval_starts
    stages = []
    for k, sol in enumerate(sols):
        if sol.idle:
            continue
        if not 0 < sol.source_time < sol.interval_length:
            raise ValueError(f"interval {k}: source period outside (0, interval length)")
        a = float(starts[k])
        lo, hi = d.arrival_range(k)
        base = csum[lo]
        ps, pr = sol.source_power, sol.relay_power
        t_s = sol.source_time
        ratio = (sol.interval_length - t_s) / t_s
        e_tol = 1e-12 * float(d.interval_energies[k])
        t_tol = 1e-12 * sol.interval_length
        inner = np.arange(lo + 1, hi)

        consumed = 0.0
        done = 0.0
        tau = a
        while True:
            later = inner[epochs[inner] > tau + t_tol]
            # energy the source would have drawn at each later epoch vs. what had arrived
            overdraw = ps * (epochs[later] - tau) - (csum[later] - base - consumed)
            bad = later[overdraw > e_tol]
            if bad.size == 0 or t_s - done <= t_tol:
                length = t_s - done
                stages.append(Stage(SOURCE, tau, length, ps))
                stages.append(Stage(RELAY, tau + length, ratio * length, pr))
                break
            j = int(bad[0])
            length = (csum[j] - base - consumed) / ps
            stages.append(Stage(SOURCE, tau, length, ps))
            stages.append(Stage(RELAY, tau + length, ratio * length, pr))
            consumed += ps * length
            done += length
            tau = a + done * (1.0 + ratio)
    return TransmissionPolicy(tuple(stages))


# --- end to end ----------------------------------------------------------------


def rmax_throughput(profile: EhProfile, horizon: float, c: RelayConstraints, model) -> float:
    """Optimal delivered bits at ``horizon`` without building the schedule."""
    d = compute_dwf(profile, horizon)
    return float(sum(s.bits for s in solve_intervals(d, c, model)))


def rmax(profile: EhProfile, horizon: float, c: RelayConstraints, model) -> RmaxResult:
    """Maximum-throughput schedule for ``profile`` over ``[0, horizon]``."""
    require_valid(profile)
    d = compute_dwf(profile, horizon)
    sols = solve_intervals(d, c, model)
    policy = realize_policy(profile, d, sols, model)
    return RmaxResult(policy, float(sum(s.bits for s in sols)), d, sols)
