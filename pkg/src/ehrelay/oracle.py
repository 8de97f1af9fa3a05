"""Solver-independent checks: feasibility, policy evaluation, brute force.

Nothing here calls the RMAX/TMIN solvers. The feasibility check works
directly on the raw constraints; the brute-force optimiser searches a
grid over per-interval source fractions and relay energies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from .dwf import compute_dwf
from .policy import RELAY, SOURCE, TransmissionPolicy
from .profile import EhProfile

__all__ = ["Violation", "FeasibilityReport", "check_feasibility", "evaluate", "brute_force_rmax"]

RTOL = 1e-9

ViolationKind = Literal["energy_causality", "data_causality", "half_duplex", "relay_peak", "relay_energy", "horizon"]


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    time: float
    magnitude: float

    def to_dict(self) -> dict:
        return {"kind": self.kind, "time_s": self.time, "magnitude": self.magnitude}


@dataclass
class FeasibilityReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set:
        return {v.kind for v in self.violations}

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": [v.to_dict() for v in self.violations]}


def check_feasibility(policy: TransmissionPolicy, profile: EhProfile, c=None, horizon: Optional[float] = None, model=None) -> FeasibilityReport:
    """Check every constraint of the two-hop problem at all breakpoints.

    Powers are piecewise constant, so energy and data curves are
    piecewise linear and checking at stage boundaries and arrival
    epochs is exhaustive. Data causality needs a rate model; the
    package default is used when ``model`` is None.
    """
    if model is None:
        from .rate_model import DEFAULT_MODEL as model
    report = FeasibilityReport()
    add = report.violations.append
    stages = sorted(policy.stages, key=lambda s: s.start)
    if not stages:
        return report
    end = max(s.end for s in stages)
    t_scale = max(end, horizon or 0.0, 1e-300)

    for s in stages:
        if s.duration < 0 or s.power < 0:
            add(Violation("horizon", s.start, -min(s.duration, s.power)))
    for a, b in zip(stages, stages[1:]):
        overlap = a.end - b.start
        if overlap > RTOL * t_scale:
            add(Violation("half_duplex", b.start, overlap))
    if stages[0].start < -RTOL * t_scale:
        add(Violation("horizon", stages[0].start, -stages[0].start))
    if horizon is not None and end > horizon * (1 + RTOL):
        add(Violation("horizon", end, end - horizon))

    # energy causality: consumption up to each epoch vs. energy that arrived strictly before it
    e_scale = max(profile.total_energy, 1e-300)
    checkpoints = np.unique(np.concatenate((profile.epochs, [s.end for s in stages])))
    csum = np.concatenate(([0.0], np.cumsum(profile.amounts)))
    for t in checkpoints:
        used = policy.source_energy(t)
        left = csum[np.searchsorted(profile.epochs, t, side="left")]
        right = csum[np.searchsorted(profile.epochs, t, side="right")]
        avail = left if t in profile.epochs else right
        if used - avail > RTOL * e_scale:
            add(Violation("energy_causality", float(t), float(used - avail)))

    relay_total = 0.0
    for s in stages:
        if s.kind != RELAY:
            continue
        relay_total += s.power * s.duration
        if c is not None and c.peak_power is not None and s.power > c.peak_power * (1 + RTOL):
            add(Violation("relay_peak", s.start, s.power - c.peak_power))
        ds, dr = policy.data(s.end, model)
        if dr - ds > RTOL * max(ds, dr, 1e-300):
            add(Violation("data_causality", s.end, dr - ds))
    if c is not None and c.total_energy is not None and relay_total > c.total_energy * (1 + RTOL):
        add(Violation("relay_energy", end, relay_total - c.total_energy))
    return report


def evaluate(policy: TransmissionPolicy, model, target: Optional[float] = None):
    """Delivered bits at the end of ``policy`` and, if ``target`` is given, the time it is reached.

    Returns ``(throughput, completion_time)``; ``completion_time`` is None
    without a target or when the target is never reached.
    """
    stages = sorted(policy.stages, key=lambda s: s.start)
    for a, b in zip(stages, stages[1:]):
        if a.end - b.start > RTOL * max(b.end, 1e-300):
            raise ValueError(f"stages overlap at t={b.start!r}")
    ds = dr = 0.0
    done_at = 0.0 if target is not None and target <= 0 else None
    for s in stages:
        rate = model.rate(s.power)
        if s.kind == SOURCE:
            ds += s.duration * rate
            continue
        before = dr
        dr += s.duration * rate
        if dr - ds > RTOL * max(ds, 1e-300):
            raise ValueError(f"relay forwards more than it received by t={s.end!r}")
        if done_at is None and target is not None and dr >= target * (1 - 1e-12):
            done_at = s.start + min(s.duration, max(target - before, 0.0) / rate) if rate > 0 else s.start
    return dr, done_at


def _grid(resolution: float) -> np.ndarray:
    n = int(round(1.0 / resolution))
    return np.arange(1, n) / n


def brute_force_rmax(profile: EhProfile, horizon: float, c, model, resolution: float = 1e-3) -> float:
    """Best throughput over a grid of (source fraction, relay energy) per DWF interval.

    One S-R pair per DWF interval of the relaxed profile; each pair
    delivers ``min(source bits, relay bits)``. Relay energies are
    allocated in multiples of ``resolution * budget`` by a max-plus
    dynamic programme. Every grid point is feasible, so the result is a
    lower bound on the true optimum.
    """
    usable = profile.truncated(horizon)
    if len(usable) > 4:
        raise ValueError("brute force is limited to 4 arrivals")
    d = compute_dwf(profile, horizon)
    if d.n_intervals > 3:
        raise ValueError("brute force is limited to 3 DWF intervals")
    x = _grid(resolution)
    peak = c.peak_power
    budget = c.total_energy

    def source_bits(e_d, length):
        s = x * length
        return s * model.rate(e_d / s)

    if budget is None:
        total = 0.0
        for e_d, length in zip(d.interval_energies, d.interval_lengths):
            relay = (1 - x) * length * model.rate(peak)
            total += float(np.max(np.minimum(source_bits(e_d, length), relay)))
        return total

    m = int(round(1.0 / resolution))
    levels = np.arange(m + 1) * (budget / m)
    best = None
    for e_d, length in zip(d.interval_energies, d.interval_lengths):
        r = (1 - x) * length
        power = levels[:, None] / r[None, :]
        if peak is not None:
            power = np.minimum(power, peak)
        relay = r[None, :] * model.rate(power)
        value = np.max(np.minimum(source_bits(e_d, length)[None, :], relay), axis=1)
        if best is None:
            best = value
            continue
        merged = np.full(m + 1, -np.inf)
        for j in range(m + 1):
            merged[j:] = np.maximum(merged[j:], best[: m + 1 - j] + value[j])
        best = merged
    return float(np.max(best))
