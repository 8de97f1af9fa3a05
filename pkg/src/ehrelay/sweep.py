"""Monte Carlo sweeps over the average EH rate or the relay peak power.

Each trial draws a Poisson profile from ``SeedSequence([seed, trial])``,
so every sweep value sees the same arrival times (common random numbers)
and the table does not depend on evaluation order or worker count.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from .baselines import BaselineKind, run_baseline
from .exceptions import InfeasibleProblem, InvalidProfile
from .profile import ArrivalGenConfig, generate_poisson
from .rate_model import DEFAULT_MODEL
from .rmax import RelayConstraints, rmax_throughput
from .tmin import tmin

__all__ = ["SweepConfig", "COLUMNS", "DEFAULT_GRIDS", "run_trial", "run_sweep", "to_csv", "with_grid"]

log = logging.getLogger(__name__)

COLUMNS = ("sweep_value", "optimal", "fixed_scheduling", "fixed_power", "upper_bound", "trials_ok")
POLICIES = COLUMNS[1:5]

DEFAULT_GRIDS = {
    "eh_rate": (1e-3, 2e-3, 3e-3, 4e-3, 5e-3),
    "relay_peak": (2e-3, 5e-3, 10e-3, 20e-3, 50e-3),
}


@dataclass(frozen=True)
class SweepConfig:
    """One sweep. All quantities in SI units (W, J, s, bits).

    ``horizon`` is the RMAX horizon and also the window over which
    arrivals are drawn for TMIN.
    """

    objective: str = "rmax"
    sweep_variable: str = "eh_rate"
    sweep_values: tuple = field(default=DEFAULT_GRIDS["eh_rate"])
    trials: int = 1000
    arrival_rate: float = 1.0
    eh_rate: float = 3e-3
    horizon: float = 0.1
    data: float = 20e3
    relay_peak: Optional[float] = 10e-3
    relay_energy: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sweep_values", tuple(float(v) for v in self.sweep_values))
        if self.objective not in ("rmax", "tmin"):
            raise ValueError(f"objective must be rmax or tmin, got {self.objective!r}")
        if self.sweep_variable not in DEFAULT_GRIDS:
            raise ValueError(f"sweep_variable must be one of {sorted(DEFAULT_GRIDS)}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.sweep_values or any(not (v > 0 and math.isfinite(v)) for v in self.sweep_values):
            raise ValueError("sweep_values must be nonempty and positive")
        for name in ("arrival_rate", "eh_rate", "horizon", "data"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.sweep_variable == "eh_rate" and self.relay_peak is None and self.relay_energy is None:
            raise ValueError("relay needs a peak power or an energy budget")

    def point(self, value: float) -> tuple[float, RelayConstraints]:
        """(average EH rate, relay constraints) at one sweep value."""
        if self.sweep_variable == "eh_rate":
            return value, RelayConstraints(self.relay_peak, self.relay_energy)
        return self.eh_rate, RelayConstraints(value, self.relay_energy)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sweep_values"] = list(self.sweep_values)
        return d


def run_trial(cfg: SweepConfig, value: float, trial: int, model=DEFAULT_MODEL) -> Optional[dict]:
    """Optimal and baseline objective values for one trial, or None if any solver fails."""
    eh_rate, c = cfg.point(value)
    gen = ArrivalGenConfig(
        cfg.arrival_rate, eh_rate / cfg.arrival_rate, cfg.horizon, np.random.SeedSequence([cfg.seed, trial])
    )
    profile = generate_poisson(gen)
    target = cfg.horizon if cfg.objective == "rmax" else cfg.data
    try:
        if cfg.objective == "rmax":
            out = {"optimal": rmax_throughput(profile, cfg.horizon, c, model)}
            pick = "throughput"
        else:
            out = {"optimal": tmin(profile, cfg.data, c, model).completion_time}
            pick = "completion_time"
        for name, kind in (
            ("fixed_scheduling", BaselineKind.FIXED_SCHEDULING),
            ("fixed_power", BaselineKind.FIXED_POWER),
            ("upper_bound", BaselineKind.NON_EH_UPPER_BOUND),
        ):
            out[name] = getattr(run_baseline(kind, cfg.objective, profile, target, c, model), pick)
    except (InfeasibleProblem, InvalidProfile, ValueError, AssertionError) as exc:
        log.warning("trial %d at %g failed: %s", trial, value, exc)
        return None
    return out


def _row(args) -> dict:
    cfg, value, model = args
    results = [run_trial(cfg, value, k, model) for k in range(cfg.trials)]
    ok = [r for r in results if r is not None]
    row = {"sweep_value": value, "trials_ok": len(ok)}
    for name in POLICIES:
        row[name] = math.fsum(r[name] for r in ok) / len(ok) if ok else math.nan
    return row


def run_sweep(cfg: SweepConfig, jobs: int = 1, model=DEFAULT_MODEL) -> list[dict]:
    """Mean objective per policy for each sweep value, one dict per row.

    ``jobs > 1`` spreads sweep values over worker processes; the result
    is identical to the serial run.
    """
    tasks = [(cfg, v, model) for v in cfg.sweep_values]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_row, tasks))
    return [_row(t) for t in tasks]


def to_csv(rows: list[dict], stream=None) -> str:
    """Write ``rows`` as CSV (to ``stream`` if given) and return the text."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(float(row[k])) if k != "trials_ok" else int(row[k]) for k in COLUMNS})
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def with_grid(cfg: SweepConfig, values=None) -> SweepConfig:
    """Copy of ``cfg`` using ``values`` or the default grid of its sweep variable."""
    return replace(cfg, sweep_values=tuple(values) if values is not None else DEFAULT_GRIDS[cfg.sweep_variable])
