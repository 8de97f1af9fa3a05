"""Discrete energy-harvesting profiles and their random generation.

Times are seconds and energies joules everywhere in the library.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .exceptions import InvalidProfile

__all__ = [
    "EhProfile",
    "ArrivalGenConfig",
    "cumulative_energy",
    "validate",
    "require_valid",
    "generate_poisson",
    "collapse",
]


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class EhProfile:
    """Staircase of cumulative harvested energy.

    ``amounts[i]`` joules become available at ``epochs[i]`` seconds.
    Construction does not validate; call :func:`validate` or
    :func:`require_valid`.
    """

    epochs: np.ndarray
    amounts: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "epochs", _frozen_array(self.epochs))
        object.__setattr__(self, "amounts", _frozen_array(self.amounts))

    def __eq__(self, other):
        if not isinstance(other, EhProfile):
            return NotImplemented
        return np.array_equal(self.epochs, other.epochs) and np.array_equal(self.amounts, other.amounts)

    def __len__(self):
        return len(self.epochs)

    @property
    def total_energy(self) -> float:
        return float(np.sum(self.amounts))

    def energy_before(self, t: float) -> float:
        """Energy that arrived strictly before ``t`` (left limit of the staircase)."""
        return float(np.sum(self.amounts[self.epochs < t]))

    def truncated(self, horizon: float) -> "EhProfile":
        """Arrivals usable inside ``[0, horizon)``."""
        keep = self.epochs < horizon
        return EhProfile(self.epochs[keep], self.amounts[keep])

    def to_dict(self) -> dict:
        return {"epochs_s": self.epochs.tolist(), "amounts_j": self.amounts.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "EhProfile":
        try:
            return cls(data["epochs_s"], data["amounts_j"])
        except KeyError as exc:
            raise InvalidProfile(f"profile JSON is missing key {exc.args[0]!r}") from None

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "EhProfile":
        return cls.from_dict(json.loads(text))


def cumulative_energy(profile: EhProfile, t):
    """Right-continuous cumulative harvested energy E(t)."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("time must be >= 0")
    csum = np.concatenate(([0.0], np.cumsum(profile.amounts)))
    out = csum[np.searchsorted(profile.epochs, t_arr, side="right")]
    return float(out) if out.ndim == 0 else out


def validate(profile: EhProfile) -> Optional[str]:
    """Return ``None`` for a valid profile, else a message naming the first violation."""
    t, e = profile.epochs, profile.amounts
    if len(t) != len(e):
        return "epochs and amounts differ in length"
    if len(t) == 0:
        return "profile has no arrivals"
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(e))):
        return "non-finite value"
    if np.any(np.diff(t) <= 0):
        return "epochs not increasing"
    if np.any(e <= 0):
        return "nonpositive amount"
    if t[0] != 0.0:
        return "first epoch must be 0"
    return None


def require_valid(profile: EhProfile) -> EhProfile:
    problem = validate(profile)
    if problem is not None:
        raise InvalidProfile(problem)
    return profile


@dataclass(frozen=True)
class ArrivalGenConfig:
    """Poisson energy arrivals: rate ``arrival_rate`` (1/s), packets of ``energy_unit`` J."""

    arrival_rate: float
    energy_unit: float
    horizon: float
    seed: Union[int, np.random.SeedSequence, None] = 0

    def __post_init__(self):
        for name in ("arrival_rate", "energy_unit", "horizon"):
            v = getattr(self, name)
            if not (v > 0 and np.isfinite(v)):
                raise ValueError(f"{name} must be positive, got {v!r}")

    @property
    def average_eh_rate(self) -> float:
        return self.arrival_rate * self.energy_unit


def generate_poisson(cfg: ArrivalGenConfig) -> EhProfile:
    """Homogeneous Poisson arrivals on (0, horizon) plus a forced packet at t=0."""
    rng = np.random.default_rng(cfg.seed)
    n = rng.poisson(cfg.arrival_rate * cfg.horizon)
    epochs = np.sort(rng.uniform(0.0, cfg.horizon, size=n))
    epochs = np.unique(epochs[epochs > 0.0])
    epochs = np.concatenate(([0.0], epochs))
    return EhProfile(epochs, np.full(len(epochs), cfg.energy_unit))


def collapse(profile: EhProfile, horizon: Optional[float] = None) -> EhProfile:
    """Single arrival at t=0 carrying all energy usable before ``horizon``."""
    total = profile.total_energy if horizon is None else profile.energy_before(horizon)
    return EhProfile([0.0], [total])
