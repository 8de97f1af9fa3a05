"""Piecewise-constant source/relay transmission schedules."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np

__all__ = ["Stage", "TransmissionPolicy"]

SOURCE = "source"
RELAY = "relay"


@dataclass(frozen=True)
class Stage:
    kind: Literal["source", "relay"]
    start: float
    duration: float
    power: float

    @property
    def end(self) -> float:
        return self.start + self.duration

    def to_dict(self) -> dict:
        return {"kind": self.kind, "start_s": self.start, "duration_s": self.duration, "power_w": self.power}

    @classmethod
    def from_dict(cls, data: dict) -> "Stage":
        kind = data["kind"]
        if kind not in (SOURCE, RELAY):
            raise ValueError(f"unknown stage kind {kind!r}")
        return cls(kind, float(data["start_s"]), float(data["duration_s"]), float(data["power_w"]))


@dataclass(frozen=True)
class TransmissionPolicy:
    """Ordered stages; only one node transmits in each stage.

    Consecutive stages of the same kind form one logical stage whose
    power changes mid-way (baselines produce these). Gaps between
    stages are idle time. Optimal policies are gap-free and alternate
    source/relay, starting with the source and ending with the relay.
    """

    stages: tuple[Stage, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))

    @classmethod
    def from_stages(cls, stages: Iterable[Stage], min_duration: float = 0.0) -> "TransmissionPolicy":
        return cls(tuple(s for s in stages if s.duration > min_duration))

    @property
    def pair_count(self) -> int:
        """Number of S-R stage pairs (maximal source runs followed by relay runs)."""
        count = 0
        prev = None
        for s in self.stages:
            if s.kind == SOURCE and prev != SOURCE:
                count += 1
            prev = s.kind
        return count

    @property
    def end_time(self) -> float:
        return self.stages[-1].end if self.stages else 0.0

    def stages_of(self, kind: str) -> list[Stage]:
        return [s for s in self.stages if s.kind == kind]

    def source_energy(self, t: float = np.inf) -> float:
        return sum(s.power * min(max(t - s.start, 0.0), s.duration) for s in self.stages if s.kind == SOURCE)

    def relay_energy(self, t: float = np.inf) -> float:
        return sum(s.power * min(max(t - s.start, 0.0), s.duration) for s in self.stages if s.kind == RELAY)

    def data(self, t: float, model) -> tuple[float, float]:
        """Cumulative bits ``(D_S(t), D_R(t))`` sent by source and relay."""
        ds = dr = 0.0
        for s in self.stages:
            span = min(max(t - s.start, 0.0), s.duration)
            if span <= 0.0:
                continue
            bits = span * model.rate(s.power)
            if s.kind == SOURCE:
                ds += bits
            else:
                dr += bits
        return ds, dr

    def delivered(self, model) -> float:
        return sum(s.duration * model.rate(s.power) for s in self.stages if s.kind == RELAY)

    def alternates(self) -> bool:
        """True for the strict S, R, S, R, ... layout of optimal policies."""
        kinds = [s.kind for s in self.stages]
        return len(kinds) % 2 == 0 and all(k == (SOURCE if i % 2 == 0 else RELAY) for i, k in enumerate(kinds))

    def to_dict(self) -> dict:
        return {"stages": [s.to_dict() for s in self.stages], "pair_count": self.pair_count}

    @classmethod
    def from_dict(cls, data: dict) -> "TransmissionPolicy":
        return cls(tuple(Stage.from_dict(s) for s in data["stages"]))

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "TransmissionPolicy":
        return cls.from_dict(json.loads(text))
