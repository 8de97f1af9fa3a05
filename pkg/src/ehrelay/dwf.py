"""Single-hop directional water-filling (DWF) over a known EH profile.

The DWF power curve is the lower convex hull of the points
``(t_i, energy arrived before t_i)`` together with the terminal point
``(T, all energy)``, traced from the origin. The hull vertices are the
DWF points; consecutive vertices bound the DWF intervals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .profile import EhProfile, require_valid

__all__ = ["DwfDecomposition", "compute_dwf", "dwf_eh_profile", "single_hop_throughput"]

SLOPE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class DwfDecomposition:
    """DWF points of a profile over ``[0, point_times[-1]]``.

    ``source_indices[k]`` is the index (into the profile's arrivals that
    precede the horizon) of the first arrival *after* DWF point ``k``;
    interval ``k`` therefore consumes arrivals
    ``source_indices[k-1] .. source_indices[k] - 1`` (with -1 -> 0).
    The last entry equals the number of usable arrivals.
    """

    point_times: np.ndarray
    interval_lengths: np.ndarray
    interval_energies: np.ndarray
    single_hop_powers: np.ndarray
    source_indices: np.ndarray

    @property
    def horizon(self) -> float:
        return float(self.point_times[-1])

    @property
    def n_intervals(self) -> int:
        return len(self.point_times)

    @property
    def interval_starts(self) -> np.ndarray:
        return np.concatenate(([0.0], self.point_times[:-1]))

    def arrival_range(self, k: int) -> tuple[int, int]:
        lo = 0 if k == 0 else int(self.source_indices[k - 1])
        return lo, int(self.source_indices[k])

    def same_points(self, other: "DwfDecomposition", rtol: float = 1e-12) -> bool:
        return (
            self.n_intervals == other.n_intervals
            and np.allclose(self.point_times, other.point_times, rtol=rtol, atol=0)
            and np.allclose(self.interval_energies, other.interval_energies, rtol=rtol, atol=0)
        )

    def to_dict(self) -> dict:
        return {
            "point_times_s": self.point_times.tolist(),
            "interval_energies_j": self.interval_energies.tolist(),
            "single_hop_powers_w": self.single_hop_powers.tolist(),
            "source_indices": self.source_indices.tolist(),
        }

    @classmethod
    def from_points(cls, point_times, interval_energies, source_indices) -> "DwfDecomposition":
        point_times = np.asarray(point_times, dtype=float)
        energies = np.asarray(interval_energies, dtype=float)
        lengths = np.diff(np.concatenate(([0.0], point_times)))
        return cls(
            point_times=point_times,
            interval_lengths=lengths,
            interval_energies=energies,
            single_hop_powers=energies / lengths,
            source_indices=np.asarray(source_indices, dtype=int),
        )


def _hull_indices(x: np.ndarray, y: np.ndarray) -> list[int]:
    """Greedy minimum-slope walk from the origin; ties go to the farthest candidate."""
    picks = []
    prev = 0
    x0 = y0 = 0.0
    n = len(x)
    while prev < n:
        slopes = (y[prev:] - y0) / (x[prev:] - x0)
        best = slopes.min()
        tied = np.flatnonzero(slopes <= best + SLOPE_RTOL * abs(best))
        idx = prev + int(tied[-1])
        picks.append(idx)
        x0, y0 = x[idx], y[idx]
        prev = idx + 1
    return picks


def compute_dwf(profile: EhProfile, horizon: float) -> DwfDecomposition:
    """DWF points of ``profile`` over ``[0, horizon]``.

    Arrivals at or after ``horizon`` cannot be used and are ignored.
    """
    require_valid(profile)
    if not horizon > 0:
        raise ValueError(f"horizon must be positive, got {horizon!r}")
    usable = profile.truncated(horizon)
    t, e = usable.epochs, usable.amounts
    csum = np.cumsum(e)
    # candidate m (1..n-1) is the epoch t_m carrying the energy of arrivals 0..m-1;
    # candidate n is the horizon with all usable energy
    x = np.concatenate((t[1:], [horizon]))
    y = np.concatenate((csum[:-1], [csum[-1]]))
    picks = _hull_indices(x, y)
    point_times = x[picks]
    cum = y[picks]
    energies = np.diff(np.concatenate(([0.0], cum)))
    return DwfDecomposition.from_points(point_times, energies, np.asarray(picks) + 1)


def dwf_eh_profile(d: DwfDecomposition) -> EhProfile:
    """Relaxed profile delivering each DWF interval's energy at the interval start."""
    return EhProfile(d.interval_starts, d.interval_energies)


def single_hop_throughput(profile: EhProfile, horizon: float, model) -> float:
    """Bits a direct EH link delivers over ``[0, horizon]`` under DWF power."""
    d = compute_dwf(profile, horizon)
    return float(np.sum(d.interval_lengths * model.rate(d.single_hop_powers)))
