"""Random instance generators shared by the test modules."""

import numpy as np
from hypothesis import strategies as st

from ehrelay import EhProfile, RelayConstraints

MW = 1e-3
MJ = 1e-3

HORIZON = 0.1
PEAK = 10 * MW


def random_profile(rng, n_max=10, horizon=HORIZON, scale=0.3 * MJ):
    """Up to ``n_max`` arrivals on [0, horizon) with the first at 0."""
    n = int(rng.integers(1, n_max + 1))
    epochs = np.sort(rng.uniform(0.0, horizon, n - 1))
    epochs = np.unique(np.concatenate(([0.0], epochs[epochs > 0])))
    amounts = scale * rng.uniform(0.05, 2.0, len(epochs))
    return EhProfile(epochs, amounts)


def random_constraints(rng, kind=None):
    kind = kind or rng.choice(["peak", "energy", "both"])
    peak = float(rng.uniform(2, 50)) * MW
    budget = float(rng.uniform(0.05, 1.0)) * MJ
    if kind == "peak":
        return RelayConstraints(peak_power=peak)
    if kind == "energy":
        return RelayConstraints(total_energy=budget)
    return RelayConstraints(peak_power=peak, total_energy=budget)


@st.composite
def profiles(draw, max_arrivals=8, horizon=HORIZON):
    gaps = draw(st.lists(st.floats(1e-4, 0.05), min_size=0, max_size=max_arrivals - 1))
    epochs = np.concatenate(([0.0], np.cumsum(gaps)))
    amounts = draw(st.lists(st.floats(0.01, 1.0), min_size=len(epochs), max_size=len(epochs)))
    return EhProfile(epochs, np.array(amounts) * MJ)


@st.composite
def constraints(draw):
    kind = draw(st.sampled_from(["peak", "energy", "both"]))
    peak = draw(st.floats(1.0, 100.0)) * MW
    budget = draw(st.floats(0.01, 2.0)) * MJ
    if kind == "peak":
        return RelayConstraints(peak_power=peak)
    if kind == "energy":
        return RelayConstraints(total_energy=budget)
    return RelayConstraints(peak_power=peak, total_energy=budget)
