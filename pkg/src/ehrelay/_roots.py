"""Bracketed scalar root finding."""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

RTOL = 4 * np.finfo(float).eps


def find_root(f, lo: float, hi: float, xtol: float = 1e-15, maxiter: int = 200) -> float:
    """Root of ``f`` on ``[lo, hi]``; ``f(lo)`` and ``f(hi)`` must differ in sign.

    Endpoint zeros are returned directly.
    """
    flo = f(lo)
    if flo == 0.0:
        return lo
    fhi = f(hi)
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError(f"root not bracketed on [{lo!r}, {hi!r}]: f = ({flo!r}, {fhi!r})")
    return brentq(f, lo, hi, xtol=xtol, rtol=RTOL, maxiter=maxiter)

