"""Rate-power functions.

Every solver in the package only needs a strictly concave, strictly
increasing map ``g`` with ``g(0) = 0``, its inverse and its derivative.
:class:`RateFunction` is that contract; :class:`RateModel` is the
band-limited AWGN instance used throughout the simulations.

All methods accept python floats or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._roots import find_root

__all__ = ["RateFunction", "RateModel", "DEFAULT_MODEL"]

LN2 = math.log(2.0)


def _nonneg(x, name):
    if isinstance(x, (float, int)):
        if x < 0 or x != x:
            raise ValueError(f"{name} must be >= 0, got {x!r}")
        return float(x)
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError(f"{name} must be >= 0")
    return arr


class RateFunction:
    """Base class for rate-power models.

    Subclasses implement :meth:`rate` and :meth:`rate_derivative`.
    :meth:`inv_rate` falls back to monotone root bracketing, which is
    valid for any strictly increasing ``rate``.
    """

    strictly_concave = True
    strictly_increasing = True

    def rate(self, power):
        raise NotImplementedError

    def rate_derivative(self, power):
        raise NotImplementedError

    def inv_rate(self, rate):
        r = _nonneg(rate, "rate")
        if isinstance(r, np.ndarray):
            return np.array([self.inv_rate(float(v)) for v in r.ravel()]).reshape(r.shape)
        if r == 0.0:
            return 0.0
        hi = 1.0
        while self.rate(hi) < r:
            hi *= 2.0
            if hi > 1e300:
                raise ValueError(f"rate {r!r} is not attainable")
        return find_root(lambda p: self.rate(p) - r, 0.0, hi, xtol=1e-15)

    def rate_gap(self, power):
        """``g(p) - p g'(p)``: positive for strictly concave g with g(0) = 0."""
        return self.rate(power) - power * self.rate_derivative(power)

    @property
    def slope_at_zero(self) -> float:
        """Marginal rate g'(0): the bits-per-joule limit at vanishing power."""
        return float(self.rate_derivative(0.0))


@dataclass(frozen=True)
class RateModel(RateFunction):
    """Shannon rate of a band-limited AWGN link.

    ``rate(P) = W log2(1 + P H / (N0 W))``.

    Parameters
    ----------
    bandwidth : float
        W in Hz.
    noise_density : float
        N0 in W/Hz.
    path_loss : float
        Linear power attenuation H (1e-10 for 100 dB).
    """

    bandwidth: float = 1e6
    noise_density: float = 1e-19
    path_loss: float = 1e-10

    def __post_init__(self):
        for name in ("bandwidth", "noise_density", "path_loss"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be a finite positive number, got {v!r}")

    @classmethod
    def from_db(cls, bandwidth_hz: float, noise_density_w_per_hz: float, path_loss_db: float) -> "RateModel":
        return cls(bandwidth_hz, noise_density_w_per_hz, 10.0 ** (-path_loss_db / 10.0))

    @property
    def reference_power(self) -> float:
        """Transmit power at which the SNR equals one (N0 W / H)."""
        return self.noise_density * self.bandwidth / self.path_loss

    def rate(self, power):
        p = _nonneg(power, "power")
        if isinstance(p, float):
            return self.bandwidth * math.log1p(p / self.reference_power) / LN2
        return self.bandwidth * np.log1p(p / self.reference_power) / LN2

    def inv_rate(self, rate):
        r = _nonneg(rate, "rate")
        if isinstance(r, float):
            x = r * LN2 / self.bandwidth
            # math.expm1 overflows past ~709
            return self.reference_power * math.expm1(x) if x < 709.0 else math.inf
        with np.errstate(over="ignore"):
            return self.reference_power * np.expm1(r * LN2 / self.bandwidth)

    def rate_derivative(self, power):
        p = _nonneg(power, "power")
        return self.bandwidth / (LN2 * (self.reference_power + p))

    def rate_gap(self, power):
        if isinstance(power, float) and power >= 1e-3 * self.reference_power:
            x = power / self.reference_power
            return self.bandwidth * (math.log1p(x) - x / (1.0 + x)) / LN2
        x = np.asarray(_nonneg(power, "power"), dtype=float) / self.reference_power
        with np.errstate(invalid="ignore"):
            direct = np.log1p(x) - x / (1.0 + x)
        # log1p(x) - x/(1+x) = sum_{n>=2} (-1)^n (n-1)/n x^n, cancels badly near 0
        series = x * x * (0.5 - x * (2.0 / 3.0 - x * (0.75 - x * (0.8 - x * (5.0 / 6.0)))))
        out = self.bandwidth * np.where(x < 1e-3, series, direct) / LN2
        return float(out) if out.ndim == 0 else out


DEFAULT_MODEL = RateModel()
