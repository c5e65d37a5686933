"""Classical Monte Carlo baseline and power-law error fits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .bsm import MarketParams, bsm_call_price, call_payoff, terminal_samples
from .errors import DomainError
from .seeding import stream


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    samples: int


@dataclass(frozen=True)
class ScalingReport:
    """Fit of ``error = amplitude * k**exponent`` in log-log space."""

    points: tuple[tuple[float, float], ...]
    amplitude: float
    exponent: float
    residual: float

    def predict(self, k):
        return self.amplitude * np.asarray(k, dtype=float) ** self.exponent


def mc_price_european(p: MarketParams, k: int, rng: np.random.Generator) -> McEstimate:
    """Plain iid Monte Carlo price of the European call from ``k`` terminal draws."""
    if k < 2:
        raise DomainError("need at least 2 samples for a standard error")
    payoff = call_payoff(terminal_samples(p, k, rng), p.strike) * p.discount
    mean = float(payoff.mean())
    std_error = float(payoff.std(ddof=1) / math.sqrt(k))
    return McEstimate(mean=mean, std_error=std_error, samples=k)


def chebyshev_samples(lam: float, epsilon: float, delta: float) -> int:
    """Smallest ``k`` with ``lam**2 / (k * epsilon**2) <= delta``."""
    if not lam > 0:
        raise DomainError("lambda must be > 0")
    if not epsilon > 0:
        raise DomainError("epsilon must be > 0")
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    k = math.ceil(lam**2 / (delta * epsilon**2))
    # ceil on a float quotient can land one above the exact integer answer
    while k > 1 and lam**2 / ((k - 1) * epsilon**2) <= delta:
        k -= 1
    return max(k, 1)


def fit_power_law(points: Iterable[tuple[float, float]]) -> ScalingReport:
    """Unweighted least-squares line through ``(log k, log error)``."""
    pts = tuple((float(k), float(e)) for k, e in points)
    if len(pts) < 3:
        raise DomainError("need at least 3 points to fit a power law")
    k = np.array([p[0] for p in pts])
    err = np.array([p[1] for p in pts])
    if np.any(k < 1):
        raise DomainError("all k must be >= 1")
    if np.any(~(err > 0)):
        raise DomainError("all errors must be > 0 for a log-log fit")
    x, y = np.log(k), np.log(err)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return ScalingReport(
        points=pts,
        amplitude=float(math.exp(intercept)),
        exponent=float(slope),
        residual=float(math.sqrt(np.mean(resid**2))),
    )


def mc_error_sweep(
    p: MarketParams,
    ks: Sequence[int],
    trials: int,
    seed: int,
) -> list[tuple[int, float]]:
    """Mean absolute pricing error ``|price_hat - price|`` per sample count.

    Trial ``i`` at cell ``c`` draws from ``stream(seed, c, i)``.
    """
    if trials < 1:
        raise DomainError("trials must be >= 1")
    exact = bsm_call_price(p).price
    out = []
    for cell, k in enumerate(ks):
        errs = [
            abs(mc_price_european(p, int(k), stream(seed, cell, i)).mean - exact)
            for i in range(trials)
        ]
        out.append((int(k), float(math.fsum(errs) / trials)))
    return out
