"""Payoff functions, their fixed-point oracle tables, and path averaging."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Literal, Sequence

import numpy as np

from .bsm import MarketParams
from .distribution import GridSpec
from .errors import DomainError
from .fixedpoint import FixedPointSpec

AverageKind = Literal["arithmetic", "geometric"]
PayoffFn = Callable[[np.ndarray], np.ndarray]


def euro_intrinsic(p: MarketParams) -> PayoffFn:
    """Signed ``S_T(x) - K`` as a function of the Brownian value ``x`` at maturity."""
    drift = (p.rate - 0.5 * p.vol**2) * p.maturity

    def intrinsic(x):
        return p.s0 * np.exp(p.vol * np.asarray(x, dtype=float) + drift) - p.strike

    return intrinsic


def euro_payoff(p: MarketParams) -> PayoffFn:
    """``max(0, S0 exp(vol x + (r - vol^2/2) T) - K)`` as a function of ``x``."""
    intrinsic = euro_intrinsic(p)

    def payoff(x):
        return np.maximum(intrinsic(x), 0.0)

    return payoff


def euro_kink(p: MarketParams) -> float:
    """Brownian value where the call payoff switches on."""
    return (math.log(p.strike / p.s0) - (p.rate - 0.5 * p.vol**2) * p.maturity) / p.vol


@dataclass(frozen=True)
class QuantizedPayoff:
    """Oracle table of normalized payoffs ``values[j]`` in ``[0, 1]``.

    ``codes`` are the integer register contents; ``values = codes / 2**(bits-1)``.
    With ``fp is None`` the table is the ideal, unquantized oracle.
    """

    grid: GridSpec | None
    values: np.ndarray
    v_max: float
    fp: FixedPointSpec | None
    exact: np.ndarray
    codes: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.values.setflags(write=False)

    @property
    def size(self) -> int:
        return self.values.size

    def scaled(self) -> np.ndarray:
        return self.v_max * self.values

    def to_csv(self, path: str | Path) -> None:
        xs = self.grid.points() if self.grid is not None else np.arange(self.size, dtype=float)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["j", "x_j", "v_exact", "v_quantized"])
            for j in range(self.size):
                w.writerow([j, repr(float(xs[j])), repr(float(self.exact[j])), repr(float(self.scaled()[j]))])


def quantize_values(
    raw,
    bits: int | None,
    v_max: float,
    grid: GridSpec | None = None,
) -> QuantizedPayoff:
    """Encode signed payoff values into the normalized oracle table.

    Each value is rounded to the nearest lattice point of ``bits`` bits
    (scale 1 after dividing by ``v_max``), the sign bit then gates a
    ``MAX(0)`` copy, and codes above the cap saturate at 1.0.
    """
    if not v_max > 0:
        raise DomainError("v_max must be > 0")
    raw = np.asarray(raw, dtype=float)
    exact = np.maximum(raw, 0.0)
    if bits is None:
        values = np.clip(raw / v_max, 0.0, 1.0)
        return QuantizedPayoff(grid=grid, values=values, v_max=float(v_max), fp=None, exact=exact)
    fp = FixedPointSpec(bits=bits, scale=1.0)
    mag, sign = fp.encode_array(raw / v_max)
    codes = np.where(sign == 1, 0, mag)
    codes = np.minimum(codes, fp.denominator)
    values = codes / fp.denominator
    return QuantizedPayoff(grid=grid, values=values, v_max=float(v_max), fp=fp, exact=exact, codes=codes)


def default_v_max(fn: PayoffFn, grid: GridSpec) -> float:
    """Largest payoff on the truncated grid, or 1.0 when the payoff vanishes everywhere."""
    top = float(np.max(np.maximum(fn(grid.points()), 0.0)))
    return top if top > 0 else 1.0


def quantize_payoff(
    fn: PayoffFn,
    grid: GridSpec,
    bits: int | None,
    v_max: float | None = None,
) -> QuantizedPayoff:
    if v_max is None:
        v_max = default_v_max(fn, grid)
    if bits is not None and bits < 1:
        raise DomainError("bits must be >= 1")
    return quantize_values(fn(grid.points()), bits, v_max, grid)


def stock_step(prev, x, dt: float, p: MarketParams):
    """Advance the price by one period given the Brownian increment ``x``."""
    return np.asarray(prev) * np.exp(p.vol * np.asarray(x) + (p.rate - 0.5 * p.vol**2) * dt)


def log_stock_step(log_prev, x, dt: float, p: MarketParams):
    return np.asarray(log_prev) + p.vol * np.asarray(x) + (p.rate - 0.5 * p.vol**2) * dt


def path_average(prices: Sequence[float], kind: AverageKind = "arithmetic") -> float:
    s = np.asarray(prices, dtype=float)
    if s.size == 0:
        raise DomainError("cannot average an empty path")
    if np.any(s <= 0):
        raise DomainError("prices must be > 0")
    if kind == "arithmetic":
        return float(s.mean())
    if kind == "geometric":
        return float(np.exp(np.log(s).mean()))
    raise DomainError(f"unknown average kind {kind!r}")


@dataclass(frozen=True)
class AverageState:
    """Running average after ``count`` prices.

    ``acc`` holds the running mean of the prices (arithmetic) or of their
    logarithms (geometric). Works elementwise when ``acc`` is an array.
    """

    kind: AverageKind
    count: int = 0
    acc: float | np.ndarray = 0.0

    @property
    def value(self):
        if self.count == 0:
            raise DomainError("empty average has no value")
        return self.acc if self.kind == "arithmetic" else np.exp(self.acc)


def _term(price, kind: AverageKind):
    if kind == "arithmetic":
        return np.asarray(price, dtype=float)
    if kind == "geometric":
        return np.log(price)
    raise DomainError(f"unknown average kind {kind!r}")


def sequential_average_update(state: AverageState, next_price, step_index: int) -> AverageState:
    """Fold the ``step_index``-th price (1-based) into the running average."""
    if step_index < 1 or step_index != state.count + 1:
        raise DomainError("step_index must be the next 1-based position")
    term = _term(next_price, state.kind)
    acc = state.acc + (term - state.acc) / step_index
    return AverageState(kind=state.kind, count=step_index, acc=acc)


def inverse_average_update(state: AverageState, last_price, step_index: int) -> AverageState:
    """Undo :func:`sequential_average_update` given the price it absorbed."""
    if step_index != state.count or step_index < 1:
        raise DomainError("step_index must equal the current count")
    if step_index == 1:
        return AverageState(kind=state.kind, count=0, acc=0.0 * state.acc)
    term = _term(last_price, state.kind)
    acc = (step_index * state.acc - term) / (step_index - 1)
    return AverageState(kind=state.kind, count=step_index - 1, acc=acc)
