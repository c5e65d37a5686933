"""Gaussian grid discretization and Grover-Rudolph amplitude loading."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError

DEFAULT_CUTOFF = 4.0


@dataclass(frozen=True)
class GridSpec:
    """``2**qubits`` equally spaced points on ``[-x_max, x_max]``, both ends included."""

    qubits: int
    x_max: float
    cutoff_mult: float = DEFAULT_CUTOFF

    def __post_init__(self) -> None:
        if self.qubits < 1:
            raise DomainError("grid needs at least one qubit")
        if not self.x_max > 0:
            raise DomainError("x_max must be > 0")

    @property
    def size(self) -> int:
        return 1 << self.qubits

    @property
    def delta_x(self) -> float:
        return 2.0 * self.x_max / (self.size - 1)

    def points(self) -> np.ndarray:
        # written so that x[-1] == x_max and x[N-1-j] == -x[j] hold exactly
        n = self.size
        return self.x_max * (2.0 * np.arange(n) - (n - 1)) / (n - 1)


@dataclass(frozen=True)
class DiscreteDist:
    grid: GridSpec
    probs: np.ndarray
    norm_const: float

    def __post_init__(self) -> None:
        self.probs.setflags(write=False)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["j", "x_j", "p_j"])
            for j, (x, p) in enumerate(zip(self.grid.points(), self.probs)):
                w.writerow([j, repr(float(x)), repr(float(p))])


def gaussian_density(x, variance_time: float):
    return np.exp(-np.asarray(x) ** 2 / (2 * variance_time)) / math.sqrt(2 * math.pi * variance_time)


def gaussian_grid(variance_time: float, n: int, c: float = DEFAULT_CUTOFF) -> DiscreteDist:
    """Truncated, renormalized ``N(0, variance_time)`` on a ``2**n`` point grid.

    The cutoff is ``x_max = c * sqrt(variance_time)``.
    """
    if not variance_time > 0:
        raise DomainError("variance_time must be > 0")
    if not c > 0:
        raise DomainError("cutoff multiple must be > 0")
    grid = GridSpec(qubits=n, x_max=c * math.sqrt(variance_time), cutoff_mult=c)
    dens = gaussian_density(grid.points(), variance_time)
    norm_const = float(math.fsum(dens))
    return DiscreteDist(grid=grid, probs=dens / norm_const, norm_const=norm_const)


def from_probs(probs) -> DiscreteDist:
    """Wrap an arbitrary distribution over ``2**n`` outcomes on a unit grid."""
    p = np.asarray(probs, dtype=float)
    n = int(round(math.log2(p.size))) if p.size > 1 else 0
    if p.size < 2 or (1 << n) != p.size:
        raise DomainError("length must be a power of two >= 2")
    if np.any(p < 0):
        raise DomainError("probabilities must be nonnegative")
    total = float(math.fsum(p))
    if not total > 0:
        raise DomainError("probabilities must not all vanish")
    return DiscreteDist(grid=GridSpec(qubits=n, x_max=1.0, cutoff_mult=1.0), probs=p / total, norm_const=total)


def level_probs(d: DiscreteDist, m: int) -> np.ndarray:
    """Coarse-grained probabilities of the ``2**m`` dyadic blocks at level ``m``."""
    n = d.grid.qubits
    if not 1 <= m <= n:
        raise DomainError(f"level must lie in [1, {n}], got {m}")
    return d.probs.reshape(1 << m, 1 << (n - m)).sum(axis=1)


@dataclass
class SplitCounter:
    """Counts branch-angle evaluations performed by the recursion."""

    angles: int = 0


def branch_fractions(d: DiscreteDist, m: int) -> np.ndarray:
    """Left-child share ``f(k, m)`` of every level-``m`` block (``m = 0`` is the root)."""
    n = d.grid.qubits
    if not 0 <= m < n:
        raise DomainError(f"level must lie in [0, {n - 1}], got {m}")
    children = level_probs(d, m + 1)
    parent = children[0::2] + children[1::2]
    return np.where(parent > 0, children[0::2] / np.where(parent > 0, parent, 1.0), 0.5)


def split_angles(left: np.ndarray, right: np.ndarray, counter: SplitCounter | None = None) -> np.ndarray:
    """Branch angles ``arccos(sqrt(left / (left + right)))``.

    Evaluated as ``atan2(sqrt(right), sqrt(left))``, which is the same angle but
    stays accurate when one child is many orders of magnitude lighter than its
    sibling. A dead branch (both children zero) gets pi/4.
    """
    if counter is not None:
        counter.angles += left.size
    theta = np.arctan2(np.sqrt(right), np.sqrt(left))
    return np.where((left + right) > 0, theta, math.pi / 4)


def grover_rudolph_amplitudes(d: DiscreteDist, counter: SplitCounter | None = None) -> np.ndarray:
    """Simulate the level-by-level rotation cascade that loads ``sqrt(p_j)``.

    Level ``m`` splits each block ``k`` into its left/right halves with
    amplitudes ``cos`` / ``sin`` of the branch angle; the angle register is
    uncomputed after each level so only the index register remains.
    """
    n = d.grid.qubits
    amps = np.ones(1)
    for m in range(n):
        children = level_probs(d, m + 1)
        theta = split_angles(children[0::2], children[1::2], counter)
        nxt = np.empty(amps.size * 2)
        nxt[0::2] = amps * np.cos(theta)
        nxt[1::2] = amps * np.sin(theta)
        amps = nxt
    return amps
