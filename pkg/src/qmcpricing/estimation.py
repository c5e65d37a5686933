"""Phase estimation, amplitude estimation and the mean estimators built on them.

Phases are radians throughout. Two phase-estimation modes are provided:

* coherent QPE over a :class:`GroverIterate`, simulated on the full
  ``phase x index x ancilla`` register and read out through an inverse QFT;
* single-qubit iterative estimation of ``U_z = exp(-i theta sigma_z / 2)``,
  which samples the bits from least to most significant.

Amplitude estimation runs QPE on the half iterate ``G = -U V``. Its
eigenphases are ``+-theta / 2`` with ``theta / 2`` in ``[0, pi]``, so after
folding ``x -> 2**m - x`` the readout determines ``mu`` without the
``mu <-> 1 - mu`` ambiguity that the eigenvalues of ``Q`` alone would leave.
"""

from __future__ import annotations

import csv
import math
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .distribution import DiscreteDist, grover_rudolph_amplitudes
from .errors import DomainError
from .statevec import MAX_QUBITS, GroverIterate, QuantumState, check_qubits, chi_from_amplitudes

TWO_PI = 2.0 * math.pi
SINGLE_RUN_SUCCESS = 8.0 / math.pi**2


@dataclass(frozen=True)
class PhaseEstimate:
    theta_hat: float
    bits: int
    repetitions: int = 1
    unitary_applications: int = 0

    def __post_init__(self) -> None:
        if self.bits < 1:
            raise DomainError("need at least one phase bit")
        if not 0.0 <= self.theta_hat < TWO_PI:
            raise DomainError("theta_hat must lie in [0, 2 pi)")
        steps = self.theta_hat / TWO_PI * (1 << self.bits)
        if abs(steps - round(steps)) > 1e-9:
            raise DomainError("theta_hat must be a multiple of 2 pi / 2**bits")

    @property
    def code(self) -> int:
        return int(round(self.theta_hat / TWO_PI * (1 << self.bits)))


@dataclass(frozen=True)
class QaeConfig:
    """Phase bits ``m``, median repetitions ``D`` and shots per bit for the single-qubit mode.

    ``D`` may be even; the median is then the lower middle value so the
    estimate stays on the ``m``-bit lattice.
    """

    phase_bits: int = 10
    repetitions: int = 24
    shots_per_bit: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.phase_bits < 1:
            raise DomainError("phase_bits must be >= 1")
        if self.repetitions < 1:
            raise DomainError("repetitions must be >= 1")
        if self.shots_per_bit < 1:
            raise DomainError("shots_per_bit must be >= 1")


# ---------------------------------------------------------------------------
# coherent phase estimation


def controlled_power_rows(op: GroverIterate, m: int, method: str = "sequential") -> np.ndarray:
    """Rows ``op**y |chi> / sqrt(M)`` for ``y = 0..M-1``: the register after the controlled powers.

    ``"sequential"`` builds each row from the previous one; ``"controlled"``
    applies ``op**(2**j)`` to the rows whose phase bit ``j`` is set, as the
    circuit does. Both use ``op`` exactly ``2**m - 1`` times.
    """
    n_rows = 1 << m
    rows = np.empty((n_rows, op.dimension), dtype=complex)
    if method == "sequential":
        rows[0] = op.chi.amps
        for y in range(1, n_rows):
            rows[y] = rows[y - 1]
            op.apply(rows[y])
    elif method == "controlled":
        rows[:] = op.chi.amps
        ys = np.arange(n_rows)
        for j in range(m):
            sel = (ys >> j) & 1 == 1
            block = rows[sel]
            op.apply_power(block, 1 << j)
            rows[sel] = block
    else:
        raise DomainError(f"unknown method {method!r}")
    return rows / math.sqrt(n_rows)


def inverse_qft(rows: np.ndarray) -> np.ndarray:
    """Inverse QFT on the leading (phase) axis: ``|y> -> M**-1/2 sum_x exp(-2 pi i x y / M) |x>``."""
    return np.fft.fft(rows, axis=0, norm="ortho")


def inverse_qft_matrix(m: int) -> np.ndarray:
    n = 1 << m
    k = np.arange(n)
    return np.exp(-2j * math.pi * np.outer(k, k) / n) / math.sqrt(n)


def qpe_distribution(
    chi: QuantumState,
    op: GroverIterate | None = None,
    m: int = 1,
    cap: int = MAX_QUBITS,
    method: str = "sequential",
) -> np.ndarray:
    """Exact readout distribution of the ``m``-qubit phase register.

    Entry ``x`` is the probability of reading ``x``; ``2 pi x / 2**m``
    approximates an eigenphase of ``op`` (default: ``Q``).
    """
    if m < 1:
        raise DomainError("need at least one phase bit")
    check_qubits(chi.layout.total_qubits + m, cap)
    if op is None:
        op = GroverIterate(chi)
    out = inverse_qft(controlled_power_rows(op, m, method))
    probs = np.sum(np.abs(out) ** 2, axis=1)
    return probs / probs.sum()


def qpe_single_phase(phase: float, m: int) -> np.ndarray:
    """Readout distribution for an eigenstate with eigenphase ``phase`` (geometric-series form)."""
    n = 1 << m
    delta = phase - TWO_PI * np.arange(n) / n
    num = np.abs(1 - np.exp(1j * delta * n)) ** 2
    den = np.abs(1 - np.exp(1j * delta)) ** 2
    exact = den < 1e-24
    out = np.where(exact, 1.0, num / np.where(exact, 1.0, den) / n**2)
    return out


def qpe_two_branch(phase: float, m: int) -> np.ndarray:
    """Closed form for a state split evenly over eigenphases ``+-phase``."""
    return 0.5 * qpe_single_phase(phase, m) + 0.5 * qpe_single_phase(-phase % TWO_PI, m)


def fold(x, m: int):
    """Map readouts ``x > 2**(m-1)`` to ``2**m - x``."""
    n = 1 << m
    x = np.asarray(x)
    return np.where(x > n // 2, n - x, x)


def folded_distribution(probs: np.ndarray) -> np.ndarray:
    """Probabilities over ``0..2**(m-1)`` after folding."""
    n = probs.size
    out = probs[: n // 2 + 1].copy()
    out[1 : n // 2] += probs[n - 1 : n // 2 : -1]
    return out


def bracketing_codes(phase: float, m: int) -> tuple[int, int]:
    """The two ``m``-bit codes on either side of ``phase`` (equal when it is representable)."""
    n = 1 << m
    s = (phase % TWO_PI) / TWO_PI * n
    lo = math.floor(s + 1e-12)
    if abs(s - round(s)) < 1e-9:
        c = int(round(s)) % n
        return c, c
    return lo % n, (lo + 1) % n


def best_estimate_mass(probs: np.ndarray, phase: float) -> float:
    """Folded probability of reading one of the two ``m``-bit values bracketing ``phase``.

    ``phase`` is taken in ``[0, pi]``. The geometric series guarantees at
    least ``8 / pi**2`` here; the single nearest value alone is only
    guaranteed ``4 / pi**2``.
    """
    m = int(round(math.log2(probs.size)))
    f = folded_distribution(probs)
    codes = {int(c) for c in fold(np.array(bracketing_codes(phase, m)), m)}
    return float(sum(f[c] for c in codes))


def nearest_estimate_mass(probs: np.ndarray, phase: float) -> float:
    m = int(round(math.log2(probs.size)))
    n = 1 << m
    c = int(fold(round((phase % TWO_PI) / TWO_PI * n) % n, m))
    return float(folded_distribution(probs)[c])


# ---------------------------------------------------------------------------
# single-qubit iterative phase estimation


def bit_probability_zero(theta: float, k: int, known_fraction: float) -> float:
    """``P_0`` for stage ``k``: ``1/2 + 1/2 cos(2**(k-1) theta - pi [.b_{k+1} .. b_m])``.

    At ``k = m`` with no known bits this is ``cos(2**(m-1) theta / 2)**2``.
    """
    return 0.5 + 0.5 * math.cos((1 << (k - 1)) * theta - math.pi * known_fraction)


def single_qubit_pe_codes(
    theta: float,
    m: int,
    shots_per_bit: int,
    rng: np.random.Generator,
    runs: int = 1,
) -> np.ndarray:
    """Integer readouts of ``runs`` independent single-qubit estimations (vectorized)."""
    if m < 1 or shots_per_bit < 1 or runs < 1:
        raise DomainError("m, shots_per_bit and runs must all be >= 1")
    q = np.zeros(runs, dtype=np.int64)
    for k in range(m, 0, -1):
        width = m - k
        known = q / (1 << width) if width else np.zeros(runs)
        # reduce the phase mod 2 pi before scaling so large powers stay accurate
        base = math.fmod((1 << (k - 1)) * math.fmod(theta, TWO_PI), TWO_PI)
        p0 = 0.5 + 0.5 * np.cos(base - math.pi * known)
        ones = rng.binomial(shots_per_bit, np.clip(1.0 - p0, 0.0, 1.0))
        bit = (2 * ones > shots_per_bit).astype(np.int64)
        q += bit << width
    return q


def single_qubit_pe(
    theta: float,
    m: int,
    shots_per_bit: int,
    rng: np.random.Generator,
) -> PhaseEstimate:
    """Estimate the eigenphase ``theta`` of ``U_z`` one bit at a time.

    Stage ``k`` (from ``m`` down to 1) applies ``U_z**(2**(k-1))``
    ``shots_per_bit`` times, removes the phase of the bits already known and
    keeps the majority outcome (ties resolve to 0).
    """
    q = int(single_qubit_pe_codes(theta, m, shots_per_bit, rng)[0])
    return PhaseEstimate(
        theta_hat=TWO_PI * q / (1 << m),
        bits=m,
        repetitions=1,
        unitary_applications=shots_per_bit * ((1 << m) - 1),
    )


def median_low(values: Sequence[float]) -> float:
    return statistics.median_low(values)


def median_boost(estimates: Sequence[PhaseEstimate]) -> PhaseEstimate:
    """Median of ``theta_hat`` (lower middle value for even counts)."""
    if not estimates:
        raise DomainError("need at least one estimate")
    bits = {e.bits for e in estimates}
    if len(bits) != 1:
        raise DomainError("estimates use different bit counts")
    return PhaseEstimate(
        theta_hat=median_low([e.theta_hat for e in estimates]),
        bits=bits.pop(),
        repetitions=len(estimates),
        unitary_applications=sum(e.unitary_applications for e in estimates),
    )


def median_failure_bound(delta: float, repetitions: int) -> float:
    """``1/2 (2 sqrt(delta (1 - delta)))**D``."""
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    if repetitions < 1:
        raise DomainError("repetitions must be >= 1")
    return 0.5 * (2.0 * math.sqrt(delta * (1.0 - delta))) ** repetitions


def required_repetitions(delta: float, confidence: float) -> int:
    """Smallest ``D`` whose median failure bound is at most ``1 - confidence``."""
    if not 0 < delta < 0.5:
        raise DomainError("delta must lie in (0, 1/2)")
    if not 0 < confidence < 1:
        raise DomainError("confidence must lie in (0, 1)")
    d = 1
    while median_failure_bound(delta, d) > 1.0 - confidence:
        d += 1
    return d


# ---------------------------------------------------------------------------
# amplitude estimation


def phase_bits_for(t: int) -> int:
    if t < 2:
        raise DomainError("t must be >= 2")
    return max(1, math.ceil(math.log2(t)))


def half_phase_to_mu(phase):
    """``mu`` from the eigenphase of ``G`` (half of the canonical ``theta``)."""
    return 0.5 * (1.0 - np.cos(phase))


@dataclass
class AmplitudeEstimator:
    """Amplitude estimation on one prepared state, with the readout distribution cached.

    Builds the half iterate ``G``, runs coherent QPE with ``m`` phase bits
    once, and then samples readouts from the exact distribution. Each run
    uses ``U`` and ``V`` ``2**m - 1`` times.
    """

    chi: QuantumState
    m: int
    cap: int = MAX_QUBITS

    def __post_init__(self) -> None:
        op = GroverIterate(self.chi, half=True)
        self.probs = qpe_distribution(self.chi, op, self.m, self.cap)
        self.folded = folded_distribution(self.probs)
        self.uses_u, self.uses_v = op.uses_u, op.uses_v

    @property
    def applications_per_run(self) -> int:
        return (1 << self.m) - 1

    def sample_codes(self, rng: np.random.Generator, size: int | None = None):
        return rng.choice(self.folded.size, size=size, p=self.folded)

    def code_to_mu(self, code):
        return half_phase_to_mu(TWO_PI * np.asarray(code) / (1 << self.m))

    def code_to_theta(self, code):
        """Canonical ``theta`` (twice the ``G`` phase), in ``[0, 2 pi]``."""
        return 2.0 * TWO_PI * np.asarray(code) / (1 << self.m)

    def sample(self, rng: np.random.Generator, size: int | None = None):
        return self.code_to_mu(self.sample_codes(rng, size))

    def median_codes(self, rng: np.random.Generator, repetitions: int, runs: int) -> np.ndarray:
        """Lower-median folded readout over ``repetitions`` draws, for each of ``runs`` runs."""
        draws = np.sort(self.sample_codes(rng, (runs, repetitions)), axis=1)
        return draws[:, (repetitions - 1) // 2]


def amplitude_estimate(chi: QuantumState, t: int, rng: np.random.Generator, cap: int = MAX_QUBITS) -> float:
    """Single amplitude-estimation run with ``m = ceil(log2 t)`` phase bits."""
    est = AmplitudeEstimator(chi, phase_bits_for(t), cap)
    return float(est.sample(rng))


def amplitude_error_bound(a: float, t: int) -> float:
    """``2 pi sqrt(a (1 - a)) / t + pi**2 / t**2``."""
    return TWO_PI * math.sqrt(max(a * (1.0 - a), 0.0)) / t + math.pi**2 / t**2


MEAN01_CONSTANT = math.pi**2


def mean01_error_bound(mu: float, t: int) -> float:
    """``C (sqrt(mu) / t + 1 / t**2)`` with ``C = pi**2``, which dominates the single-run bound."""
    return MEAN01_CONSTANT * (math.sqrt(mu) / t + 1.0 / t**2)


def chi_for_values(dist: DiscreteDist, values) -> QuantumState:
    return chi_from_amplitudes(grover_rudolph_amplitudes(dist), np.asarray(values, dtype=float))


def mean_estimate_01(
    dist: DiscreteDist,
    values,
    t: int,
    delta: float,
    rng: np.random.Generator,
    cap: int = MAX_QUBITS,
) -> float:
    """Median of amplitude-estimation runs for ``E[v]`` with ``v`` in ``[0, 1]``.

    The repetition count is the smallest ``D`` whose median bound at the
    single-run failure rate ``1 - 8/pi**2`` reaches ``delta``.
    """
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    vals = np.asarray(values, dtype=float)
    if np.any(vals < 0) or np.any(vals > 1):
        raise DomainError("values must lie in [0, 1]")
    reps = required_repetitions(1.0 - SINGLE_RUN_SUCCESS, 1.0 - delta)
    est = AmplitudeEstimator(chi_for_values(dist, vals), phase_bits_for(t), cap)
    code = est.median_codes(rng, reps, 1)[0]
    return float(est.code_to_mu(code))


def range_function(x, a: float, b: float):
    """``f_{a,b}(x) = x / b`` on ``[a, b)`` and 0 elsewhere."""
    if not 0 <= a < b:
        raise DomainError("need 0 <= a < b")
    x = np.asarray(x, dtype=float)
    return np.where((x >= a) & (x < b), x / b, 0.0)


def level_edges(lam: float, eps: float) -> list[tuple[float, float]]:
    """``(0,1), (1,2), (2,4), ..., (2**(L-1), 2**L)`` with ``L = max(ceil(log2(lam/eps)), 0)``."""
    n_levels = max(math.ceil(math.log2(lam / eps)), 0)
    edges = [(0.0, 1.0)]
    edges += [(float(2 ** (i - 1)), float(2**i)) for i in range(1, n_levels + 1)]
    return edges


@dataclass(frozen=True)
class BoundedVarianceResult:
    estimate: float
    pilot: float
    positive_levels: tuple[float, ...]
    negative_levels: tuple[float, ...]
    level_t: int


def _pow2_at_least(x: float) -> int:
    return 1 << max(1, math.ceil(math.log2(max(x, 2.0))))


def mean_estimate_bounded_variance(
    dist: DiscreteDist,
    values,
    lam: float,
    eps: float,
    rng: np.random.Generator,
    cap: int = MAX_QUBITS,
) -> BoundedVarianceResult:
    """Estimate ``E[v]`` for a real payoff with standard deviation at most ``lam``.

    1. Pilot: ``m~`` from a coarse [0,1] estimate of the min-max rescaled
       payoff, with ``t`` the power of two at least ``max(8, range / lam)``.
    2. Standardize ``w = (v - m~) / lam`` and split into ``w+`` and ``w-``.
    3. Estimate every level ``E[f_{a,b}(w+-)]`` and recombine with weights ``b``.
    """
    if not lam > 0:
        raise DomainError("lambda must be > 0")
    if not 0 < eps < 4 * lam:
        raise DomainError("accuracy must satisfy 0 < eps < 4 lambda")
    v = np.asarray(values, dtype=float)
    lo, hi = float(v.min()), float(v.max())
    if hi > lo:
        t_pilot = _pow2_at_least(max(8.0, (hi - lo) / lam))
        pilot = lo + (hi - lo) * mean_estimate_01(dist, (v - lo) / (hi - lo), t_pilot, 0.05, rng, cap)
    else:
        pilot = lo
    w = (v - pilot) / lam
    edges = level_edges(lam, eps)
    n_levels = len(edges)
    t = _pow2_at_least(4 * math.pi * n_levels * lam / eps)
    delta_level = 1.0 / (3.0 * 2 * n_levels)
    parts = []
    for part in (np.maximum(w, 0.0), np.maximum(-w, 0.0)):
        ests = []
        for a, b in edges:
            f = range_function(part, a, b)
            ests.append(0.0 if not np.any(f > 0) else b * mean_estimate_01(dist, f, t, delta_level, rng, cap))
        parts.append(tuple(ests))
    estimate = pilot + lam * (math.fsum(parts[0]) - math.fsum(parts[1]))
    return BoundedVarianceResult(estimate, pilot, parts[0], parts[1], t)


# ---------------------------------------------------------------------------
# error bounds


def error_upper_bound(theta_hat: float, k_q: int) -> float:
    """``|cos(theta_hat / 2 + pi / k_q) - cos(theta_hat / 2)|``."""
    if k_q < 1:
        raise DomainError("k_q must be >= 1")
    return abs(math.cos(theta_hat / 2 + math.pi / k_q) - math.cos(theta_hat / 2))


def cosine_error_bound(theta_hat: float, eps: float) -> float:
    """``|cos((theta_hat + eps) / 2) - cos(theta_hat / 2)|`` for ``0 <= theta_hat < pi``, ``0 < eps <= 1``."""
    if not 0.0 <= theta_hat < math.pi:
        raise DomainError("theta_hat must lie in [0, pi)")
    if not 0.0 < eps <= 1.0:
        raise DomainError("eps must lie in (0, 1]")
    return abs(math.cos((theta_hat + eps) / 2) - math.cos(theta_hat / 2))


def write_repetition_trace(path: str | Path, estimates: Sequence[PhaseEstimate]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["repetition", "bits", "theta_hat", "k_q"])
        for i, e in enumerate(estimates):
            w.writerow([i, e.bits, repr(e.theta_hat), e.unitary_applications])
