"""Asian call options on a product of per-period Gaussian grids.

The composite index register holds ``L`` period registers of ``m`` qubits
each, period 1 in the most significant bits, so the flat index is
``j_1 * 2**(m (L-1)) + ... + j_L``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .bsm import MarketParams
from .classical import McEstimate
from .distribution import DEFAULT_CUTOFF, DiscreteDist, gaussian_grid, grover_rudolph_amplitudes
from .errors import DomainError, ResourceError
from .estimation import AmplitudeEstimator, QaeConfig, error_upper_bound
from .payoff import AverageKind, AverageState, QuantizedPayoff, quantize_values, sequential_average_update, stock_step
from .statevec import MAX_QUBITS, QuantumState, check_qubits, chi_from_amplitudes, exact_mu

ENUMERATION_CAP = 1 << 20


@dataclass(frozen=True)
class AsianSpec:
    params: MarketParams
    periods: int
    period_qubits: int
    kind: AverageKind = "arithmetic"
    cutoff_mult: float = DEFAULT_CUTOFF
    payoff_bits: int | None = None

    def __post_init__(self) -> None:
        if self.periods < 1:
            raise DomainError("need at least one period")
        if self.period_qubits < 1:
            raise DomainError("need at least one qubit per period")
        if self.kind not in ("arithmetic", "geometric"):
            raise DomainError(f"unknown average kind {self.kind!r}")

    @property
    def dt(self) -> float:
        return self.params.maturity / self.periods

    @property
    def index_qubits(self) -> int:
        return self.periods * self.period_qubits

    @property
    def n_paths(self) -> int:
        return 1 << self.index_qubits

    def times(self) -> np.ndarray:
        return self.dt * np.arange(1, self.periods + 1)


def asian_product_dist(spec: AsianSpec) -> list[DiscreteDist]:
    d = gaussian_grid(spec.dt, spec.period_qubits, spec.cutoff_mult)
    return [d] * spec.periods


def joint_probs(dists: list[DiscreteDist]) -> np.ndarray:
    """Flat path probabilities, period 1 most significant."""
    return reduce(lambda acc, d: np.multiply.outer(acc, d.probs).reshape(-1), dists[1:], dists[0].probs.copy())


def path_to_average(spec: AsianSpec, indices) -> float:
    """Average price along the grid path ``(j_1, ..., j_L)``, folded in one period at a time."""
    idx = list(indices)
    if len(idx) != spec.periods:
        raise DomainError("need one index per period")
    xs = asian_product_dist(spec)[0].grid.points()
    size = xs.size
    price = spec.params.s0
    state = AverageState(kind=spec.kind)
    for step, j in enumerate(idx, start=1):
        if not 0 <= j < size:
            raise DomainError(f"index {j} out of range")
        price = float(stock_step(price, xs[j], spec.dt, spec.params))
        state = sequential_average_update(state, price, step)
    return float(state.value)


def _check_enumeration(spec: AsianSpec, cap: int) -> None:
    if spec.n_paths > cap:
        raise ResourceError(f"{spec.n_paths} paths exceed the enumeration cap of {cap}")


def path_averages(spec: AsianSpec, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """Average for every path in flat-index order."""
    _check_enumeration(spec, cap)
    xs = asian_product_dist(spec)[0].grid.points()
    size = xs.size
    price = np.full(1, spec.params.s0)
    state = AverageState(kind=spec.kind, acc=np.zeros(1))
    for step in range(1, spec.periods + 1):
        price = stock_step(price[:, None], xs[None, :], spec.dt, spec.params).reshape(-1)
        acc = np.repeat(state.acc, size)
        state = sequential_average_update(AverageState(spec.kind, step - 1, acc), price, step)
    return np.asarray(state.value)


def max_reachable_average(spec: AsianSpec) -> float:
    """Average along the path with every increment at ``+x_max``; the average is monotone in each increment."""
    top = asian_product_dist(spec)[0].grid.points().size - 1
    return path_to_average(spec, [top] * spec.periods)


def asian_payoff_table(spec: AsianSpec, v_max: float | None = None, cap: int = ENUMERATION_CAP) -> QuantizedPayoff:
    if v_max is None:
        v_max = max_reachable_average(spec)
    raw = path_averages(spec, cap) - spec.params.strike
    return quantize_values(raw, spec.payoff_bits, v_max)


def asian_exact_expectation(
    spec: AsianSpec,
    v_max: float | None = None,
    cap: int = ENUMERATION_CAP,
) -> float:
    """``mu = sum_paths p_path * v~(A_path)``, the value amplitude estimation targets."""
    table = asian_payoff_table(spec, v_max, cap)
    return float(math.fsum(joint_probs(asian_product_dist(spec)) * table.values))


def geometric_mean_average(spec: AsianSpec) -> float:
    """``E[A]`` for the geometric average by factorizing over periods.

    ``log A = log S0 + sum_i (L - i + 1) / L * (vol x_i + (r - vol**2/2) dt)``
    and the increments are independent, so the expectation is a product of
    one-dimensional grid sums.
    """
    p = spec.params
    d = asian_product_dist(spec)[0]
    xs = d.grid.points()
    L = spec.periods
    out = p.s0
    for i in range(1, L + 1):
        w = (L - i + 1) / L
        out *= math.fsum(d.probs * np.exp(w * (p.vol * xs + (p.rate - 0.5 * p.vol**2) * spec.dt)))
    return out


def asian_state(spec: AsianSpec, v_max: float | None = None, cap: int = MAX_QUBITS) -> tuple[QuantumState, QuantizedPayoff]:
    """Composite ``chi`` over the ``L m`` index qubits plus the payoff ancilla."""
    check_qubits(spec.index_qubits + 1, cap)
    dists = asian_product_dist(spec)
    amps = reduce(lambda acc, a: np.multiply.outer(acc, a).reshape(-1), [grover_rudolph_amplitudes(d) for d in dists])
    table = asian_payoff_table(spec, v_max, cap=1 << cap)
    return chi_from_amplitudes(amps, table.values), table


@dataclass(frozen=True)
class AsianQuote:
    price: float
    mu_hat: float
    mu_exact: float
    theta_hat: float
    k_q: int
    v_max: float
    eps_bound: float


def asian_quantum_price(
    spec: AsianSpec,
    qae: QaeConfig,
    rng: np.random.Generator,
    v_max: float | None = None,
    cap: int = MAX_QUBITS,
) -> AsianQuote:
    """Amplitude-estimate the Asian payoff and rescale to a discounted price."""
    chi, table = asian_state(spec, v_max, cap)
    est = AmplitudeEstimator(chi, qae.phase_bits, cap)
    code = int(est.median_codes(rng, qae.repetitions, 1)[0])
    mu_hat = float(est.code_to_mu(code))
    theta_hat = float(est.code_to_theta(code))
    disc = spec.params.discount
    bound = error_upper_bound(theta_hat, est.applications_per_run)
    return AsianQuote(
        price=disc * table.v_max * mu_hat,
        mu_hat=mu_hat,
        mu_exact=exact_mu(chi),
        theta_hat=theta_hat,
        k_q=qae.repetitions * est.applications_per_run,
        v_max=table.v_max,
        eps_bound=disc * table.v_max * bound,
    )


def asian_mc_discrete(spec: AsianSpec, n_paths: int, rng: np.random.Generator) -> McEstimate:
    """Discounted Monte Carlo price with increments drawn from the same grid distribution."""
    if n_paths < 2:
        raise DomainError("need at least 2 paths")
    d = asian_product_dist(spec)[0]
    xs = d.grid.points()
    p = spec.params
    idx = rng.choice(xs.size, size=(n_paths, spec.periods), p=d.probs)
    log_s = math.log(p.s0) + np.cumsum(p.vol * xs[idx] + (p.rate - 0.5 * p.vol**2) * spec.dt, axis=1)
    if spec.kind == "arithmetic":
        avg = np.exp(log_s).mean(axis=1)
    else:
        avg = np.exp(log_s.mean(axis=1))
    pay = np.maximum(avg - p.strike, 0.0) * p.discount
    return McEstimate(float(pay.mean()), float(pay.std(ddof=1) / math.sqrt(n_paths)), n_paths)
