"""End-to-end pricing pipelines and the error-scaling experiments.

Seeding: every random draw comes from ``stream(seed, *keys)`` with a fixed
key per experiment cell, so outputs depend only on ``(config, seed)``.

* classical cell ``c``, trial ``i``:        ``(c, i)``
* quantum sweep, strike ``s``, cell ``c``:  ``(QUANTUM_KEY, s, c)``
* pipeline run ``r``:                       ``(RUN_KEY, r)``
* asian run ``r``:                          ``(ASIAN_KEY, r)``
* fig1 paths:                               ``(PATHS_KEY,)``
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .asian import AsianSpec, asian_quantum_price, asian_exact_expectation
from .bsm import MarketParams, bsm_call_price, gbm_paths
from .classical import ScalingReport, fit_power_law, mc_error_sweep
from .config import ExperimentConfig
from .distribution import gaussian_grid
from .estimation import AmplitudeEstimator, error_upper_bound, single_qubit_pe_codes
from .payoff import euro_payoff, quantize_payoff
from .seeding import stream
from .statevec import exact_mu, mu_to_theta, prepare_chi

QUANTUM_KEY = 1_000_003
RUN_KEY = 1_000_033
ASIAN_KEY = 1_000_037
PATHS_KEY = 1_000_039

CLASSICAL_EXPONENT = -0.5

TRACE_HEADER = ["run_id", "n", "m", "D", "k_q", "mu_hat", "theta_hat", "pi_hat", "pi_analytic", "nu_est", "eps_bound"]


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return "nan" if math.isnan(x) else repr(x)


@dataclass(frozen=True)
class TraceRow:
    run_id: int
    n: int
    m: int
    D: int
    k_q: int
    mu_hat: float
    theta_hat: float
    pi_hat: float
    pi_analytic: float
    nu_est: float
    eps_bound: float

    def cells(self) -> list:
        return [getattr(self, h) for h in TRACE_HEADER]


def write_trace(path: str | Path, rows: Sequence[TraceRow], extra: dict | None = None) -> None:
    """Trace CSV; ``extra`` adds constant columns (e.g. Asian ``L``, ``m_per_period``, ``kind``)."""
    extra = extra or {}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_HEADER + list(extra))
        for r in rows:
            w.writerow([_fmt(c) for c in r.cells()] + [str(v) for v in extra.values()])


@dataclass
class EuropeanPipeline:
    """Grid, oracle table, prepared state and phase-estimation readout for one configuration.

    Building is the expensive part; :meth:`run` only samples the cached
    readout distribution.
    """

    cfg: ExperimentConfig

    def __post_init__(self) -> None:
        p = self.cfg.market
        g = self.cfg.grid
        self.dist = gaussian_grid(p.maturity, g.qubits, g.cutoff)
        self.table = quantize_payoff(euro_payoff(p), self.dist.grid, g.payoff_bits)
        self.chi = prepare_chi(self.dist, self.table)
        self.mu_exact = exact_mu(self.chi)
        self.estimator = AmplitudeEstimator(self.chi, self.cfg.qae.phase_bits)
        self.analytic = bsm_call_price(p).price
        self.scale = p.discount * self.table.v_max
        # discretization, truncation and quantization error of the oracle itself
        self.nu_est = abs(self.scale * self.mu_exact - self.analytic)

    def run(self, rng: np.random.Generator, run_id: int = 0) -> TraceRow:
        qae = self.cfg.qae
        est = self.estimator
        code = int(est.median_codes(rng, qae.repetitions, 1)[0])
        theta_hat = float(est.code_to_theta(code))
        mu_hat = float(est.code_to_mu(code))
        return TraceRow(
            run_id=run_id,
            n=self.cfg.grid.qubits,
            m=qae.phase_bits,
            D=qae.repetitions,
            k_q=qae.repetitions * est.applications_per_run,
            mu_hat=mu_hat,
            theta_hat=theta_hat,
            pi_hat=self.scale * mu_hat,
            pi_analytic=self.analytic,
            nu_est=self.nu_est,
            eps_bound=self.scale * error_upper_bound(theta_hat, est.applications_per_run),
        )

    def runs(self, count: int, seed: int) -> list[TraceRow]:
        return [self.run(stream(seed, RUN_KEY, r), r) for r in range(count)]


def price_european_quantum(cfg: ExperimentConfig) -> TraceRow:
    """Single seeded run of grid -> chi -> amplitude estimation -> discounted price."""
    return EuropeanPipeline(cfg).run(stream(cfg.seed, RUN_KEY, 0))


def discretized_price(p: MarketParams, n: int, cutoff: float, payoff_bits: int | None = None) -> float:
    """``e^{-rT} v_max mu`` from the exact ``mu`` of the prepared state."""
    dist = gaussian_grid(p.maturity, n, cutoff)
    table = quantize_payoff(euro_payoff(p), dist.grid, payoff_bits)
    return p.discount * table.v_max * float(np.dot(dist.probs, table.values))


def price_asian_quantum(cfg: ExperimentConfig, runs: int | None = None) -> tuple[AsianSpec, list[TraceRow]]:
    a = cfg.asian
    spec = AsianSpec(cfg.market, a.periods, a.period_qubits, a.kind, cfg.grid.cutoff, cfg.grid.payoff_bits)
    mu_enum = asian_exact_expectation(spec)
    rows = []
    for r in range(runs or cfg.runs):
        q = asian_quantum_price(spec, cfg.qae, stream(cfg.seed, ASIAN_KEY, r))
        rows.append(
            TraceRow(
                run_id=r,
                n=spec.index_qubits,
                m=cfg.qae.phase_bits,
                D=cfg.qae.repetitions,
                k_q=q.k_q,
                mu_hat=q.mu_hat,
                theta_hat=q.theta_hat,
                pi_hat=q.price,
                pi_analytic=spec.params.discount * q.v_max * mu_enum,
                nu_est=float("nan"),
                eps_bound=q.eps_bound,
            )
        )
    return spec, rows


# ---------------------------------------------------------------------------
# error scaling


@dataclass(frozen=True)
class QuantumSweepCell:
    """One phase-bit setting of the single-qubit sweep.

    ``k_q`` is the total count of ``U_z`` applications over all ``D``
    repetitions; ``k_run`` is the count for one repetition, which sets the
    resolution the bound refers to.
    """

    bits: int
    k_q: int
    k_run: int
    errors: np.ndarray
    bounds: np.ndarray

    @property
    def mean_error(self) -> float:
        return float(math.fsum(self.errors) / self.errors.size)

    @property
    def mean_bound(self) -> float:
        return float(math.fsum(self.bounds) / self.bounds.size)


def quantum_sweep(
    p: MarketParams,
    bits: Sequence[int],
    repetitions: int,
    trials: int,
    seed: int,
    shots_per_bit: int = 1,
    strike_key: int = 0,
) -> list[QuantumSweepCell]:
    """Single-qubit estimation of ``theta = 2 arccos(1 - 2 Pi / S0)`` at each bit count.

    The price estimate is ``S0 * mu(median theta_hat)``; the bound is
    ``S0 * error_upper_bound(theta_hat, k_run)``.
    """
    price = bsm_call_price(p).price
    theta = mu_to_theta(price / p.s0)
    cells = []
    for c, m in enumerate(bits):
        rng = stream(seed, QUANTUM_KEY, strike_key, c)
        codes = single_qubit_pe_codes(theta, m, shots_per_bit, rng, runs=trials * repetitions)
        codes = np.sort(codes.reshape(trials, repetitions), axis=1)[:, (repetitions - 1) // 2]
        theta_hat = 2 * math.pi * codes / (1 << m)
        pi_hat = p.s0 * 0.5 * (1 - np.cos(theta_hat / 2))
        k_run = shots_per_bit * ((1 << m) - 1)
        bounds = p.s0 * np.abs(np.cos(theta_hat / 2 + math.pi / k_run) - np.cos(theta_hat / 2))
        cells.append(
            QuantumSweepCell(
                bits=m,
                k_q=repetitions * k_run,
                k_run=k_run,
                errors=np.abs(pi_hat - price),
                bounds=bounds,
            )
        )
    return cells


@dataclass(frozen=True)
class Fig2Result:
    classical: ScalingReport
    quantum: ScalingReport
    quantum_cells: list[QuantumSweepCell] = field(repr=False)

    def rows(self) -> list[tuple[int, float, float, float]]:
        nan = float("nan")
        out = [(int(k), e, nan, nan) for k, e in self.classical.points]
        out += [(c.k_q, nan, c.mean_error, c.mean_bound) for c in self.quantum_cells]
        return sorted(out, key=lambda r: (r[0], math.isnan(r[1])))


def classical_report(cfg: ExperimentConfig) -> ScalingReport:
    return fit_power_law(mc_error_sweep(cfg.market, cfg.classical.ks, cfg.classical.trials, cfg.seed))


def quantum_report(cells: Sequence[QuantumSweepCell]) -> ScalingReport:
    return fit_power_law((c.k_q, c.mean_error) for c in cells)


def fig2_experiment(cfg: ExperimentConfig) -> Fig2Result:
    cells = quantum_sweep(
        cfg.market,
        cfg.quantum.bits,
        cfg.qae.repetitions,
        cfg.quantum.trials,
        cfg.seed,
        cfg.qae.shots_per_bit,
    )
    return Fig2Result(classical=classical_report(cfg), quantum=quantum_report(cells), quantum_cells=cells)


@dataclass(frozen=True)
class Fig3Row:
    strike: float
    zeta_q: float
    zeta_c: float
    ratio: float


def scaling_ratio(zeta_q: float, zeta_c: float = CLASSICAL_EXPONENT) -> float:
    return zeta_q / zeta_c


def fig3_experiment(cfg: ExperimentConfig) -> list[Fig3Row]:
    """Quantum exponent per strike against the fixed classical exponent -1/2."""
    rows = []
    for s, strike in enumerate(cfg.strikes):
        cells = quantum_sweep(
            cfg.market.with_strike(strike),
            cfg.quantum.bits,
            cfg.qae.repetitions,
            cfg.quantum.trials,
            cfg.seed,
            cfg.qae.shots_per_bit,
            strike_key=s + 1,
        )
        zq = quantum_report(cells).exponent
        rows.append(Fig3Row(float(strike), zq, CLASSICAL_EXPONENT, scaling_ratio(zq)))
    return rows


def fig1_paths(cfg: ExperimentConfig) -> tuple[np.ndarray, np.ndarray]:
    """Real-world GBM sample paths including ``t = 0``."""
    p = cfg.market
    times = p.maturity * np.arange(1, cfg.fig1_steps + 1) / cfg.fig1_steps
    paths = gbm_paths(p, times, cfg.fig1_paths, stream(cfg.seed, PATHS_KEY), measure="P")
    t = np.concatenate([[0.0], times])
    return t, np.hstack([np.full((cfg.fig1_paths, 1), p.s0), paths])


# ---------------------------------------------------------------------------
# CSV writers


def _write(path: str | Path, header: Sequence[str], rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(c) for c in r])
    return path


def write_fig1_csv(path, t: np.ndarray, paths: np.ndarray) -> Path:
    rows = [(t[i], pid, paths[pid, i]) for pid in range(paths.shape[0]) for i in range(t.size)]
    return _write(path, ["t", "path_id", "price"], rows)


def write_fig2_csv(path, result: Fig2Result) -> Path:
    return _write(path, ["k", "error_classical", "error_quantum", "bound_quantum"], result.rows())


def write_fig3_csv(path, rows: Sequence[Fig3Row]) -> Path:
    return _write(path, ["strike", "zeta_q", "zeta_c", "ratio"], [(r.strike, r.zeta_q, r.zeta_c, r.ratio) for r in rows])
