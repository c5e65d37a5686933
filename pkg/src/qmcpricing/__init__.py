"""Quantum amplitude-estimation option pricing on a dense state-vector simulator.

The package pairs closed-form Black-Scholes analytics and a classical Monte
Carlo baseline with a simulated quantum pipeline: Gaussian distribution
loading, a fixed-point payoff oracle, Grover-iterate phase estimation and
the median-boosted mean estimators built on it.
"""

from .asian import AsianSpec, asian_exact_expectation, asian_quantum_price
from .bench import EuropeanPipeline, fig2_experiment, fig3_experiment, price_european_quantum
from .bsm import AnalyticQuote, MarketParams, bsm_call_price, bsm_call_variance, norm_cdf
from .classical import McEstimate, ScalingReport, chebyshev_samples, fit_power_law, mc_price_european
from .config import ExperimentConfig
from .distribution import DiscreteDist, GridSpec, gaussian_grid, grover_rudolph_amplitudes
from .errors import DomainError, ResourceError
from .estimation import (
    PhaseEstimate,
    QaeConfig,
    amplitude_estimate,
    error_upper_bound,
    mean_estimate_01,
    mean_estimate_bounded_variance,
    median_boost,
    qpe_distribution,
    single_qubit_pe,
)
from .payoff import QuantizedPayoff, quantize_payoff
from .statevec import QuantumState, RegisterLayout, exact_mu, mu_to_theta, prepare_chi, theta_to_mu

__version__ = "0.1.0"

__all__ = [
    "AnalyticQuote",
    "AsianSpec",
    "DiscreteDist",
    "DomainError",
    "EuropeanPipeline",
    "ExperimentConfig",
    "GridSpec",
    "MarketParams",
    "McEstimate",
    "PhaseEstimate",
    "QaeConfig",
    "QuantizedPayoff",
    "QuantumState",
    "RegisterLayout",
    "ResourceError",
    "ScalingReport",
    "amplitude_estimate",
    "asian_exact_expectation",
    "asian_quantum_price",
    "bsm_call_price",
    "bsm_call_variance",
    "chebyshev_samples",
    "error_upper_bound",
    "exact_mu",
    "fig2_experiment",
    "fig3_experiment",
    "fit_power_law",
    "gaussian_grid",
    "grover_rudolph_amplitudes",
    "mc_price_european",
    "mean_estimate_01",
    "mean_estimate_bounded_variance",
    "median_boost",
    "mu_to_theta",
    "norm_cdf",
    "prepare_chi",
    "price_european_quantum",
    "qpe_distribution",
    "quantize_payoff",
    "single_qubit_pe",
    "theta_to_mu",
]
