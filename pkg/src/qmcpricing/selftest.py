"""Fast invariant checks runnable from the command line."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .asian import AsianSpec, asian_exact_expectation, asian_state
from .bsm import MarketParams, bsm_call_price, norm_cdf
from .distribution import from_probs, gaussian_grid, grover_rudolph_amplitudes
from .estimation import qpe_distribution, qpe_two_branch, required_repetitions
from .payoff import euro_payoff, quantize_payoff
from .statevec import (
    ChiCircuit,
    QuantumState,
    RegisterLayout,
    apply_Q,
    apply_R_with_register,
    apply_U,
    apply_U_circuit,
    apply_V,
    chi_from_amplitudes,
    exact_mu,
    mu_to_theta,
    plane_diagnostics,
    prepare_chi,
    scratch_leakage,
    theta_to_mu,
)


def _analytics() -> bool:
    return norm_cdf(0.0) == 0.5 and abs(bsm_call_price(MarketParams()).price - 10.4506) < 1e-3


def _loading() -> bool:
    rng = np.random.default_rng(0)
    d = from_probs(rng.random(256))
    return bool(np.max(np.abs(grover_rudolph_amplitudes(d) - np.sqrt(d.probs))) <= 1e-12)


def _reflections() -> bool:
    d = gaussian_grid(1.0, 5)
    q = quantize_payoff(euro_payoff(MarketParams()), d.grid, 8)
    chi = prepare_chi(d, q)
    rng = np.random.default_rng(1)
    v = rng.normal(size=chi.amps.size) + 1j * rng.normal(size=chi.amps.size)
    v /= np.linalg.norm(v)
    s = QuantumState(chi.layout, v.copy())
    ok = np.allclose(apply_V(apply_V(s.copy())).amps, v, atol=1e-12)
    ok &= np.allclose(apply_U(apply_U(s.copy(), chi), chi).amps, v, atol=1e-12)
    circ = ChiCircuit.build(d, q)
    ok &= np.allclose(apply_U(s.copy(), chi).amps, apply_U_circuit(s.copy(), circ).amps, atol=1e-12)
    ok &= abs(apply_Q(s.copy(), chi).norm() - 1.0) < 1e-10
    return bool(ok)


def _phase_convention() -> bool:
    amps = np.full(2, 1 / math.sqrt(2))
    for mu in np.arange(1, 20) * 0.05:
        d = plane_diagnostics(chi_from_amplitudes(amps, np.array([mu, mu])))
        if abs(theta_to_mu(d.theta) - mu) > 1e-10:
            return False
    return True


def _qpe() -> bool:
    chi = chi_from_amplitudes(np.full(2, 1 / math.sqrt(2)), np.array([0.3, 0.3]))
    p = qpe_distribution(chi, m=6)
    return bool(np.max(np.abs(p - qpe_two_branch(mu_to_theta(0.3), 6))) < 1e-10)


def _uncompute() -> bool:
    d = gaussian_grid(1.0, 4)
    q = quantize_payoff(euro_payoff(MarketParams()), d.grid, 6)
    s = QuantumState.zeros(RegisterLayout(4, 6))
    s.tensor()[0, :, 0, 0] = grover_rudolph_amplitudes(d)
    return scratch_leakage(apply_R_with_register(s, q)) <= 1e-12


def _median() -> bool:
    return required_repetitions(1 - 8 / math.pi**2, 0.995) <= 24


def _asian() -> bool:
    spec = AsianSpec(MarketParams(), 2, 3)
    chi, _ = asian_state(spec)
    return abs(exact_mu(chi) - asian_exact_expectation(spec)) <= 1e-12


CHECKS: dict[str, Callable[[], bool]] = {
    "analytics": _analytics,
    "distribution loading": _loading,
    "reflections": _reflections,
    "phase convention": _phase_convention,
    "qpe closed form": _qpe,
    "payoff register uncompute": _uncompute,
    "median repetitions": _median,
    "asian composite state": _asian,
}


def run_selftest() -> list[tuple[str, bool]]:
    return [(name, bool(fn())) for name, fn in CHECKS.items()]
