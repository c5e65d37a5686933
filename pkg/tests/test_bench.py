import csv
import math
from dataclasses import replace

import numpy as np
import pytest

from qmcpricing.bench import (
    CLASSICAL_EXPONENT,
    TRACE_HEADER,
    EuropeanPipeline,
    discretized_price,
    fig1_paths,
    fig2_experiment,
    fig3_experiment,
    price_asian_quantum,
    price_european_quantum,
    quantum_sweep,
    scaling_ratio,
    write_fig1_csv,
    write_fig2_csv,
    write_fig3_csv,
    write_trace,
)
from qmcpricing.bsm import MarketParams, bsm_call_price
from qmcpricing.classical import fit_power_law
from qmcpricing.config import (
    DEFAULT_SEED,
    AsianConfig,
    ExperimentConfig,
    GridConfig,
    load_config,
    parse_config,
)
from qmcpricing.errors import DomainError
from qmcpricing.estimation import QaeConfig


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestEuropeanPipeline:
    def test_defaults_within_bounds(self):
        pipe = EuropeanPipeline(ExperimentConfig())
        rows = pipe.runs(200, DEFAULT_SEED)
        ok = [abs(r.pi_hat - r.pi_analytic) <= r.eps_bound + r.nu_est for r in rows]
        assert np.mean(ok) >= 0.99
        r = rows[0]
        assert (r.n, r.m, r.D, r.k_q) == (8, 10, 24, 24 * 1023)
        assert r.pi_analytic == pytest.approx(bsm_call_price(MarketParams()).price, abs=1e-12)

    def test_degenerate_volatility(self):
        p = MarketParams(vol=1e-9)
        row = price_european_quantum(ExperimentConfig(market=p))
        expected = p.discount * (p.s0 * math.exp(p.rate * p.maturity) - p.strike)
        assert row.pi_hat == pytest.approx(expected, abs=1e-6)

    def test_single_run_deterministic(self):
        cfg = ExperimentConfig(seed=3)
        assert price_european_quantum(cfg) == price_european_quantum(cfg)

    def test_nu_matches_discretized_price(self):
        pipe = EuropeanPipeline(ExperimentConfig())
        p = MarketParams()
        assert pipe.nu_est == pytest.approx(abs(discretized_price(p, 8, 4.0, 16) - pipe.analytic), abs=1e-12)

    def test_discretization_order(self):
        p = MarketParams()
        errs = [abs(discretized_price(p, n, 5.0) - bsm_call_price(p).price) for n in range(6, 11)]
        factors = [a / b for a, b in zip(errs, errs[1:])]
        assert math.exp(np.mean(np.log(factors))) >= 1.5


class TestAsianPipeline:
    def test_rows(self):
        cfg = ExperimentConfig(asian=AsianConfig(2, 3, "geometric"), grid=GridConfig(payoff_bits=12))
        spec, rows = price_asian_quantum(cfg, runs=3)
        assert spec.index_qubits == 6 and len(rows) == 3
        assert all(math.isnan(r.nu_est) for r in rows)
        assert rows[0].pi_analytic == rows[2].pi_analytic


class TestSweeps:
    def test_quantum_cells(self):
        cells = quantum_sweep(MarketParams(), [5, 6, 7], 24, 20, seed=1)
        assert [c.bits for c in cells] == [5, 6, 7]
        assert [c.k_q for c in cells] == [24 * 31, 24 * 63, 24 * 127]
        assert all(c.errors.size == 20 for c in cells)

    def test_bound_dominance(self):
        cells = quantum_sweep(MarketParams(), range(7, 13), 24, 100, seed=2)
        errors = np.concatenate([c.errors for c in cells])
        bounds = np.concatenate([c.bounds for c in cells])
        assert np.mean(errors <= bounds) >= 0.99

    def test_quantum_error_decreasing(self):
        cells = quantum_sweep(MarketParams(), range(7, 21), 24, 100, seed=DEFAULT_SEED)
        errs = [c.mean_error for c in cells]
        # neighbouring bit counts can share a lattice offset, so allow small plateaus
        assert all(b <= 1.1 * a for a, b in zip(errs, errs[1:]))
        assert errs[-1] <= errs[0] / 1000

    def test_sweep_deterministic(self):
        a = quantum_sweep(MarketParams(), [6, 7, 8], 24, 10, seed=5, strike_key=2)
        b = quantum_sweep(MarketParams(), [6, 7, 8], 24, 10, seed=5, strike_key=2)
        assert all(np.array_equal(x.errors, y.errors) for x, y in zip(a, b))

    def test_synthetic_ratio(self):
        rep = fit_power_law((k, 3.0 / k) for k in (10, 100, 1000, 10_000))
        assert scaling_ratio(rep.exponent) == pytest.approx(2.0, abs=1e-12)
        assert scaling_ratio(-0.5, CLASSICAL_EXPONENT) == 1.0


class TestFigures:
    def test_fig2_csv(self, small_config, tmp_path):
        cfg = load_config(small_config)
        res = fig2_experiment(cfg)
        rows = read_csv(write_fig2_csv(tmp_path / "fig2.csv", res))
        assert rows[0] == ["k", "error_classical", "error_quantum", "bound_quantum"]
        assert len(rows) == 1 + 3 + 4
        ks = [int(r[0]) for r in rows[1:]]
        assert ks == sorted(ks)

    def test_fig3_csv(self, small_config, tmp_path):
        cfg = load_config(small_config)
        out = fig3_experiment(cfg)
        rows = read_csv(write_fig3_csv(tmp_path / "fig3.csv", out))
        assert rows[0] == ["strike", "zeta_q", "zeta_c", "ratio"]
        assert len(rows) == 1 + len(cfg.strikes)
        assert [float(r[0]) for r in rows[1:]] == [90.0, 110.0]

    def test_fig1_csv(self, tmp_path):
        cfg = ExperimentConfig(fig1_paths=2, fig1_steps=4)
        t, paths = fig1_paths(cfg)
        assert t[0] == 0.0 and t[-1] == 1.0
        assert np.all(paths[:, 0] == 100.0)
        rows = read_csv(write_fig1_csv(tmp_path / "fig1.csv", t, paths))
        assert rows[0] == ["t", "path_id", "price"]
        assert len(rows) == 1 + 2 * 5

    def test_trace(self, tmp_path):
        rows = EuropeanPipeline(ExperimentConfig(qae=QaeConfig(phase_bits=6))).runs(2, 1)
        write_trace(tmp_path / "t.csv", rows, {"L": 2, "kind": "arithmetic"})
        out = read_csv(tmp_path / "t.csv")
        assert out[0] == TRACE_HEADER + ["L", "kind"]
        assert out[1][-2:] == ["2", "arithmetic"]
        assert out[1][0] == "0" and out[2][0] == "1"


class TestConfig:
    def test_defaults(self):
        cfg = parse_config("")
        assert cfg == ExperimentConfig()
        assert cfg.seed == DEFAULT_SEED
        assert cfg.classical.ks[0] == 100 and cfg.classical.ks[-1] == 10**6
        assert cfg.quantum.bits == tuple(range(7, 21))

    def test_values(self, small_config):
        cfg = load_config(small_config)
        assert cfg.classical.ks == (100, 316, 1000)
        assert cfg.quantum.bits == (6, 7, 8, 9)
        assert cfg.seed == 7 and cfg.qae.seed == 7

    def test_payoff_bits_none(self):
        assert parse_config("[grid]\npayoff_bits = none\n").grid.payoff_bits is None

    @pytest.mark.parametrize(
        "text",
        [
            "[market]\nspot = 3\n",
            "[extras]\nx = 1\n",
            "[market]\nvol = abc\n",
            "[market]\nvol = -0.2\n",
            "not an ini",
            "[sweep]\nstrikes =\n",
            "[quantum]\nbits = 7,8\n",
        ],
    )
    def test_rejects(self, text):
        with pytest.raises(DomainError):
            parse_config(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DomainError):
            load_config(tmp_path / "nope.ini")

    def test_with_seed(self):
        cfg = ExperimentConfig().with_seed(11)
        assert cfg.seed == 11 and cfg.qae.seed == 11
        assert replace(cfg, seed=11) == cfg
