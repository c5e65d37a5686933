import math

import numpy as np
import pytest

from qmcpricing.bsm import MarketParams
from qmcpricing.distribution import from_probs, gaussian_grid
from qmcpricing.errors import DomainError, ResourceError
from qmcpricing.estimation import (
    AmplitudeEstimator,
    PhaseEstimate,
    QaeConfig,
    amplitude_estimate,
    best_estimate_mass,
    bit_probability_zero,
    controlled_power_rows,
    cosine_error_bound,
    error_upper_bound,
    fold,
    folded_distribution,
    inverse_qft,
    inverse_qft_matrix,
    level_edges,
    mean_estimate_01,
    mean_estimate_bounded_variance,
    median_boost,
    median_failure_bound,
    nearest_estimate_mass,
    qpe_distribution,
    qpe_single_phase,
    qpe_two_branch,
    range_function,
    required_repetitions,
    single_qubit_pe,
    single_qubit_pe_codes,
    amplitude_error_bound,
    mean01_error_bound,
    write_repetition_trace,
)
from qmcpricing.payoff import euro_payoff, quantize_payoff
from qmcpricing.statevec import GroverIterate, chi_from_amplitudes, exact_mu, mu_to_theta, prepare_chi, theta_to_mu

TWO_PI = 2 * math.pi


def chi_for_mu(mu, n=1):
    return chi_from_amplitudes(np.full(1 << n, 2 ** (-n / 2)), np.full(1 << n, mu))


def chi_for_theta(theta):
    return chi_for_mu(theta_to_mu(theta))


class TestTypes:
    def test_phase_estimate_lattice(self):
        PhaseEstimate(theta_hat=TWO_PI * 3 / 8, bits=3)
        with pytest.raises(DomainError):
            PhaseEstimate(theta_hat=0.1, bits=3)
        with pytest.raises(DomainError):
            PhaseEstimate(theta_hat=TWO_PI, bits=3)

    def test_code(self):
        assert PhaseEstimate(theta_hat=TWO_PI * 5 / 16, bits=4).code == 5

    def test_qae_config(self):
        assert QaeConfig().repetitions == 24
        with pytest.raises(DomainError):
            QaeConfig(phase_bits=0)
        with pytest.raises(DomainError):
            QaeConfig(repetitions=0)
        with pytest.raises(DomainError):
            QaeConfig(shots_per_bit=0)


class TestQpeDistribution:
    def test_representable_point_masses(self):
        theta = TWO_PI * 3 / 16
        p = qpe_distribution(chi_for_theta(theta), m=4)
        assert p[3] == pytest.approx(0.5, abs=1e-12)
        assert p[13] == pytest.approx(0.5, abs=1e-12)
        assert p.sum() - p[3] - p[13] <= 1e-12

    def test_one_third_turn_matches_geometric_series(self):
        m, theta = 3, TWO_PI / 3
        p = qpe_distribution(chi_for_theta(theta), m=m)
        # direct evaluation with phases in turns: delta = 1/3 - x/8
        for x in range(8):
            probs = []
            for turns in (1 / 3, 2 / 3):
                delta = turns - x / 8
                num = abs(1 - np.exp(2j * math.pi * delta * 8)) ** 2
                den = abs(1 - np.exp(2j * math.pi * delta)) ** 2
                probs.append(num / den / 4**m)
            assert p[x] == pytest.approx(0.5 * sum(probs), abs=1e-12)

    @pytest.mark.parametrize("mu", [0.07, 0.3, 0.62, 0.93])
    def test_closed_form_and_symmetry(self, mu):
        m = 6
        p = qpe_distribution(chi_for_mu(mu, n=2), m=m)
        assert p.sum() == pytest.approx(1.0, abs=1e-10)
        assert np.max(np.abs(p - qpe_two_branch(mu_to_theta(mu), m))) <= 1e-12
        assert np.allclose(p[1:], p[:0:-1], atol=1e-12)

    def test_controlled_powers_match_sequential(self):
        d = from_probs(np.random.default_rng(0).random(4))
        q = quantize_payoff(lambda x: x + 1.0, d.grid, None, v_max=2.0)
        chi = prepare_chi(d, q)
        a = controlled_power_rows(GroverIterate(chi), 5, "sequential")
        op = GroverIterate(chi)
        b = controlled_power_rows(op, 5, "controlled")
        assert np.max(np.abs(a - b)) <= 1e-12
        assert op.uses_u == 2 * 31

    def test_fft_is_inverse_qft(self):
        rows = np.random.default_rng(1).normal(size=(16, 3)) + 0j
        assert np.max(np.abs(inverse_qft(rows) - inverse_qft_matrix(4) @ rows)) <= 1e-12
        w = inverse_qft_matrix(3)
        assert np.allclose(w @ w.conj().T, np.eye(8), atol=1e-14)

    def test_half_iterate_phases(self):
        mu = 0.3
        chi = chi_for_mu(mu)
        p = qpe_distribution(chi, GroverIterate(chi, half=True), 6)
        assert np.max(np.abs(p - qpe_two_branch(mu_to_theta(mu) / 2, 6))) <= 1e-12

    def test_resource_cap(self):
        d = gaussian_grid(1.0, 8)
        chi = prepare_chi(d, quantize_payoff(euro_payoff(MarketParams()), d.grid, 8))
        with pytest.raises(ResourceError):
            qpe_distribution(chi, m=16)
        with pytest.raises(ResourceError):
            qpe_distribution(chi, m=4, cap=12)

    @pytest.mark.parametrize("m", [4, 6, 8])
    def test_best_estimate_floor(self, m):
        rng = np.random.default_rng(m)
        for theta in rng.uniform(0.05, math.pi - 0.05, 30):
            p = qpe_distribution(chi_for_theta(theta), m=m)
            assert best_estimate_mass(p, theta) >= 8 / math.pi**2
            assert nearest_estimate_mass(p, theta) >= 4 / math.pi**2

    def test_fold(self):
        assert list(fold(np.arange(8), 3)) == [0, 1, 2, 3, 4, 3, 2, 1]
        f = folded_distribution(np.arange(8, dtype=float))
        assert list(f) == [0, 1 + 7, 2 + 6, 3 + 5, 4]


class TestSingleQubit:
    def test_zero_phase(self):
        est = single_qubit_pe(0.0, 6, 3, np.random.default_rng(0))
        assert est.theta_hat == 0.0
        assert est.unitary_applications == 3 * 63

    @pytest.mark.parametrize("code", [1, 5, 22, 31])
    def test_representable_exact(self, code):
        theta = TWO_PI * code / 32
        codes = single_qubit_pe_codes(theta, 5, 1, np.random.default_rng(code), runs=200)
        assert np.all(codes == code)

    def test_last_bit_probability(self):
        m, theta = 5, 1.1
        assert bit_probability_zero(theta, m, 0.0) == pytest.approx(math.cos(theta * 2**m / 4) ** 2, abs=1e-14)
        shots = 10_000
        p0 = bit_probability_zero(theta, m, 0.0)
        codes = single_qubit_pe_codes(theta, m, 1, np.random.default_rng(3), runs=shots)
        zeros = np.sum((codes & 1) == 0)
        assert abs(zeros - shots * p0) <= 4 * math.sqrt(shots * p0 * (1 - p0))

    def test_conditional_stage_probability(self):
        m, theta, shots = 4, 2.3, 10_000
        codes = single_qubit_pe_codes(theta, m, 1, np.random.default_rng(8), runs=shots * 4)
        low = codes & 1
        for b in (0, 1):
            sel = codes[low == b]
            p0 = bit_probability_zero(theta, m - 1, b / 2)
            n = sel.size
            zeros = np.sum(((sel >> 1) & 1) == 0)
            assert abs(zeros - n * p0) <= 4 * math.sqrt(n * p0 * (1 - p0))

    def test_single_shot_reproduces_qpe(self):
        m, theta, runs = 4, 1.234, 100_000
        codes = single_qubit_pe_codes(theta, m, 1, np.random.default_rng(1), runs=runs)
        emp = np.bincount(codes, minlength=16) / runs
        exact = qpe_single_phase(theta, m)
        sd = np.sqrt(exact * (1 - exact) / runs)
        assert np.all(np.abs(emp - exact) <= 4 * sd + 1e-12)

    def test_median_accuracy(self):
        rng = np.random.default_rng(21)
        m, reps = 8, 25
        hits = 0
        thetas = rng.uniform(0, TWO_PI, 400)
        for theta in thetas:
            codes = np.sort(single_qubit_pe_codes(theta, m, 1, rng, runs=reps))
            est = TWO_PI * codes[reps // 2] / 2**m
            err = abs((est - theta + math.pi) % TWO_PI - math.pi)
            hits += err <= TWO_PI / 2**m
        assert hits / thetas.size >= 0.99

    def test_shots_majority_sharpens(self):
        theta = 1.0
        many = single_qubit_pe_codes(theta, 6, 101, np.random.default_rng(0), runs=200)
        best = round(theta / TWO_PI * 64)
        assert np.mean(np.abs(many - best) <= 1) >= 0.99


class TestMedian:
    def test_passthrough(self):
        e = PhaseEstimate(TWO_PI / 4, 2, 1, 3)
        out = median_boost([e])
        assert out.theta_hat == e.theta_hat and out.repetitions == 1

    def test_counts_and_value(self):
        ests = [PhaseEstimate(TWO_PI * c / 8, 3, 1, 7) for c in [1, 5, 2, 2, 7]]
        out = median_boost(ests)
        assert out.code == 2
        assert out.unitary_applications == 35
        assert out.repetitions == 5

    def test_even_count_takes_lower_middle(self):
        ests = [PhaseEstimate(TWO_PI * c / 8, 3) for c in [1, 4, 2, 6]]
        assert median_boost(ests).code == 2

    def test_mixed_bits_rejected(self):
        with pytest.raises(DomainError):
            median_boost([PhaseEstimate(0.0, 3), PhaseEstimate(0.0, 4)])
        with pytest.raises(DomainError):
            median_boost([])

    def test_bound_values(self):
        assert median_failure_bound(0.25, 1) == pytest.approx(0.4330127018922193, abs=1e-15)
        assert median_failure_bound(1e-12, 5) < 1e-20

    def test_required_repetitions(self):
        d = required_repetitions(0.19, 0.995)
        assert d == 19
        assert median_failure_bound(0.19, d) <= 0.005 < median_failure_bound(0.19, d - 1)
        assert d <= 24


class TestAmplitudeEstimation:
    def test_zero(self):
        chi = chi_for_mu(0.0)
        rng = np.random.default_rng(0)
        assert all(amplitude_estimate(chi, 32, rng) == 0.0 for _ in range(20))

    def test_bound_value(self):
        assert amplitude_error_bound(0.5, 64) == pytest.approx(0.051496956599325225, abs=1e-15)

    def test_counter(self):
        est = AmplitudeEstimator(chi_for_mu(0.4), 6)
        assert (est.uses_u, est.uses_v) == (63, 63)
        assert est.applications_per_run == 63

    def test_no_ambiguity_above_half(self):
        for mu in (0.7, 0.9):
            est = AmplitudeEstimator(chi_for_mu(mu), 8)
            draws = est.sample(np.random.default_rng(1), 200)
            assert np.median(draws) == pytest.approx(mu, abs=0.02)

    @pytest.mark.parametrize("a", [0.1, 0.5, 0.85])
    def test_success_rate(self, a):
        est = AmplitudeEstimator(chi_for_mu(a), 6)
        mus = est.code_to_mu(np.arange(est.folded.size))
        assert est.folded[np.abs(mus - a) <= amplitude_error_bound(a, 64)].sum() >= 8 / math.pi**2


class TestMean01:
    def test_trivial(self):
        d = gaussian_grid(1.0, 4)
        rng = np.random.default_rng(0)
        assert mean_estimate_01(d, np.zeros(16), 16, 0.1, rng) == 0.0
        assert mean_estimate_01(d, np.ones(16), 16, 0.1, rng) == pytest.approx(1.0, abs=1e-15)

    def test_values_checked(self):
        d = gaussian_grid(1.0, 2)
        with pytest.raises(DomainError):
            mean_estimate_01(d, [0, 0, 0, 2.0], 16, 0.1, np.random.default_rng(0))
        with pytest.raises(DomainError):
            mean_estimate_01(d, [0, 0, 0, 1.0], 16, 1.5, np.random.default_rng(0))

    def test_euro_call_accuracy(self):
        d = gaussian_grid(1.0, 8)
        q = quantize_payoff(euro_payoff(MarketParams()), d.grid, 16)
        mu = exact_mu(prepare_chi(d, q))
        est = AmplitudeEstimator(prepare_chi(d, q), 10)
        reps = required_repetitions(1 - 8 / math.pi**2, 0.9)
        codes = est.median_codes(np.random.default_rng(2), reps, 200)
        hits = np.abs(est.code_to_mu(codes) - mu) <= 4 / 2**10
        assert hits.mean() >= 0.9
        # the public entry point agrees with the batched route on one seeded run
        one = mean_estimate_01(d, q.values, 1024, 0.1, np.random.default_rng(3))
        assert abs(one - mu) <= 4 / 2**10

    def test_mean01_constant(self):
        for mu in (0.02, 0.2, 0.6):
            for m in (5, 8):
                est = AmplitudeEstimator(chi_for_mu(mu), m)
                codes = est.median_codes(np.random.default_rng(m), 11, 300)
                err = np.abs(est.code_to_mu(codes) - mu)
                assert np.mean(err <= mean01_error_bound(mu, 2**m)) >= 0.99


class TestBoundedVariance:
    def test_range_function(self):
        assert float(range_function(1.5, 1, 2)) == 0.75
        assert float(range_function(2.0, 1, 2)) == 0.0
        assert float(range_function(0.5, 1, 2)) == 0.0
        with pytest.raises(DomainError):
            range_function(1.0, 2, 1)

    def test_level_count(self):
        assert len(level_edges(1.0, 1 / 8)) == 3 + 1
        assert level_edges(1.0, 1 / 8)[-1] == (4.0, 8.0)
        assert len(level_edges(1.0, 0.3)) == math.ceil(math.log2(1 / 0.3)) + 1

    def test_constant(self):
        d = from_probs([0.3, 0.7])
        res = mean_estimate_bounded_variance(d, [4.2, 4.2], 1.0, 0.1, np.random.default_rng(0))
        assert res.estimate == 4.2

    def test_precondition(self):
        d = from_probs([0.5, 0.5])
        with pytest.raises(DomainError):
            mean_estimate_bounded_variance(d, [0, 1], 1.0, 4.0, np.random.default_rng(0))

    def test_two_point(self):
        p, values = 0.3, np.array([-2.0, 5.0])
        d = from_probs([1 - p, p])
        mean = (1 - p) * values[0] + p * values[1]
        lam = math.sqrt(p * (1 - p)) * (values[1] - values[0])
        eps = lam / 8
        rng = np.random.default_rng(13)
        hits = sum(
            abs(mean_estimate_bounded_variance(d, values, lam, eps, rng).estimate - mean) <= eps for _ in range(300)
        )
        assert hits / 300 >= 2 / 3


class TestErrorBounds:
    def test_upper_bound(self):
        assert error_upper_bound(math.pi / 2, 100) == pytest.approx(0.022559675257858958, abs=1e-15)
        assert error_upper_bound(1.0, 10**12) < 1e-11
        with pytest.raises(DomainError):
            error_upper_bound(1.0, 0)

    @pytest.mark.parametrize("k", [100, 1000, 10**5])
    def test_first_order(self, k):
        # the relative gap is about pi / (2 k) * cot(theta_hat / 2), so small angles need larger k
        for th in (1.0, math.pi / 2, 2.5):
            exact = error_upper_bound(th, k)
            assert exact == pytest.approx(math.pi / k * math.sin(th / 2), rel=0.05)

    def test_cosine_bound(self):
        assert cosine_error_bound(math.pi / 2, 0.1) == pytest.approx(0.03622430885880379, abs=1e-15)
        assert cosine_error_bound(1.0, 1e-12) < 1e-12
        with pytest.raises(DomainError):
            cosine_error_bound(math.pi, 0.1)
        with pytest.raises(DomainError):
            cosine_error_bound(1.0, 1.5)

    def test_cosine_bound_sweep(self):
        # the bound derivation needs theta_hat <= pi - eps / 2
        for th_hat in np.linspace(0, 2.5, 26):
            for eps in (0.01, 0.3, 1.0):
                bound = cosine_error_bound(th_hat, eps)
                thetas = np.linspace(max(th_hat - eps, 0), th_hat + eps, 401)
                assert np.all(np.abs(np.cos(thetas / 2) - math.cos(th_hat / 2)) <= bound + 1e-15)


def test_repetition_trace(tmp_path):
    ests = [PhaseEstimate(TWO_PI * c / 8, 3, 1, 7) for c in (1, 2)]
    write_repetition_trace(tmp_path / "t.csv", ests)
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "repetition,bits,theta_hat,k_q"
    assert lines[1].endswith(",7")
