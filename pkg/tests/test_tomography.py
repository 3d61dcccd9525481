import numpy as np
import pytest

from czfid import core, model, simulate, tomography
from czfid.exceptions import DegenerateDataError

from conftest import ORDER, povm_element, random_psd_choi


def test_r_operator_matches_bruteforce(rng):
    chi = random_psd_choi(rng, mix=0.05)
    chi /= np.trace(chi).real
    counts = rng.poisson(1e3 * np.clip(simulate._probability_table(chi), 0, None)).astype(float)
    r = tomography.r_operator(chi, counts)
    p = simulate._probability_table(chi)
    expected = np.zeros((16, 16), dtype=complex)
    for n, (j, k) in enumerate((a, b) for a in ORDER for b in ORDER):
        for m, (l, mm) in enumerate((a, b) for a in ORDER for b in ORDER):
            if counts[n, m] > 0:
                expected += counts[n, m] / p[n, m] * povm_element(j, k, l, mm)
    np.testing.assert_allclose(r, expected, atol=1e-8)


def test_r_operator_extremal_equation_at_truth(rng):
    # exact expected counts of chi itself satisfy R chi = lambda chi
    for chi in (model.model_choi(0.85), random_psd_choi(rng, mix=0.1)):
        scale = 3000.0
        counts = scale * simulate.outcome_probabilities(chi)
        r = tomography.r_operator(chi, counts)
        lam = counts.sum() / np.trace(chi).real
        lhs = r @ chi
        rhs = lam * chi
        assert np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)) < 1e-8


def test_r_operator_zero_counts_and_hermiticity(rng):
    chi = np.eye(16, dtype=complex) / 16.0
    assert np.max(np.abs(tomography.r_operator(chi, np.zeros((36, 36))))) == 0.0
    counts = rng.poisson(50.0, size=(36, 36)).astype(float)
    r = tomography.r_operator(chi, counts)
    assert np.max(np.abs(r - r.conj().T)) < 1e-12


def test_r_operator_probability_floor_keeps_terms_finite():
    # rank-1 iterate assigns p = 0 to some measured outcomes
    chi = core.cz_choi() / 4.0
    counts = np.ones((36, 36))
    r = tomography.r_operator(chi, counts)
    assert np.all(np.isfinite(r))


def test_maxlik_recovers_ideal_gate_from_exact_counts():
    counts = simulate.expected_counts(core.cz_choi() / 9.0, pair_rate=1e6 / 36.0)
    settings = tomography.MaxLikSettings(stop_threshold=1e-8)
    result = tomography.maxlik_reconstruct(counts, settings=settings)
    assert result.converged
    assert abs(core.process_fidelity(result.chi, core.cz_choi()) - 1.0) < 1e-6


def test_maxlik_noiseless_pipeline_recovers_model_fidelity():
    # exact expected counts stand in for the infinite-statistics limit
    settings = tomography.MaxLikSettings(stop_threshold=1e-8)
    for v in (0.25, 0.953):
        counts = simulate.expected_counts(model.model_choi(v), pair_rate=1e4)
        result = tomography.maxlik_reconstruct(counts, settings=settings)
        f = core.process_fidelity(result.chi, core.cz_choi())
        assert abs(f - model.model_fidelity(v)) < 1e-6


def test_maxlik_on_simulated_data_within_bootstrap_band():
    config = simulate.ExperimentConfig(pair_rate=1e4, visibility=0.5, seed=8)
    table, _ = simulate.simulate_counts(config)
    result = tomography.maxlik_reconstruct(table.counts)
    f = core.process_fidelity(result.chi, core.cz_choi())
    sigma = tomography.bootstrap_fidelity_uncertainty(result.chi, table.total, n_runs=50, seed=1)
    assert abs(f - 0.625) < 3.0 * sigma


def test_maxlik_zero_iterations_returns_maximally_mixed_start():
    config = simulate.ExperimentConfig(pair_rate=1e3, visibility=0.6, seed=17)
    table, _ = simulate.simulate_counts(config)
    settings = tomography.MaxLikSettings(max_iterations=0)
    result = tomography.maxlik_reconstruct(table.counts, settings=settings)
    assert result.iterations == 0
    assert not result.converged
    np.testing.assert_allclose(result.chi, np.eye(16) / 16.0, atol=1e-15)
    # maximally mixed process matrix overlaps the rank-1 CZ projector at 1/16
    assert abs(core.process_fidelity(result.chi, core.cz_choi()) - 1.0 / 16.0) < 1e-12


def test_maxlik_uniform_counts_fix_the_maximally_mixed_point():
    # flat data make I/16 the exact maximum-likelihood solution
    result = tomography.maxlik_reconstruct(np.ones((36, 36)))
    assert result.converged and result.iterations == 0
    np.testing.assert_allclose(result.chi, np.eye(16) / 16.0, atol=1e-15)


def test_maxlik_monotone_loglikelihood_and_trace():
    config = simulate.ExperimentConfig(pair_rate=1e4, visibility=0.953, seed=21)
    table, _ = simulate.simulate_counts(config)
    settings = tomography.MaxLikSettings(track_history=True)
    result = tomography.maxlik_reconstruct(table.counts, settings=settings)
    ll = np.asarray(result.log_likelihood_history)
    assert len(ll) == result.iterations + 1
    assert np.all(np.diff(ll) > -1e-9)
    assert abs(np.trace(result.chi).real - 1.0) < 1e-12
    assert np.all(np.diff(result.residual_history)[-5:] < 0)  # settling near the fixed point


def test_maxlik_preserves_positivity_every_iteration():
    config = simulate.ExperimentConfig(pair_rate=1e4, visibility=0.022, seed=13)
    table, _ = simulate.simulate_counts(config)
    settings = tomography.MaxLikSettings(psd_check_interval=1)
    result = tomography.maxlik_reconstruct(table.counts, settings=settings)
    assert result.min_eigenvalue >= -1e-10


def test_maxlik_fixed_point_full_rank(rng):
    chi_star = random_psd_choi(rng, mix=1e-6)
    chi_star /= np.trace(chi_star).real
    counts = simulate.expected_counts(chi_star, pair_rate=1e5)
    settings = tomography.MaxLikSettings(stop_threshold=1e-7)
    result = tomography.maxlik_reconstruct(counts, settings=settings)
    assert np.max(np.abs(result.chi - chi_star)) < 1e-4


def test_maxlik_trace_target():
    counts = simulate.expected_counts(model.model_choi(0.7), pair_rate=1e4)
    settings = tomography.MaxLikSettings(trace_target=4.0)
    result = tomography.maxlik_reconstruct(counts, settings=settings)
    assert abs(np.trace(result.chi).real - 4.0) < 1e-9
    assert abs(core.process_fidelity(result.chi, core.cz_choi()) - model.model_fidelity(0.7)) < 1e-4


def test_maxlik_accepts_real_valued_tables():
    config = simulate.ExperimentConfig(pair_rate=1e4, visibility=0.5, seed=2)
    table, refs = simulate.simulate_counts(config)
    renorm = simulate.renormalize_counts(table, refs)
    result = tomography.maxlik_reconstruct(renorm)
    assert result.converged
    f = core.process_fidelity(result.chi, core.cz_choi())
    assert abs(f - 0.625) < 0.02


def test_maxlik_rejects_all_zero_counts():
    with pytest.raises(DegenerateDataError):
        tomography.maxlik_reconstruct(np.zeros((36, 36)))


def test_maxlik_iteration_budget_returns_flagged_result():
    config = simulate.ExperimentConfig(pair_rate=1e4, visibility=0.5, seed=4)
    table, _ = simulate.simulate_counts(config)
    settings = tomography.MaxLikSettings(max_iterations=3)
    result = tomography.maxlik_reconstruct(table.counts, settings=settings)
    assert not result.converged
    assert result.iterations == 3
    assert np.isfinite(result.final_residual)


def test_settings_validation():
    with pytest.raises(ValueError):
        tomography.MaxLikSettings(stop_threshold=0.0)
    with pytest.raises(ValueError):
        tomography.MaxLikSettings(max_iterations=-1)
    with pytest.raises(ValueError):
        tomography.MaxLikSettings(trace_target=0.0)


def test_bootstrap_sigma_shrinks_with_counts():
    config = simulate.ExperimentConfig(pair_rate=1e4, visibility=0.953, seed=6)
    table, _ = simulate.simulate_counts(config)
    result = tomography.maxlik_reconstruct(table.counts)
    sigma_1 = tomography.bootstrap_fidelity_uncertainty(result.chi, table.total, n_runs=40, seed=3)
    sigma_4 = tomography.bootstrap_fidelity_uncertainty(result.chi, 4 * table.total, n_runs=40, seed=3)
    ratio = sigma_1 / sigma_4
    assert 2.0 * 0.7 < ratio < 2.0 * 1.3


def test_bootstrap_degenerate_and_invalid_runs():
    chi = model.model_choi(0.8)
    sigma = tomography.bootstrap_fidelity_uncertainty(chi, 1e5, n_runs=2, seed=0)
    assert np.isfinite(sigma) and sigma >= 0.0
    with pytest.raises(ValueError):
        tomography.bootstrap_fidelity_uncertainty(chi, 1e5, n_runs=1)
    with pytest.raises(ValueError):
        tomography.bootstrap_fidelity_uncertainty(chi, 0.0)
