"""Kernels, pairwise-difference fitting, bandwidth machinery, estimator API."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from netmatch import (
    BandwidthTargetError,
    BlockLevelInfluence,
    CovariateMean,
    GraphonSpec,
    LinearInfluence,
    NetworkRegression,
    OutcomeSpec,
    SingularSystemError,
    ZeroInfluence,
    bandwidth_diagnostic,
    codegree_distance_matrix,
    draw_sample,
    estimate,
    fit_coefficients,
    fit_influence,
    kernel_eval,
    select_bandwidth,
    type_distance_matrix,
    default_grid,
)


def make_instance(n=60, k=2, noise=0.0, seed=0, influence=None):
    spec = GraphonSpec.homophily()
    outcome = OutcomeSpec(
        beta=np.arange(1, k + 1, dtype=float),
        influence=influence if influence is not None else ZeroInfluence(),
        covariate_mean=CovariateMean.linear(np.zeros(k), np.ones(k)),
        noise_sd=noise,
    )
    sample = draw_sample(spec, outcome, n, seed=seed)
    return sample, outcome, codegree_distance_matrix(sample.adjacency)


# -- kernels --------------------------------------------------------------------

def test_kernel_values():
    assert kernel_eval("boxcar", 0.0) == 1.0
    assert kernel_eval("boxcar", 0.5) == 1.0
    assert kernel_eval("boxcar", 1.0) == 0.0
    assert kernel_eval("boxcar", 7.0) == 0.0
    assert kernel_eval("smooth_bump", 0.0) == 1.0  # exp(1 - 1/(1-0)) = exp(0)
    assert kernel_eval("smooth_bump", 1.0) == 0.0
    assert kernel_eval("smooth_bump", 0.5) == pytest.approx(np.exp(-1.0))
    assert kernel_eval("smooth_bump", 0.999999) < 1e-200


def test_kernel_bounded_by_value_at_zero_and_zero_beyond_support():
    u = np.linspace(0.0, 3.0, 301)
    for kernel in ("boxcar", "smooth_bump"):
        values = kernel_eval(kernel, u)
        assert values.max() <= kernel_eval(kernel, 0.0)
        assert np.all(values[u >= 1.0] == 0.0)
        assert np.all(values >= 0.0)


def test_kernel_errors():
    with pytest.raises(ValueError, match="nonnegative"):
        kernel_eval("boxcar", -0.1)
    with pytest.raises(ValueError, match="kernel"):
        kernel_eval("gaussian", 0.5)


# -- coefficient fitting ----------------------------------------------------------

def test_exact_recovery_without_noise_or_influence():
    sample, outcome, delta = make_instance(n=80, k=2, noise=0.0, seed=1)
    for kernel in ("boxcar", "smooth_bump"):
        for bandwidth in (0.01, 0.1, 1.0):
            beta, pairs, cond = fit_coefficients(
                sample.x, sample.y, delta, kernel=kernel, bandwidth=bandwidth
            )
            assert pairs >= 1
            np.testing.assert_allclose(beta, outcome.beta, atol=1e-10)


def test_zero_distances_reduce_to_plain_pairwise_least_squares():
    rng = np.random.default_rng(3)
    n, k = 25, 2
    x = rng.standard_normal((n, k))
    y = rng.standard_normal(n)
    delta = np.zeros((n, n))
    beta, pairs, _ = fit_coefficients(x, y, delta, kernel="boxcar", bandwidth=0.5)
    assert pairs == n * (n - 1) // 2
    diffs_x = (x[:, None, :] - x[None, :, :]).reshape(-1, k)
    diffs_y = (y[:, None] - y[None, :]).ravel()
    expected = np.linalg.lstsq(diffs_x, diffs_y, rcond=None)[0]
    np.testing.assert_allclose(beta, expected, atol=1e-10)


def test_singular_when_bandwidth_excludes_all_pairs():
    sample, _, delta = make_instance(n=40, seed=2)
    smallest = delta[delta > 0].min()
    with pytest.raises(SingularSystemError, match="bandwidth"):
        fit_coefficients(sample.x, sample.y, delta, bandwidth=0.5 * smallest**2)


def test_singular_when_covariates_carry_no_variation():
    n = 12
    x = np.ones((n, 1))
    y = np.arange(n, dtype=float)
    with pytest.raises(SingularSystemError):
        fit_coefficients(x, y, np.zeros((n, n)), bandwidth=1.0)


def test_location_invariance():
    sample, _, delta = make_instance(n=50, noise=0.4, seed=4)
    res = estimate(sample.x, sample.y, delta, bandwidth=0.05)
    shifted = estimate(sample.x, sample.y + 5.0, delta, bandwidth=0.05)
    np.testing.assert_allclose(shifted.beta, res.beta, atol=1e-12)
    np.testing.assert_allclose(shifted.influence, res.influence + 5.0, atol=1e-10)


def test_covariate_affine_equivariance():
    sample, _, delta = make_instance(n=50, k=2, noise=0.4, seed=5)
    transform = np.array([[2.0, 0.5], [-1.0, 1.5]])
    res = estimate(sample.x, sample.y, delta, bandwidth=0.05)
    mapped = estimate(sample.x @ transform + np.array([3.0, -1.0]), sample.y, delta, bandwidth=0.05)
    np.testing.assert_allclose(mapped.beta, np.linalg.solve(transform, res.beta), atol=1e-8)


def test_permutation_equivariance():
    sample, _, delta = make_instance(n=40, noise=0.3, seed=6)
    perm = np.random.default_rng(0).permutation(40)
    res = estimate(sample.x, sample.y, delta, bandwidth=0.05)
    permuted = estimate(
        sample.x[perm], sample.y[perm], delta[np.ix_(perm, perm)], bandwidth=0.05
    )
    np.testing.assert_allclose(permuted.beta, res.beta, atol=1e-10)
    np.testing.assert_allclose(permuted.influence, res.influence[perm], atol=1e-10)


def test_boxcar_weights_monotone_in_bandwidth():
    sample, _, delta = make_instance(n=40, seed=7)
    previous_pairs, previous_rates = -1, np.zeros(40)
    for bandwidth in (0.001, 0.01, 0.1, 1.0):
        res = estimate(sample.x, sample.y, delta, bandwidth=bandwidth)
        assert res.effective_pairs >= previous_pairs
        assert np.all(res.match_rate >= previous_rates - 1e-15)
        previous_pairs, previous_rates = res.effective_pairs, res.match_rate


# -- influence fitting -------------------------------------------------------------

def test_constant_influence_recovered_exactly():
    spec = GraphonSpec.blockmodel([[0.5]])
    outcome = OutcomeSpec(
        beta=[2.0], influence=BlockLevelInfluence(levels=[3.0]),
        covariate_mean=CovariateMean.constant([0.0]), noise_sd=0.0,
    )
    sample = draw_sample(spec, outcome, 40, seed=8)
    delta = codegree_distance_matrix(sample.adjacency)
    res = estimate(sample.x, sample.y, delta, bandwidth=1.0)
    np.testing.assert_allclose(res.beta, [2.0], atol=1e-10)
    np.testing.assert_allclose(res.influence, 3.0, atol=1e-10)


def test_unmatched_agent_gets_own_residual():
    n = 6
    distances = np.zeros((n, n))
    distances[0, 1:] = distances[1:, 0] = 0.9  # agent 0 far from everyone
    x = np.arange(n, dtype=float)[:, None]
    y = 2.0 * np.arange(n, dtype=float) + np.array([5.0, 0, 0, 0, 0, 0])
    influence = fit_influence(x, y, distances, beta=[2.0], bandwidth=0.1)
    assert influence[0] == pytest.approx(5.0, abs=1e-12)
    np.testing.assert_allclose(influence[1:], 0.0, atol=1e-12)


def test_antipodal_blockmodel_recovers_block_levels_exactly():
    # theta in {0, 1} makes the realized network deterministic given blocks:
    # same-block columns of the squared adjacency tie exactly
    spec = GraphonSpec.blockmodel([[0.0, 1.0], [1.0, 0.0]])
    outcome = OutcomeSpec(
        beta=[1.5], influence=BlockLevelInfluence(levels=[1.0, -2.0]),
        covariate_mean=CovariateMean.linear([0.0], [1.0]), noise_sd=0.0,
    )
    sample = draw_sample(spec, outcome, 8, seed=11)
    blocks = (sample.latent_types >= 0.5).astype(int)
    assert 0 < blocks.sum() < 8  # both blocks present
    delta = codegree_distance_matrix(sample.adjacency)
    within = blocks[:, None] == blocks[None, :]
    assert np.all(delta[within] == 0.0)
    assert np.all(delta[~within] > 0.1)
    res = estimate(sample.x, sample.y, delta, bandwidth=0.01)
    np.testing.assert_allclose(res.beta, [1.5], atol=1e-12)
    np.testing.assert_allclose(res.influence, np.array([1.0, -2.0])[blocks], atol=1e-12)


# -- bandwidth diagnostics and selection --------------------------------------------

def test_match_rates_saturate_and_vanish():
    sample, _, delta = make_instance(n=30, seed=9)
    top = bandwidth_diagnostic(delta, bandwidth=float(delta.max() ** 2) + 1.0)
    np.testing.assert_array_equal(top.match_rate, 1.0)
    assert top.mean_rate == 1.0 and top.min_rate == 1.0
    tiny = bandwidth_diagnostic(delta, bandwidth=0.5 * float(delta[delta > 0].min() ** 2))
    np.testing.assert_array_equal(tiny.match_rate, 0.0)
    assert 0.0 <= top.rate_floor <= 1.0


def test_match_rate_range_invariant():
    sample, _, delta = make_instance(n=50, seed=10)
    for kernel in ("boxcar", "smooth_bump"):
        diag = bandwidth_diagnostic(delta, kernel=kernel, bandwidth=0.02)
        assert diag.match_rate.min() >= 0.0
        assert diag.match_rate.max() <= kernel_eval(kernel, 0.0)


def test_two_block_match_rates_near_block_shares():
    spec = GraphonSpec.blockmodel([[0.9, 0.1], [0.1, 0.8]])
    outcome = OutcomeSpec(beta=[1.0], influence=ZeroInfluence())
    sample = draw_sample(spec, outcome, 100, seed=12)
    delta = codegree_distance_matrix(sample.adjacency)
    bandwidth = select_bandwidth(delta, target=0.4)
    diag = bandwidth_diagnostic(delta, bandwidth=bandwidth)
    assert 0.4 <= diag.min_rate
    assert diag.mean_rate < 0.75  # separates the blocks rather than matching everyone
    blocks = (sample.latent_types >= 0.5).astype(int)
    share = np.where(blocks == 0, (blocks == 0).mean(), (blocks == 1).mean())
    assert np.abs(diag.match_rate - share).mean() < 0.15


def test_select_bandwidth_degenerate_and_saturated_cases():
    zeros = np.zeros((10, 10))
    h = select_bandwidth(zeros, target=0.9)
    assert h == pytest.approx(1e-12)
    diag = bandwidth_diagnostic(zeros, bandwidth=h)
    assert diag.min_rate == 1.0

    sample, _, delta = make_instance(n=30, seed=13)
    h_full = select_bandwidth(delta, target=1.0)
    assert h_full > float(delta.max() ** 2)
    assert bandwidth_diagnostic(delta, bandwidth=h_full).min_rate == 1.0


def test_select_bandwidth_unreachable_target():
    sample, _, delta = make_instance(n=30, seed=14)
    with pytest.raises(BandwidthTargetError, match="best achieved"):
        select_bandwidth(delta, kernel="smooth_bump", target=0.999)


def test_select_bandwidth_warns_when_target_below_rate_floor():
    sample, _, delta = make_instance(n=100, seed=15)
    with pytest.warns(UserWarning, match="n\\^\\(-gamma/4\\)"):
        select_bandwidth(delta, target=0.05, gamma_rate=1.0)


def test_select_bandwidth_returns_smallest_feasible_grid_point():
    sample, _, delta = make_instance(n=40, seed=16)
    target = 0.5
    h = select_bandwidth(delta, target=target)
    assert bandwidth_diagnostic(delta, bandwidth=h).min_rate >= target
    sq = delta[delta > 0] ** 2
    grid = np.geomspace(0.5 * sq.min(), 2.0 * sq.max(), 121)
    below = grid[grid < h]
    if below.size:
        assert bandwidth_diagnostic(delta, bandwidth=float(below[-1])).min_rate < target


# -- one-shot estimate ---------------------------------------------------------------

def test_estimate_validates_inputs():
    sample, _, delta = make_instance(n=20, seed=17)
    with pytest.raises(ValueError, match="auto"):
        estimate(sample.x, sample.y, delta, bandwidth="wide")
    with pytest.raises(ValueError, match="positive"):
        estimate(sample.x, sample.y, delta, bandwidth=-1.0)
    from netmatch import InputDataError

    with pytest.raises(InputDataError, match="agents"):
        estimate(sample.x, sample.y, delta[:10, :10])


def test_estimate_result_json_fields():
    sample, _, delta = make_instance(n=30, noise=0.2, seed=18)
    res = estimate(sample.x, sample.y, delta, bandwidth=0.05, gamma_rate=2.0)
    payload = res.to_json_dict()
    assert payload["n"] == 30 and payload["n_features"] == 2
    assert payload["kernel"] == "boxcar" and payload["gamma_rate"] == 2.0
    assert len(payload["beta"]) == 2
    assert set(payload) >= {"bandwidth", "effective_pairs", "condition_number",
                            "mean_match_rate", "min_match_rate", "rate_floor"}


def test_infeasible_and_empirical_weights_agree_as_samples_grow():
    # weights built from the population distances (infeasible: they need the
    # hidden types) and from the empirical distances give estimates that
    # approach each other
    spec = GraphonSpec.homophily()
    outcome = OutcomeSpec(
        beta=[1.0], influence=LinearInfluence(slope=2.0),
        covariate_mean=CovariateMean.linear([0.0], [1.0]), noise_sd=0.5,
    )
    grid = default_grid(spec)
    gaps = {}
    for n in (100, 300):
        gap = []
        for seed in range(5):
            sample = draw_sample(spec, outcome, n, seed=100 + seed)
            empirical = codegree_distance_matrix(sample.adjacency)
            population = type_distance_matrix(spec, sample.latent_types, grid)
            res_emp = estimate(sample.x, sample.y, empirical, bandwidth=0.005)
            res_pop = estimate(sample.x, sample.y, population, bandwidth=0.005)
            gap.append(abs(res_emp.beta[0] - res_pop.beta[0]))
        gaps[n] = float(np.median(gap))
    assert gaps[300] < gaps[100]


# -- sklearn estimator API --------------------------------------------------------------

def test_network_regression_fit_predict():
    sample, outcome, delta = make_instance(n=60, noise=0.3, seed=19)
    model = NetworkRegression(bandwidth=0.05)
    fitted = model.fit(sample.x, sample.y, adjacency=sample.adjacency)
    assert fitted is model
    np.testing.assert_allclose(model.coef_, estimate(sample.x, sample.y, delta, bandwidth=0.05).beta)
    predictions = model.predict(sample.x)
    np.testing.assert_allclose(predictions, sample.x @ model.coef_ + model.influence_)
    assert model.score(sample.x, sample.y) > 0.5
    assert model.n_features_in_ == sample.x.shape[1]
    assert model.effective_pairs_ >= 1 and np.isfinite(model.condition_number_)


def test_network_regression_accepts_precomputed_distances():
    sample, _, delta = make_instance(n=40, noise=0.2, seed=20)
    via_adjacency = NetworkRegression(bandwidth=0.05).fit(
        sample.x, sample.y, adjacency=sample.adjacency
    )
    via_distances = NetworkRegression(bandwidth=0.05).fit(sample.x, sample.y, distances=delta)
    np.testing.assert_array_equal(via_distances.coef_, via_adjacency.coef_)
    np.testing.assert_array_equal(via_distances.influence_, via_adjacency.influence_)


def test_network_regression_requires_network():
    sample, _, _ = make_instance(n=20, seed=21)
    with pytest.raises(ValueError, match="adjacency"):
        NetworkRegression().fit(sample.x, sample.y)


def test_network_regression_predict_is_in_sample_only():
    sample, _, _ = make_instance(n=20, seed=22)
    model = NetworkRegression(bandwidth=0.1).fit(sample.x, sample.y, adjacency=sample.adjacency)
    with pytest.raises(ValueError, match="in-sample"):
        model.predict(sample.x[:7])


def test_network_regression_unfitted_and_clone():
    model = NetworkRegression(kernel="smooth_bump", bandwidth=0.2, gamma_rate=2.0, target_r=0.1)
    with pytest.raises(NotFittedError):
        model.predict(np.zeros((3, 1)))
    params = model.get_params()
    assert params == {
        "kernel": "smooth_bump", "bandwidth": 0.2, "gamma_rate": 2.0,
        "target_r": 0.1, "distance_method": "gram",
    }
    duplicate = clone(model)
    assert duplicate.get_params() == params
    duplicate.set_params(kernel="boxcar")
    assert duplicate.get_params()["kernel"] == "boxcar"


def test_network_regression_auto_bandwidth_smoke():
    sample, outcome, _ = make_instance(n=120, noise=0.3, seed=23)
    with pytest.warns(UserWarning):
        model = NetworkRegression(bandwidth="auto", target_r=0.1).fit(
            sample.x, sample.y, adjacency=sample.adjacency
        )
    assert model.bandwidth_ > 0
    assert np.abs(model.coef_ - outcome.beta).max() < 0.5
