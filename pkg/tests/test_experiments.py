"""Experiment harness: seeding, reproducibility, checks, and pass rules."""

import numpy as np
import pytest

from netmatch import GraphonSpec, InputDataError, KernelSpec
from netmatch.experiments import (
    ExperimentConfig,
    derive_seed,
    medians_decreasing,
    run_bound_sweep,
    run_consistency,
    run_experiment,
    run_identification_check,
    run_uniform_delta,
)
from netmatch.simulate import (
    BlockLevelInfluence,
    CovariateMean,
    LinearInfluence,
    OutcomeSpec,
    ZeroInfluence,
)

pytestmark = pytest.mark.filterwarnings("ignore::UserWarning")


def small_config(**overrides):
    base = dict(
        graphon=GraphonSpec.homophily(),
        outcome=OutcomeSpec(
            beta=[1.0],
            influence=LinearInfluence(slope=2.0),
            covariate_mean=CovariateMean.linear([0.0], [1.0]),
            noise_sd=0.5,
        ),
        sample_sizes=(60, 120),
        replications=3,
        kernel="auto",
        base_seed=7,
        checks=("consistency_beta", "consistency_lambda"),
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def test_derived_seeds_are_stable_and_distinct():
    seed = derive_seed(7, "consistency", 100, 3)
    assert seed == derive_seed(7, "consistency", 100, 3)
    others = {
        derive_seed(7, "consistency", 100, 4),
        derive_seed(7, "consistency", 200, 3),
        derive_seed(7, "uniform_delta", 100, 3),
        derive_seed(8, "consistency", 100, 3),
    }
    assert seed not in others and len(others) == 4


def test_medians_decreasing_rule():
    assert medians_decreasing([3.0, 2.0, 1.0], replications=50)
    assert not medians_decreasing([3.0, 2.0, 2.5], replications=50)
    assert medians_decreasing([3.0, 2.0, 2.5, 1.0], replications=10)  # one inversion, few reps
    assert not medians_decreasing([3.0, 3.5, 2.5, 2.6], replications=10)
    assert medians_decreasing([0.0, 0.0, 0.0], replications=50)  # converged exactly


def test_config_validation():
    with pytest.raises(InputDataError, match="increasing"):
        small_config(sample_sizes=(100, 100))
    with pytest.raises(InputDataError, match="replications"):
        small_config(replications=0)
    with pytest.raises(InputDataError, match="checks"):
        small_config(checks=("consistency_beta", "mystery"))
    with pytest.raises(InputDataError, match="kernel"):
        small_config(kernel="adaptive")
    with pytest.raises(InputDataError, match="threads"):
        small_config(threads=0)


def test_config_json_round_trip():
    config = small_config(kernel=KernelSpec(kernel="boxcar", bandwidth=0.05, gamma_rate=2.0))
    again = ExperimentConfig.from_json_dict(config.to_json_dict())
    assert again.sample_sizes == config.sample_sizes
    assert again.kernel == config.kernel
    assert again.checks == config.checks
    assert again.base_seed == config.base_seed


def test_consistency_records_and_reproducibility():
    config = small_config()
    first = run_consistency(config)
    second = run_consistency(config)
    assert [r.check for r in first] == ["consistency_beta", "consistency_lambda"]
    for a, b in zip(first, second):
        assert a.medians == b.medians
        assert [rec.values for rec in a.records] == [rec.values for rec in b.records]
        assert all(np.isfinite(list(rec.values.values())).all() for rec in a.records)


def test_thread_count_does_not_change_results():
    serial = run_consistency(small_config(threads=1))
    threaded = run_consistency(small_config(threads=4))
    for a, b in zip(serial, threaded):
        assert [rec.values for rec in a.records] == [rec.values for rec in b.records]


def test_noiseless_design_is_exact_at_every_size():
    config = small_config(
        outcome=OutcomeSpec(
            beta=[1.0],
            influence=ZeroInfluence(),
            covariate_mean=CovariateMean.linear([0.0], [1.0]),
            noise_sd=0.0,
        ),
        replications=2,
    )
    for result in run_consistency(config):
        assert result.passed
        assert all(v <= 1e-10 for v in result.medians.values())


def test_uniform_delta_metrics():
    result = run_uniform_delta(small_config(checks=("uniform_delta",), replications=2))
    assert result.metric == "delta_max_error"
    assert set(result.medians) == {60, 120}
    assert all(0 < v < 1 for v in result.medians.values())


def test_uniform_delta_constant_graphon_reports_max_empirical_distance():
    # population distances vanish, so the statistic is just max over pairs of
    # the empirical distance
    from netmatch import codegree_distance_matrix, draw_sample

    config = small_config(
        graphon=GraphonSpec.blockmodel([[0.5]]), checks=("uniform_delta",), replications=1,
        sample_sizes=(40, 80),
    )
    result = run_uniform_delta(config)
    record = next(r for r in result.records if r.n == 40)
    sample = draw_sample(config.graphon, config.outcome, 40, record.seed)
    delta = codegree_distance_matrix(sample.adjacency)
    assert record.values["delta_max_error"] == pytest.approx(float(delta.max()), abs=1e-15)


def test_uniform_delta_sparse_smoke():
    config = small_config(
        graphon=GraphonSpec.homophily(sparsity_scale=0.3),
        checks=("uniform_delta",), replications=1, sample_sizes=(50, 100),
    )
    result = run_uniform_delta(config)
    assert all(np.isfinite(v) for v in result.medians.values())


def test_identification_requires_blockmodel():
    with pytest.raises(InputDataError, match="blockmodel"):
        run_identification_check(small_config(checks=("identification",)))


def test_identification_exact_without_noise():
    config = small_config(
        graphon=GraphonSpec.blockmodel([[0.9, 0.2], [0.2, 0.7]]),
        outcome=OutcomeSpec(
            beta=[1.0],
            influence=BlockLevelInfluence(levels=[2.0, -1.0]),
            covariate_mean=CovariateMean.linear([0.0], [1.0]),
            noise_sd=0.0,
        ),
        checks=("identification",),
        sample_sizes=(40, 80),
        replications=2,
    )
    beta_result, influence_result = run_identification_check(config)
    assert beta_result.metric == "tie_beta_abs_error"
    assert influence_result.metric == "tie_influence_max_error"
    for result in (beta_result, influence_result):
        assert result.passed
        assert all(v <= 1e-10 for v in result.medians.values())


def test_bound_sweep_homophily_and_blockmodel():
    config = small_config(
        checks=("contraction", "inversion"), bound_grid_side=30, bound_random_pairs=100
    )
    contraction, inversion = run_bound_sweep(config)
    assert contraction.passed and contraction.medians[30 * 30 + 100] == 0.0
    assert inversion.passed and "alpha=1.0" in inversion.note

    blocky = small_config(
        graphon=GraphonSpec.blockmodel([[0.8, 0.2], [0.2, 0.6]]),
        checks=("contraction", "inversion"), bound_grid_side=20, bound_random_pairs=50,
    )
    contraction_b, inversion_b = run_bound_sweep(blocky)
    assert contraction_b.passed
    assert inversion_b.passed and "not certified" in inversion_b.note


def test_estimation_failures_surface_as_config_error():
    config = small_config(
        kernel=KernelSpec(kernel="boxcar", bandwidth=1e-12),
        sample_sizes=(30, 60),
        replications=3,
    )
    with pytest.raises(InputDataError, match="replications"):
        run_consistency(config)


def test_run_experiment_report_shape():
    config = small_config(
        checks=("consistency_beta", "contraction"), bound_grid_side=20, bound_random_pairs=50,
        replications=2,
    )
    report = run_experiment(config)
    assert {r.check for r in report.results} == {"consistency_beta", "contraction"}
    rows = list(report.raw_rows())
    assert all(len(row) == 6 for row in rows)
    aggregates = list(report.aggregate_rows())
    assert any(row[0] == "consistency_beta" for row in aggregates)
    summary = report.summary_lines()
    assert any(line.startswith("[PASS]") or line.startswith("[FAIL]") for line in summary)
    assert summary[-1].startswith("overall:")
    assert np.isfinite(report.runtime_seconds)
