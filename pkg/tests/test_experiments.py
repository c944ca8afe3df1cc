import math

import pytest

from safd import load_model
from safd.errors import BadTranslations, ConfigError, HypothesisViolated
from safd.experiments import (
    EXPERIMENTS,
    run_counterexample,
    run_entropy_increase,
    run_experiment,
    run_full_dim_measures,
    run_main_theorem_check,
    run_superexp_concentration,
    run_typical_sweep,
)
from safd.types import ExperimentConfig, VerdictStatus
from tests.common import MODELS


def test_experiment_names():
    assert set(EXPERIMENTS) == {
        "counterexample",
        "main-theorem",
        "full-dim",
        "typical",
        "entropy-increase",
        "superexp",
    }


def test_full_dim_measures():
    report = run_full_dim_measures(MODELS["swapped"])
    assert report.passed
    table = report.table("full_dimension")
    assert {row[0] for row in table.rows} == {"1,2", "2,1"}
    assert len(report.verdicts) == 5
    assert report.verdicts[0].status is VerdictStatus.OBSERVATION


def test_full_dim_needs_a_planar_carpet():
    with pytest.raises(HypothesisViolated):
        run_full_dim_measures(MODELS["cantor"])


def test_main_theorem_hypotheses():
    with pytest.raises(HypothesisViolated) as info:
        run_main_theorem_check(MODELS["swapped"], samples=1000)
    assert "chi" in info.value.details
    with pytest.raises(HypothesisViolated) as info:
        run_main_theorem_check(MODELS["overlap"], samples=1000)
    assert info.value.details["overlaps"] == [(1, 2)]


def test_main_theorem_is_seeded():
    first = run_main_theorem_check(MODELS["mcmullen"], samples=20_000, seed=3, levels=(3, 6))
    again = run_main_theorem_check(MODELS["mcmullen"], samples=20_000, seed=3, levels=(3, 6), workers=2)
    assert first.to_json() == again.to_json()
    assert first.table("separation").rows[0][5] is True


@pytest.mark.slow
@pytest.mark.parametrize(
    "name, expected",
    [("cantor", math.log2(2) / math.log2(3)), ("mcmullen", 1.0), ("example_ab", None)],
)
def test_main_theorem_reproduction(name, expected):
    report = run_main_theorem_check(MODELS[name], samples=1_000_000, seed=0)
    assert report.passed, report.failures
    dims = dict(report.table("dimensions").rows)
    if expected is not None:
        assert dims["min_d_lyapunov_dimension"] == pytest.approx(expected, abs=1e-9)
    assert abs(dims["entropy_dimension"] - dims["min_d_lyapunov_dimension"]) <= 0.1


def test_counterexample_hypotheses():
    with pytest.raises(HypothesisViolated):
        run_counterexample("3/4", 3)
    with pytest.raises(HypothesisViolated):
        run_counterexample("1/2", 4)


@pytest.mark.slow
def test_counterexample():
    report = run_counterexample("3/4", 4, samples=200_000, seed=0)
    structure = report.verdicts[:3]
    assert all(v.status is VerdictStatus.PASS for v in structure), structure
    assert report.passed, report.failures
    dims = dict(report.table("dimensions").rows)
    assert dims["upper_bound"] < dims["min_d_lyapunov_dimension"] == 2.0


def test_typical_sweep_validation():
    with pytest.raises(BadTranslations):
        run_typical_sweep(((0, 0), (1, 0)), trials=0)
    report = run_typical_sweep(trials=0)
    assert report.verdicts == ()
    assert report.table("trials").rows == ()


def test_typical_sweep_is_seeded():
    kwargs = dict(trials=2, seed=7, samples=10_000)
    first = run_typical_sweep(**kwargs)
    assert first.to_json() == run_typical_sweep(**kwargs).to_json()
    assert len(first.table("trials").rows) == 2
    assert first.verdicts[0].sample_size == 2


def test_entropy_increase():
    report = run_entropy_increase(
        MODELS["mcmullen"], N=2, n=2, samples=20_000, seed=0, eps=1.0, draws=2
    )
    assert report.passed, report.failures
    assert [v.status for v in report.verdicts] == [VerdictStatus.PASS] * 2
    rows = report.table("gaps").rows
    assert len(rows) == 2
    assert len(report.table("self_convolution").rows) == 8
    assert all(gap > 0 for *_, gap in rows)
    # the box covers 2 x 2 cells of E_2, one bit per block
    assert all(h_theta == pytest.approx(1.0, abs=0.02) for _, _, h_theta, *_ in rows)
    # μ alone sits in 16 cells: two bits per block
    assert all(h_mu == pytest.approx(2.0, abs=0.01) for _, _, _, h_mu, *_ in rows)


def test_entropy_increase_grows_with_eps():
    small, large = (
        run_entropy_increase(MODELS["mcmullen"], N=2, n=2, samples=20_000, seed=3, eps=eps, draws=1)
        for eps in (0.5, 2.0)
    )
    assert small.table("gaps").rows[0][2] < large.table("gaps").rows[0][2]
    assert 0 < small.table("gaps").rows[0][-1] < large.table("gaps").rows[0][-1]


def test_entropy_increase_against_a_point_mass():
    report = run_entropy_increase(
        MODELS["mcmullen"], N=2, n=2, samples=5000, seed=0, theta="point", draws=2
    )
    assert all(gap == 0 for *_, gap in report.table("gaps").rows)
    assert all(row[2] == 0 for row in report.table("gaps").rows)
    assert report.verdicts[1].status is VerdictStatus.OBSERVATION
    with pytest.raises(ConfigError):
        run_entropy_increase(MODELS["mcmullen"], theta="gaussian")
    with pytest.raises(ConfigError):
        run_entropy_increase(MODELS["mcmullen"], eps=0.0)


def test_superexp_concentration():
    flat = run_superexp_concentration(MODELS["example_ab"], N=2, M=1, n_max=3, seed=0)
    assert [row[2] for row in flat.table("concentration").rows] == [0.0] * 3
    report = run_superexp_concentration(MODELS["example_ab"], N=2, M=2, n_max=3, seed=0)
    assert report.passed
    assert all(v.status is VerdictStatus.OBSERVATION for v in report.verdicts)
    assert all(row[2] >= 0 for row in report.table("concentration").rows)


def test_run_experiment():
    report = run_experiment(ExperimentConfig(experiment="full-dim", seed=0))
    assert report.seed == 0
    assert report.config["experiment"] == "full-dim"
    assert report.config["details"] == {"model": "swapped"}
    assert "workers" not in report.config
    assert report.config["eps"] == 1.0
    with pytest.raises(ConfigError):
        run_experiment(ExperimentConfig(experiment="nope", seed=0))


def test_experiment_config_from_dict():
    config = ExperimentConfig.from_dict({"experiment": "superexp", "seed": 1, "unused": True}, n=2)
    assert config.n == 2
    assert config.model is None
    with pytest.raises(ConfigError):
        ExperimentConfig(experiment="counterexample", seed=0, lam="three quarters")
    with pytest.raises(ConfigError):
        ExperimentConfig(experiment="typical", seed=0, levels=(5, 5))


def test_config_model_override():
    report = run_experiment(ExperimentConfig(experiment="superexp", seed=0, model="mcmullen", n=2))
    assert report.config["details"]["model"] == load_model("mcmullen").name
