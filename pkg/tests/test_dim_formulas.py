import itertools
import math

import numpy as np
import pytest

from safd import build_model
from safd.dim_formulas import (
    affinity_dimension,
    f_phi,
    fJ_max_oracle,
    fj_upper_bound_check,
    full_dimension_vectors,
    lyapunov_dim_root,
    lyapunov_dimension,
    lyapunov_profile,
    permutation_weights,
    singular_value_sigma,
)
from safd.errors import PreconditionViolated
from safd.types import LyapunovProfile
from tests.common import MODELS, load_data, random_model

PROFILES: tuple[LyapunovProfile, ...] = (
    LyapunovProfile(chi=(1.0,)),
    LyapunovProfile(chi=(1.0, 2.0)),
    LyapunovProfile(chi=(0.5, 0.75, 3.0)),
    LyapunovProfile(chi=(2.0, 2.0)),
)


def test_dimensions_data():
    for name, expected in load_data("dimensions").items():
        model = MODELS[name]
        assert lyapunov_dimension(model) == pytest.approx(
            expected["lyapunov_dimension"], abs=1e-12
        ), name
        assert affinity_dimension(model.ifs).value == pytest.approx(
            expected["affinity_dimension"], abs=1e-9
        ), name


def test_f_phi_breakpoints():
    for profile in PROFILES:
        for j, x in enumerate(profile.prefix_sums):
            assert f_phi(profile, x) == pytest.approx(j), (profile, j)


def test_f_phi_is_increasing_and_continuous():
    for profile in PROFILES:
        xs = np.linspace(0.0, 1.5 * profile.prefix_sums[-1], 400)
        values = [f_phi(profile, x) for x in xs]
        assert all(b > a for a, b in itertools.pairwise(values)), profile
        steps = np.diff(values)
        assert steps.max() <= (xs[1] - xs[0]) / min(profile.chi) + 1e-12, profile


def test_f_phi_past_last_breakpoint():
    profile = LyapunovProfile(chi=(1.0, 2.0))
    assert f_phi(profile, 6.0) == pytest.approx(4.0)


def test_lyapunov_routes_agree():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        d = int(rng.integers(1, 4))
        model = random_model(rng, d=d, m=int(rng.integers(2, 6)))
        assert lyapunov_dim_root(model) == pytest.approx(
            lyapunov_dimension(model), abs=1e-9
        )


def test_lyapunov_root_on_fixtures():
    for name, model in MODELS.items():
        assert lyapunov_dim_root(model) == pytest.approx(
            lyapunov_dimension(model), abs=1e-9
        ), name


def test_singular_value_sigma():
    ifs = MODELS["homogeneous3"].ifs
    assert singular_value_sigma(ifs, (0, 1), 1.5, 0) == pytest.approx(0.5 * 0.25**0.5)
    assert singular_value_sigma(ifs, (1, 0), 1.5, 0) == pytest.approx(0.25 * 0.5**0.5)
    assert singular_value_sigma(ifs, (0, 1), 4.0, 2) == pytest.approx((0.5 * 0.25) ** 2)
    with pytest.raises(PreconditionViolated):
        singular_value_sigma(ifs, (0, 0), 1.0, 0)


def test_permutation_weights_match_sigma():
    ifs = MODELS["example_ab"].ifs
    for s in (0.0, 0.4, 1.0, 1.7, 2.5):
        for pw in permutation_weights(ifs, s):
            expected = [singular_value_sigma(ifs, pw.sigma, s, i) for i in range(ifs.size)]
            assert pw.values == pytest.approx(expected), (s, pw.sigma)


def test_affinity_dimension_root():
    for name in ("mcmullen", "example_ab", "homogeneous3", "swapped"):
        dim_a = affinity_dimension(MODELS[name].ifs)
        assert dim_a.residual < 1e-9, name
        assert dim_a.maximizers, name
        totals = max(pw.total for pw in permutation_weights(MODELS[name].ifs, dim_a.value))
        assert totals == pytest.approx(1.0, abs=1e-9), name


def test_lyapunov_at_most_affinity():
    rng = np.random.default_rng(5)
    for _ in range(50):
        model = random_model(rng, d=2, m=int(rng.integers(2, 5)))
        assert lyapunov_dimension(model) <= affinity_dimension(model.ifs).value + 1e-9


def test_full_dimension_vectors():
    for name in ("swapped", "example_ab", "mcmullen"):
        model = MODELS[name]
        dim_a = affinity_dimension(model.ifs).value
        vectors = full_dimension_vectors(model.ifs)
        assert vectors, name
        for v in vectors:
            assert sum(v.p) == pytest.approx(1.0, abs=1e-9), name
            assert v.lyapunov_dimension == pytest.approx(dim_a, abs=1e-9), name
            assert v.distinct_exponents, name


def test_full_dimension_vectors_swapped_has_both_orders():
    vectors = full_dimension_vectors(MODELS["swapped"].ifs)
    assert {v.sigma for v in vectors} == {(0, 1), (1, 0)}
    assert affinity_dimension(MODELS["swapped"].ifs).value < 1


def test_fj_max_oracle():
    for profile in PROFILES[:3]:
        for x in np.linspace(0.0, profile.prefix_sums[-1], 9, endpoint=False):
            best = fJ_max_oracle(profile, float(x))
            assert best.value == pytest.approx(f_phi(profile, float(x)), abs=1e-9), (profile, x)
            assert best.grid_value <= best.value + 1e-12
            assert sum(best.argmax) <= x + 1e-12


def test_fj_max_oracle_precondition():
    profile = LyapunovProfile(chi=(1.0, 2.0))
    with pytest.raises(PreconditionViolated):
        fJ_max_oracle(profile, 4.0)


def test_fj_upper_bound():
    for profile in PROFILES:
        for x in np.linspace(0.0, 2 * profile.prefix_sums[-1], 13):
            for m in range(profile.d):
                lhs, rhs, holds = fj_upper_bound_check(profile, float(x), m)
                assert holds, (profile, x, m, lhs, rhs)


def test_restricted_profile():
    model = MODELS["mcmullen"]
    profile = lyapunov_profile(model)
    second = profile.restricted((1,))
    assert second.chi == (math.log2(3),)
    assert second.coords == (1,)


def test_single_map_has_dimension_zero():
    model = build_model({"maps": [{"r": ["1/2", "1/3"], "t": ["0", "0"]}]})
    assert lyapunov_dimension(model) == 0.0
    assert affinity_dimension(model.ifs).value == 0.0
