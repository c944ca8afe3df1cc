import collections
import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from safd.disintegration import (
    build_gamma,
    convolution_check,
    h_rw_closed_form,
    h_rw_finite,
    kappa_estimate,
    nonconformal_key,
    nonconformal_partition,
    nu_omega_n,
    omega_scale,
    reduction_bound,
    sample_beta_omega_word,
    sample_mu_omega,
    sample_omega,
)
from safd import build_model, load_model
from safd.errors import BudgetExceeded, DimensionMismatch
from safd.ifs_core import counterexample_ifs, shannon_entropy
from safd.types import Granularity, NumberMode, NuMode, OmegaPrefix, OmegaScale
from tests.common import MODELS

SWAPPED = MODELS["swapped"]
CANTOR = MODELS["cantor"]


def test_gamma_groups_by_linear_part():
    gamma = build_gamma(SWAPPED, N=2)
    assert [c.words for c in gamma] == [((0, 0),), ((0, 1), (1, 0)), ((1, 1),)]
    assert [c.mass for c in gamma] == [Fraction(1, 4), Fraction(1, 2), Fraction(1, 4)]
    assert gamma.classes[1].linear_part == (Fraction(1, 6), Fraction(1, 6))
    assert gamma.class_of((1, 0)) == 1
    assert gamma.classes[1].conditional == (0.5, 0.5)
    assert not gamma.is_trivial


def test_gamma_granularity():
    assert len(build_gamma(SWAPPED, N=2, granularity=Granularity.WORD)) == 4
    assert build_gamma(CANTOR, N=3).is_trivial
    assert build_gamma(MODELS["homogeneous3"], N=2).masses == pytest.approx((1.0,))


def test_gamma_masses_sum_to_one():
    for name in ("example_ab", "mcmullen", "swapped", "homogeneous3"):
        for N in (1, 2, 3):
            gamma = build_gamma(MODELS[name], N)
            assert sum(c.mass for c in gamma) == 1, (name, N)


def test_gamma_budget():
    with pytest.raises(BudgetExceeded):
        build_gamma(MODELS["remark13"], N=6, budget=10_000)


def test_float_rates_are_grouped():
    exact = build_gamma(MODELS["example_ab"], N=2)
    floats = build_gamma(load_model("example_ab", exact=False), N=2)
    assert floats.mode is NumberMode.FLOAT
    assert [c.words for c in floats] == [c.words for c in exact]


def test_sample_omega_frequencies():
    gamma = build_gamma(SWAPPED, N=2)
    omega = sample_omega(gamma, 20_000, seed=0)
    counts = np.bincount(omega.classes, minlength=3) / len(omega)
    assert counts == pytest.approx([0.25, 0.5, 0.25], abs=0.02)
    assert sample_omega(gamma, 50, seed=1) == sample_omega(gamma, 50, seed=1)


def test_omega_prefix_ops():
    omega = OmegaPrefix.of([2, 0, 1, 1])
    assert omega.head(2) == OmegaPrefix((2, 0))
    assert omega.shift(3) == OmegaPrefix((1,))
    assert omega.head(2) + omega.shift(2) == omega


def test_beta_omega_words_respect_classes():
    gamma = build_gamma(SWAPPED, N=2)
    omega = OmegaPrefix.of([1, 0, 1, 2, 1])
    for seed in range(10):
        word = sample_beta_omega_word(gamma, omega, seed)
        assert len(word) == 10
        blocks = [word[2 * k : 2 * k + 2] for k in range(5)]
        assert [gamma.class_of(b) for b in blocks] == list(omega.classes)
    assert sample_beta_omega_word(gamma, omega, 3) == sample_beta_omega_word(gamma, omega, 3)


def test_nu_for_cantor():
    gamma = build_gamma(CANTOR, N=1)
    nu = nu_omega_n(CANTOR, gamma, OmegaPrefix.of([0, 0]), 2)
    assert nu.exact_points == tuple(
        (Fraction(x),) for x in ("0", "2/9", "2/3", "8/9")
    )
    assert nu.weights.tolist() == [0.25] * 4
    assert nu.labels == ((0, 0), (0, 1), (1, 0), (1, 1))


def test_nu_weights_are_conditional():
    model = MODELS["example_ab"]
    gamma = build_gamma(model, N=2)
    omega = OmegaPrefix.of([1, 1])
    nu = nu_omega_n(model, gamma, omega, 2)
    assert nu.n_atoms == 4
    # class 1 holds 01 and 10, each with mass 2/9
    assert nu.weights == pytest.approx([0.25] * 4)
    nu = nu_omega_n(model, gamma, OmegaPrefix.of([0, 2]), 2)
    assert nu.n_atoms == 1


def test_nu_edge_cases():
    gamma = build_gamma(SWAPPED, N=2)
    point = nu_omega_n(SWAPPED, gamma, OmegaPrefix(), 0)
    assert point.n_atoms == 1
    assert point.exact_points == ((Fraction(0), Fraction(0)),)
    with pytest.raises(DimensionMismatch):
        nu_omega_n(SWAPPED, gamma, OmegaPrefix.of([1]), 2)
    with pytest.raises(BudgetExceeded):
        nu_omega_n(SWAPPED, gamma, OmegaPrefix.of([1] * 6), 6, budget=32)
    sampled = nu_omega_n(
        SWAPPED, gamma, OmegaPrefix.of([1] * 6), 6, mode=NuMode.SAMPLED, n_samples=500, seed=0
    )
    assert sampled.n_atoms == 500
    assert sampled.exact_points is None


def test_omega_scale():
    gamma = build_gamma(SWAPPED, N=2)
    omega = OmegaPrefix.of([0, 1, 2])
    scale = omega_scale(gamma, omega)
    assert scale.rates == (Fraction(1, 4 * 6 * 9), Fraction(1, 9 * 6 * 4))
    assert omega_scale(gamma, omega, 0) == OmegaScale.identity(2)
    r_min, r_max = SWAPPED.ifs.r_min, SWAPPED.ifs.r_max
    rng = np.random.default_rng(0)
    for n in range(1, 8):
        omega = sample_omega(gamma, n, seed=int(rng.integers(1 << 30)))
        for lam in omega_scale(gamma, omega).scales:
            assert r_min ** (2 * n) <= lam <= r_max ** (2 * n)


def test_nonconformal_key():
    scale = OmegaScale((Fraction(1, 6), Fraction(1, 6)))
    assert nonconformal_key(scale, (0.2, 0.9)).index == (1, 5)
    assert nonconformal_key(scale, (Fraction(1, 3), Fraction(1, 2))).index == (2, 3)
    with pytest.raises(DimensionMismatch):
        nonconformal_key(scale, (0.1,))


def test_nonconformal_partition_exact_and_float_agree():
    gamma = build_gamma(CANTOR, N=1)
    omega = OmegaPrefix.of([0] * 6)
    nu = nu_omega_n(CANTOR, gamma, omega, 4)
    for n in (1, 2, 3):
        scale = omega_scale(gamma, omega, n)
        assert nonconformal_partition(nu, scale).n_blocks == 2**n
    # 2/3 is twice 1/3 in binary64 too, so the first level has no rounding at its cell edges
    scale = omega_scale(gamma, omega, 1)
    exact = nonconformal_partition(nu, scale)
    floats = nonconformal_partition(nu.scaled((1.0,)), scale)
    assert np.array_equal(exact.blocks, floats.blocks)


def test_h_rw_swapped():
    gamma = build_gamma(SWAPPED, N=2)
    assert h_rw_finite(SWAPPED, gamma, 1) == pytest.approx(0.25, abs=1e-12)
    assert h_rw_finite(SWAPPED, gamma, 2) == pytest.approx(0.25, abs=1e-12)
    assert h_rw_closed_form(SWAPPED, gamma) == pytest.approx(0.25, abs=1e-12)


def test_h_rw_homogeneous():
    model = MODELS["homogeneous3"]
    gamma = build_gamma(model, N=1)
    assert h_rw_finite(model, gamma, 3) == pytest.approx(math.log2(3), abs=1e-12)
    assert h_rw_closed_form(model, gamma) == pytest.approx(shannon_entropy(model.p))


def test_h_rw_word_granularity_is_zero():
    gamma = build_gamma(MODELS["mcmullen"], N=2, granularity=Granularity.WORD)
    assert h_rw_finite(MODELS["mcmullen"], gamma, 1) == pytest.approx(0.0, abs=1e-12)
    assert h_rw_closed_form(MODELS["mcmullen"], gamma) == pytest.approx(0.0, abs=1e-12)


def test_h_rw_sees_overlaps():
    model = MODELS["overlap"]
    gamma = build_gamma(model, N=1)
    h = [h_rw_finite(model, gamma, n) for n in (1, 2, 3)]
    assert h[0] == pytest.approx(math.log2(3))
    assert h[1] < math.log2(3) - 0.05
    # n h_n is subadditive
    assert 2 * h[1] <= 2 * h[0] + 1e-12
    assert 3 * h[2] <= h[0] + 2 * h[1] + 1e-12


def test_h_rw_budget():
    model = MODELS["example_ab"]
    gamma = build_gamma(model, N=2)
    with pytest.raises(BudgetExceeded):
        h_rw_finite(model, gamma, 3, budget=32)
    assert h_rw_finite(model, gamma, 3, budget=32, no_overlaps=True) == h_rw_closed_form(model, gamma)


def test_reduction_bound():
    for name in ("example_ab", "mcmullen", "swapped"):
        model = MODELS[name]
        for N in (2, 3, 4, 6):
            gamma = build_gamma(model, N)
            coarse, exact = reduction_bound(model, N, gamma)
            drop = shannon_entropy(model.p) - h_rw_closed_form(model, gamma)
            assert 0 <= drop + 1e-12
            assert drop <= exact + 1e-12 <= coarse + 2e-12, (name, N)


def test_kappa():
    model = MODELS["mcmullen"]
    full = kappa_estimate(model, 2.0)
    assert full.kappa == pytest.approx(1 + math.log2(3))
    assert full.predicted_dim is None
    est = kappa_estimate(model, 1.0, h_rw=1.0)
    assert est.kappa == pytest.approx(1.0)
    assert est.predicted_dim == pytest.approx(1.0)
    assert est.predicted_kappa == pytest.approx(1.0)
    saturated = kappa_estimate(model, 1.5, h_rw=10.0)
    assert saturated.predicted_dim == 2.0


def test_sample_mu_omega():
    gamma = build_gamma(SWAPPED, N=2)
    omega = OmegaPrefix.of([1, 1, 0])
    a = sample_mu_omega(SWAPPED, gamma, omega, 3000, depth=30, seed=5, chunk=1000)
    b = sample_mu_omega(SWAPPED, gamma, omega, 3000, depth=30, seed=5, chunk=1000, workers=2)
    assert np.array_equal(a.points, b.points)
    assert a.n_atoms == 3000
    assert (a.points >= 0).all() and (a.points <= 2).all()


def test_remark_system_is_the_counterexample():
    assert MODELS["remark13"].ifs == counterexample_ifs("3/4", 4)


def test_convolution_identity():
    gamma = build_gamma(SWAPPED, N=2)
    check = convolution_check(
        SWAPPED, gamma, OmegaPrefix.of([1, 0]), n=2, samples=20_000, seed=0, levels=range(2, 7), tolerance=0.1
    )
    assert check.exact_nu
    assert check.passed, check.levels
    assert check.sliced_distance < 0.02
    assert len(check.levels) == 5


def test_convolution_identity_with_sampled_nu():
    gamma = build_gamma(SWAPPED, N=2)
    check = convolution_check(
        SWAPPED, gamma, None, n=3, samples=20_000, seed=1, levels=range(2, 7), tolerance=0.1, budget=0
    )
    assert not check.exact_nu
    assert check.passed, check.levels


MIXED = build_model(
    {
        "maps": [
            {"r": ["1/2", "1/3"], "t": ["0", "0"]},
            {"r": ["1/2", "1/3"], "t": ["1/2", "2/3"]},
            {"r": ["1/3", "1/2"], "t": ["1", "1"]},
        ],
        "p": ["1/6", "1/2", "1/3"],
    },
    name="mixed",
)


def within_binomial(count: int, total: int, prob: float, sigmas: float = 5.0) -> bool:
    return abs(count / total - prob) <= sigmas * math.sqrt(prob * (1 - prob) / total) + 1e-12


def test_class_paths_of_bernoulli_words():
    gamma = build_gamma(MIXED, N=2)
    assert [c.words for c in gamma][2] == ((2, 2),)
    rng = np.random.default_rng(0)
    total = 40_000
    words = rng.choice(3, size=(total, 4), p=MIXED.probabilities)
    paths = collections.Counter(
        (gamma.class_of(tuple(w[:2])), gamma.class_of(tuple(w[2:]))) for w in words.tolist()
    )
    for path in itertools.product(range(len(gamma)), repeat=2):
        prob = math.prod(float(gamma.classes[c].mass) for c in path)
        assert within_binomial(paths[path], total, prob), (path, paths[path])


def test_mixing_beta_omega_over_omega_gives_back_bernoulli():
    gamma = build_gamma(MIXED, N=2)
    blocks = 20_000
    omega = sample_omega(gamma, blocks, seed=1)
    word = np.asarray(sample_beta_omega_word(gamma, omega, seed=2)).reshape(blocks, 2)
    p = MIXED.probabilities
    singles = collections.Counter(map(tuple, word.tolist()))
    for u in itertools.product(range(3), repeat=2):
        assert within_binomial(singles[u], blocks, p[u[0]] * p[u[1]]), (u, singles[u])
    pairs = collections.Counter(map(tuple, word.reshape(blocks // 2, 4).tolist()))
    for u in itertools.product(range(3), repeat=4):
        prob = math.prod(p[i] for i in u)
        assert within_binomial(pairs[u], blocks // 2, prob), (u, pairs[u])


def test_dropping_the_first_block_shifts_omega():
    gamma = build_gamma(MIXED, N=1)
    omega = OmegaPrefix.of([1, 0, 0])
    shifted = nu_omega_n(MIXED, gamma, omega.shift(), 2)
    assert shifted.weights.tolist() == [1 / 16, 3 / 16, 3 / 16, 9 / 16]
    total = 4000
    words = [sample_beta_omega_word(gamma, omega, seed) for seed in range(total)]
    assert all(w[0] == 2 for w in words)
    tails = collections.Counter(w[1:] for w in words)
    assert set(tails) <= set(shifted.labels)
    for label, prob in zip(shifted.labels, shifted.weights):
        assert within_binomial(tails[label], total, prob), (label, tails[label])


@pytest.mark.slow
@pytest.mark.parametrize("name", ["cantor", "mcmullen", "example_ab"])
@pytest.mark.parametrize("N", [1, 2])
@pytest.mark.parametrize("n", [1, 3])
def test_convolution_identity_on_fixtures(name, N, n):
    model = MODELS[name]
    check = convolution_check(model, build_gamma(model, N), None, n=n, samples=100_000, seed=0)
    assert [row[0] for row in check.levels] == list(range(2, 11))
    assert check.tolerance == 0.05
    assert check.passed, check.levels
