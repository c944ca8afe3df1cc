"""
Disintegration by linear parts: the partition ``Γ`` of level-``N`` words, the random product measures
``β^ω`` and self-affine measures ``μ^ω`` it induces, the atomic measures ``ν^ω_n``, the nonconformal
partitions ``E^ω_n``, the convolution identity ``μ^ω = ν^ω_n * A^{ω|n} μ^{T^n ω}`` and the entropy
``h_RW`` of the random walk conditioned on its linear parts.
"""

from __future__ import annotations

__all__ = [
    "build_gamma",
    "sample_omega",
    "sample_beta_omega_word",
    "sample_mu_omega",
    "nu_omega_n",
    "omega_scale",
    "nonconformal_key",
    "nonconformal_partition",
    "convolution_check",
    "h_rw_finite",
    "h_rw_closed_form",
    "reduction_bound",
    "kappa_estimate",
]

import logging
import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from safd import utils
from safd.dim_formulas import f_phi, lyapunov_profile
from safd.errors import BudgetExceeded, DimensionMismatch
from safd.ifs_core import compose_word, level_maps, shannon_entropy
from safd.measure_lab import (
    check_depth,
    dyadic_entropy,
    float_params,
    required_depth,
    sample_codings,
    sliced_wasserstein,
)
from safd.types.disintegration import (
    ConvolutionCheck,
    GammaClass,
    GammaPartition,
    Granularity,
    KappaEstimate,
    NuMode,
    OmegaPrefix,
    OmegaScale,
)
from safd.types.ifs import ComposedMap, NumberMode, Scalar, WeightedModel, Word
from safd.types.measures import AnisotropicKey, DiscreteMeasure, FinitePartitionView

_logger = logging.getLogger(__name__)

_RATE_DIGITS = 12
_CONVOLUTION_LEVELS = tuple(range(2, 11))
_CONVOLUTION_TOLERANCE = 0.05


def _rate_key(rates: Sequence[Scalar], mode: NumberMode) -> tuple:
    if mode is NumberMode.EXACT:
        return tuple(rates)
    return tuple(float(f"{r:.{_RATE_DIGITS}g}") for r in rates)


def build_gamma(
    model: WeightedModel,
    N: int,
    granularity: Granularity = Granularity.LINEAR,
    budget: int = utils.DEFAULT_BUDGET,
) -> GammaPartition:
    """
    Group the level-``N`` words by their composed linear part (or keep every word apart).

    Class ids follow the first appearance of a class in lexicographic word order. In float mode rates are
    compared after rounding to 12 significant digits.

    Example:

        >>> gamma = build_gamma(load_model("swapped"), N=2)
        >>> [c.words for c in gamma]
        [((0, 0),), ((0, 1), (1, 0)), ((1, 1),)]

    Args:
        model: The weighted system.
        N: The block length.
        granularity: ``LINEAR`` (the partition by linear part) or ``WORD`` (the finest partition).
        budget: Cap on ``|Λ|^N``.

    Raises:
        BudgetExceeded: ``|Λ|^N`` is above ``budget``.
    """
    if N < 1:
        raise DimensionMismatch(f"The block length must be positive, got {N}.")
    p = model.p
    grouped: dict[tuple, list[tuple[ComposedMap, Scalar]]] = {}
    for m in level_maps(model.ifs, N, budget):
        key = m.word if granularity is Granularity.WORD else _rate_key(m.rates, model.mode)
        mass = math.prod((p[i] for i in m.word), start=model.mode.coerce(1))
        grouped.setdefault(key, []).append((m, mass))
    classes = tuple(
        GammaClass(
            id=cid,
            linear_part=tuple(members[0][0].rates),
            words=tuple(m.word for m, _ in members),
            word_masses=tuple(w for _, w in members),
            mass=sum((w for _, w in members), start=model.mode.coerce(0)),
        )
        for cid, members in enumerate(grouped.values())
    )
    _logger.debug("Built Γ of %d classes at N=%d (%s)", len(classes), N, granularity)
    return GammaPartition(N=N, granularity=granularity, classes=classes, mode=model.mode)


def sample_omega(
    gamma: GammaPartition, n: int, seed: int | Sequence[int]
) -> OmegaPrefix:
    """Draw ``ω_1 ... ω_n`` i.i.d. with ``P(ω_k = c) = β(c)``."""
    masses = np.asarray(gamma.masses)
    rng = np.random.default_rng(seed)
    return OmegaPrefix.of(rng.choice(len(gamma), size=n, p=masses / masses.sum()))


def _class_tables(
    gamma: GammaPartition, omega: OmegaPrefix
) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """Member words and conditional probabilities of every class used by ``omega``."""
    out = {}
    for cid in set(omega.classes):
        cls = gamma.classes[cid]
        cond = np.asarray(cls.conditional)
        out[cid] = (np.asarray(cls.words, dtype=np.int64), cond / cond.sum())
    return out


def _sample_blocks(
    gamma: GammaPartition,
    omega: OmegaPrefix,
    tables: dict[int, tuple[np.ndarray, np.ndarray]],
    size: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """``size`` words of length ``len(ω)·N`` drawn from ``β^ω``, one per row."""
    symbols = np.empty((size, len(omega) * gamma.N), dtype=np.int64)
    for k, cid in enumerate(omega.classes):
        words, cond = tables[cid]
        picks = rng.choice(words.shape[0], size=size, p=cond)
        symbols[:, k * gamma.N : (k + 1) * gamma.N] = words[picks]
    return symbols


def sample_beta_omega_word(
    gamma: GammaPartition, omega: OmegaPrefix, seed: int | Sequence[int]
) -> Word:
    """
    Draw a word of length ``len(ω)·N`` from ``β^ω``: block ``k`` is drawn from the normalized restriction
    of the word law to class ``ω_k``, independently of the other blocks.

    Raises:
        ZeroMassClass: Some ``ω_k`` has zero mass.
    """
    tables = _class_tables(gamma, omega)
    symbols = _sample_blocks(gamma, omega, tables, 1, np.random.default_rng(seed))
    return tuple(int(s) for s in symbols[0])


def _extend_omega(
    gamma: GammaPartition, omega: OmegaPrefix, blocks: int, seed: int | Sequence[int]
) -> OmegaPrefix:
    if len(omega) >= blocks:
        return omega
    return omega + sample_omega(gamma, blocks - len(omega), utils.derive_seed(seed, 0))


def _omega_cloud(
    model: WeightedModel,
    gamma: GammaPartition,
    omega: OmegaPrefix,
    n_points: int,
    seed: int | Sequence[int],
    workers: int,
    chunk: int,
) -> np.ndarray:
    rates, offsets = float_params(model.ifs)
    tables = _class_tables(gamma, omega)

    def draw(size: int, rng: np.random.Generator) -> np.ndarray:
        return sample_codings(rates, offsets, _sample_blocks(gamma, omega, tables, size, rng))

    return np.concatenate(
        utils.seeded_chunks(draw, n_points, seed, workers=workers, chunk=chunk)
    )


def sample_mu_omega(
    model: WeightedModel,
    gamma: GammaPartition,
    omega: OmegaPrefix,
    n_points: int,
    depth: int,
    seed: int | Sequence[int],
    target_level: int = 0,
    workers: int = utils.DEFAULT_WORKERS,
    chunk: int = utils.DEFAULT_CHUNK,
) -> DiscreteMeasure:
    """
    Draw ``n_points`` truncated codings of ``β^ω`` words, i.e. samples of ``μ^ω``.

    ``ω`` is extended once from ``P`` to the ``⌈depth/N⌉`` blocks the words need; the extension depends only
    on ``seed`` and is shared by all points.

    Raises:
        InsufficientDepth: ``r_max^depth >= 2^{-(target_level + 10)}``.
        ZeroMassClass: Some ``ω_k`` has zero mass.
    """
    blocks = math.ceil(depth / gamma.N)
    check_depth(model.ifs, blocks * gamma.N, target_level)
    omega = _extend_omega(gamma, omega, blocks, seed).head(blocks)
    points = _omega_cloud(
        model, gamma, omega, n_points, utils.derive_seed(seed, 1), workers, chunk
    )
    return DiscreteMeasure.uniform(points)


def nu_omega_n(
    model: WeightedModel,
    gamma: GammaPartition,
    omega: OmegaPrefix,
    n: int,
    mode: NuMode = NuMode.EXACT,
    n_samples: int = 10_000,
    seed: int | Sequence[int] = 0,
    budget: int = utils.DEFAULT_BUDGET,
) -> DiscreteMeasure:
    """
    ``ν^ω_n = Σ_u β^ω([u]) δ_{φ_u(0)}`` over the words ``u`` of length ``nN`` consistent with ``ω|n``.

    In exact mode the words are the Cartesian product of the classes ``ω_1, ..., ω_n``, the weights are
    products of conditional masses and, for exact models, the atoms are kept as exact rationals too. In
    sampled mode ``n_samples`` words are drawn from ``β^ω``.

    Example:

        >>> cantor = load_model("cantor")
        >>> gamma = build_gamma(cantor, N=1)
        >>> nu = nu_omega_n(cantor, gamma, OmegaPrefix.of([0, 0]), 2)
        >>> nu.exact_points
        ((Fraction(0, 1),), (Fraction(2, 9),), (Fraction(2, 3),), (Fraction(8, 9),))

    Raises:
        BudgetExceeded: The product of the class sizes is above ``budget`` (exact mode).
        ZeroMassClass: Some ``ω_k`` has zero mass.
    """
    if len(omega) < n:
        raise DimensionMismatch(
            f"ν^ω_{n} needs {n} blocks of ω, got {len(omega)}.", details={"n": n}
        )
    prefix = omega.head(n)
    if n == 0:
        return DiscreteMeasure(
            points=np.zeros((1, model.d)),
            weights=np.ones(1),
            labels=((),),
            exact_points=(tuple(Fraction(0) for _ in range(model.d)),)
            if model.mode is NumberMode.EXACT
            else None,
        )
    if mode is NuMode.SAMPLED:
        rates, offsets = float_params(model.ifs)
        tables = _class_tables(gamma, prefix)
        symbols = _sample_blocks(
            gamma, prefix, tables, n_samples, np.random.default_rng(seed)
        )
        return DiscreteMeasure.uniform(sample_codings(rates, offsets, symbols))
    size = math.prod(len(gamma.classes[c].words) for c in prefix.classes)
    if size > budget:
        raise BudgetExceeded(
            f"ν^ω_{n} has {size} atoms, above the budget of {budget}.",
            details={"atoms": size, "n": n, "budget": budget},
        )
    one = model.mode.coerce(1)
    atoms: list[tuple[ComposedMap, Scalar, Word]] = [
        (ComposedMap.identity(model.d, model.mode), one, ())
    ]
    for cid in prefix.classes:
        cls = gamma.classes[cid]
        block = [
            (compose_word(model.ifs, w), m / cls.mass, w)
            for w, m in zip(cls.words, cls.word_masses)
        ]
        atoms = [
            (u.compose(b), wu * wb, word + bw)
            for u, wu, word in atoms
            for b, wb, bw in block
        ]
    exact = model.mode is NumberMode.EXACT
    return DiscreteMeasure(
        points=np.asarray([[float(t) for t in u.offsets] for u, _, _ in atoms]),
        weights=np.asarray([float(w) for _, w, _ in atoms]),
        labels=tuple(word for _, _, word in atoms),
        exact_points=tuple(tuple(u.offsets) for u, _, _ in atoms) if exact else None,
    )


def omega_scale(gamma: GammaPartition, omega: OmegaPrefix, n: int | None = None) -> OmegaScale:
    """``A^{ω|n}``, the product of the linear parts of the first ``n`` classes (all of ``ω`` by default)."""
    prefix = omega if n is None else omega.head(n)
    d = len(gamma.classes[0].linear_part)
    scale = OmegaScale.identity(d, gamma.mode)
    for cid in prefix.classes:
        scale = scale * OmegaScale(rates=gamma.classes[cid].linear_part)
    return scale


def nonconformal_key(scale: OmegaScale, x: Sequence[Scalar]) -> AnisotropicKey:
    """
    The cell of ``E^ω_n = A^{ω|n} D_0^d`` containing ``x``: ``(⌊x_j / λ^{ω|n}_j⌋)_j``.

    Exact-mode scales are divided exactly, so cell boundaries are never blurred by rounding.

    Example:

        >>> nonconformal_key(OmegaScale((Fraction(1, 6), Fraction(1, 6))), (0.2, 0.9)).index
        (1, 5)
    """
    if len(x) != scale.d:
        raise DimensionMismatch(f"Got a point in R^{len(x)} for a scale on R^{scale.d}.")
    index = tuple(
        math.floor(Fraction(xj) / lam) if isinstance(lam, Fraction) else math.floor(xj / lam)
        for xj, lam in zip(x, scale.scales)
    )
    return AnisotropicKey(levels=scale.log_scales, index=index)


def nonconformal_partition(theta: DiscreteMeasure, scale: OmegaScale) -> FinitePartitionView:
    """The partition of the atoms of ``theta`` by ``E^ω_n`` cell (exact when the atoms are exact)."""
    if theta.exact_points is not None and all(isinstance(s, Fraction) for s in scale.scales):
        keys = np.asarray(
            [nonconformal_key(scale, x).index for x in theta.exact_points], dtype=np.int64
        )
    else:
        lam = np.asarray([float(s) for s in scale.scales])
        keys = np.floor(theta.points / lam).astype(np.int64)
    return FinitePartitionView.from_keys(keys)


def convolution_check(
    model: WeightedModel,
    gamma: GammaPartition,
    omega: OmegaPrefix | None,
    n: int,
    samples: int,
    seed: int | Sequence[int],
    levels: Sequence[int] = _CONVOLUTION_LEVELS,
    tolerance: float = _CONVOLUTION_TOLERANCE,
    budget: int = utils.DEFAULT_BUDGET,
    workers: int = utils.DEFAULT_WORKERS,
    chunk: int = utils.DEFAULT_CHUNK,
) -> ConvolutionCheck:
    """
    Compare ``μ^ω`` with ``ν^ω_n * A^{ω|n} μ^{T^n ω}`` on two independent clouds.

    Cloud (a) holds direct samples of ``μ^ω``. Cloud (b) adds an atom of ``ν^ω_n`` (exact when it fits in
    ``budget``, sampled otherwise) to an ``A^{ω|n}``-scaled sample of ``μ^{T^n ω}``. Both clouds use the same
    words length, so their truncation errors agree. The clouds are compared by dyadic entropy at every
    level and by a sliced 1-Wasserstein distance.

    Args:
        model: The weighted system.
        gamma: The partition ``Γ``.
        omega: A prefix of ``ω`` (extended from ``P`` as needed), or ``None`` to draw all of it.
        n: The number of blocks to split off.
        samples: The size of each cloud.
        seed: The root seed.
        levels: The dyadic levels to compare.
        tolerance: The entropy gap allowed at every level.
        budget: Cap on the atoms of an exact ``ν^ω_n``.
        workers: Sampling threads.
        chunk: Samples per seeded chunk.
    """
    depth = required_depth(model.ifs, max(levels))
    blocks = max(math.ceil(depth / gamma.N), n + 1)
    omega = _extend_omega(gamma, omega or OmegaPrefix(), blocks, seed).head(blocks)
    direct = DiscreteMeasure.uniform(
        _omega_cloud(model, gamma, omega, samples, utils.derive_seed(seed, 1), workers, chunk)
    )
    try:
        nu = nu_omega_n(model, gamma, omega, n, budget=budget)
        exact_nu = True
    except BudgetExceeded:
        _logger.info("ν^ω_%d is over budget; sampling its atoms instead", n)
        nu = nu_omega_n(
            model,
            gamma,
            omega,
            n,
            mode=NuMode.SAMPLED,
            n_samples=samples,
            seed=utils.derive_seed(seed, 3),
        )
        exact_nu = False
    tail = _omega_cloud(
        model, gamma, omega.shift(n), samples, utils.derive_seed(seed, 2), workers, chunk
    )
    lam = np.asarray([float(r) for r in omega_scale(gamma, omega, n).rates])
    rng = np.random.default_rng(utils.derive_seed(seed, 3, 1))
    picks = rng.choice(nu.n_atoms, size=samples, p=nu.weights / nu.weights.sum())
    convolved = DiscreteMeasure.uniform(nu.points[picks] + tail * lam)
    rows = []
    for t in levels:
        ha, hb = dyadic_entropy(direct, t), dyadic_entropy(convolved, t)
        rows.append((float(t), ha, hb, abs(ha - hb)))
    check = ConvolutionCheck(
        n=n,
        levels=tuple(rows),
        sliced_distance=sliced_wasserstein(direct, convolved, seed=utils.derive_seed(seed, 4)),
        max_gap=max(r[3] for r in rows),
        tolerance=tolerance,
        samples=samples,
        exact_nu=exact_nu,
    )
    _logger.info(
        "Convolution check n=%d: max entropy gap %.4f, sliced distance %.3g",
        n,
        check.max_gap,
        check.sliced_distance,
    )
    return check


def h_rw_closed_form(model: WeightedModel, gamma: GammaPartition) -> float:
    """``H(p) - H(β, Γ)/N``, the value of ``h_RW`` when no two words give the same map."""
    return shannon_entropy(model.p) - utils.entropy_bits(c.mass for c in gamma) / gamma.N


def h_rw_finite(
    model: WeightedModel,
    gamma: GammaPartition,
    n: int,
    budget: int = utils.DEFAULT_BUDGET,
    no_overlaps: bool = False,
) -> float:
    """
    ``(1/nN) H(β, C_{nN} | Γ_1 ∨ ... ∨ Γ_n)``, where ``C_{nN}`` groups the words of length ``nN`` by their
    composed map and ``Γ_k`` by the class of their ``k``-th block.

    The words are enumerated with exact masses. Over the budget the closed form :func:`h_rw_closed_form`
    is used, but only when the caller vouches for ``no_overlaps``.

    Example:

        >>> model = load_model("swapped")
        >>> round(h_rw_finite(model, build_gamma(model, N=2), 1), 12)
        0.25

    Raises:
        BudgetExceeded: ``|Λ|^{nN}`` is above ``budget`` and ``no_overlaps`` is not set.
    """
    if n < 1:
        raise DimensionMismatch(f"h_RW needs at least one block, got n={n}.")
    length = n * gamma.N
    if model.ifs.size**length > budget:
        if not no_overlaps:
            raise BudgetExceeded(
                f"{model.ifs.size}^{length} words exceed the budget of {budget} and overlaps are not ruled out.",
                details={"alphabet": model.ifs.size, "n": n, "N": gamma.N, "budget": budget},
            )
        _logger.info("Using the no-overlap closed form for h_RW at n=%d", n)
        return h_rw_closed_form(model, gamma)
    p = model.p
    joint: dict[tuple, Scalar] = {}
    blocks: dict[tuple, Scalar] = {}
    for m in level_maps(model.ifs, length, budget):
        mass = math.prod((p[i] for i in m.word), start=model.mode.coerce(1))
        path = tuple(
            gamma.class_of(m.word[k * gamma.N : (k + 1) * gamma.N]) for k in range(n)
        )
        key = (path, tuple(m.rates), tuple(m.offsets))
        joint[key] = joint.get(key, 0) + mass
        blocks[path] = blocks.get(path, 0) + mass
    return (utils.entropy_bits(joint.values()) - utils.entropy_bits(blocks.values())) / length


def reduction_bound(
    model: WeightedModel,
    N: int,
    gamma: GammaPartition | None = None,
    budget: int = utils.DEFAULT_BUDGET,
) -> tuple[float, float]:
    """
    Bounds on ``H(p) - h_RW`` at block length ``N`` for systems without exact overlaps.

    Returns:
        ``(2|Λ| log N / N, log|Γ| / N)``. The first is the coarse bound, which reads ``0`` at ``N = 1``; the
        second is the exact companion ``H(β, Γ)/N <= log|Γ|/N``.
    """
    gamma = gamma or build_gamma(model, N, budget=budget)
    return 2 * model.ifs.size * math.log2(N) / N, math.log2(len(gamma)) / N


def kappa_estimate(
    model: WeightedModel, dim_estimate: float, h_rw: float | None = None
) -> KappaEstimate:
    """
    ``κ = Σ_{j<d} χ_j + χ_d (dim - (d - 1))`` with increasing exponents ``χ_1 <= ... <= χ_d``.

    When ``h_rw`` is given the prediction ``min{d, f_Φ(h_RW)}`` and its ``κ`` are returned alongside.
    """
    profile = lyapunov_profile(model)
    chi = profile.chi
    d = len(chi)

    def kappa(dim: float) -> float:
        return sum(chi[: d - 1]) + chi[d - 1] * (dim - (d - 1))

    predicted = None if h_rw is None else min(float(d), f_phi(profile, h_rw))
    return KappaEstimate(
        kappa=kappa(dim_estimate),
        dim_estimate=dim_estimate,
        predicted_dim=predicted,
        predicted_kappa=None if predicted is None else kappa(predicted),
    )
