"""
Discrete measures: sampling self-affine measures, entropies along dyadic and other finite partitions,
component measures, the telescoping identity and local-dimension estimates.
"""

from __future__ import annotations

__all__ = [
    "required_depth",
    "check_depth",
    "sample_mu",
    "sample_codings",
    "float_params",
    "cube_keys",
    "dyadic_partition",
    "partition_entropy",
    "dyadic_entropy",
    "conditional_entropy",
    "component_at",
    "components",
    "expected_component_entropy",
    "telescope_check",
    "entropy_profile",
    "default_level_band",
    "entropy_dimension",
    "local_dimension",
    "local_dimension_spread",
    "sliced_wasserstein",
    "write_svg",
]

import logging
import math
import pathlib
from typing import Callable, Sequence

import numpy as np
from scipy import spatial, stats

from safd import utils
from safd.errors import ConfigError, InsufficientDepth, InsufficientResolution
from safd.types.ifs import DiagonalAffineIFS, WeightedModel
from safd.types.measures import (
    DiscreteMeasure,
    EntropyDimension,
    EntropyLevel,
    FinitePartitionView,
    LocalDimension,
)

_logger = logging.getLogger(__name__)

_DEPTH_MARGIN = 10
_BIAS_RATIO = 10
_BRUTE_FORCE_ATOMS = 1_000_000
_MIN_BALL_ATOMS = 10


def required_depth(ifs: DiagonalAffineIFS, target_level: int) -> int:
    """The smallest depth with ``r_max^depth < 2^{-(target_level + 10)}``."""
    return math.floor((target_level + _DEPTH_MARGIN) / -math.log2(ifs.r_max)) + 1


def check_depth(ifs: DiagonalAffineIFS, depth: int, target_level: int) -> None:
    """
    Raises:
        InsufficientDepth: ``r_max^depth >= 2^{-(target_level + 10)}``.
    """
    if depth * math.log2(ifs.r_max) >= -(target_level + _DEPTH_MARGIN):
        raise InsufficientDepth(
            f"Depth {depth} leaves cells of size r_max^depth = {ifs.r_max**depth:.3g}, too coarse for level "
            f"{target_level}; use at least {required_depth(ifs, target_level)}.",
            details={"depth": depth, "target_level": target_level},
        )


def sample_codings(
    rates: np.ndarray,
    offsets: np.ndarray,
    symbols: np.ndarray,
) -> np.ndarray:
    """
    ``φ_{x_1} ∘ ... ∘ φ_{x_k}(0)`` for every row of ``symbols``.

    Args:
        rates: Signed rates, shape ``(|Λ|, d)``.
        offsets: Translations, shape ``(|Λ|, d)``.
        symbols: Words, one per row, shape ``(n, k)``.
    """
    points = np.zeros((symbols.shape[0], rates.shape[1]))
    for k in range(symbols.shape[1] - 1, -1, -1):
        s = symbols[:, k]
        points = rates[s] * points + offsets[s]
    return points


def float_params(ifs: DiagonalAffineIFS) -> tuple[np.ndarray, np.ndarray]:
    """The rates and translations as float arrays of shape ``(|Λ|, d)``."""
    rates = np.asarray([[float(r) for r in m.rates] for m in ifs.maps])
    offsets = np.asarray([[float(t) for t in m.offsets] for m in ifs.maps])
    return rates, offsets


def sample_mu(
    model: WeightedModel,
    n_points: int,
    depth: int,
    seed: int | Sequence[int],
    target_level: int = 0,
    workers: int = utils.DEFAULT_WORKERS,
    chunk: int = utils.DEFAULT_CHUNK,
) -> DiscreteMeasure:
    """
    Draw ``n_points`` i.i.d. truncated codings ``φ_{x|depth}(0)`` with ``x ~ p^N``.

    Sampling runs in fixed-size chunks seeded from ``numpy.random.SeedSequence(seed)``, so the result depends
    only on the seed, never on ``workers``.

    Args:
        model: The weighted system.
        n_points: The number of atoms.
        depth: The truncation depth.
        seed: The root seed.
        target_level: The finest dyadic level the sample will be looked at.
        workers: Sampling threads.
        chunk: Samples per seeded chunk.

    Returns:
        The empirical measure (uniform weights), in the model's sorted coordinates.

    Raises:
        InsufficientDepth: ``r_max^depth >= 2^{-(target_level + 10)}``.
    """
    check_depth(model.ifs, depth, target_level)
    rates, offsets = float_params(model.ifs)
    p = np.asarray(model.probabilities)
    p = p / p.sum()

    def draw(size: int, rng: np.random.Generator) -> np.ndarray:
        symbols = rng.choice(p.size, size=(size, depth), p=p)
        return sample_codings(rates, offsets, symbols)

    points = np.concatenate(
        utils.seeded_chunks(draw, n_points, seed, workers=workers, chunk=chunk)
    )
    _logger.debug("Sampled %d points of %s at depth %d", n_points, model.name, depth)
    return DiscreteMeasure.uniform(points)


def cube_keys(points: np.ndarray, levels: float | Sequence[float]) -> np.ndarray:
    """
    ``⌊2^{⌊t_j⌋} x_j⌋`` for every point and coordinate (a scalar level is used in every coordinate).

    Dyadic scalings are exact in binary64, so the keys agree with exact flooring.
    """
    points = np.asarray(points, dtype=float)
    t = np.floor(np.broadcast_to(np.asarray(levels, dtype=float), (points.shape[1],)))
    return np.floor(points * np.exp2(t)).astype(np.int64)


def dyadic_partition(
    theta: DiscreteMeasure, levels: float | Sequence[float]
) -> FinitePartitionView:
    """The partition of the atoms by ``D_t`` (or by ``D_{t_1} x ... x D_{t_d}``)."""
    return FinitePartitionView.from_keys(cube_keys(theta.points, levels))


def partition_entropy(theta: DiscreteMeasure, xi: FinitePartitionView) -> float:
    """``H(θ, ξ)`` in bits."""
    return utils.entropy_bits(xi.masses(theta.weights))


def dyadic_entropy(theta: DiscreteMeasure, levels: float | Sequence[float]) -> float:
    """
    ``H(θ, D_t)``: the entropy of the pushforward of ``θ`` onto dyadic cells.

    ``levels`` is a scalar for the isotropic partition, or one level per coordinate.
    """
    return partition_entropy(theta, dyadic_partition(theta, levels))


def conditional_entropy(
    theta: DiscreteMeasure, xi: FinitePartitionView, eta: FinitePartitionView
) -> float:
    """``H(θ, ξ | η) = H(θ, ξ ∨ η) - H(θ, η)``."""
    return partition_entropy(theta, xi.join(eta)) - partition_entropy(theta, eta)


def _sub_partition(xi: FinitePartitionView, mask: np.ndarray) -> FinitePartitionView:
    return FinitePartitionView.from_keys(xi.blocks[mask])


def component_at(
    theta: DiscreteMeasure, levels: float | Sequence[float], x: Sequence[float]
) -> DiscreteMeasure:
    """
    The component ``θ_{E(x)}``: ``θ`` restricted to the cell of ``x`` and normalized.

    Raises:
        ZeroMassBlock: The cell of ``x`` has no mass.
    """
    keys = cube_keys(theta.points, levels)
    key = cube_keys(np.asarray([x], dtype=float), levels)[0]
    return theta.restrict((keys == key).all(axis=1))


def components(
    theta: DiscreteMeasure, eta: FinitePartitionView
) -> list[tuple[float, DiscreteMeasure, np.ndarray]]:
    """Every block of positive mass as ``(θ(A), θ_A, atom mask)``."""
    masses = eta.masses(theta.weights)
    out = []
    for block in np.flatnonzero(masses > 0):
        mask = eta.blocks == block
        out.append((float(masses[block]), theta.restrict(mask), mask))
    return out


def expected_component_entropy(
    theta: DiscreteMeasure, xi: FinitePartitionView, eta: FinitePartitionView
) -> float:
    """``Σ_{A ∈ η} θ(A) H(θ_A, ξ)``, an exact mass-weighted sum over the occupied blocks."""
    return sum(
        mass * partition_entropy(comp, _sub_partition(xi, mask))
        for mass, comp, mask in components(theta, eta)
    )


def telescope_check(
    theta: DiscreteMeasure,
    m: int,
    n: int,
    levels: Callable[[int], float | Sequence[float]] | None = None,
) -> float:
    """
    ``|(1/n) H(θ, E_n) - E_{1<=q<=n} (1/m) H(θ, E_{q+m} | E_q)|``.

    For a measure of support diameter ``R`` this is ``O((m + log R)/n)``.

    Args:
        theta: The measure.
        m: The inner scale step.
        n: The number of scales.
        levels: ``q -> `` the dyadic level(s) of ``E_q`` (isotropic ``D_q`` by default).
    """
    if not 1 <= m <= n:
        raise ConfigError(f"Need 1 <= m <= n, got m = {m}, n = {n}.")
    levels = levels or (lambda q: q)
    cache: dict[int, FinitePartitionView] = {}

    def part(q: int) -> FinitePartitionView:
        if q not in cache:
            cache[q] = dyadic_partition(theta, levels(q))
        return cache[q]

    average = np.mean(
        [conditional_entropy(theta, part(q + m), part(q)) / m for q in range(1, n + 1)]
    )
    return float(abs(partition_entropy(theta, part(n)) / n - average))


def entropy_profile(
    theta: DiscreteMeasure, levels: Sequence[float]
) -> list[EntropyLevel]:
    """
    ``H(θ, D_t)`` for every level, with the occupied-cell count.

    Levels whose cell count exceeds a tenth of the atom count are flagged (plug-in estimates are biased there).
    """
    out = []
    for t in levels:
        xi = dyadic_partition(theta, t)
        biased = xi.n_blocks * _BIAS_RATIO > theta.n_atoms
        out.append(
            EntropyLevel(
                level=t,
                entropy=partition_entropy(theta, xi),
                occupied=xi.n_blocks,
                biased=biased,
            )
        )
    flagged = [lv.level for lv in out if lv.biased]
    if flagged:
        _logger.warning(
            "Plug-in entropy is biased at levels %s (more than %d%% of %d atoms occupy distinct cells)",
            flagged,
            100 // _BIAS_RATIO,
            theta.n_atoms,
            extra={"safd_event": "plugin_bias", "levels": flagged},
        )
    return out


def default_level_band(n_points: int, d: int) -> tuple[int, int]:
    """``[4, ⌊log n_points / d⌋ - 2]``, widened to two levels when it is shorter."""
    hi = math.floor(math.log2(n_points) / d) - 2
    return 4, max(hi, 5)


def entropy_dimension(
    theta: DiscreteMeasure, levels: Sequence[float] | None = None
) -> EntropyDimension:
    """
    The least-squares slope of ``t -> H(θ, D_t)``: an estimate of the dimension of the sampled measure.

    Biased levels (see :func:`entropy_profile`) are trimmed as long as two levels remain.

    Args:
        theta: The (empirical) measure.
        levels: The levels to fit (:func:`default_level_band` when omitted).

    Raises:
        InsufficientResolution: Fewer than two levels.
    """
    if levels is None:
        lo, hi = default_level_band(theta.n_atoms, theta.d)
        levels = range(lo, hi + 1)
    levels = list(levels)
    if len(levels) < 2:
        raise InsufficientResolution(
            f"At least two levels are needed to fit a slope, got {levels}."
        )
    profile = entropy_profile(theta, levels)
    used = [lv for lv in profile if not lv.biased]
    if len(used) < 2:
        used = profile
    fit = stats.linregress([lv.level for lv in used], [lv.entropy for lv in used])
    return EntropyDimension(
        value=float(fit.slope),
        stderr=float(fit.stderr),
        levels=tuple(lv.level for lv in used),
        profile=tuple(profile),
    )


def _ball_masses(theta: DiscreteMeasure, x: np.ndarray, radii: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(θ(B(x, r)), #atoms in B(x, r))`` for every radius."""
    if theta.n_atoms <= _BRUTE_FORCE_ATOMS:
        dist = np.linalg.norm(theta.points - x, axis=1)
        order = np.argsort(dist)
        cum = np.cumsum(theta.weights[order])
        counts = np.searchsorted(dist[order], radii, side="right")
        masses = np.where(counts > 0, cum[np.maximum(counts - 1, 0)], 0.0)
        return masses, counts
    tree = spatial.cKDTree(theta.points)
    hits = [tree.query_ball_point(x, r) for r in radii]
    counts = np.asarray([len(h) for h in hits])
    masses = np.asarray([theta.weights[h].sum() for h in hits])
    return masses, counts


def local_dimension(
    theta: DiscreteMeasure,
    x: Sequence[float],
    radii: Sequence[float],
    min_atoms: int = _MIN_BALL_ATOMS,
) -> LocalDimension:
    """
    The least-squares slope of ``log θ(B(x, r))`` against ``log r``.

    Ball masses are exact range counts (a k-d tree is used above a million atoms). Radii whose ball holds
    fewer than ``min_atoms`` atoms are not resolvable and are dropped.

    Raises:
        InsufficientResolution: Fewer than two resolvable radii.
    """
    radii = np.sort(np.asarray(radii, dtype=float))
    masses, counts = _ball_masses(theta, np.asarray(x, dtype=float), radii)
    keep = counts >= min(min_atoms, theta.n_atoms)
    if keep.sum() < 2:
        raise InsufficientResolution(
            f"Only {int(keep.sum())} of {radii.size} radii hold at least {min_atoms} atoms.",
            details={"radii": radii.size, "resolvable": int(keep.sum())},
        )
    fit = stats.linregress(np.log2(radii[keep]), np.log2(masses[keep]))
    return LocalDimension(
        slope=float(fit.slope), stderr=float(fit.stderr), radii=tuple(radii[keep])
    )


def local_dimension_spread(
    theta: DiscreteMeasure,
    radii: Sequence[float],
    n_base: int,
    seed: int | Sequence[int],
    min_atoms: int = _MIN_BALL_ATOMS,
) -> tuple[float, float, list[LocalDimension]]:
    """
    Local-dimension estimates at ``n_base`` atoms drawn from ``θ``.

    Returns:
        ``(mean slope, standard deviation, the individual estimates)``. Base points without two resolvable
        radii are skipped.

    Raises:
        InsufficientResolution: No base point could be resolved.
    """
    rng = np.random.default_rng(seed)
    picks = rng.choice(theta.n_atoms, size=n_base, p=theta.weights)
    estimates = []
    for i in picks:
        try:
            estimates.append(local_dimension(theta, theta.points[i], radii, min_atoms))
        except InsufficientResolution:
            continue
    if not estimates:
        raise InsufficientResolution("No base point has two resolvable radii.")
    slopes = np.asarray([e.slope for e in estimates])
    return float(slopes.mean()), float(slopes.std()), estimates


def sliced_wasserstein(
    a: DiscreteMeasure,
    b: DiscreteMeasure,
    directions: int = 64,
    seed: int | Sequence[int] = 0,
) -> float:
    """The average 1-Wasserstein distance of the projections of ``a`` and ``b`` on random unit directions."""
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((directions, a.d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return float(
        np.mean(
            [
                stats.wasserstein_distance(
                    a.points @ v, b.points @ v, u_weights=a.weights, v_weights=b.weights
                )
                for v in u
            ]
        )
    )


def write_svg(
    theta: DiscreteMeasure,
    path: str | pathlib.Path,
    max_points: int = 50_000,
    title: str | None = None,
) -> pathlib.Path:
    """
    Write a plain scatter plot of the first ``max_points`` atoms.

    Only the first two coordinates are drawn (a line measure is drawn against its weights).

    Raises:
        ConfigError: matplotlib is not installed.
    """
    if not utils.is_matplotlib_installed():
        raise ConfigError(
            "SVG output requires the `matplotlib` package to be installed."
            '\n>> Install it with `pip install matplotlib` / `pip install "safd[svg]"`.'
        )
    import matplotlib

    matplotlib.use("Agg")
    from matplotlib import pyplot as plt

    shown = theta.head(max_points)
    xs = shown.points[:, 0]
    ys = shown.points[:, 1] if shown.d > 1 else shown.weights
    with matplotlib.rc_context({"svg.hashsalt": "safd", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 6))
        ax.scatter(xs, ys, s=0.2, c="black", linewidths=0)
        ax.set_aspect("equal" if theta.d > 1 else "auto")
        if title:
            ax.set_title(title)
        path = pathlib.Path(path)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    _logger.info("Wrote %d points to %s", len(xs), path)
    return path
