"""
Closed-form dimension quantities of diagonal systems: the piecewise-linear ``f_Φ``, the Lyapunov dimension,
the affinity dimension through the permutation singular-value formula, full-dimension weight vectors,
the root-equation form of the Lyapunov dimension and the ``f_{Φ_J}`` maximization lemmas.
"""

from __future__ import annotations

__all__ = [
    "MAX_DIMENSION",
    "lyapunov_profile",
    "f_phi",
    "lyapunov_dimension",
    "singular_value_sigma",
    "permutation_weights",
    "affinity_dimension",
    "full_dimension_vectors",
    "lyapunov_dim_root",
    "fJ_max_oracle",
    "fj_upper_bound_check",
]

import bisect
import itertools
import logging
import math
from typing import Sequence

import numpy as np
from scipy import optimize

from safd import utils
from safd.errors import (
    DegenerateAffinity,
    NegativeArgument,
    NoConvergence,
    NotPlanar,
    PreconditionViolated,
    SymbolOutOfRange,
)
from safd.ifs_core import lyapunov_exponents, shannon_entropy
from safd.types.dimension import (
    AffinityDimension,
    FJMaximum,
    FullDimensionVector,
    LyapunovProfile,
    PermutationWeight,
)
from safd.types.ifs import DiagonalAffineIFS, WeightedModel

_logger = logging.getLogger(__name__)

MAX_DIMENSION = 8
"""Permutations are enumerated explicitly, so the ambient dimension is capped."""

_XTOL = 1e-15
_MAXITER = 200
_MAXIMIZER_SLACK = 1e-9
_GRID_POINTS = 1_000


def lyapunov_profile(model: WeightedModel) -> LyapunovProfile:
    """The sorted exponents of a model."""
    return LyapunovProfile(chi=lyapunov_exponents(model))


def f_phi(profile: LyapunovProfile, x: float) -> float:
    """
    The piecewise-linear map ``f_Φ``.

    ``f_Φ(x) = j + (x - Σ_{b<=j} χ_b) / χ_{j+1}`` on ``[Σ_{b<=j} χ_b, Σ_{b<=j+1} χ_b)`` and ``d x / Σ_b χ_b``
    beyond the last breakpoint, so ``f_Φ(Σ_{b<=j} χ_b) = j``.

    Example:

        >>> from safd.types import LyapunovProfile
        >>> f_phi(LyapunovProfile(chi=(1.0, 2.0)), 2.0)
        1.5

    Raises:
        NegativeArgument: ``x < 0``.
    """
    if x < 0:
        raise NegativeArgument(f"f_Φ is defined on [0, inf), got x = {x!r}.")
    sums = profile.prefix_sums
    if x >= sums[-1]:
        return profile.d * x / sums[-1]
    j = bisect.bisect_right(sums, x) - 1
    return j + (x - sums[j]) / profile.chi[j]


def lyapunov_dimension(model: WeightedModel) -> float:
    """``dim_L(Φ, p) = f_Φ(H(p))``."""
    return f_phi(lyapunov_profile(model), shannon_entropy(model.p))


def _log_rates(ifs: DiagonalAffineIFS) -> np.ndarray:
    """``log|r_{i,j}|`` in bits, shape ``(|Λ|, d)``."""
    return np.log2(np.asarray(ifs.abs_rates, dtype=float))


def _permutations(d: int) -> np.ndarray:
    if d > MAX_DIMENSION:
        raise PreconditionViolated(
            f"Permutation formulas enumerate d! terms and are capped at d = {MAX_DIMENSION}, got d = {d}.",
            details={"d": d},
        )
    return np.asarray(list(itertools.permutations(range(d))), dtype=np.int64)


def _log_phi(log_rates: np.ndarray, perms: np.ndarray, s: float) -> np.ndarray:
    """``log φ^s_σ(i)`` for every permutation and symbol, shape ``(d!, |Λ|)``."""
    d = log_rates.shape[1]
    if s >= d:
        return np.broadcast_to(
            (s / d) * log_rates.sum(axis=1), (perms.shape[0], log_rates.shape[0])
        )
    k = math.floor(s)
    ordered = log_rates[:, perms]  # (|Λ|, d!, d)
    head = ordered[:, :, :k].sum(axis=2)
    return (head + (s - k) * ordered[:, :, k]).T


def singular_value_sigma(
    ifs: DiagonalAffineIFS, sigma: Sequence[int], s: float, i: int
) -> float:
    """
    ``φ^s_σ(i) = |r_{i,σ(1)}| ... |r_{i,σ(⌊s⌋)}| · |r_{i,σ(⌊s⌋+1)}|^{s-⌊s⌋}`` for ``s < d``,
    and ``|r_{i,1} ... r_{i,d}|^{s/d}`` for ``s >= d``.

    Raises:
        NegativeArgument: ``s < 0``.
        SymbolOutOfRange: ``i`` is not a symbol of the system.
    """
    if s < 0:
        raise NegativeArgument(f"s must be nonnegative, got {s!r}.")
    if not 0 <= i < ifs.size:
        raise SymbolOutOfRange(f"Symbol {i} is outside the alphabet of size {ifs.size}.")
    if sorted(sigma) != list(range(ifs.d)):
        raise PreconditionViolated(f"{tuple(sigma)} is not a permutation of {ifs.d} coordinates.")
    log_phi = _log_phi(
        _log_rates(ifs)[i : i + 1], np.asarray([sigma], dtype=np.int64), s
    )
    return float(2.0 ** log_phi[0, 0])


def permutation_weights(ifs: DiagonalAffineIFS, s: float) -> list[PermutationWeight]:
    """``(φ^s_σ(i))_i`` for every permutation ``σ``."""
    if s < 0:
        raise NegativeArgument(f"s must be nonnegative, got {s!r}.")
    perms = _permutations(ifs.d)
    values = 2.0 ** _log_phi(_log_rates(ifs), perms, s)
    return [
        PermutationWeight(
            sigma=tuple(int(c) for c in perm), s=s, values=tuple(float(v) for v in row)
        )
        for perm, row in zip(perms, values)
    ]


def _bisect(func, lo: float, hi: float, what: str) -> float:
    try:
        root, result = optimize.bisect(
            func, lo, hi, xtol=_XTOL, maxiter=_MAXITER, full_output=True, disp=False
        )
    except (RuntimeError, ValueError) as e:
        raise NoConvergence(
            f"Bisection for {what} failed on [{lo}, {hi}]: {e}",
            details={"lo": lo, "hi": hi},
        ) from e
    if not result.converged:
        raise NoConvergence(
            f"Bisection for {what} did not converge in {_MAXITER} steps.",
            details={"lo": lo, "hi": hi, "iterations": result.iterations},
        )
    _logger.debug("%s: root %.15g after %d steps", what, root, result.iterations)
    return float(root)


def affinity_dimension(ifs: DiagonalAffineIFS) -> AffinityDimension:
    """
    The affinity dimension: the unique ``s >= 0`` with ``max_σ Σ_i φ^s_σ(i) = 1``.

    The left side is continuous and strictly decreasing in ``s``, equals ``|Λ|`` at ``s = 0`` and tends to 0,
    so the root is bracketed by ``[0, d + log|Λ| / (-log r_max) + 1]`` and found by bisection.

    Example:

        >>> from safd import load_model
        >>> round(affinity_dimension(load_model("homogeneous3").ifs).value, 5)
        1.29248

    Returns:
        The root together with the permutations attaining the maximum there.

    Raises:
        NoConvergence: The bisection did not converge.
        PreconditionViolated: ``d`` is above :data:`MAX_DIMENSION`.
    """
    perms = _permutations(ifs.d)
    log_rates = _log_rates(ifs)

    def totals(s: float) -> np.ndarray:
        return (2.0 ** _log_phi(log_rates, perms, s)).sum(axis=1)

    if ifs.size == 1:
        root = 0.0
    else:
        hi = ifs.d + math.log2(ifs.size) / -math.log2(ifs.r_max) + 1
        root = _bisect(lambda s: totals(s).max() - 1.0, 0.0, hi, "affinity dimension")
    at_root = totals(root)
    maximizers = tuple(
        tuple(int(c) for c in perm)
        for perm, total in zip(perms, at_root)
        if abs(total - 1.0) <= _MAXIMIZER_SLACK
    )
    return AffinityDimension(
        value=root, maximizers=maximizers, residual=float(abs(at_root.max() - 1.0))
    )


def full_dimension_vectors(ifs: DiagonalAffineIFS) -> list[FullDimensionVector]:
    """
    The Bernoulli weights of full dimension on a planar attractor, one per maximizing permutation.

    For ``σ`` maximizing at ``s_0 = dim_A``, ``p_σ = (φ^{s_0}_σ(i))_i`` is a probability vector with
    ``dim_L(Φ, p_σ) = dim_A``. The conclusion ``χ_{σ(1)}(p_σ) != χ_{σ(2)}(p_σ)`` is checked and reported.

    Raises:
        NotPlanar: ``d != 2``.
        DegenerateAffinity: ``dim_A`` is not in ``(0, 2)``.
    """
    if ifs.d != 2:
        raise NotPlanar(f"Full-dimension vectors are computed for d = 2, got d = {ifs.d}.")
    dim_a = affinity_dimension(ifs)
    if not 0 < dim_a.value < 2:
        raise DegenerateAffinity(
            f"The affinity dimension {dim_a.value:.12g} is not in (0, 2).",
            details={"dim_A": dim_a.value},
        )
    log_rates = _log_rates(ifs)
    out = []
    for sigma in dim_a.maximizers:
        values = 2.0 ** _log_phi(log_rates, np.asarray([sigma]), dim_a.value)[0]
        p = values / values.sum()
        chi = tuple(float(-(p * log_rates[:, j]).sum()) for j in sigma)
        distinct = not math.isclose(chi[0], chi[1], rel_tol=_MAXIMIZER_SLACK)
        dim_l = f_phi(LyapunovProfile(chi=chi), utils.entropy_bits(p))
        out.append(
            FullDimensionVector(
                sigma=sigma,
                p=tuple(float(v) for v in values),
                chi=chi,
                distinct_exponents=distinct,
                lyapunov_dimension=dim_l,
            )
        )
    return out


def lyapunov_dim_root(model: WeightedModel) -> float:
    """
    The Lyapunov dimension as the root of ``H(p) + max_σ Σ_i p_i log φ^s_σ(i) = 0``.

    This is an independent route to :func:`lyapunov_dimension` (the two agree to ``1e-9``). Past the last
    breakpoint the ``s >= d`` branch of ``φ^s_σ`` gives the linear extension ``d H(p) / Σ χ_b``.

    Raises:
        NoConvergence: The bisection did not converge.
    """
    h = shannon_entropy(model.p)
    if h == 0:
        return 0.0
    perms = _permutations(model.d)
    log_rates = _log_rates(model.ifs)
    p = np.asarray(model.probabilities)
    hi = model.d + h / min(lyapunov_exponents(model)) + 1
    return _bisect(
        lambda s: h + (_log_phi(log_rates, perms, s) @ p).max(),
        0.0,
        hi,
        "Lyapunov dimension",
    )


def _box_simplex_vertices(chi: np.ndarray, x: float) -> np.ndarray:
    """Vertices of ``{0 <= y_b <= χ_b, Σ y_b <= x}``."""
    s = chi.size
    vertices = []
    for corner in itertools.product((0, 1), repeat=s):
        y = np.where(np.asarray(corner, dtype=bool), chi, 0.0)
        if y.sum() <= x:
            vertices.append(y)
    for k in range(s):
        others = [b for b in range(s) if b != k]
        for corner in itertools.product((0, 1), repeat=s - 1):
            y = np.zeros(s)
            y[others] = np.where(np.asarray(corner, dtype=bool), chi[others], 0.0)
            free = x - y.sum()
            if 0 <= free <= chi[k]:
                y[k] = free
                vertices.append(y)
    return np.asarray(vertices)


def _grid_best(chi: np.ndarray, x: float) -> float:
    """Best ``g`` over a sweep: a full grid for ``s <= 2``, otherwise along every box edge."""
    s = chi.size
    axes = [np.linspace(0.0, c, _GRID_POINTS) for c in chi]
    if s <= 2:
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, s)
    else:
        pieces = []
        for k in range(s):
            others = [b for b in range(s) if b != k]
            for corner in itertools.product((0, 1), repeat=s - 1):
                block = np.zeros((_GRID_POINTS, s))
                block[:, others] = np.where(np.asarray(corner, dtype=bool), chi[others], 0.0)
                block[:, k] = axes[k]
                pieces.append(block)
        grid = np.concatenate(pieces)
    feasible = grid[grid.sum(axis=1) <= x]
    return float((feasible / chi).sum(axis=1).max())


def fJ_max_oracle(profile: LyapunovProfile, x: float) -> FJMaximum:
    """
    Maximize ``g(y) = Σ_b y_b / χ_{j_b}`` over ``Y(x) = {0 <= y_b <= χ_{j_b}, Σ_b y_b <= x}``.

    The maximum of a linear function over this polytope sits at a vertex, so the vertices are enumerated
    exactly, and a grid sweep checks them from below. Where ``f_{Φ_J}(x) <= |J|`` the maximum equals
    ``f_{Φ_J}(x)``, attained at ``(χ_{j_1}, ..., χ_{j_m}, x - Σ_{b<=m} χ_{j_b}, 0, ..., 0)``.

    Args:
        profile: The profile of ``Φ_J`` (see :meth:`LyapunovProfile.restricted`).
        x: The entropy argument.

    Raises:
        PreconditionViolated: ``f_{Φ_J}(x) > |J|``.
    """
    value_f = f_phi(profile, x)
    if value_f > profile.d * (1 + 1e-12):
        raise PreconditionViolated(
            f"f_Φ_J({x!r}) = {value_f:.12g} exceeds |J| = {profile.d}.",
            details={"x": x, "f": value_f, "size": profile.d},
        )
    chi = np.asarray(profile.chi, dtype=float)
    vertices = _box_simplex_vertices(chi, x)
    values = (vertices / chi).sum(axis=1)
    best = int(values.argmax())
    return FJMaximum(
        value=float(values[best]),
        argmax=tuple(float(v) for v in vertices[best]),
        grid_value=_grid_best(chi, x),
    )


def fj_upper_bound_check(
    profile: LyapunovProfile, x: float, m: int
) -> tuple[float, float, bool]:
    """
    The bound ``m + (x - Σ_{b<=m} χ_{j_b}) / χ_{j_{m+1}} >= min{|J|, f_{Φ_J}(x)}`` for ``0 <= m < |J|``.

    Returns:
        ``(left side, right side, whether it holds)``.

    Raises:
        PreconditionViolated: ``m`` is not in ``[0, |J|)``.
    """
    if not 0 <= m < profile.d:
        raise PreconditionViolated(f"m must be in [0, {profile.d}), got {m}.")
    if x < 0:
        raise NegativeArgument(f"x must be nonnegative, got {x!r}.")
    lhs = m + (x - profile.prefix_sums[m]) / profile.chi[m]
    rhs = min(profile.d, f_phi(profile, x))
    return lhs, rhs, lhs >= rhs - 1e-12
