"""
Separation of one-dimensional systems: the quantities ``Δ_n`` and ``S_n``, exact-overlap witnesses and
empirical evidence for exponential separation.
"""

from __future__ import annotations

__all__ = [
    "pair_distance",
    "coordinate_system",
    "canonical_level",
    "delta_n",
    "s_n",
    "separation_level",
    "separation_report",
    "separation_table",
    "kernel_consistency",
]

import itertools
import logging
import math
from typing import Sequence

import numpy as np
from scipy import stats

from safd import utils
from safd.errors import BudgetExceeded, DimensionMismatch
from safd.ifs_core import format_word, induce_on_coords, level_maps
from safd.types.ifs import ComposedMap, DiagonalAffineIFS, NumberMode, Scalar
from safd.types.reports import Table
from safd.types.separation import (
    CanonicalAffine1D,
    KernelConsistency,
    SeparationLevel,
    SeparationReport,
)

_logger = logging.getLogger(__name__)

_RATE_DISAGREEMENT = 0.10


def pair_distance(a: CanonicalAffine1D, b: CanonicalAffine1D) -> Scalar:
    """``|b_1 - b_2|`` when the slopes agree, ``inf`` otherwise (exact in exact mode)."""
    if a.slope != b.slope:
        return math.inf
    return abs(a.offset - b.offset)


def coordinate_system(ifs: DiagonalAffineIFS, coord: int | None = None) -> DiagonalAffineIFS:
    """The one-dimensional system to study: ``ifs`` itself on the line, ``Φ_{coord}`` otherwise."""
    if coord is not None:
        return induce_on_coords(ifs, (coord,))
    if ifs.d != 1:
        raise DimensionMismatch(
            f"Separation is measured on the line; pick a coordinate of this system on R^{ifs.d}.",
            details={"d": ifs.d},
        )
    return ifs


def canonical_level(
    ifs: DiagonalAffineIFS, n: int, budget: int = utils.DEFAULT_BUDGET
) -> list[CanonicalAffine1D]:
    """All level-``n`` maps of a system on the line, in lexicographic word order."""
    return [CanonicalAffine1D.from_composed(m) for m in level_maps(coordinate_system(ifs), n, budget)]


def _close(a: Scalar, b: Scalar, mode: NumberMode, tol: float) -> bool:
    if mode is NumberMode.EXACT:
        return a == b
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def _slope_groups(
    maps: Sequence[CanonicalAffine1D], mode: NumberMode, tol: float
) -> list[list[CanonicalAffine1D]]:
    """Group maps by slope (float slopes within ``tol`` of their neighbour share a group)."""
    ordered = sorted(maps, key=lambda m: m.slope)
    groups: list[list[CanonicalAffine1D]] = []
    for m in ordered:
        if groups and _close(groups[-1][-1].slope, m.slope, mode, tol):
            groups[-1].append(m)
        else:
            groups.append([m])
    return groups


def separation_level(
    maps: Sequence[CanonicalAffine1D],
    n: int,
    mode: NumberMode = NumberMode.EXACT,
    tol: float = utils.DEFAULT_FLOAT_TOL,
) -> SeparationLevel:
    """
    ``Δ_n`` and ``S_n`` of one level, by grouping the maps by slope and taking adjacent offset gaps.

    ``Δ_n`` is ``0`` when there is a single word (no pairs) and ``inf`` when no two words share a slope.
    ``S_n`` is the same over distinct maps, so it is ``0`` when every word gives the same map.
    In float mode a gap under ``tol`` is reported as indeterminate instead of as an overlap.
    """
    delta: Scalar = math.inf
    s_min: Scalar = math.inf
    witnesses = []
    indeterminate = False
    distinct = 0
    for group in _slope_groups(maps, mode, tol):
        group = sorted(group, key=lambda m: (m.offset, m.word or ()))
        unique = [group[0]]
        for a, b in itertools.pairwise(group):
            gap = abs(b.offset - a.offset)
            if mode is NumberMode.EXACT:
                if gap == 0:
                    witnesses.append(tuple(sorted((a.word, b.word))))
                else:
                    unique.append(b)
            elif gap <= tol * max(1.0, abs(a.offset), abs(b.offset)):
                indeterminate = True
            else:
                unique.append(b)
            delta = min(delta, gap)
        distinct += len(unique)
        for a, b in itertools.pairwise(unique):
            s_min = min(s_min, abs(b.offset - a.offset))
    if len(maps) <= 1:
        delta = 0
    if distinct <= 1:
        s_min = 0
    if indeterminate:
        _logger.warning(
            "Level %d has offset gaps below the tolerance %g; overlap is indeterminate in float mode",
            n,
            tol,
            extra={"safd_event": "indeterminate_overlap", "n": n},
        )
    return SeparationLevel(
        n=n,
        delta=delta,
        s_n=s_min,
        witness=min(witnesses) if witnesses else None,
        indeterminate=indeterminate,
    )


def delta_n(
    ifs: DiagonalAffineIFS,
    n: int,
    budget: int = utils.DEFAULT_BUDGET,
    tol: float = utils.DEFAULT_FLOAT_TOL,
) -> Scalar:
    """
    ``Δ_n(Ψ) = min{d(ψ_u, ψ_v) : u, v ∈ Λ^n, u != v}`` for a system on the line.

    Example:

        >>> from safd import load_model
        >>> delta_n(load_model("cantor").ifs, 2)
        Fraction(2, 9)

    Raises:
        BudgetExceeded: ``|Λ|^n`` is above ``budget``.
    """
    return separation_level(canonical_level(ifs, n, budget), n, ifs.mode, tol).delta


def s_n(
    ifs: DiagonalAffineIFS,
    n: int,
    budget: int = utils.DEFAULT_BUDGET,
    tol: float = utils.DEFAULT_FLOAT_TOL,
) -> Scalar:
    """``S_n(Ψ)``: like :func:`delta_n` but over pairs of distinct maps."""
    return separation_level(canonical_level(ifs, n, budget), n, ifs.mode, tol).s_n


def _rate_estimates(levels: Sequence[SeparationLevel]) -> tuple[float | None, float | None]:
    usable = [
        (lv.n, float(lv.delta))
        for lv in levels
        if lv.delta != 0 and not (isinstance(lv.delta, float) and math.isinf(lv.delta))
    ]
    if not usable:
        return None, None
    c_hat = min(delta ** (1.0 / n) for n, delta in usable)
    if len(usable) < 2:
        return c_hat, None
    ns, deltas = zip(*usable)
    fit = stats.linregress(np.asarray(ns, dtype=float), np.log2(deltas))
    return c_hat, float(2.0**fit.slope)


def separation_report(
    ifs: DiagonalAffineIFS,
    n_max: int,
    coord: int | None = None,
    budget: int = utils.DEFAULT_BUDGET,
    tol: float = utils.DEFAULT_FLOAT_TOL,
) -> SeparationReport:
    """
    Separation evidence for levels ``1..n_max``.

    Two rate estimates are reported: ``ĉ = min_n Δ_n^{1/n}`` and ``2^slope`` of a least-squares fit of
    ``log Δ_n`` against ``n``. When they differ by more than 10% the evidence is flagged as unreliable.

    Args:
        ifs: The system (on the line, or pick ``coord``).
        n_max: The largest word length.
        coord: The (0-based) coordinate to induce on.
        budget: Cap on ``|Λ|^{n_max}``.
        tol: Float-mode overlap tolerance.

    Raises:
        BudgetExceeded: ``|Λ|^{n_max}`` is above ``budget``.
    """
    psi = coordinate_system(ifs, coord)
    if psi.size**n_max > budget:
        raise BudgetExceeded(
            f"{psi.size}^{n_max} composed maps exceed the budget of {budget}.",
            details={"alphabet": psi.size, "n": n_max, "budget": budget},
        )
    gens = [
        ComposedMap(rates=m.rates, offsets=m.offsets, word=(i,))
        for i, m in enumerate(psi.maps)
    ]
    level = [ComposedMap.identity(1, psi.mode)]
    levels = []
    for n in range(1, n_max + 1):
        level = [u.compose(g) for u in level for g in gens]
        levels.append(
            separation_level(
                [CanonicalAffine1D.from_composed(m) for m in level], n, psi.mode, tol
            )
        )
    c_hat, c_fit = _rate_estimates(levels)
    first_overlap = next((lv.n for lv in levels if lv.has_overlap), None)
    return SeparationReport(
        levels=tuple(levels),
        c_hat=c_hat,
        c_fit=c_fit,
        unreliable=(
            c_hat is not None
            and c_fit is not None
            and abs(c_hat - c_fit) > _RATE_DISAGREEMENT * c_hat
        ),
        no_exact_overlaps=first_overlap is None and not any(lv.indeterminate for lv in levels),
        first_overlap_level=first_overlap,
        diophantine_evidence=psi.mode is NumberMode.EXACT and all(lv.s_n != 0 for lv in levels),
    )


def separation_table(report: SeparationReport, name: str = "separation") -> Table:
    """The report as a table with columns ``n, delta_n, s_n, overlap_witness``."""
    return Table.of(
        name,
        ("n", "delta_n", "s_n", "overlap_witness"),
        (
            (
                lv.n,
                lv.delta,
                lv.s_n,
                f"{format_word(lv.witness[0])}={format_word(lv.witness[1])}"
                if lv.witness
                else ("indeterminate" if lv.indeterminate else ""),
            )
            for lv in report.levels
        ),
    )


def kernel_consistency(
    ifs: DiagonalAffineIFS, n_max: int, budget: int = utils.DEFAULT_BUDGET
) -> KernelConsistency:
    """
    Check, level by level up to ``n_max``, that two words with equal coordinate maps ``π_j φ_u = π_j φ_v``
    also have equal full maps ``φ_u = φ_v``, for every coordinate ``j``.

    This is finite-level evidence only. Float-mode parameters are compared for exact equality.
    """
    for n in range(1, n_max + 1):
        maps = level_maps(ifs, n, budget)
        for j in range(ifs.d):
            seen: dict[tuple[Scalar, Scalar], ComposedMap] = {}
            for m in maps:
                key = (m.rates[j], m.offsets[j])
                other = seen.setdefault(key, m)
                if other is not m and other != m:
                    return KernelConsistency(
                        max_n=n_max,
                        consistent=False,
                        violation=(n, j, other.word, m.word),
                    )
    return KernelConsistency(max_n=n_max, consistent=True)
