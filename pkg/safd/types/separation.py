"""Types for the separation diagnostics of one-dimensional systems."""

from __future__ import annotations

__all__ = [
    "CanonicalAffine1D",
    "SeparationLevel",
    "SeparationReport",
    "KernelConsistency",
]

import dataclasses

from .ifs import ComposedMap, Scalar, Word
from safd.errors import DimensionMismatch


@dataclasses.dataclass(frozen=True, slots=True)
class CanonicalAffine1D:
    """
    A map ``x -> s x + b`` on the line.

    Attributes:
        slope: ``s``.
        offset: ``b``.
        word: The word the map was composed from (optional, not compared).
    """

    slope: Scalar
    offset: Scalar
    word: Word | None = dataclasses.field(default=None, compare=False)

    @classmethod
    def from_composed(cls, m: ComposedMap) -> CanonicalAffine1D:
        if m.d != 1:
            raise DimensionMismatch(
                f"Expected a map on the line, got one on R^{m.d}."
            )
        return cls(slope=m.rates[0], offset=m.offsets[0], word=m.word)


@dataclasses.dataclass(frozen=True, slots=True)
class SeparationLevel:
    """
    One row of a separation table.

    Attributes:
        n: The word length.
        delta: ``Δ_n``, the minimal distance between maps of distinct words (``inf`` if no two share a slope).
        s_n: ``S_n``, the minimal distance between distinct maps.
        witness: Two distinct words with equal maps, when ``Δ_n = 0``.
        indeterminate: Float mode only: a gap fell under the tolerance so an overlap can neither be asserted nor excluded.
    """

    n: int
    delta: Scalar
    s_n: Scalar
    witness: tuple[Word, Word] | None = None
    indeterminate: bool = False

    @property
    def has_overlap(self) -> bool:
        return self.witness is not None


@dataclasses.dataclass(frozen=True, slots=True)
class SeparationReport:
    """
    Separation evidence up to a finite level.

    Finite tables are evidence, never a proof, of exponential separation.

    Attributes:
        levels: The per-level table.
        c_hat: ``min_n Δ_n^{1/n}`` over levels with ``Δ_n > 0`` (``None`` if there is none).
        c_fit: ``2^slope`` of the least-squares fit of ``log Δ_n`` against ``n`` (``None`` with fewer than two levels).
        unreliable: The two rate estimates disagree by more than 10%.
        no_exact_overlaps: No level in the table has ``Δ_n = 0``.
        first_overlap_level: The first level with a witnessed overlap (optional).
        diophantine_evidence: Every level has ``S_n > 0`` (all parameters exact).
        note: A human-readable caveat.
    """

    levels: tuple[SeparationLevel, ...]
    c_hat: float | None
    c_fit: float | None
    unreliable: bool
    no_exact_overlaps: bool
    first_overlap_level: int | None
    diophantine_evidence: bool
    note: str = (
        "A finite table is evidence, not proof, of exponential separation."
    )

    @property
    def max_n(self) -> int:
        return self.levels[-1].n if self.levels else 0

    @property
    def indeterminate(self) -> bool:
        return any(lv.indeterminate for lv in self.levels)


@dataclasses.dataclass(frozen=True, slots=True)
class KernelConsistency:
    """
    Finite-level evidence that a coordinate never identifies two words the full system keeps apart.

    Attributes:
        max_n: The largest level checked.
        consistent: For every level and coordinate, equal coordinate maps came from equal full maps.
        violation: ``(n, coord, word_a, word_b)`` for the first counterexample found (optional).
    """

    max_n: int
    consistent: bool
    violation: tuple[int, int, Word, Word] | None = None
