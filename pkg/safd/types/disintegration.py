"""Types for the disintegration of a self-affine measure by linear parts."""

from __future__ import annotations

__all__ = [
    "Granularity",
    "GammaClass",
    "GammaPartition",
    "OmegaPrefix",
    "OmegaScale",
    "NuMode",
    "ConvolutionCheck",
    "KappaEstimate",
]

import dataclasses
from typing import Iterator, Sequence

from safd import utils
from safd.errors import ZeroMassClass
from .ifs import NumberMode, Scalar, Word


class Granularity(utils.StrEnum):
    """
    How finely the level-``N`` words are grouped.

    Attributes:
        LINEAR: By the composed linear part (the coarsest admissible grouping).
        WORD: Every word is its own class (the finest grouping).
    """

    LINEAR = "linear"
    WORD = "word"


class NuMode(utils.StrEnum):
    """
    How ``ν^ω_n`` is built.

    Attributes:
        EXACT: Enumerate every word consistent with ``ω`` (exact weights).
        SAMPLED: Draw atoms from ``β^ω``.
    """

    EXACT = "exact"
    SAMPLED = "sampled"


@dataclasses.dataclass(frozen=True, slots=True)
class GammaClass:
    """
    One class of level-``N`` words sharing a linear part.

    Attributes:
        id: The class id (first-appearance order in lexicographic word order).
        linear_part: The signed diagonal of ``A_{φ_u}`` shared by the members.
        words: The member words, in lexicographic order.
        word_masses: ``β([u]) = Π p_{u_k}`` per member.
        mass: ``β(class)``.
    """

    id: int
    linear_part: tuple[Scalar, ...]
    words: tuple[Word, ...]
    word_masses: tuple[Scalar, ...]
    mass: Scalar

    @property
    def conditional(self) -> tuple[float, ...]:
        """The normalized restriction ``β_ω`` of the word law to this class."""
        if self.mass == 0:
            raise ZeroMassClass(
                f"Class {self.id} has zero mass.", details={"class": self.id}
            )
        return tuple(float(m / self.mass) for m in self.word_masses)


@dataclasses.dataclass(frozen=True, slots=True)
class GammaPartition:
    """
    The partition ``Γ`` of ``Λ^N`` by linear part (or by word).

    Attributes:
        N: The block length.
        granularity: The grouping used.
        classes: The classes, indexed by id.
        mode: The arithmetic mode of the model it was built from.
    """

    N: int
    granularity: Granularity
    classes: tuple[GammaClass, ...]
    mode: NumberMode = NumberMode.EXACT
    _index: dict[Word, int] = dataclasses.field(
        default_factory=dict, repr=False, compare=False
    )

    def __post_init__(self):
        if not self._index:
            object.__setattr__(
                self,
                "_index",
                {w: c.id for c in self.classes for w in c.words},
            )

    def __len__(self) -> int:
        return len(self.classes)

    def __iter__(self) -> Iterator[GammaClass]:
        return iter(self.classes)

    def class_of(self, word: Word) -> int:
        """The id of the class containing a level-``N`` word."""
        return self._index[tuple(word)]

    @property
    def masses(self) -> tuple[float, ...]:
        return tuple(float(c.mass) for c in self.classes)

    @property
    def is_trivial(self) -> bool:
        return len(self.classes) == 1


@dataclasses.dataclass(frozen=True, slots=True)
class OmegaPrefix:
    """
    A finite prefix ``ω_1 ... ω_n`` of a sequence of class ids.

    Attributes:
        classes: The class ids.
    """

    classes: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.classes)

    def __add__(self, other: OmegaPrefix) -> OmegaPrefix:
        return OmegaPrefix(self.classes + other.classes)

    def head(self, n: int) -> OmegaPrefix:
        """``ω|n``."""
        return OmegaPrefix(self.classes[:n])

    def shift(self, n: int = 1) -> OmegaPrefix:
        """``T^n ω`` (as far as the prefix reaches)."""
        return OmegaPrefix(self.classes[n:])

    @classmethod
    def of(cls, ids: Sequence[int]) -> OmegaPrefix:
        return cls(tuple(int(i) for i in ids))


@dataclasses.dataclass(frozen=True, slots=True)
class OmegaScale:
    """
    The linear part ``A^{ω|n}`` of the first ``n`` blocks.

    Attributes:
        rates: The signed diagonal of ``A^{ω|n}``.
    """

    rates: tuple[Scalar, ...]

    @classmethod
    def identity(cls, d: int, mode: NumberMode = NumberMode.EXACT) -> OmegaScale:
        return cls(rates=(mode.coerce(1),) * d)

    @property
    def d(self) -> int:
        return len(self.rates)

    @property
    def scales(self) -> tuple[Scalar, ...]:
        """``λ^{ω|n}_j = |A^{ω|n}_j|`` (exact in exact mode)."""
        return tuple(abs(r) for r in self.rates)

    @property
    def log_scales(self) -> tuple[float, ...]:
        """``χ^{ω|n}_j = -log λ^{ω|n}_j`` in bits."""
        return tuple(-utils.log2(s) for s in self.scales)

    def __mul__(self, other: OmegaScale) -> OmegaScale:
        return OmegaScale(rates=tuple(a * b for a, b in zip(self.rates, other.rates)))


@dataclasses.dataclass(frozen=True, slots=True)
class ConvolutionCheck:
    """
    Comparison of direct samples of ``μ^ω`` with samples of ``ν^ω_n * A^{ω|n} μ^{T^n ω}``.

    Attributes:
        n: The number of blocks split off.
        levels: ``(level, H(direct), H(convolved), |gap|)`` per dyadic level.
        sliced_distance: The sliced 1-Wasserstein distance between the two clouds.
        max_gap: The largest entropy gap.
        tolerance: The gap allowed at every level.
        samples: The size of each cloud.
        exact_nu: Whether ``ν^ω_n`` was enumerated exactly (otherwise it was sampled).
    """

    n: int
    levels: tuple[tuple[float, float, float, float], ...]
    sliced_distance: float
    max_gap: float
    tolerance: float
    samples: int
    exact_nu: bool

    @property
    def passed(self) -> bool:
        return self.max_gap < self.tolerance


@dataclasses.dataclass(frozen=True, slots=True)
class KappaEstimate:
    """
    ``κ = Σ_{j<d} χ_j + χ_d (dim - (d - 1))`` for a supplied dimension, next to the formula's prediction.

    Attributes:
        kappa: ``κ`` at the supplied dimension estimate.
        dim_estimate: The supplied dimension.
        predicted_dim: ``min{d, f_Φ(h_RW)}`` (``None`` when no ``h_RW`` was given).
        predicted_kappa: ``κ`` at the predicted dimension (optional).
    """

    kappa: float
    dim_estimate: float
    predicted_dim: float | None = None
    predicted_kappa: float | None = None
