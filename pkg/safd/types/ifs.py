"""Types for diagonal affine iterated function systems, their words and their weighted models."""

from __future__ import annotations

__all__ = [
    "NumberMode",
    "Scalar",
    "Word",
    "AffineMap",
    "DiagonalAffineIFS",
    "ComposedMap",
    "TruncatedPoint",
    "WeightedModel",
]

import dataclasses
import math
from fractions import Fraction
from typing import TypeAlias

from safd import utils
from safd.errors import BadWeights, DimensionMismatch, RateOutOfRange

Scalar: TypeAlias = Fraction | float
"""A rate or offset: an exact rational in exact mode, a binary64 float in float mode."""

Word: TypeAlias = tuple[int, ...]
"""A finite word over the alphabet ``{0, ..., |Λ|-1}``. The empty tuple is the empty word."""

_WEIGHT_TOL = 1e-9


class NumberMode(utils.StrEnum):
    """
    Arithmetic mode of a model. A model never mixes modes.

    Attributes:
        EXACT: Arbitrary-precision rationals (:class:`fractions.Fraction`), no rounding.
        FLOAT: binary64 floats.
    """

    EXACT = "exact"
    FLOAT = "float"

    def coerce(self, value: Scalar | int) -> Scalar:
        """Convert a number into this mode."""
        if self is NumberMode.EXACT:
            return value if isinstance(value, Fraction) else Fraction(str(value))
        return float(value)


@dataclasses.dataclass(frozen=True, slots=True)
class AffineMap:
    """
    One map ``x -> diag(rates) x + offsets`` of a diagonal system.

    Attributes:
        rates: The signed diagonal entries ``r_{i,1}, ..., r_{i,d}``.
        offsets: The translation ``t_{i,1}, ..., t_{i,d}``.
    """

    rates: tuple[Scalar, ...]
    offsets: tuple[Scalar, ...]

    def restrict(self, coords: tuple[int, ...]) -> AffineMap:
        """The map induced on the given coordinates."""
        return AffineMap(
            rates=tuple(self.rates[j] for j in coords),
            offsets=tuple(self.offsets[j] for j in coords),
        )


@dataclasses.dataclass(frozen=True, slots=True)
class DiagonalAffineIFS:
    """
    A diagonal affine IFS ``Φ = {x -> A_i x + t_i}`` on ``R^d``.

    Attributes:
        d: The ambient dimension.
        maps: One :class:`AffineMap` per symbol of the alphabet.
        mode: Whether the parameters are exact rationals or floats.
    """

    d: int
    maps: tuple[AffineMap, ...]
    mode: NumberMode = NumberMode.EXACT

    def __post_init__(self):
        if self.d < 1:
            raise DimensionMismatch(
                f"The ambient dimension must be at least 1, got {self.d}."
            )
        if not self.maps:
            raise DimensionMismatch("A system needs at least one map.")
        for i, m in enumerate(self.maps):
            if len(m.rates) != self.d or len(m.offsets) != self.d:
                raise DimensionMismatch(
                    f"Map {i} has {len(m.rates)} rates and {len(m.offsets)} offsets, expected {self.d} of each.",
                    details={"map": i, "d": self.d},
                )
            for j, r in enumerate(m.rates):
                if not 0 < abs(r) < 1:
                    raise RateOutOfRange(
                        f"Rate r[{i},{j}] = {r} is not in (-1, 0) U (0, 1).",
                        details={"map": i, "coord": j, "rate": str(r)},
                    )

    @property
    def size(self) -> int:
        """The alphabet size ``|Λ|``."""
        return len(self.maps)

    @property
    def abs_rates(self) -> tuple[tuple[float, ...], ...]:
        """``|r_{i,j}|`` as floats, indexed ``[i][j]``."""
        return tuple(tuple(abs(float(r)) for r in m.rates) for m in self.maps)

    @property
    def r_min(self) -> float:
        return min(min(row) for row in self.abs_rates)

    @property
    def r_max(self) -> float:
        return max(max(row) for row in self.abs_rates)

    def coord_r_max(self, j: int) -> float:
        """The largest ``|r_{i,j}|`` over the alphabet."""
        return max(row[j] for row in self.abs_rates)

    def coord_offset_bound(self, j: int) -> float:
        """``max_i |t_{i,j}|``."""
        return max(abs(float(m.offsets[j])) for m in self.maps)

    @property
    def is_homogeneous(self) -> bool:
        """Whether all maps share the same linear part."""
        return all(m.rates == self.maps[0].rates for m in self.maps)


@dataclasses.dataclass(frozen=True, slots=True)
class ComposedMap:
    """
    The word-composed map ``φ_I = φ_{i_1} ∘ ... ∘ φ_{i_n}``.

    Attributes:
        rates: The signed diagonal entries ``A^I_j`` of the linear part.
        offsets: The translation part ``φ_I(0)``.
        word: The word the map was composed from (``None`` when built by hand).
    """

    rates: tuple[Scalar, ...]
    offsets: tuple[Scalar, ...]
    word: Word | None = dataclasses.field(default=None, compare=False)

    @classmethod
    def identity(cls, d: int, mode: NumberMode) -> ComposedMap:
        one, zero = mode.coerce(1), mode.coerce(0)
        return cls(rates=(one,) * d, offsets=(zero,) * d, word=())

    @property
    def d(self) -> int:
        return len(self.rates)

    @property
    def scales(self) -> tuple[float, ...]:
        """``λ^I_j = |A^I_j|`` as floats."""
        return tuple(abs(float(r)) for r in self.rates)

    @property
    def log_scales(self) -> tuple[float, ...]:
        """``χ^I_j = -log λ^I_j`` in bits."""
        return tuple(-utils.log2(abs(r)) for r in self.rates)

    def compose(self, other: ComposedMap) -> ComposedMap:
        """``self ∘ other``: rates multiply, and ``offset = A_self · offset_other + offset_self``."""
        if other.d != self.d:
            raise DimensionMismatch(
                f"Cannot compose maps on R^{self.d} and R^{other.d}."
            )
        word = (
            self.word + other.word
            if self.word is not None and other.word is not None
            else None
        )
        return ComposedMap(
            rates=tuple(a * b for a, b in zip(self.rates, other.rates)),
            offsets=tuple(
                t + a * s for a, t, s in zip(self.rates, self.offsets, other.offsets)
            ),
            word=word,
        )

    def __call__(self, x: tuple[Scalar, ...]) -> tuple[Scalar, ...]:
        return tuple(a * xj + t for a, xj, t in zip(self.rates, x, self.offsets))


@dataclasses.dataclass(frozen=True, slots=True)
class WeightedModel:
    """
    A diagonal IFS paired with a probability vector: the object all dimension formulas consume.

    The coordinates of ``ifs`` are sorted so that the Lyapunov exponents are nondecreasing.
    ``coordinate_order[k]`` is the user coordinate (0-based) that sorted coordinate ``k`` came from.

    Attributes:
        ifs: The system, in sorted coordinate order.
        p: The probability vector, indexed by symbol.
        coordinate_order: The permutation applied when sorting the coordinates.
        name: A label for reports (optional).
    """

    ifs: DiagonalAffineIFS
    p: tuple[Scalar, ...]
    coordinate_order: tuple[int, ...] = ()
    name: str | None = None

    def __post_init__(self):
        if len(self.p) != self.ifs.size:
            raise BadWeights(
                f"Expected {self.ifs.size} weights, got {len(self.p)}.",
                details={"weights": len(self.p), "maps": self.ifs.size},
            )
        if any(w < 0 for w in self.p):
            raise BadWeights("Weights must be nonnegative.")
        total = sum(self.p)
        if isinstance(total, Fraction):
            if total != 1:
                raise BadWeights(f"Weights sum to {total}, not 1.")
        elif not math.isclose(total, 1.0, rel_tol=0.0, abs_tol=_WEIGHT_TOL):
            raise BadWeights(f"Weights sum to {total!r}, not 1.")
        if not self.coordinate_order:
            object.__setattr__(self, "coordinate_order", tuple(range(self.ifs.d)))
        if sorted(self.coordinate_order) != list(range(self.ifs.d)):
            raise DimensionMismatch(
                f"coordinate_order {self.coordinate_order} is not a permutation of {self.ifs.d} coordinates."
            )

    @property
    def d(self) -> int:
        return self.ifs.d

    @property
    def mode(self) -> NumberMode:
        return self.ifs.mode

    @property
    def probabilities(self) -> tuple[float, ...]:
        """``p`` as floats."""
        return tuple(float(w) for w in self.p)

    def sorted_coord(self, user_coord: int) -> int:
        """
        The sorted index of a (0-based) user coordinate.

        Raises:
            DimensionMismatch: The coordinate is not in ``{0, ..., d-1}``.
        """
        if not 0 <= user_coord < self.d:
            raise DimensionMismatch(
                f"Coordinate {user_coord + 1} is out of range for a system on R^{self.d}.",
                details={"coord": user_coord, "d": self.d},
            )
        return self.coordinate_order.index(user_coord)

    def to_user_order(self, values: tuple) -> tuple:
        """Reorder a per-coordinate vector from sorted order back into the user's coordinates."""
        out = [None] * self.d
        for k, user in enumerate(self.coordinate_order):
            out[user] = values[k]
        return tuple(out)


@dataclasses.dataclass(frozen=True, slots=True)
class TruncatedPoint:
    """
    A truncated coding ``φ_I(0)`` together with its distance bound to any infinite extension ``Π(Ix)``.

    Attributes:
        point: ``φ_I(0)``, exact in exact mode.
        error: Per-coordinate bound ``λ^I_j · max_i |t_{i,j}| / (1 - max_i |r_{i,j}|)``.
        word: The word that was coded.
    """

    point: tuple[Scalar, ...]
    error: tuple[float, ...]
    word: Word = ()
