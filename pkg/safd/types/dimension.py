"""Types returned by the closed-form dimension formulas."""

from __future__ import annotations

__all__ = [
    "LyapunovProfile",
    "PermutationWeight",
    "AffinityDimension",
    "FullDimensionVector",
    "FJMaximum",
]

import dataclasses
import itertools
from typing import Sequence

from safd.errors import EmptyCoordinateSet, DimensionMismatch


@dataclasses.dataclass(frozen=True, slots=True)
class LyapunovProfile:
    """
    Sorted Lyapunov exponents and their prefix sums, the breakpoints of ``f_Φ``.

    Attributes:
        chi: ``χ_1 <= ... <= χ_d`` in bits.
        coords: The model (sorted) coordinates the exponents belong to.
    """

    chi: tuple[float, ...]
    coords: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.chi:
            raise EmptyCoordinateSet("A Lyapunov profile needs at least one exponent.")
        if any(c <= 0 for c in self.chi):
            raise DimensionMismatch(f"Lyapunov exponents must be positive, got {self.chi}.")
        object.__setattr__(self, "chi", tuple(sorted(self.chi)))
        if not self.coords:
            object.__setattr__(self, "coords", tuple(range(len(self.chi))))

    @property
    def d(self) -> int:
        return len(self.chi)

    @property
    def prefix_sums(self) -> tuple[float, ...]:
        """``(0, χ_1, χ_1 + χ_2, ..., Σ χ_b)``."""
        return (0.0, *itertools.accumulate(self.chi))

    def restricted(self, coords: Sequence[int]) -> LyapunovProfile:
        """The profile of the induced system ``Φ_J`` (positions refer to this profile)."""
        if not coords:
            raise EmptyCoordinateSet("Cannot restrict a profile to no coordinates.")
        picked = sorted(set(coords))
        return LyapunovProfile(
            chi=tuple(self.chi[k] for k in picked),
            coords=tuple(self.coords[k] for k in picked),
        )


@dataclasses.dataclass(frozen=True, slots=True)
class PermutationWeight:
    """
    The singular-value weights ``φ^s_σ(i)`` of every symbol for one permutation and one ``s``.

    Attributes:
        sigma: The permutation of the coordinates.
        s: The dimension candidate.
        values: ``φ^s_σ(i)`` per symbol.
    """

    sigma: tuple[int, ...]
    s: float
    values: tuple[float, ...]

    @property
    def total(self) -> float:
        return sum(self.values)


@dataclasses.dataclass(frozen=True, slots=True)
class AffinityDimension:
    """
    The root of ``max_σ Σ_i φ^s_σ(i) = 1``.

    Attributes:
        value: ``dim_A``.
        maximizers: The permutations attaining the maximum at the root.
        residual: ``|max_σ Σ_i φ^{dim_A}_σ(i) - 1|``.
    """

    value: float
    maximizers: tuple[tuple[int, ...], ...]
    residual: float


@dataclasses.dataclass(frozen=True, slots=True)
class FullDimensionVector:
    """
    A Bernoulli weight vector whose Lyapunov dimension equals the affinity dimension.

    Attributes:
        sigma: The maximizing permutation it comes from.
        p: ``(φ^{dim_A}_σ(i))_i``.
        chi: The exponents ``(χ_{σ(1)}(p_σ), χ_{σ(2)}(p_σ))`` in the order of ``sigma``.
        distinct_exponents: ``χ_{σ(1)}(p_σ) != χ_{σ(2)}(p_σ)``.
        lyapunov_dimension: ``dim_L(Φ, p_σ)``.
    """

    sigma: tuple[int, ...]
    p: tuple[float, ...]
    chi: tuple[float, ...]
    distinct_exponents: bool
    lyapunov_dimension: float


@dataclasses.dataclass(frozen=True, slots=True)
class FJMaximum:
    """
    The maximum of ``g(y) = Σ_b y_b / χ_{j_b}`` over the box-simplex ``Y(x)``.

    Attributes:
        value: The maximum found over the vertices of ``Y(x)``.
        argmax: A maximizing vertex.
        grid_value: The best value found by the grid sweep (never above ``value``).
    """

    value: float
    argmax: tuple[float, ...]
    grid_value: float
