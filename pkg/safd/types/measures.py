"""Types for finite (discrete) measures and the partitions their entropies are taken along."""

from __future__ import annotations

__all__ = [
    "DiscreteMeasure",
    "CubeKey",
    "AnisotropicKey",
    "FinitePartitionView",
    "EntropyLevel",
    "EntropyDimension",
    "LocalDimension",
]

import dataclasses
import math
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from safd.errors import BadWeights, DimensionMismatch, ZeroMassBlock

_MASS_TOL = 1e-12


@dataclasses.dataclass(frozen=True, slots=True, eq=False)
class DiscreteMeasure:
    """
    A finitely supported probability measure on ``R^d``.

    Used for the exact atomic measures ``ν^ω_n`` as well as for Monte-Carlo stand-ins of ``μ`` and ``μ^ω``.

    Attributes:
        points: Atom locations, shape ``(n, d)``.
        weights: Atom masses, shape ``(n,)``, nonnegative and summing to 1.
        labels: Provenance per atom (a word or an ω-prefix), optional.
        exact_points: The atom locations as exact rationals, when they are known exactly (optional).
    """

    points: np.ndarray
    weights: np.ndarray
    labels: tuple[Any, ...] | None = None
    exact_points: tuple[tuple[Fraction, ...], ...] | None = None

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        weights = np.asarray(self.weights, dtype=float)
        if points.shape[0] != weights.shape[0] or points.shape[0] == 0:
            raise DimensionMismatch(
                f"A measure needs one weight per atom and at least one atom, got {points.shape[0]} atoms "
                f"and {weights.shape[0]} weights."
            )
        if (weights < 0).any() or abs(weights.sum() - 1.0) > _MASS_TOL * max(
            1, weights.size
        ):
            raise BadWeights(
                f"Weights must be nonnegative and sum to 1, got total {weights.sum()!r}."
            )
        points.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, points: np.ndarray | Sequence, labels=None) -> DiscreteMeasure:
        """Equal weights on the given points (the empirical measure of a sample)."""
        points = np.asarray(points, dtype=float)
        n = points.shape[0]
        return cls(points=points, weights=np.full(n, 1.0 / n), labels=labels)

    @classmethod
    def point_mass(cls, x: Sequence[float]) -> DiscreteMeasure:
        return cls(points=np.asarray([x], dtype=float), weights=np.ones(1))

    @property
    def n_atoms(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def is_uniform(self) -> bool:
        return bool(np.all(self.weights == self.weights[0]))

    def restrict(self, mask: np.ndarray) -> DiscreteMeasure:
        """
        The normalized restriction to the atoms selected by ``mask``.

        Raises:
            ZeroMassBlock: The selected atoms carry no mass.
        """
        mask = np.asarray(mask, dtype=bool)
        mass = float(self.weights[mask].sum())
        if mass <= 0:
            raise ZeroMassBlock("Cannot restrict to a set of zero mass.")
        labels = (
            tuple(lab for lab, keep in zip(self.labels, mask) if keep)
            if self.labels is not None
            else None
        )
        exact = (
            tuple(x for x, keep in zip(self.exact_points, mask) if keep)
            if self.exact_points is not None
            else None
        )
        return DiscreteMeasure(
            points=self.points[mask],
            weights=self.weights[mask] / mass,
            labels=labels,
            exact_points=exact,
        )

    def scaled(self, factors: Sequence[float]) -> DiscreteMeasure:
        """The pushforward under ``x -> diag(factors) x``."""
        return DiscreteMeasure(
            points=self.points * np.asarray(factors, dtype=float),
            weights=self.weights,
            labels=self.labels,
        )

    def head(self, n: int) -> DiscreteMeasure:
        """The first ``n`` atoms, renormalized (used for plotting)."""
        if n >= self.n_atoms:
            return self
        mask = np.zeros(self.n_atoms, dtype=bool)
        mask[:n] = True
        return self.restrict(mask)


@dataclasses.dataclass(frozen=True, slots=True)
class CubeKey:
    """
    The cell of the level-``t`` dyadic partition ``D_t = D_{⌊t⌋}`` containing a point.

    Attributes:
        level: The (real) level ``t``; only ``⌊t⌋`` matters.
        index: The integer vector ``⌊2^{⌊t⌋} x⌋``.
    """

    level: float
    index: tuple[int, ...]

    @classmethod
    def of(cls, x: Sequence[float | Fraction], level: float) -> CubeKey:
        scale = Fraction(2) ** math.floor(level)
        return cls(
            level=level,
            index=tuple(math.floor(Fraction(xj) * scale) for xj in x),
        )


@dataclasses.dataclass(frozen=True, slots=True)
class AnisotropicKey:
    """
    The cell of the product partition ``D_{t_1} x ... x D_{t_d}`` containing a point.

    Attributes:
        levels: The per-coordinate levels.
        index: The integer cell vector: ``(⌊2^{⌊t_j⌋} x_j⌋)_j`` for dyadic cells. For the nonconformal cells
            of side ``λ_j = 2^{-t_j}`` it is ``(⌊x_j / λ_j⌋)_j`` with the real levels ``t_j = -log λ_j``.
    """

    levels: tuple[float, ...]
    index: tuple[int, ...]

    @classmethod
    def of(cls, x: Sequence[float | Fraction], levels: Sequence[float]) -> AnisotropicKey:
        if len(x) != len(levels):
            raise DimensionMismatch(
                f"Got {len(levels)} levels for a point in R^{len(x)}."
            )
        return cls(
            levels=tuple(levels),
            index=tuple(
                math.floor(Fraction(xj) * Fraction(2) ** math.floor(t))
                for xj, t in zip(x, levels)
            ),
        )


@dataclasses.dataclass(frozen=True, slots=True, eq=False)
class FinitePartitionView:
    """
    A partition of the atoms of a :class:`DiscreteMeasure` into blocks.

    Attributes:
        blocks: The block id of every atom, shape ``(n,)``, ids ``0..n_blocks-1``.
        n_blocks: The number of blocks.
    """

    blocks: np.ndarray
    n_blocks: int

    @classmethod
    def from_labels(cls, labels: Sequence[Any]) -> FinitePartitionView:
        """Group atoms with equal hashable labels (block ids in first-appearance order)."""
        ids: dict[Any, int] = {}
        blocks = np.fromiter(
            (ids.setdefault(k, len(ids)) for k in labels), dtype=np.int64, count=len(labels)
        )
        return cls(blocks=blocks, n_blocks=len(ids))

    @classmethod
    def from_keys(cls, keys: np.ndarray) -> FinitePartitionView:
        """Group atoms with equal keys (the rows of an integer array)."""
        arr = np.asarray(keys)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        _, inverse = np.unique(arr, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1).astype(np.int64)
        return cls(blocks=inverse, n_blocks=int(inverse.max()) + 1)

    @classmethod
    def trivial(cls, n_atoms: int) -> FinitePartitionView:
        return cls(blocks=np.zeros(n_atoms, dtype=np.int64), n_blocks=1)

    @classmethod
    def singletons(cls, n_atoms: int) -> FinitePartitionView:
        return cls(blocks=np.arange(n_atoms, dtype=np.int64), n_blocks=n_atoms)

    @property
    def n_atoms(self) -> int:
        return self.blocks.shape[0]

    def join(self, other: FinitePartitionView) -> FinitePartitionView:
        """The common refinement ``ξ ∨ η``."""
        if other.n_atoms != self.n_atoms:
            raise DimensionMismatch(
                f"Cannot join partitions of {self.n_atoms} and {other.n_atoms} atoms."
            )
        return FinitePartitionView.from_keys(np.column_stack([self.blocks, other.blocks]))

    def masses(self, weights: np.ndarray) -> np.ndarray:
        """The mass of every block."""
        return np.bincount(self.blocks, weights=weights, minlength=self.n_blocks)

    def refines(self, other: FinitePartitionView) -> bool:
        """Whether every block of ``self`` lies inside one block of ``other``."""
        return self.join(other).n_blocks == self.n_blocks


@dataclasses.dataclass(frozen=True, slots=True)
class EntropyLevel:
    """
    The dyadic entropy of a measure at one level.

    Attributes:
        level: The level ``t``.
        entropy: ``H(θ, D_t)`` in bits.
        occupied: The number of cells of positive mass.
        biased: The cell count exceeds a tenth of the atom count, where plug-in estimates are biased.
    """

    level: float
    entropy: float
    occupied: int
    biased: bool


@dataclasses.dataclass(frozen=True, slots=True)
class EntropyDimension:
    """
    The slope of ``t -> H(θ, D_t)`` over a band of levels.

    Attributes:
        value: The least-squares slope.
        stderr: Its standard error.
        levels: The levels used in the fit.
        profile: The entropies of the whole band (before trimming biased levels).
    """

    value: float
    stderr: float
    levels: tuple[float, ...]
    profile: tuple[EntropyLevel, ...]


@dataclasses.dataclass(frozen=True, slots=True)
class LocalDimension:
    """
    The slope of ``log θ(B(x, r))`` against ``log r``.

    Attributes:
        slope: The least-squares slope.
        stderr: Its standard error.
        radii: The resolvable radii used in the fit.
    """

    slope: float
    stderr: float
    radii: tuple[float, ...]
