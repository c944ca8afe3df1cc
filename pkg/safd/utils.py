from __future__ import annotations

import concurrent.futures
import dataclasses
import enum
import importlib
import math
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence, TypeVar

import numpy as np
from scipy import stats

_T = TypeVar("_T")

DEFAULT_BUDGET = 20_000_000
"""Default cap on the number of composed maps (or atoms) an exact enumeration may produce."""

DEFAULT_FLOAT_TOL = 1e-9
"""Relative tolerance under which two float-mode quantities are considered equal."""

DEFAULT_CHUNK = 65_536
"""Number of samples drawn per seeded chunk. Fixed so results never depend on the worker count."""

DEFAULT_WORKERS = 1


def is_matplotlib_installed() -> bool:
    """Check if the matplotlib library is installed (needed only for SVG output)."""
    try:
        importlib.import_module("matplotlib")
        return True
    except ImportError:
        return False


class StrEnum(str, enum.Enum):
    """Enum where the values are also (and must be) strings."""

    def __str__(self):
        return self.value

    def __repr__(self):
        return f"{self.__class__.__name__}.{self.name}"


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class FromDict:
    """Allows to ignore extra fields when creating a dataclass from a dict."""

    # noinspection PyArgumentList
    @classmethod
    def from_dict(cls, data: dict, **kwargs):
        return cls(
            **{
                k: v
                for k, v in (data | kwargs).items()
                if k in (f.name for f in dataclasses.fields(cls))
            }
        )


def entropy_bits(masses: Iterable[float | Fraction]) -> float:
    """
    Shannon entropy in bits of a finite mass vector, with ``0 log 0 = 0``.

    The masses are used as given (they are expected to sum to 1).
    """
    arr = np.fromiter((float(m) for m in masses), dtype=float)
    arr = arr[arr > 0]
    if arr.size <= 1:
        return 0.0
    return float(stats.entropy(arr, base=2))


def log2(x: float | Fraction) -> float:
    """Base-2 logarithm that accepts exact rationals without losing range."""
    if isinstance(x, Fraction):
        return math.log2(x.numerator) - math.log2(x.denominator)
    return math.log2(x)


def chunk_sizes(total: int, chunk: int = DEFAULT_CHUNK) -> list[int]:
    """Split ``total`` samples into fixed-size chunks (the last one may be shorter)."""
    full, rest = divmod(total, chunk)
    return [chunk] * full + ([rest] if rest else [])


def derive_seed(seed: int | Sequence[int], *tags: int) -> tuple[int, ...]:
    """A child seed ``(seed..., tags...)`` for an independent stream of the same run."""
    base = (seed,) if isinstance(seed, (int, np.integer)) else tuple(seed)
    return tuple(int(s) for s in base) + tuple(tags)


def seeded_chunks(
    func: Callable[[int, np.random.Generator], _T],
    total: int,
    seed: int | Sequence[int],
    workers: int = DEFAULT_WORKERS,
    chunk: int = DEFAULT_CHUNK,
) -> list[_T]:
    """
    Run ``func(size, rng)`` over fixed-size chunks, each with its own generator.

    The generators are spawned from ``numpy.random.SeedSequence(seed)`` in chunk order, so the returned
    list is identical for any number of workers.

    Args:
        func: Called once per chunk with the chunk size and its generator.
        total: Total number of samples.
        seed: Root seed (an int or a sequence of ints, e.g. ``(seed, purpose)``).
        workers: Number of threads to use.
        chunk: Chunk size.

    Returns:
        The per-chunk results in chunk order.
    """
    sizes = chunk_sizes(total, chunk)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    rngs = [np.random.default_rng(s) for s in children]
    if workers <= 1 or len(sizes) <= 1:
        return [func(size, rng) for size, rng in zip(sizes, rngs)]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, sizes, rngs))


def jsonable(value: Any) -> Any:
    """Convert numbers, tuples and numpy scalars into plain JSON values (exact rationals become strings)."""
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else int(value)
    if isinstance(value, (np.floating,)):
        value = float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    return value
