"""
Building and loading weighted diagonal systems, composing words, the truncated coding map,
Lyapunov exponents, entropy and coordinate-induced subsystems.
"""

from __future__ import annotations

__all__ = [
    "build_model",
    "load_model",
    "model_to_dict",
    "weighted_model",
    "has_distinct_exponents",
    "compose_word",
    "level_maps",
    "truncated_coding",
    "lyapunov_exponents",
    "shannon_entropy",
    "induce_on_coords",
    "induce_model",
    "parse_word",
    "format_word",
    "counterexample_ifs",
]

import importlib.resources
import itertools
import json
import logging
import math
import pathlib
from fractions import Fraction
from typing import Any, Iterable, Sequence

from safd import utils
from safd.errors import (
    BudgetExceeded,
    DimensionMismatch,
    EmptyCoordinateSet,
    HypothesisViolated,
    ModelFormatError,
    SymbolOutOfRange,
)
from safd.types.ifs import (
    AffineMap,
    ComposedMap,
    DiagonalAffineIFS,
    NumberMode,
    Scalar,
    TruncatedPoint,
    WeightedModel,
    Word,
)

_logger = logging.getLogger(__name__)

_EXPONENT_TIE_TOL = 1e-12


def _is_rational_string(value: Any) -> bool:
    return isinstance(value, str) and "/" in value


def _parse_scalar(value: Any, mode: NumberMode, where: str) -> Scalar:
    if isinstance(value, bool) or not isinstance(value, (int, float, str, Fraction)):
        raise ModelFormatError(
            f"{where}: expected a number or a 'num/den' string, got {value!r}.",
            details={"field": where},
        )
    try:
        if mode is NumberMode.EXACT:
            return Fraction(value) if isinstance(value, (str, Fraction, int)) else Fraction(str(value))
        return float(Fraction(value)) if isinstance(value, str) else float(value)
    except (ValueError, ZeroDivisionError) as e:
        raise ModelFormatError(
            f"{where}: cannot parse {value!r} ({e}).", details={"field": where}
        ) from e


def _scalars(data: dict) -> Iterable[Any]:
    for m in data.get("maps", ()):
        if isinstance(m, dict):
            yield from m.get("r", ())
            yield from m.get("t", ())
    p = data.get("p")
    if isinstance(p, list):
        yield from p


def weighted_model(
    ifs: DiagonalAffineIFS,
    p: Sequence[Scalar] | None = None,
    name: str | None = None,
) -> WeightedModel:
    """
    Pair a system with a probability vector, sorting the coordinates by increasing Lyapunov exponent.

    Coinciding exponents are allowed but logged as a warning (the main dimension equality needs them distinct).

    Args:
        ifs: The system, in the user's coordinate order.
        p: The weights (uniform when omitted).
        name: A label for reports.

    Returns:
        The model, with the sorting permutation recorded in ``coordinate_order``.
    """
    if p is None:
        p = tuple(ifs.mode.coerce(Fraction(1, ifs.size)) for _ in ifs.maps)
    else:
        p = tuple(ifs.mode.coerce(w) for w in p)
    unsorted = WeightedModel(ifs=ifs, p=p, name=name)
    chi = lyapunov_exponents(unsorted)
    order = tuple(sorted(range(ifs.d), key=lambda j: chi[j]))
    sorted_ifs = DiagonalAffineIFS(
        d=ifs.d, maps=tuple(m.restrict(order) for m in ifs.maps), mode=ifs.mode
    )
    model = WeightedModel(ifs=sorted_ifs, p=p, coordinate_order=order, name=name)
    sorted_chi = [chi[j] for j in order]
    for a, b in itertools.pairwise(range(ifs.d)):
        if math.isclose(sorted_chi[a], sorted_chi[b], rel_tol=_EXPONENT_TIE_TOL):
            _logger.warning(
                "Lyapunov exponents of coordinates %d and %d coincide (%.12g); "
                "the dimension equality is not guaranteed for %s",
                order[a],
                order[b],
                sorted_chi[a],
                name or "this model",
                extra={"safd_event": "equal_exponents", "coords": (order[a], order[b])},
            )
    return model


def has_distinct_exponents(model: WeightedModel) -> bool:
    """Whether ``χ_1 < ... < χ_d`` strictly (up to a relative tolerance of ``1e-12``)."""
    chi = lyapunov_exponents(model)
    return all(
        not math.isclose(a, b, rel_tol=_EXPONENT_TIE_TOL)
        for a, b in itertools.pairwise(chi)
    )


def build_model(
    data: dict, exact: bool | None = None, name: str | None = None
) -> WeightedModel:
    """
    Build a validated model from its parsed description.

    The description reads ``{"d": 2, "maps": [{"r": ["1/2", "1/3"], "t": ["0", "0"]}, ...], "p": [...]}``.
    ``d`` may be omitted (it is read off the first map) and so may ``p`` (uniform weights).
    Rational strings such as ``"1/3"`` put the whole model in exact mode, and any decimal in an exact
    model is then read as the exact decimal it spells.

    Example:

        >>> from safd import build_model
        >>> m = build_model({"maps": [{"r": ["1/3"], "t": ["0"]}, {"r": ["1/3"], "t": ["2/3"]}]})
        >>> m.mode
        NumberMode.EXACT

    Args:
        data: The parsed description.
        exact: Force exact (``True``) or float (``False``) arithmetic; inferred when ``None``.
        name: A label for reports (defaults to ``data["name"]``).

    Raises:
        ModelFormatError: The description is malformed.
        RateOutOfRange: Some ``|r|`` is not in ``(0, 1)``.
        BadWeights: The weights are not a probability vector.
        DimensionMismatch: A map does not have ``d`` rates and ``d`` offsets.
    """
    if not isinstance(data, dict) or not isinstance(data.get("maps"), list):
        raise ModelFormatError("A model needs a 'maps' list.")
    if not data["maps"]:
        raise DimensionMismatch("A system needs at least one map.")
    if exact is None:
        exact = any(_is_rational_string(v) for v in _scalars(data))
    mode = NumberMode.EXACT if exact else NumberMode.FLOAT
    maps = []
    for i, m in enumerate(data["maps"]):
        if not isinstance(m, dict) or "r" not in m or "t" not in m:
            raise ModelFormatError(
                f"Map {i} must be an object with 'r' and 't' lists.", details={"map": i}
            )
        maps.append(
            AffineMap(
                rates=tuple(
                    _parse_scalar(v, mode, f"maps[{i}].r[{j}]") for j, v in enumerate(m["r"])
                ),
                offsets=tuple(
                    _parse_scalar(v, mode, f"maps[{i}].t[{j}]") for j, v in enumerate(m["t"])
                ),
            )
        )
    d = data.get("d", len(maps[0].rates))
    if not isinstance(d, int):
        raise ModelFormatError(f"'d' must be an integer, got {d!r}.")
    p = data.get("p")
    if p is not None:
        if not isinstance(p, list):
            raise ModelFormatError("'p' must be a list.")
        p = tuple(_parse_scalar(v, mode, f"p[{i}]") for i, v in enumerate(p))
    ifs = DiagonalAffineIFS(d=d, maps=tuple(maps), mode=mode)
    return weighted_model(ifs, p, name=name or data.get("name"))


def load_model(
    source: str | pathlib.Path, exact: bool | None = None
) -> WeightedModel:
    """
    Load a model from a JSON file, or from a bundled fixture by name.

    Example:

        >>> from safd import load_model
        >>> load_model("cantor").d
        1

    Args:
        source: A path to a JSON file, or the name of a bundled fixture (``cantor``, ``mcmullen``,
            ``example_ab``, ``remark13``, ``swapped``, ``overlap``, ``homogeneous3``).
        exact: Forwarded to :func:`build_model`.

    Raises:
        ModelFormatError: The file does not exist or is not valid JSON.
    """
    path = pathlib.Path(source)
    if path.is_file():
        text, default_name = path.read_text(encoding="utf-8"), path.stem
    else:
        fixture = importlib.resources.files("safd.models") / f"{source}.json"
        if not fixture.is_file():
            raise ModelFormatError(
                f"No model file or bundled fixture named {str(source)!r}.",
                details={"source": str(source)},
            )
        text, default_name = fixture.read_text(encoding="utf-8"), str(source)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"{source}: invalid JSON ({e}).") from e
    _logger.debug("Loaded model %s (%d maps)", default_name, len(data.get("maps", ())))
    return build_model(data, exact=exact, name=data.get("name", default_name))


def _scalar_to_json(value: Scalar) -> str | float:
    return str(value) if isinstance(value, Fraction) else value


def model_to_dict(model: WeightedModel) -> dict:
    """The description of a model in the format :func:`build_model` reads, in the user's coordinate order."""
    maps = []
    for m in model.ifs.maps:
        maps.append(
            {
                "r": [_scalar_to_json(v) for v in model.to_user_order(m.rates)],
                "t": [_scalar_to_json(v) for v in model.to_user_order(m.offsets)],
            }
        )
    out = {"d": model.d, "maps": maps, "p": [_scalar_to_json(w) for w in model.p]}
    if model.name:
        out["name"] = model.name
    return out


def _generator(ifs: DiagonalAffineIFS, i: int) -> ComposedMap:
    m = ifs.maps[i]
    return ComposedMap(rates=m.rates, offsets=m.offsets, word=(i,))


def compose_word(ifs: DiagonalAffineIFS, word: Sequence[int]) -> ComposedMap:
    """
    ``φ_I = φ_{i_1} ∘ ... ∘ φ_{i_n}``, exact in exact mode. The empty word gives the identity.

    Raises:
        SymbolOutOfRange: A symbol is not in ``{0, ..., |Λ|-1}``.
    """
    out = ComposedMap.identity(ifs.d, ifs.mode)
    for k, i in enumerate(word):
        if not 0 <= i < ifs.size:
            raise SymbolOutOfRange(
                f"Symbol {i} at position {k} is outside the alphabet of size {ifs.size}.",
                details={"symbol": i, "position": k},
            )
        out = out.compose(_generator(ifs, i))
    return out


def level_maps(
    ifs: DiagonalAffineIFS, n: int, budget: int = utils.DEFAULT_BUDGET
) -> list[ComposedMap]:
    """
    All ``|Λ|^n`` composed maps of level ``n``, in lexicographic word order.

    Raises:
        BudgetExceeded: ``|Λ|^n`` is above ``budget``.
    """
    if ifs.size**n > budget:
        raise BudgetExceeded(
            f"{ifs.size}^{n} composed maps exceed the budget of {budget}.",
            details={"alphabet": ifs.size, "n": n, "budget": budget},
        )
    gens = [_generator(ifs, i) for i in range(ifs.size)]
    level = [ComposedMap.identity(ifs.d, ifs.mode)]
    for _ in range(n):
        level = [u.compose(g) for u in level for g in gens]
    return level


def truncated_coding(ifs: DiagonalAffineIFS, word: Sequence[int]) -> TruncatedPoint:
    """
    ``φ_I(0)``, the truncation of the coding map at ``I``, with a bound on its distance to ``Π(Ix)``.

    The bound in coordinate ``j`` is ``λ^I_j · max_i |t_{i,j}| / (1 - max_i |r_{i,j}|)``.
    """
    m = compose_word(ifs, word)
    error = tuple(
        m.scales[j] * ifs.coord_offset_bound(j) / (1 - ifs.coord_r_max(j))
        for j in range(ifs.d)
    )
    return TruncatedPoint(point=m.offsets, error=error, word=tuple(word))


def lyapunov_exponents(model: WeightedModel) -> tuple[float, ...]:
    """
    ``χ_j = -Σ_i p_i log|r_{i,j}|`` in bits, in the model's (sorted) coordinate order.
    """
    return tuple(
        sum(
            -float(p) * utils.log2(abs(m.rates[j]))
            for p, m in zip(model.p, model.ifs.maps)
            if p
        )
        for j in range(model.d)
    )


def shannon_entropy(p: Iterable[Scalar]) -> float:
    """``H(p) = -Σ p_i log p_i`` in bits, with ``0 log 0 = 0``."""
    return utils.entropy_bits(p)


def _coords(d: int, coords: Iterable[int]) -> tuple[int, ...]:
    picked = tuple(sorted(set(coords)))
    if not picked:
        raise EmptyCoordinateSet("The coordinate set J must not be empty.")
    if picked[0] < 0 or picked[-1] >= d:
        raise DimensionMismatch(
            f"Coordinates {picked} are not all in 0..{d - 1}.",
            details={"coords": list(picked), "d": d},
        )
    return picked


def induce_on_coords(ifs: DiagonalAffineIFS, coords: Iterable[int]) -> DiagonalAffineIFS:
    """
    The system ``Φ_J`` induced on the coordinates ``J`` (0-based).

    Raises:
        EmptyCoordinateSet: ``J`` is empty.
    """
    picked = _coords(ifs.d, coords)
    return DiagonalAffineIFS(
        d=len(picked), maps=tuple(m.restrict(picked) for m in ifs.maps), mode=ifs.mode
    )


def induce_model(model: WeightedModel, coords: Iterable[int]) -> WeightedModel:
    """The weighted system induced on the (sorted, 0-based) coordinates ``J``."""
    picked = _coords(model.d, coords)
    return WeightedModel(
        ifs=induce_on_coords(model.ifs, picked),
        p=model.p,
        name=f"{model.name}|J={picked}" if model.name else None,
    )


def parse_word(text: str, size: int | None = None) -> Word:
    """
    Parse ``"012"`` (one digit per symbol) or ``"10.3.11"`` (dot-separated symbols) into a word.

    Raises:
        SymbolOutOfRange: A symbol is not a nonnegative integer below ``size``.
    """
    text = text.strip()
    if not text:
        return ()
    parts = text.split(".") if "." in text else list(text)
    try:
        word = tuple(int(s) for s in parts)
    except ValueError as e:
        raise SymbolOutOfRange(f"Cannot read the word {text!r}.") from e
    for i in word:
        if i < 0 or (size is not None and i >= size):
            raise SymbolOutOfRange(
                f"Symbol {i} of {text!r} is outside the alphabet.",
                details={"symbol": i, "size": size},
            )
    return word


def format_word(word: Sequence[int]) -> str:
    """The inverse of :func:`parse_word`."""
    if all(i < 10 for i in word):
        return "".join(str(i) for i in word)
    return ".".join(str(i) for i in word)


def counterexample_ifs(lam: Fraction | str, n: int) -> DiagonalAffineIFS:
    """
    The planar saturation system on ``2^n`` maps whose coordinate systems both equal ``Ψ^n``.

    With ``Ψ = {λx, λx + 1}`` and ``o_u = ψ_u(0)``, the map of ``u`` is ``(λ^n x + o_u, λ^n y + o_u)`` except
    ``0...0 -> (λ^n x + o_{1...1}, λ^n y)`` and ``1...1 -> (λ^n x, λ^n y + o_{1...1})``. The Lyapunov exponents
    coincide, and the measure with uniform weights has dimension strictly below ``min{2, dim_L}``.

    Raises:
        HypothesisViolated: Unless ``1/√2 < λ < 1``, ``n > 2`` and ``λ^n < 1/3``.
    """
    lam = Fraction(lam)
    if not (lam * lam > Fraction(1, 2) and lam < 1 and n > 2 and lam**n < Fraction(1, 3)):
        raise HypothesisViolated(
            f"Need 1/sqrt(2) < λ < 1, n > 2 and λ^n < 1/3; got λ = {lam}, n = {n}.",
            details={"lambda": str(lam), "n": n, "lambda^n": str(lam**n)},
        )
    rate = lam**n
    words = list(itertools.product((0, 1), repeat=n))
    top = sum(lam**k for k in range(n))
    maps = []
    for u in words:
        o = sum(lam**k for k, uk in enumerate(u) if uk)
        if not any(u):
            offsets = (top, Fraction(0))
        elif all(u):
            offsets = (Fraction(0), top)
        else:
            offsets = (o, o)
        maps.append(AffineMap(rates=(rate, rate), offsets=offsets))
    return DiagonalAffineIFS(d=2, maps=tuple(maps), mode=NumberMode.EXACT)
