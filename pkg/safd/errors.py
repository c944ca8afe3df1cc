"""
This module contains the errors that can be raised while building models, computing dimensions or running experiments.

All errors derive from :class:`SafdError`. The CLI maps each category to an exit code through ``__exit_code__``.
"""

from __future__ import annotations

import functools
from typing import Any, Type


class SafdError(Exception):
    """
    Base exception for all safd errors.

    Attributes:
        message: The error message.
        details: Extra structured information about the failure (optional).
    """

    code: str = "safd_error"
    __exit_code__: int = 1

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> dict[str, Any]:
        """Serialize the error for reports."""
        return {
            "error": self.__class__.__name__,
            "code": self.code,
            "message": self.message,
            "details": self.details,
        }

    @staticmethod
    @functools.cache
    def _all_exceptions() -> tuple[Type["SafdError"], ...]:
        """Get all the concrete exceptions (the subclasses of the category bases)."""
        return tuple(
            ss for s in SafdError.__subclasses__() for ss in s.__subclasses__()
        )

    def __str__(self) -> str:
        return f"{self.__class__.__name__}(message={self.message!r}, details={self.details!r})"

    def __repr__(self) -> str:
        return self.__str__()


class ValidationError(SafdError):
    """Base exception for invalid models, arguments or preconditions."""

    code = "validation_error"
    __exit_code__ = 2


class RateOutOfRange(ValidationError):
    """A contraction rate ``r`` does not satisfy ``0 < |r| < 1``."""

    code = "rate_out_of_range"


class BadWeights(ValidationError):
    """The probability vector has negative entries, the wrong length, or does not sum to 1."""

    code = "bad_weights"


class DimensionMismatch(ValidationError):
    """A map does not have exactly ``d`` rates and ``d`` offsets (or two objects disagree on ``d``)."""

    code = "dimension_mismatch"


class SymbolOutOfRange(ValidationError):
    """A word uses a symbol outside the alphabet of the system."""

    code = "symbol_out_of_range"


class EmptyCoordinateSet(ValidationError):
    """A coordinate restriction was requested with an empty coordinate set."""

    code = "empty_coordinate_set"


class NegativeArgument(ValidationError):
    """A function defined on ``[0, inf)`` received a negative argument."""

    code = "negative_argument"


class NotPlanar(ValidationError):
    """The operation is only defined for systems on the plane (``d = 2``)."""

    code = "not_planar"


class DegenerateAffinity(ValidationError):
    """The affinity dimension is outside the open interval required by the operation."""

    code = "degenerate_affinity"


class PreconditionViolated(ValidationError):
    """A documented precondition of the operation does not hold."""

    code = "precondition_violated"


class BadTranslations(ValidationError):
    """A translation column repeats an entry (the typical-dimension sweep needs distinct entries)."""

    code = "bad_translations"


class ConfigError(ValidationError):
    """An experiment configuration knob is missing or not positive."""

    code = "config_error"


class ModelFormatError(ValidationError):
    """The model description could not be parsed."""

    code = "model_format_error"


# ====================================================================================================


class ComputationError(SafdError):
    """Base exception for computations that could not be completed."""

    code = "computation_error"
    __exit_code__ = 3


class NoConvergence(ComputationError):
    """A root finder did not converge within its iteration cap."""

    code = "no_convergence"


class BudgetExceeded(ComputationError):
    """An exact enumeration would exceed the configured budget of composed maps or atoms."""

    code = "budget_exceeded"


# ====================================================================================================


class MeasureError(SafdError):
    """Base exception for failures while sampling or slicing discrete measures."""

    code = "measure_error"
    __exit_code__ = 2


class InsufficientDepth(MeasureError):
    """The truncation depth is too small for the requested resolution."""

    code = "insufficient_depth"


class ZeroMassBlock(MeasureError):
    """A component was requested on a partition block of zero mass."""

    code = "zero_mass_block"


class ZeroMassClass(MeasureError):
    """A linear-part class of zero mass was used as a step of an omega prefix."""

    code = "zero_mass_class"


class InsufficientResolution(MeasureError):
    """Too few radii or levels are resolvable by the sample to fit a slope."""

    code = "insufficient_resolution"


# ====================================================================================================


class HypothesisError(SafdError):
    """Base exception for experiments whose mathematical hypotheses fail."""

    code = "hypothesis_error"
    __exit_code__ = 2


class HypothesisViolated(HypothesisError):
    """The hypotheses of the experiment do not hold for the given model or parameters."""

    code = "hypothesis_violated"
