"""Experiment configuration and the machine-readable reports experiments and commands emit."""

from __future__ import annotations

__all__ = [
    "VerdictStatus",
    "Verdict",
    "Table",
    "Report",
    "ExperimentConfig",
]

import csv
import dataclasses
import io
import json
import logging
import pathlib
from fractions import Fraction
from typing import Any, Iterable

from safd import __version__, utils
from safd.errors import ConfigError

_logger = logging.getLogger(__name__)


class VerdictStatus(utils.StrEnum):
    """
    The outcome of a check.

    Attributes:
        PASS: The tested statement held within tolerance.
        FAIL: The tested statement missed its tolerance (the margin is reported).
        OBSERVATION: A recorded quantity with no pass/fail meaning.
    """

    PASS = "pass"
    FAIL = "fail"
    OBSERVATION = "observation"


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class Verdict:
    """
    A single check of a report.

    Attributes:
        name: What was checked.
        status: The outcome.
        value: The measured value.
        expected: The value it was compared against (optional).
        tolerance: The tolerance that was applied (optional for observations).
        sample_size: The number of samples behind the value (``0`` for exact computations).
        margin: By how much the tolerance was missed (``FAIL`` only).
    """

    name: str
    status: VerdictStatus
    value: Any
    expected: Any = None
    tolerance: float | None = None
    sample_size: int = 0
    margin: float | None = None

    @classmethod
    def within(
        cls,
        name: str,
        value: float,
        expected: float,
        tolerance: float,
        sample_size: int = 0,
    ) -> Verdict:
        """``PASS`` when ``|value - expected| <= tolerance``."""
        miss = abs(value - expected) - tolerance
        return cls(
            name=name,
            status=VerdictStatus.PASS if miss <= 0 else VerdictStatus.FAIL,
            value=value,
            expected=expected,
            tolerance=tolerance,
            sample_size=sample_size,
            margin=miss if miss > 0 else None,
        )

    @classmethod
    def at_most(
        cls, name: str, value: float, bound: float, tolerance: float = 0.0, sample_size: int = 0
    ) -> Verdict:
        """``PASS`` when ``value <= bound + tolerance``."""
        miss = value - bound - tolerance
        return cls(
            name=name,
            status=VerdictStatus.PASS if miss <= 0 else VerdictStatus.FAIL,
            value=value,
            expected=bound,
            tolerance=tolerance,
            sample_size=sample_size,
            margin=miss if miss > 0 else None,
        )

    @classmethod
    def at_least(
        cls, name: str, value: float, bound: float, tolerance: float = 0.0, sample_size: int = 0
    ) -> Verdict:
        """``PASS`` when ``value >= bound - tolerance``."""
        miss = bound - tolerance - value
        return cls(
            name=name,
            status=VerdictStatus.PASS if miss <= 0 else VerdictStatus.FAIL,
            value=value,
            expected=bound,
            tolerance=tolerance,
            sample_size=sample_size,
            margin=miss if miss > 0 else None,
        )

    @classmethod
    def holds(cls, name: str, ok: bool, value: Any = None, sample_size: int = 0) -> Verdict:
        """``PASS`` for a boolean statement that is exactly true or false."""
        return cls(
            name=name,
            status=VerdictStatus.PASS if ok else VerdictStatus.FAIL,
            value=ok if value is None else value,
            tolerance=0.0,
            sample_size=sample_size,
        )

    @classmethod
    def observation(cls, name: str, value: Any, sample_size: int = 0) -> Verdict:
        return cls(
            name=name,
            status=VerdictStatus.OBSERVATION,
            value=value,
            sample_size=sample_size,
        )

    def to_dict(self) -> dict:
        return utils.jsonable(
            {
                "name": self.name,
                "status": self.status,
                "value": self.value,
                "expected": self.expected,
                "tolerance": self.tolerance,
                "sample_size": self.sample_size,
                "margin": self.margin,
            }
        )


@dataclasses.dataclass(frozen=True, slots=True)
class Table:
    """
    A named table of rows.

    Attributes:
        name: The table name (also used as the CSV file suffix).
        columns: The column headers.
        rows: The rows (one value per column).
    """

    name: str
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]

    @classmethod
    def of(cls, name: str, columns: Iterable[str], rows: Iterable[Iterable]) -> Table:
        return cls(name=name, columns=tuple(columns), rows=tuple(tuple(r) for r in rows))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "columns": list(self.columns),
            "rows": utils.jsonable(self.rows),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow(
                "" if v is None else v for v in utils.jsonable(list(row))
            )
        return buf.getvalue()


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class Report:
    """
    The result of a command or an experiment.

    Attributes:
        experiment: The experiment (or command) name.
        config: The knobs it ran with.
        tables: Result tables.
        verdicts: Checks, each carrying its tolerance and sample size.
        seed: The root seed (``None`` for exact computations).
        version: The safd version that produced the report.
    """

    experiment: str
    config: dict[str, Any] = dataclasses.field(default_factory=dict)
    tables: tuple[Table, ...] = ()
    verdicts: tuple[Verdict, ...] = ()
    seed: int | None = None
    version: str = __version__

    @property
    def passed(self) -> bool:
        """No verdict failed."""
        return all(v.status != VerdictStatus.FAIL for v in self.verdicts)

    @property
    def failures(self) -> tuple[Verdict, ...]:
        return tuple(v for v in self.verdicts if v.status == VerdictStatus.FAIL)

    def table(self, name: str) -> Table:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "config": utils.jsonable(self.config),
            "tables": [t.to_dict() for t in self.tables],
            "verdicts": [v.to_dict() for v in self.verdicts],
            "seed": self.seed,
            "version": self.version,
        }

    def to_json(self) -> str:
        """Byte-stable JSON (sorted keys, fixed indentation)."""
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self, table: str | None = None) -> str:
        """The CSV text of one table (the first one by default)."""
        if not self.tables:
            return ""
        return (self.table(table) if table else self.tables[0]).to_csv()

    def write_json(self, path: str | pathlib.Path) -> None:
        pathlib.Path(path).write_text(self.to_json(), encoding="utf-8")
        _logger.info("Wrote report %s to %s", self.experiment, path)

    def write_csv(self, path: str | pathlib.Path) -> list[pathlib.Path]:
        """
        Write the tables as CSV.

        A single table goes to ``path``; several tables go to ``<stem>.<table>.csv`` next to it.
        """
        path = pathlib.Path(path)
        if len(self.tables) == 1:
            targets = [(path, self.tables[0])]
        else:
            targets = [
                (path.with_name(f"{path.stem}.{t.name}{path.suffix or '.csv'}"), t)
                for t in self.tables
            ]
        for target, t in targets:
            target.write_text(t.to_csv(), encoding="utf-8")
            _logger.info("Wrote table %s to %s", t.name, target)
        return [target for target, _ in targets]


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class ExperimentConfig(utils.FromDict):
    """
    The knobs of an experiment run. The seed is mandatory.

    Attributes:
        experiment: The experiment name.
        seed: The root seed.
        model: A model fixture name or path (``None`` for the experiment's default).
        samples: Monte-Carlo sample size.
        depth: Truncation depth of the coding map (raised to what the finest level needs).
        levels: The dyadic level band ``(lo, hi)`` (``None`` for the default band).
        trials: Number of random trials (sweeps only).
        N: Block length of the linear-part partition.
        n: Number of blocks (or the construction parameter of the counterexample).
        lam: The contraction ratio of the counterexample, as an exact rational string.
        M: Scale ratio of the concentration experiment.
        eps: Entropy per block, in bits, of the smoothing measure of the entropy-increase experiment.
        tolerance: Dimension tolerance.
        workers: Sampling threads (never changes the results).
        budget: Cap on exact enumerations.
    """

    experiment: str
    seed: int
    model: str | None = None
    samples: int = 200_000
    depth: int = 48
    levels: tuple[int, int] | None = None
    trials: int = 50
    N: int = 2
    n: int = 4
    lam: str = "3/4"
    M: int = 2
    eps: float = 1.0
    tolerance: float = 0.1
    workers: int = utils.DEFAULT_WORKERS
    budget: int = utils.DEFAULT_BUDGET

    def __post_init__(self):
        if self.seed is None or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(
                f"A nonnegative integer seed is required, got {self.seed!r}.",
                details={"field": "seed"},
            )
        for name in ("samples", "depth", "N", "n", "M", "workers", "budget"):
            if getattr(self, name) <= 0:
                raise ConfigError(
                    f"{name} must be positive, got {getattr(self, name)!r}.",
                    details={"field": name},
                )
        if self.trials < 0:
            raise ConfigError(f"trials must be nonnegative, got {self.trials!r}.")
        if self.eps <= 0:
            raise ConfigError(f"eps must be positive, got {self.eps!r}.", details={"field": "eps"})
        if self.tolerance <= 0:
            raise ConfigError(f"tolerance must be positive, got {self.tolerance!r}.")
        try:
            Fraction(self.lam)
        except (TypeError, ValueError, ZeroDivisionError) as e:
            raise ConfigError(
                f"lam must be a rational such as \"3/4\", got {self.lam!r}.",
                details={"field": "lam"},
            ) from e
        if self.levels is not None:
            lo, hi = self.levels
            if not 0 <= lo < hi:
                raise ConfigError(
                    f"levels must satisfy 0 <= lo < hi, got {self.levels!r}.",
                    details={"field": "levels"},
                )
            object.__setattr__(self, "levels", (int(lo), int(hi)))

    def to_dict(self) -> dict:
        """Every field that can change a result (``workers`` is left out)."""
        return {
            f.name: getattr(self, f.name)
            for f in dataclasses.fields(self)
            if f.name != "workers"
        }
