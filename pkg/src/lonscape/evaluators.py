"""Fitness backends (lower is better) and the shared evaluation cache.

Three backends are provided: a measurement table replayed from CSV, a
seeded NK landscape, and an external command that is executed per
configuration.  All of them are callables ``f(configuration) -> float``.
"""

from __future__ import annotations

import csv
import math
import re
import statistics
import subprocess
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    DomainError,
    MeasurementFailure,
    MeasurementParseError,
    MeasurementTimeout,
    MissingMeasurementError,
    ValidationError,
)
from .space import Configuration, ConfigurationSpace, canonical_key

Evaluator = Callable[[Configuration], float]

AGGREGATIONS: dict[str, Callable[[Sequence[float]], float]] = {
    "mean": statistics.fmean,
    "median": statistics.median,
    "min": min,
}


def _finite(value: float, what: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"non-finite fitness {value!r} for {what}")
    return value


# -- measurement table -------------------------------------------------------


def evaluate_table(table: Mapping[str, float], key: str) -> float:
    try:
        return table[key]
    except KeyError:
        raise MissingMeasurementError(key) from None


class TableEvaluator:
    def __init__(self, space: ConfigurationSpace, table: Mapping[str, float], maximize: bool = False):
        self.space = space
        self.table = dict(table)
        self.maximize = maximize

    def __call__(self, x: Configuration) -> float:
        return evaluate_table(self.table, canonical_key(self.space, x))

    @classmethod
    def from_csv(cls, space: ConfigurationSpace, path: str | Path, maximize: bool = False) -> TableEvaluator:
        return cls(space, load_table(space, path, maximize=maximize), maximize=maximize)


def load_table(space: ConfigurationSpace, path: str | Path, maximize: bool = False) -> dict[str, float]:
    """Read a measurement CSV into a ``canonical key -> fitness`` map.

    The header must be the option names in space order followed by
    ``fitness``.  With ``maximize`` the values are negated so the rest of
    the pipeline can keep minimizing.
    """
    table: dict[str, float] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        expected = list(space.names) + ["fitness"]
        if header != expected:
            raise ValidationError(f"{path}: header {header} does not match {expected}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected):
                raise ValidationError(f"{path}:{lineno}: expected {len(expected)} cells")
            x = space.from_tokens(row[:-1])
            try:
                value = float(row[-1])
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: bad fitness {row[-1]!r}") from None
            value = _finite(-value if maximize else value, f"{path}:{lineno}")
            table[canonical_key(space, x)] = value
    return table


def write_table(space: ConfigurationSpace, table: Mapping[str, float], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(space.names) + ["fitness"])
        for key in sorted(table):
            writer.writerow(key.split("|") + [repr(float(table[key]))])


# -- NK landscapes -----------------------------------------------------------


@dataclass(frozen=True)
class NKLandscapeSpec:
    n: int
    k: int
    seed: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValidationError("NK landscapes need n >= 1")
        if not 0 <= self.k <= self.n - 1:
            raise ValidationError(f"k must lie in [0, n-1], got k={self.k}, n={self.n}")

    def contributions(self) -> np.ndarray:
        return np.random.default_rng(self.seed).random((self.n, 2 ** (self.k + 1)))


def evaluate_nk(tables: np.ndarray | Sequence[Sequence[float]], k: int, x: Sequence[int]) -> float:
    n = len(x)
    total = 0.0
    for i in range(n):
        idx = 0
        for j in range(k + 1):
            bit = x[(i + j) % n]
            if bit not in (0, 1):
                raise DomainError(f"NK landscapes are binary; option {(i + j) % n} has value {bit}")
            idx = (idx << 1) | bit
        total += tables[i][idx]
    return total / n


class NKLandscape:
    """Minimization NK model with adjacent (cyclic) epistasis.

    Contribution ``c_i`` depends on bits ``i, i+1, ..., i+k`` (mod n),
    with ``x_i`` the most significant bit of the table index.
    """

    def __init__(self, spec: NKLandscapeSpec, tables: np.ndarray | None = None):
        self.spec = spec
        tables = spec.contributions() if tables is None else np.asarray(tables, dtype=float)
        if tables.shape != (spec.n, 2 ** (spec.k + 1)):
            raise ValidationError(f"contribution tables must have shape {(spec.n, 2 ** (spec.k + 1))}")
        self._tables = tables.tolist()

    @property
    def space(self) -> ConfigurationSpace:
        return ConfigurationSpace.binary(self.spec.n)

    def __call__(self, x: Configuration) -> float:
        if len(x) != self.spec.n:
            raise DomainError(f"expected {self.spec.n} binary options, got {len(x)}")
        return evaluate_nk(self._tables, self.spec.k, x)


# -- external command --------------------------------------------------------

_PLACEHOLDER = re.compile(r"\{([^{}]+)\}")


def substitute(template: str, space: ConfigurationSpace, x: Configuration) -> str:
    values = dict(zip(space.names, space.tokens(x)))

    def repl(m: re.Match) -> str:
        try:
            return values[m.group(1)]
        except KeyError:
            raise ValidationError(f"template placeholder {m.group(0)} names no option") from None

    return _PLACEHOLDER.sub(repl, template)


def check_template(template: str, space: ConfigurationSpace) -> None:
    found = set(_PLACEHOLDER.findall(template))
    missing = set(space.names) - found
    unknown = found - set(space.names)
    if missing or unknown:
        raise ValidationError(
            f"template placeholders mismatch: missing {sorted(missing)}, unknown {sorted(unknown)}"
        )


def run_measurement(command: str, timeout: float | None) -> float:
    try:
        proc = subprocess.run(command, shell=True, capture_output=True, text=True, timeout=timeout)
    except subprocess.TimeoutExpired:
        raise MeasurementTimeout(f"timed out after {timeout}s", command) from None
    if proc.returncode != 0:
        raise MeasurementFailure(f"exit status {proc.returncode}", command)
    lines = proc.stdout.strip().splitlines()
    if not lines:
        raise MeasurementParseError("no output", command)
    try:
        value = float(lines[-1].strip())
    except ValueError:
        raise MeasurementParseError(f"cannot parse {lines[-1].strip()!r}", command) from None
    if not math.isfinite(value):
        raise MeasurementParseError(f"non-finite value {value!r}", command)
    return value


def evaluate_external(
    cmd_template: str,
    space: ConfigurationSpace,
    x: Configuration,
    timeout: float | None = None,
    repeats: int = 1,
    aggregation: str = "median",
) -> float:
    command = substitute(cmd_template, space, x)
    samples = [run_measurement(command, timeout) for _ in range(repeats)]
    return float(AGGREGATIONS[aggregation](samples))


class ExternalCommandEvaluator:
    def __init__(
        self,
        space: ConfigurationSpace,
        template: str,
        timeout: float | None = None,
        repeats: int = 1,
        aggregation: str = "median",
        max_in_flight: int = 1,
        maximize: bool = False,
    ):
        check_template(template, space)
        if repeats < 1:
            raise ValidationError("repeats must be >= 1")
        if aggregation not in AGGREGATIONS:
            raise ValidationError(f"aggregation must be one of {sorted(AGGREGATIONS)}")
        self.space = space
        self.template = template
        self.timeout = timeout
        self.repeats = repeats
        self.aggregation = aggregation
        self.maximize = maximize
        self._slots = threading.BoundedSemaphore(max(1, max_in_flight))

    def __call__(self, x: Configuration) -> float:
        with self._slots:
            value = evaluate_external(
                self.template, self.space, x, self.timeout, self.repeats, self.aggregation
            )
        return -value if self.maximize else value


# -- memoization -------------------------------------------------------------


@dataclass
class EvaluationCache:
    """Thread-safe memo in front of a backend; keyed by configuration."""

    backend: Evaluator
    values: dict[Configuration, float] = field(default_factory=dict)
    hits: int = 0
    misses: int = 0

    def __post_init__(self) -> None:
        self._lock = threading.Lock()
        self._pending: dict[Configuration, threading.Event] = {}

    def __call__(self, x: Configuration) -> float:
        while True:
            with self._lock:
                if x in self.values:
                    self.hits += 1
                    return self.values[x]
                waiter = self._pending.get(x)
                if waiter is None:
                    self.misses += 1
                    done = self._pending[x] = threading.Event()
                    break
            waiter.wait()
        try:
            value = _finite(self.backend(x), str(x))
            with self._lock:
                self.values[x] = value
            return value
        finally:
            with self._lock:
                self._pending.pop(x, None)
            done.set()

    @property
    def lookups(self) -> int:
        return self.hits + self.misses

    def __len__(self) -> int:
        return len(self.values)
