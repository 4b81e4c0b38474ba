"""Iterated-local-search sampling of local optima.

A run starts from the best of ``tau`` random configurations, descends to a
first local optimum and then repeatedly kicks the current optimum ``kappa``
random one-option steps away, descends again and records the transition
from the iteration's starting optimum to the optimum it reached.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .errors import BudgetExhausted, LonError, PartialTraceError, ValidationError
from .evaluators import Evaluator
from .space import Configuration, ConfigurationSpace, _neighbors, canonical_key, random_sample

log = logging.getLogger(__name__)

STOP_TARGET = "target"
STOP_BUDGET = "budget"
STOP_NO_NEIGHBORS = "no_neighbors"
STOP_ERROR = "error"


@dataclass(frozen=True)
class SamplerParams:
    tau: int = 10
    kappa: int = 3
    restart_prob: float = 0.05
    target_optima: int = 100
    eval_budget: int = 10_000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.tau < 2:
            raise ValidationError("tau must be >= 2")
        if self.kappa < 1:
            raise ValidationError("kappa must be >= 1")
        if not 0.0 <= self.restart_prob <= 1.0:
            raise ValidationError("restart_prob must lie in [0, 1]")
        if self.target_optima < 1:
            raise ValidationError("target_optima must be >= 1")
        if self.eval_budget < self.target_optima:
            raise ValidationError("eval_budget must be >= target_optima")

    def with_seed(self, seed: int) -> SamplerParams:
        return SamplerParams(**{**asdict(self), "seed": seed})


@dataclass
class VertexEvent:
    key: str
    fitness: float
    multiplicity: int
    seq: int


@dataclass
class EdgeEvent:
    source: str
    dest: str
    count: int
    seq: int


@dataclass
class RunTrace:
    """Local optima and transitions found by one sampling run.

    Vertices and edges are aggregated per run (repeat discoveries add to
    ``multiplicity``/``count``); ``seq`` preserves first-occurrence order.
    """

    seed: int
    params: SamplerParams
    space_hash: str = ""
    vertices: dict[str, VertexEvent] = field(default_factory=dict)
    edges: dict[tuple[str, str], EdgeEvent] = field(default_factory=dict)
    evaluations: int = 0
    unique_evaluations: int = 0
    stop_reason: str = ""
    error: str | None = None
    _seq: int = field(default=0, repr=False, compare=False)

    def add_vertex(self, key: str, fitness: float) -> None:
        v = self.vertices.get(key)
        if v is None:
            self.vertices[key] = VertexEvent(key, fitness, 1, self._next())
        else:
            v.multiplicity += 1

    def add_edge(self, source: str, dest: str) -> None:
        if source == dest:
            raise ValidationError("self-loop edges are not recorded")
        e = self.edges.get((source, dest))
        if e is None:
            self.edges[(source, dest)] = EdgeEvent(source, dest, 1, self._next())
        else:
            e.count += 1

    def _next(self) -> int:
        self._seq += 1
        return self._seq - 1

    @property
    def budget_exhausted(self) -> bool:
        return self.stop_reason == STOP_BUDGET

    def events(self) -> list[VertexEvent | EdgeEvent]:
        return sorted([*self.vertices.values(), *self.edges.values()], key=lambda e: e.seq)


class _RunBudget:
    """Counts every fitness request of one run and enforces the budget."""

    def __init__(self, evaluator: Evaluator, budget: int):
        self.evaluator = evaluator
        self.budget = budget
        self.calls = 0
        self.seen: set[Configuration] = set()

    def __call__(self, x: Configuration) -> float:
        if self.calls >= self.budget:
            raise BudgetExhausted(None, float("nan"))
        self.calls += 1
        self.seen.add(x)
        return self.evaluator(x)


def iterative_first_improvement(
    space: ConfigurationSpace,
    x: Configuration,
    evaluator: Evaluator,
    rng: np.random.Generator,
) -> tuple[Configuration, float]:
    """First-improvement descent with neutral moves.

    Neighbors are scanned in a freshly shuffled order on every pass and the
    first one with fitness ``<=`` the current one is taken.  Neutral moves
    never revisit a configuration of the same descent, which bounds the
    walk on plateaus.  Returns the local optimum and its fitness.
    """
    current = space.validate(x)
    sizes = space.sizes
    try:
        f_current = evaluator(current)
    except BudgetExhausted:
        raise BudgetExhausted(current, float("nan")) from None
    visited = {current}
    while True:
        neighbors = _neighbors(sizes, current)
        for idx in rng.permutation(len(neighbors)):
            u = neighbors[idx]
            if u in visited:
                continue
            try:
                f_u = evaluator(u)
            except BudgetExhausted:
                raise BudgetExhausted(current, f_current) from None
            if f_u <= f_current:
                current, f_current = u, f_u
                visited.add(u)
                break
        else:
            return current, f_current


def sample_run(
    space: ConfigurationSpace,
    evaluator: Evaluator,
    params: SamplerParams,
    initial: Configuration | None = None,
) -> RunTrace:
    rng = np.random.default_rng(params.seed)
    f = _RunBudget(evaluator, params.eval_budget)
    trace = RunTrace(seed=params.seed, params=params, space_hash=space.space_hash)

    def key(x: Configuration) -> str:
        return canonical_key(space, x)

    try:
        x_init = space.validate(initial) if initial is not None else random_sample(space, rng)
        f_init = f(x_init)
        for _ in range(params.tau):
            candidate = random_sample(space, rng)
            f_candidate = f(candidate)
            if f_candidate <= f_init:
                x_init, f_init = candidate, f_candidate
        x_lo, f_lo = iterative_first_improvement(space, x_init, f, rng)
        trace.add_vertex(key(x_lo), f_lo)
        current_is_optimum = True

        if space.size == 1:
            trace.stop_reason = STOP_NO_NEIGHBORS
        while not trace.stop_reason:
            if len(trace.vertices) >= params.target_optima:
                trace.stop_reason = STOP_TARGET
                break
            start = x_lo
            start_key = key(start)
            roots_edge = current_is_optimum or start_key in trace.vertices

            x_kick = start
            for _ in range(params.kappa):
                neighbors = _neighbors(space.sizes, x_kick)
                x_kick = neighbors[int(rng.integers(len(neighbors)))]
            x_new, f_new = iterative_first_improvement(space, x_kick, f, rng)

            if f_new <= f_lo:
                x_lo, f_lo = x_new, f_new
                current_is_optimum = True
            if rng.random() < params.restart_prob:
                x_lo = random_sample(space, rng)
                f_lo = f(x_lo)
                current_is_optimum = False

            new_key = key(x_new)
            trace.add_vertex(new_key, f_new)
            if roots_edge and new_key != start_key:
                trace.add_edge(start_key, new_key)
    except BudgetExhausted:
        trace.stop_reason = STOP_BUDGET
    except (LonError, OSError, ValueError) as exc:
        trace.stop_reason = STOP_ERROR
        trace.error = str(exc)
        _finish(trace, f)
        raise PartialTraceError(exc, trace) from exc
    _finish(trace, f)
    return trace


def _finish(trace: RunTrace, f: _RunBudget) -> None:
    trace.evaluations = f.calls
    trace.unique_evaluations = len(f.seen)


class SamplingFailed(LonError):
    def __init__(self, traces: list[RunTrace]):
        super().__init__(f"all {len(traces)} sampling repeats failed; first: {traces[0].error}")
        self.traces = traces


def sample_repeats(
    space: ConfigurationSpace,
    evaluator_factory: Callable[[int], Evaluator],
    params: SamplerParams,
    r_max: int = 300,
    parallelism: int = 1,
) -> list[RunTrace]:
    """Run ``r_max`` independent repeats; repeat ``j`` uses seed ``params.seed + j``.

    Results keep repeat order.  A failed repeat is returned as its partial
    trace with ``stop_reason == "error"``; only a batch in which every
    repeat fails raises :class:`SamplingFailed`.
    """
    if r_max < 1:
        raise ValidationError("r_max must be >= 1")

    def one(j: int) -> RunTrace:
        try:
            return sample_run(space, evaluator_factory(j), params.with_seed(params.seed + j))
        except PartialTraceError as exc:
            log.warning("repeat %d failed: %s", j, exc.cause)
            return exc.trace

    if parallelism <= 1:
        traces = [one(j) for j in range(r_max)]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            traces = list(pool.map(one, range(r_max)))
    if all(t.stop_reason == STOP_ERROR for t in traces):
        raise SamplingFailed(traces)
    return traces
