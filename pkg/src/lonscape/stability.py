"""How many sampling repeats make a structurally stable merged LON.

For growing subset sizes ``step * i`` we merge ``resamples`` random
subsets of the run pool and record assortativity (AC) and average
clustering (ACC) of each merge.  Once three consecutive sizes are
available, rank-sum tests compare sizes ``i-2`` vs ``i-1`` and ``i-1`` vs
``i`` on both metrics; the first ``i`` where none of the four tests
detects a difference (``p >= alpha``) fixes the stable size ``step*(i-1)``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InsufficientDataError, ValidationError
from .lon import LocalOptimaNetwork, build_run_lon, synthesize
from .metrics import assortativity, average_clustering, wilcoxon_rank_sum
from .sampler import RunTrace


@dataclass
class StabilityConfig:
    pool: Sequence[RunTrace | LocalOptimaNetwork]
    step: int = 10
    resamples: int = 20
    alpha: float = 0.05
    seed: int = 0
    parallelism: int = 1

    def __post_init__(self) -> None:
        if self.step < 1:
            raise ValidationError("step must be >= 1")
        if self.resamples < 2:
            raise ValidationError("resamples must be >= 2")
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError("alpha must lie in (0, 1)")
        if len(self.pool) < 3 * self.step:
            raise ValidationError(f"pool of {len(self.pool)} runs is smaller than 3*step = {3 * self.step}")


@dataclass
class StabilityLevel:
    i: int
    ac: list[float | None]
    acc: list[float]
    p_ac_prev: float | None = None
    p_acc_prev: float | None = None

    def valid_ac(self) -> list[float]:
        return [a for a in self.ac if a is not None]


@dataclass
class StabilityResult:
    stable_lon: LocalOptimaNetwork
    n_stable: int
    decision_i: int
    converged: bool
    trajectory: list[StabilityLevel] = field(default_factory=list)


def _as_lon(item: RunTrace | LocalOptimaNetwork) -> LocalOptimaNetwork:
    return item if isinstance(item, LocalOptimaNetwork) else build_run_lon(item)


def _p(a: list[float], b: list[float], what: str, i: int) -> float:
    if len(a) < 2 or len(b) < 2:
        raise InsufficientDataError(f"fewer than two valid {what} samples around i={i}")
    return wilcoxon_rank_sum(a, b)[1]


def detect_stable(config: StabilityConfig) -> StabilityResult:
    """Grow merged LONs until AC and ACC stop changing significantly.

    If the pool runs out first, the LON of the largest group is returned
    with ``converged=False`` and ``decision_i`` set to that group's ``i``.
    ``trajectory[j].p_*_prev`` compare level ``i`` with ``i-1``.
    """
    run_lons = [_as_lon(item) for item in config.pool]
    rng = np.random.default_rng(config.seed)
    pool_size = len(run_lons)
    trajectory: list[StabilityLevel] = []
    groups: dict[int, list[LocalOptimaNetwork]] = {}

    def merge(idx: np.ndarray) -> tuple[LocalOptimaNetwork, float | None, float]:
        g = synthesize([run_lons[j] for j in sorted(idx)])
        return g, assortativity(g), average_clustering(g)

    i = 1
    while config.step * i <= pool_size:
        size = config.step * i
        subsets = [rng.choice(pool_size, size=size, replace=False) for _ in range(config.resamples)]
        if config.parallelism > 1:
            with ThreadPoolExecutor(max_workers=config.parallelism) as ex:
                merged = list(ex.map(merge, subsets))
        else:
            merged = [merge(s) for s in subsets]
        groups[i] = [g for g, _, _ in merged]
        groups.pop(i - 3, None)
        level = StabilityLevel(i, [a for _, a, _ in merged], [c for _, _, c in merged])
        trajectory.append(level)

        if i >= 3:
            older, prev = trajectory[-3], trajectory[-2]
            p_ac_old = _p(older.valid_ac(), prev.valid_ac(), "AC", i)
            p_acc_old = _p(older.acc, prev.acc, "ACC", i)
            level.p_ac_prev = _p(prev.valid_ac(), level.valid_ac(), "AC", i)
            level.p_acc_prev = _p(prev.acc, level.acc, "ACC", i)
            if min(p_ac_old, p_acc_old, level.p_ac_prev, level.p_acc_prev) >= config.alpha:
                chosen = groups[i - 1][int(rng.integers(config.resamples))]
                return StabilityResult(chosen, config.step * (i - 1), i, True, trajectory)
        elif i == 2:
            prev = trajectory[-2]
            if len(prev.valid_ac()) >= 2 and len(level.valid_ac()) >= 2:
                level.p_ac_prev = wilcoxon_rank_sum(prev.valid_ac(), level.valid_ac())[1]
            level.p_acc_prev = wilcoxon_rank_sum(prev.acc, level.acc)[1]
        i += 1

    last = i - 1
    chosen = groups[last][int(rng.integers(config.resamples))]
    return StabilityResult(chosen, config.step * last, last, False, trajectory)
