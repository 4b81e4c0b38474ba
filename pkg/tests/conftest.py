from __future__ import annotations

import random

import pytest

from lonscape.evaluators import TableEvaluator
from lonscape.lon import LocalOptimaNetwork
from lonscape.space import ConfigurationSpace, canonical_key


def make_lon(fitness: dict[str, float], edges, mult: dict[str, int] | None = None) -> LocalOptimaNetwork:
    mult = mult or {}
    vertices = {k: (f, mult.get(k, 1)) for k, f in fitness.items()}
    if not isinstance(edges, dict):
        edges = {pair: 1 for pair in edges}
    return LocalOptimaNetwork.from_maps(vertices, edges)


def random_lon(rng: random.Random, max_vertices: int = 30, p_edge: float | None = None,
               dag: bool = False, distinct_fitness: bool = True) -> LocalOptimaNetwork:
    n = rng.randint(1, max_vertices)
    keys = [f"v{i:02d}" for i in range(n)]
    if distinct_fitness:
        fits = rng.sample(range(10 * n), n)
    else:
        fits = [rng.randint(0, 4) for _ in range(n)]
    fitness = {k: float(f) for k, f in zip(keys, fits)}
    p = rng.uniform(0.02, 0.4) if p_edge is None else p_edge
    edges = {}
    for a in keys:
        for b in keys:
            if a == b or rng.random() >= p:
                continue
            if dag and not (fitness[b], b) < (fitness[a], a):
                continue
            edges[(a, b)] = rng.randint(1, 5)
    mult = {k: rng.randint(1, 6) for k in keys}
    return make_lon(fitness, edges, mult)


def random_table(space: ConfigurationSpace, rng: random.Random, levels: int | None = None) -> TableEvaluator:
    table = {}
    for x in space.enumerate():
        value = rng.randrange(levels) if levels else rng.random()
        table[canonical_key(space, x)] = float(value)
    return TableEvaluator(space, table)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
