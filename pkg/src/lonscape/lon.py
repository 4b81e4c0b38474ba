"""Local optima networks: construction, merging, pruning and funnels."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import networkx as nx

from .errors import InconsistentTraceError, ValidationError
from .sampler import RunTrace

REL_TOL = 1e-9


@dataclass(frozen=True)
class Vertex:
    key: str
    fitness: float
    multiplicity: int = 1


@dataclass(frozen=True)
class Edge:
    source: int
    dest: int
    count: int = 1


@dataclass(frozen=True, eq=False)
class LocalOptimaNetwork:
    """Directed graph of local optima with vertex multiplicities and edge counts.

    Vertex ids are positions in ``vertices``, which is sorted by key; edges
    are sorted by ``(source, dest)``.  Build instances with
    :meth:`from_maps` rather than the raw constructor.
    """

    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...] = ()
    provenance: tuple[int, ...] = ()
    space_hash: str = ""

    @classmethod
    def from_maps(
        cls,
        vertices: dict[str, tuple[float, int]],
        edges: dict[tuple[str, str], int] | None = None,
        provenance: Iterable[int] = (),
        space_hash: str = "",
    ) -> LocalOptimaNetwork:
        keys = sorted(vertices)
        index = {k: i for i, k in enumerate(keys)}
        vs = []
        for k in keys:
            fitness, mult = vertices[k]
            if mult < 1:
                raise ValidationError(f"vertex {k!r} has multiplicity {mult}")
            vs.append(Vertex(k, float(fitness), int(mult)))
        es = []
        for (s, d), count in (edges or {}).items():
            if s == d:
                raise ValidationError(f"self-loop on {s!r}")
            if s not in index or d not in index:
                raise ValidationError(f"edge {s!r} -> {d!r} references an unknown vertex")
            if count < 1:
                raise ValidationError(f"edge {s!r} -> {d!r} has count {count}")
            es.append(Edge(index[s], index[d], int(count)))
        es.sort(key=lambda e: (e.source, e.dest))
        return cls(tuple(vs), tuple(es), tuple(provenance), space_hash)

    # -- views -------------------------------------------------------------

    @property
    def vn(self) -> int:
        return len(self.vertices)

    @property
    def en(self) -> int:
        return len(self.edges)

    @cached_property
    def index(self) -> dict[str, int]:
        return {v.key: i for i, v in enumerate(self.vertices)}

    @cached_property
    def successors(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in self.vertices]
        for e in self.edges:
            out[e.source].append(e.dest)
        return tuple(tuple(x) for x in out)

    @cached_property
    def predecessors(self) -> tuple[tuple[int, ...], ...]:
        inc: list[list[int]] = [[] for _ in self.vertices]
        for e in self.edges:
            inc[e.dest].append(e.source)
        return tuple(tuple(x) for x in inc)

    def out_degree(self, i: int) -> int:
        return len(self.successors[i])

    def in_degree(self, i: int) -> int:
        return len(self.predecessors[i])

    def fitness(self, i: int) -> float:
        return self.vertices[i].fitness

    def vertex_map(self) -> dict[str, tuple[float, int]]:
        return {v.key: (v.fitness, v.multiplicity) for v in self.vertices}

    def edge_map(self) -> dict[tuple[str, str], int]:
        return {(self.vertices[e.source].key, self.vertices[e.dest].key): e.count for e in self.edges}

    def total_multiplicity(self) -> int:
        return sum(v.multiplicity for v in self.vertices)

    def subgraph(self, keep: Iterable[int], edges: Iterable[Edge] | None = None) -> LocalOptimaNetwork:
        keep = set(keep)
        vertices = {self.vertices[i].key: (self.vertices[i].fitness, self.vertices[i].multiplicity) for i in keep}
        edge_map = {
            (self.vertices[e.source].key, self.vertices[e.dest].key): e.count
            for e in (self.edges if edges is None else edges)
            if e.source in keep and e.dest in keep
        }
        return LocalOptimaNetwork.from_maps(vertices, edge_map, self.provenance, self.space_hash)

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        for i, v in enumerate(self.vertices):
            g.add_node(i, key=v.key, fitness=v.fitness, multiplicity=v.multiplicity)
        for e in self.edges:
            g.add_edge(e.source, e.dest, count=e.count)
        return g


def _same_fitness(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=REL_TOL, abs_tol=0.0) or a == b


def build_run_lon(trace: RunTrace) -> LocalOptimaNetwork:
    vertices: dict[str, tuple[float, int]] = {}
    for v in trace.vertices.values():
        if v.key in vertices:
            fitness, mult = vertices[v.key]
            if not _same_fitness(fitness, v.fitness):
                raise InconsistentTraceError(
                    f"vertex {v.key!r} recorded with fitness {fitness!r} and {v.fitness!r}"
                )
            vertices[v.key] = (fitness, mult + v.multiplicity)
        else:
            vertices[v.key] = (v.fitness, v.multiplicity)
    edges: dict[tuple[str, str], int] = {}
    for e in trace.edges.values():
        edges[(e.source, e.dest)] = edges.get((e.source, e.dest), 0) + e.count
    return LocalOptimaNetwork.from_maps(vertices, edges, (trace.seed,), trace.space_hash)


def synthesize(lons: Sequence[LocalOptimaNetwork]) -> LocalOptimaNetwork:
    """Merge LONs: shared optima become one vertex with summed multiplicity."""
    if not lons:
        raise ValidationError("nothing to synthesize")
    hashes = {g.space_hash for g in lons if g.space_hash}
    if len(hashes) > 1:
        raise InconsistentTraceError(f"LONs come from different spaces: {sorted(hashes)}")
    vertices: dict[str, tuple[float, int]] = {}
    edges: dict[tuple[str, str], int] = {}
    provenance: list[int] = []
    for g in lons:
        for v in g.vertices:
            if v.key in vertices:
                fitness, mult = vertices[v.key]
                if not _same_fitness(fitness, v.fitness):
                    raise InconsistentTraceError(
                        f"vertex {v.key!r} has fitness {fitness!r} in one LON and {v.fitness!r} in another"
                    )
                vertices[v.key] = (fitness, mult + v.multiplicity)
            else:
                vertices[v.key] = (v.fitness, v.multiplicity)
        for e in g.edges:
            pair = (g.vertices[e.source].key, g.vertices[e.dest].key)
            edges[pair] = edges.get(pair, 0) + e.count
        provenance.extend(g.provenance)
    return LocalOptimaNetwork.from_maps(vertices, edges, provenance, next(iter(hashes), ""))


def global_optimum(lon: LocalOptimaNetwork) -> int:
    if not lon.vertices:
        raise ValidationError("empty LON has no global optimum")
    # ids follow key order, so the first minimum is the smallest key
    return min(range(lon.vn), key=lambda i: (lon.vertices[i].fitness, lon.vertices[i].key))


@dataclass
class PruneReport:
    removed: list[tuple[str, int, int]] = field(default_factory=list)  # key, multiplicity, pass
    escape_attempts: dict[str, int] = field(default_factory=dict)
    passes: int = 0

    @property
    def removed_multiplicity(self) -> int:
        return sum(m for _, m, _ in self.removed)


def prune(lon: LocalOptimaNetwork) -> LocalOptimaNetwork:
    return prune_with_report(lon)[0]


def prune_with_report(lon: LocalOptimaNetwork) -> tuple[LocalOptimaNetwork, PruneReport]:
    """Drop zero-out-degree sinks that are worse than their best in-neighbor.

    Repeats until nothing changes; the global optimum is never removed.
    ``escape_attempts`` credits each removed vertex's multiplicity to
    every surviving direct in-neighbor it had in the input.
    """
    report = PruneReport()
    if lon.vn <= 1:
        return lon, report
    go = global_optimum(lon)
    alive = set(range(lon.vn))
    out_deg = [lon.out_degree(i) for i in range(lon.vn)]
    while True:
        doomed = []
        for v in alive:
            if v == go or out_deg[v] > 0:
                continue
            preds = [p for p in lon.predecessors[v] if p in alive]
            if preds and lon.fitness(v) > min(lon.fitness(p) for p in preds):
                doomed.append(v)
        if not doomed:
            break
        report.passes += 1
        for v in sorted(doomed):
            alive.discard(v)
            report.removed.append((lon.vertices[v].key, lon.vertices[v].multiplicity, report.passes))
            for p in lon.predecessors[v]:
                out_deg[p] -= 1
    removed_ids = set(range(lon.vn)) - alive
    for v in sorted(removed_ids):
        for p in lon.predecessors[v]:
            if p in alive:
                k = lon.vertices[p].key
                report.escape_attempts[k] = report.escape_attempts.get(k, 0) + lon.vertices[v].multiplicity
    if not removed_ids:
        return lon, report
    return lon.subgraph(alive), report


def improving_subgraph(lon: LocalOptimaNetwork) -> LocalOptimaNetwork:
    """Keep only edges whose destination is at least as fit as the source."""
    kept = [e for e in lon.edges if lon.fitness(e.dest) <= lon.fitness(e.source)]
    if len(kept) == lon.en:
        return lon
    return LocalOptimaNetwork(lon.vertices, tuple(kept), lon.provenance, lon.space_hash)


@dataclass
class FunnelDecomposition:
    bases: list[int]
    funnels: dict[int, set[int]]
    overlapping: dict[int, bool]

    def membership(self, v: int) -> list[int]:
        return [b for b in self.bases if v in self.funnels[b]]


def funnels(lon: LocalOptimaNetwork) -> FunnelDecomposition:
    """Funnel bases and the vertices that improve monotonically into each.

    Neutral cycles of the improving subgraph are collapsed to their
    smallest-key member before the reverse breadth-first search.
    """
    imp = improving_subgraph(lon)
    g = nx.DiGraph()
    g.add_nodes_from(range(imp.vn))
    g.add_edges_from((e.source, e.dest) for e in imp.edges)
    cond = nx.condensation(g)
    members = {c: sorted(cond.nodes[c]["members"]) for c in cond.nodes}

    bases = []
    funnels_: dict[int, set[int]] = {}
    for c in cond.nodes:
        if cond.out_degree(c) != 0:
            continue
        base = members[c][0]
        seen = {c}
        queue = deque([c])
        while queue:
            u = queue.popleft()
            for p in cond.predecessors(u):
                if p not in seen:
                    seen.add(p)
                    queue.append(p)
        funnels_[base] = {v for comp in seen for v in members[comp]}
        bases.append(base)
    bases.sort(key=lambda b: lon.vertices[b].key)
    counts = [0] * lon.vn
    for fset in funnels_.values():
        for v in fset:
            counts[v] += 1
    return FunnelDecomposition(bases, {b: funnels_[b] for b in bases}, {v: counts[v] > 1 for v in range(lon.vn)})
