"""Network metrics over LONs, funnel-base statistics and the rank-sum test."""

from __future__ import annotations

import heapq
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import ndtr

from .errors import UndefinedMetricError, ValidationError
from .lon import FunnelDecomposition, LocalOptimaNetwork, funnels, global_optimum


def pcc(x1: Sequence[float], x2: Sequence[float]) -> float:
    """Pearson correlation with population normalization."""
    a = np.asarray(x1, dtype=float)
    b = np.asarray(x2, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise ValidationError("pcc needs two 1-d vectors of equal length >= 2")
    da = a - a.mean()
    db = b - b.mean()
    sa = math.sqrt(float(np.dot(da, da)) / a.size)
    sb = math.sqrt(float(np.dot(db, db)) / b.size)
    if sa == 0.0 or sb == 0.0:
        raise UndefinedMetricError("correlation is undefined for a constant vector")
    r = float(np.dot(da, db)) / a.size / (sa * sb)
    return max(-1.0, min(1.0, r))


def network_density(lon: LocalOptimaNetwork) -> float:
    n = lon.vn
    if n < 2:
        raise UndefinedMetricError("density needs at least two vertices")
    return lon.en / (n * (n - 1))


def shortest_path_length(lon: LocalOptimaNetwork) -> tuple[float, float]:
    """Mean step count to the global optimum over vertices that can reach it.

    Returns ``(spl, reachable_fraction)``.  Distances come from Dijkstra
    with unit weights run from the global optimum over reversed edges.
    """
    if lon.vn == 1:
        return 0.0, 1.0
    go = global_optimum(lon)
    dist = {go: 0}
    heap = [(0, go)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for p in lon.predecessors[u]:
            nd = d + 1
            if nd < dist.get(p, math.inf):
                dist[p] = nd
                heapq.heappush(heap, (nd, p))
    reachable = len(dist)
    spl = sum(dist.values()) / (reachable - 1) if reachable > 1 else 0.0
    return spl, reachable / lon.vn


def assortativity(lon: LocalOptimaNetwork) -> float | None:
    """Degree correlation across edges; ``None`` when undefined.

    Each edge pairs the remaining out-degree of its source with the
    remaining in-degree of its destination.
    """
    if lon.en < 2:
        return None
    xs = [lon.out_degree(e.source) - 1 for e in lon.edges]
    ys = [lon.in_degree(e.dest) - 1 for e in lon.edges]
    try:
        return pcc(xs, ys)
    except UndefinedMetricError:
        return None


def _undirected(lon: LocalOptimaNetwork) -> list[set[int]]:
    adj: list[set[int]] = [set() for _ in range(lon.vn)]
    for e in lon.edges:
        adj[e.source].add(e.dest)
        adj[e.dest].add(e.source)
    return adj


def local_clustering(lon: LocalOptimaNetwork) -> list[float]:
    adj = _undirected(lon)
    out = []
    for i, nbrs in enumerate(adj):
        k = len(nbrs)
        if k < 2:
            out.append(0.0)
            continue
        links = sum(len(adj[u] & nbrs) for u in nbrs) // 2
        out.append(links / (k * (k - 1) / 2))
    return out


def average_clustering(lon: LocalOptimaNetwork) -> float:
    cs = local_clustering(lon)
    return sum(cs) / len(cs)


def rich_club_curve(lon: LocalOptimaNetwork, k_values: Iterable[int] | None = None) -> list[tuple[int, float]]:
    """``2 E>=k / (N>=k (N>=k - 1))`` over out-degree thresholds.

    The factor 2 is kept on directed edge records, so values above 1 are
    possible on dense graphs.  Thresholds leaving fewer than two vertices
    are skipped.
    """
    deg = [lon.out_degree(i) for i in range(lon.vn)]
    if k_values is None:
        k_values = range(0, max(deg, default=0) + 1)
    curve = []
    for k in k_values:
        rich = {i for i, d in enumerate(deg) if d >= k}
        n = len(rich)
        if n < 2:
            continue
        e = sum(1 for ed in lon.edges if ed.source in rich and ed.dest in rich)
        curve.append((int(k), 2 * e / (n * (n - 1))))
    return curve


def funnel_base_rank_table(
    lon: LocalOptimaNetwork,
    decomposition: FunnelDecomposition,
    full: LocalOptimaNetwork | None = None,
) -> list[tuple[int, int]]:
    """``(fitness rank, out-degree)`` for every funnel base, best first.

    Pass the unpruned LON as ``full`` when ``lon`` was pruned so that
    out-degrees still count the escape attempts that pruning removed.
    """
    order = sorted(decomposition.bases, key=lambda b: (lon.fitness(b), lon.vertices[b].key))
    if full is None:
        return [(rank, lon.out_degree(b)) for rank, b in enumerate(order, start=1)]
    return [(rank, full.out_degree(full.index[lon.vertices[b].key])) for rank, b in enumerate(order, start=1)]


def go_neighborhood_radius(lon: LocalOptimaNetwork) -> int:
    """Number of local optima one edge away from (pointing into) the global optimum.

    Funnel bases themselves can never qualify: an edge into the optimum is
    always improving, so its source is not a base.
    """
    return len(set(lon.predecessors[global_optimum(lon)]))


# -- rank-sum test -------------------------------------------------------------

EXACT_MAX_TOTAL = 20


def _midranks(values: Sequence[float]) -> tuple[list[float], list[int]]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    ties = []
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        for t in range(i, j + 1):
            ranks[order[t]] = (i + j) / 2 + 1
        ties.append(j - i + 1)
        i = j + 1
    return ranks, ties


def _rank_sum_counts(n: int, total: int) -> list[int]:
    """Number of ``n``-subsets of ``1..total`` for each possible rank sum."""
    max_sum = n * (2 * total - n + 1) // 2
    # table[j][s]: subsets of size j with sum s
    table = [[0] * (max_sum + 1) for _ in range(n + 1)]
    table[0][0] = 1
    for r in range(1, total + 1):
        for j in range(min(r, n), 0, -1):
            row, prev = table[j], table[j - 1]
            for s in range(max_sum, r - 1, -1):
                if prev[s - r]:
                    row[s] += prev[s - r]
    return table[n]


def wilcoxon_rank_sum(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """Rank-sum statistic of ``a`` and its two-sided p-value.

    Exact null distribution when ``len(a) + len(b) <= 20`` without ties;
    otherwise the normal approximation with tie-corrected variance and a
    0.5 continuity correction.
    """
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        raise ValidationError("rank-sum test needs two non-empty samples")
    if n < 2 or m < 2:
        raise ValidationError("rank-sum test needs at least two observations per sample")
    values = [float(v) for v in a] + [float(v) for v in b]
    ranks, ties = _midranks(values)
    w = sum(ranks[:n])
    total = n + m
    if total <= EXACT_MAX_TOTAL and all(t == 1 for t in ties):
        counts = _rank_sum_counts(n, total)
        ws = int(round(w))
        lower = sum(counts[: ws + 1])
        upper = sum(counts[ws:])
        p = 2 * min(lower, upper) / math.comb(total, n)
        return w, min(1.0, p)
    mu = n * (total + 1) / 2
    tie_term = sum(t**3 - t for t in ties) / (total * (total - 1))
    var = n * m / 12 * ((total + 1) - tie_term)
    if var <= 0:
        return w, 1.0
    z = (abs(w - mu) - 0.5) / math.sqrt(var)
    if z <= 0:
        return w, 1.0
    return w, min(1.0, 2 * float(ndtr(-z)))


# -- report --------------------------------------------------------------------


@dataclass
class MetricReport:
    vn: int
    en: int
    spl: float
    spl_reachable_fraction: float
    ac: float | None
    acc: float
    nd: float | None
    n_funnels: int
    go_neighborhood_radius: int
    global_optimum: str
    rcc_curve: list[tuple[int, float]] = field(default_factory=list)
    base_rank_table: list[tuple[int, int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rcc_curve"] = [list(p) for p in self.rcc_curve]
        d["base_rank_table"] = [list(p) for p in self.base_rank_table]
        return d


def metric_report(
    lon: LocalOptimaNetwork,
    decomposition: FunnelDecomposition | None = None,
    full: LocalOptimaNetwork | None = None,
) -> MetricReport:
    if decomposition is None:
        decomposition = funnels(lon)
    spl, frac = shortest_path_length(lon)
    return MetricReport(
        vn=lon.vn,
        en=lon.en,
        spl=spl,
        spl_reachable_fraction=frac,
        ac=assortativity(lon),
        acc=average_clustering(lon),
        nd=network_density(lon) if lon.vn > 1 else None,
        n_funnels=len(decomposition.bases),
        go_neighborhood_radius=go_neighborhood_radius(lon),
        global_optimum=lon.vertices[global_optimum(lon)].key,
        rcc_curve=rich_club_curve(lon),
        base_rank_table=funnel_base_rank_table(lon, decomposition, full),
    )
