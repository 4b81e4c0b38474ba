import math
import random

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_lon, random_lon
from oracles import acc_oracle, newman_assortativity, rcc_oracle, spl_oracle
from lonscape.errors import UndefinedMetricError
from lonscape.lon import funnels, prune
from lonscape.metrics import (
    assortativity,
    average_clustering,
    funnel_base_rank_table,
    go_neighborhood_radius,
    metric_report,
    network_density,
    pcc,
    rich_club_curve,
    shortest_path_length,
)


def test_pcc_examples():
    v = [1.0, 4.0, 2.0, 8.0]
    assert pcc(v, v) == pytest.approx(1.0, abs=1e-15)
    assert pcc(v, [-x for x in v]) == pytest.approx(-1.0, abs=1e-15)
    # by hand: cov = 1, var1 = 2/3, var2 = 14/9 -> 3 / sqrt(2 * 42 / 9)
    assert pcc([1, 2, 3], [1, 2, 4]) == pytest.approx(3 / math.sqrt(2 * 42 / 9), abs=1e-15)
    assert pcc([1, 2, 3], [1, 2, 4]) == pytest.approx(0.98198, abs=5e-6)


def test_pcc_undefined():
    with pytest.raises(UndefinedMetricError):
        pcc([1, 1, 1], [1, 2, 3])


@given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=2, max_size=30))
@settings(max_examples=100)
def test_pcc_bounded_and_matches_numpy(pairs):
    x, y = map(np.array, zip(*pairs))
    if np.ptp(x) < 1e-6 or np.ptp(y) < 1e-6:
        return
    r = pcc(x, y)
    assert -1.0 <= r <= 1.0
    assert r == pytest.approx(np.corrcoef(x, y)[0, 1], abs=1e-9)


def test_density_examples():
    keys = {"a": 1.0, "b": 2.0, "c": 3.0}
    full = [(s, d) for s in keys for d in keys if s != d]
    assert network_density(make_lon(keys, full)) == 1.0
    assert network_density(make_lon(keys, [])) == 0.0
    four = {"a": 1.0, "b": 2.0, "c": 3.0, "d": 4.0}
    six = [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a"), ("a", "c"), ("b", "d")]
    assert network_density(make_lon(four, six)) == 0.5
    with pytest.raises(UndefinedMetricError):
        network_density(make_lon({"a": 1.0}, []))


def test_spl_chain_and_isolated():
    g = make_lon({"a": 3.0, "b": 2.0, "c": 1.0}, [("a", "b"), ("b", "c")])
    assert shortest_path_length(g) == (1.5, 1.0)
    g2 = make_lon({"a": 3.0, "b": 2.0, "c": 1.0, "d": 4.0}, [("a", "b"), ("b", "c")])
    assert shortest_path_length(g2) == (1.5, 0.75)
    assert shortest_path_length(make_lon({"a": 1.0}, [])) == (0.0, 1.0)


def test_spl_random_dags_vs_floyd_warshall(rng):
    for _ in range(50):
        g = random_lon(rng, 20, dag=True)
        spl, frac = shortest_path_length(g)
        o_spl, o_frac = spl_oracle(g)
        assert spl == pytest.approx(o_spl, abs=1e-12)
        assert frac == o_frac


def test_assortativity_perfect_positive():
    # 3-cycle (remaining degrees 0,0) next to a complete digraph on 3 vertices (1,1)
    fit = {k: float(i) for i, k in enumerate("abcxyz")}
    edges = [("a", "b"), ("b", "c"), ("c", "a")]
    edges += [(s, d) for s in "xyz" for d in "xyz" if s != d]
    g = make_lon(fit, edges)
    assert assortativity(g) == pytest.approx(1.0, abs=1e-12)
    assert newman_assortativity(g) == pytest.approx(1.0, abs=1e-12)


def test_assortativity_star_undefined():
    g = make_lon({"h": 0.0, "l1": 1.0, "l2": 2.0, "l3": 3.0}, [("h", "l1"), ("h", "l2"), ("h", "l3")])
    assert assortativity(g) is None


def test_assortativity_random_vs_references(rng):
    checked = 0
    for _ in range(50):
        g = random_lon(rng, 25)
        ours = assortativity(g)
        ref = newman_assortativity(g)
        if ref is None:
            assert ours is None
            continue
        checked += 1
        assert ours == pytest.approx(ref, abs=1e-9)
        G = g.to_networkx()
        assert ours == pytest.approx(nx.degree_pearson_correlation_coefficient(G, x="out", y="in"), abs=1e-9)
    assert checked > 30


def test_clustering_examples():
    tri = make_lon({"a": 1.0, "b": 2.0, "c": 3.0}, [("a", "b"), ("c", "b"), ("a", "c")])
    assert average_clustering(tri) == 1.0
    star = make_lon({"h": 0.0, "l1": 1.0, "l2": 2.0, "l3": 3.0}, [("h", "l1"), ("h", "l2"), ("h", "l3")])
    assert average_clustering(star) == 0.0


def test_clustering_random_vs_triangle_count(rng):
    for _ in range(50):
        g = random_lon(rng, 25)
        assert average_clustering(g) == pytest.approx(acc_oracle(g), abs=1e-12)
        assert 0.0 <= average_clustering(g) <= 1.0


def test_rcc_examples():
    g = make_lon({"a": 1.0, "b": 2.0, "c": 3.0}, [("a", "b"), ("b", "c")])
    assert dict(rich_club_curve(g, [1])) == {1: 1.0}
    empty = make_lon({"a": 1.0, "b": 2.0, "c": 3.0}, [])
    assert rich_club_curve(empty, [0]) == [(0, 0.0)]
    assert rich_club_curve(empty, [1]) == []


def test_rcc_random_vs_subset_count(rng):
    for _ in range(50):
        g = random_lon(rng, 25)
        ks = range(0, 12)
        ours = dict(rich_club_curve(g, ks))
        for k in ks:
            ref = rcc_oracle(g, k)
            assert ours.get(k) == ref


def test_rcc_ignores_low_degree_vertices(rng):
    g = random_lon(rng, 20, p_edge=0.3)
    k = 3
    low = [v.key for i, v in enumerate(g.vertices) if g.out_degree(i) < k]
    if low:
        keep = [i for i, v in enumerate(g.vertices) if v.key != low[0]]
        assert dict(rich_club_curve(g, [k])) == dict(rich_club_curve(g.subgraph(keep), [k])) or \
            any(g.vertices[s].key == low[0] for i in range(g.vn) for s in g.successors[i])


def test_base_rank_table():
    g = make_lon(
        {"b1": 1.0, "b2": 2.0, "u1": 5.0, "u2": 6.0, "u3": 7.0, "u4": 8.0, "u5": 9.0},
        [("b1", "u1"), ("b1", "u2"), ("b1", "u3"), ("b1", "u4"), ("b1", "u5")],
    )
    # the worse leaves are sinks too until pruning drops them
    assert funnel_base_rank_table(g, funnels(g)) == [(1, 5), (2, 0)] + [(r, 0) for r in range(3, 8)]
    p = prune(g)
    d = funnels(p)
    assert [p.vertices[b].key for b in d.bases] == ["b1", "b2"]
    assert funnel_base_rank_table(p, d) == [(1, 0), (2, 0)]
    # out-degree is read from the full LON, not the pruned one
    assert funnel_base_rank_table(p, d, full=g) == [(1, 5), (2, 0)]
    single = make_lon({"a": 2.0, "b": 1.0}, [("a", "b")])
    assert funnel_base_rank_table(single, funnels(single)) == [(1, 0)]


def test_base_rank_table_planted(rng):
    # planted bases: b_i with out-degree i into worse leaves, descending quality
    fit, edges = {}, []
    for i in range(1, 6):
        fit[f"b{i}"] = float(i)
        for j in range(i):
            fit[f"l{i}{j}"] = 100.0 + i * 10 + j
            edges.append((f"b{i}", f"l{i}{j}"))
    g = make_lon(fit, edges)
    d = funnels(g)
    table = funnel_base_rank_table(g, d)
    assert table[:5] == [(1, 1), (2, 2), (3, 3), (4, 4), (5, 5)]
    assert all(deg == 0 for _, deg in table[5:])


def test_go_neighborhood_radius():
    g = make_lon({"go": 0.0, "b1": 1.0, "b2": 2.0, "x": 5.0}, [("b1", "go"), ("b2", "go"), ("go", "x")])
    assert go_neighborhood_radius(g) == 2
    lonely = make_lon({"go": 0.0, "b1": 1.0}, [("go", "b1")])
    assert go_neighborhood_radius(lonely) == 0


def test_go_neighborhood_radius_vs_scan(rng):
    for _ in range(30):
        g = random_lon(rng, 20)
        go = min(range(g.vn), key=lambda i: (g.fitness(i), g.vertices[i].key))
        scan = {s for s in range(g.vn) for t in range(g.vn) if t == go and (s, t) in
                {(e.source, e.dest) for e in g.edges}}
        assert go_neighborhood_radius(g) == len(scan)
        # no funnel base can point at the optimum
        d = funnels(g)
        assert not any(b in scan for b in d.bases)


def test_metric_report_chain():
    g = make_lon({"a": 3.0, "b": 2.0, "c": 1.0}, [("a", "b"), ("b", "c")])
    r = metric_report(g)
    assert (r.vn, r.en, r.spl, r.nd, r.acc, r.n_funnels) == (3, 2, 1.5, 2 / 6, 0.0, 1)
    assert r.global_optimum == "c"
    assert r.ac is None


def test_metrics_invariant_under_relabeling(rng):
    for _ in range(10):
        g = random_lon(rng, 15)
        perm = list(range(g.vn))
        rng.shuffle(perm)
        rename = {v.key: f"w{perm[i]:02d}" for i, v in enumerate(g.vertices)}
        h = make_lon({rename[k]: f for k, (f, _) in g.vertex_map().items()},
                     {(rename[s], rename[d]): c for (s, d), c in g.edge_map().items()})
        for fn in (average_clustering, assortativity):
            a, b = fn(g), fn(h)
            assert (a is None and b is None) or a == pytest.approx(b, abs=1e-12)
        assert shortest_path_length(g) == pytest.approx(shortest_path_length(h))
        assert rich_club_curve(g) == pytest.approx(rich_club_curve(h))
