import pytest

from conftest import make_lon
from lonscape.errors import InsufficientDataError, ValidationError
from lonscape.evaluators import EvaluationCache, NKLandscape, NKLandscapeSpec
from lonscape.io import lon_to_json
from lonscape.sampler import SamplerParams, sample_repeats
from lonscape.stability import StabilityConfig, detect_stable


def _lon_with_defined_ac():
    fit = {k: float(i) for i, k in enumerate("abcxyz")}
    edges = [("a", "b"), ("b", "c"), ("c", "a")] + [(s, d) for s in "xyz" for d in "xyz" if s != d]
    return make_lon(fit, edges)


@pytest.fixture(scope="module")
def nk_pool():
    nk = NKLandscape(NKLandscapeSpec(10, 3, 2))
    cache = EvaluationCache(nk)
    return sample_repeats(nk.space, lambda j: cache, SamplerParams(seed=7, target_optima=20, eval_budget=1500),
                          r_max=40)


def test_identical_pool_stops_at_three():
    g = _lon_with_defined_ac()
    result = detect_stable(StabilityConfig([g] * 30, step=10))
    assert result.converged
    assert result.decision_i == 3
    assert result.n_stable == 20
    assert result.stable_lon.vertex_map() == {k: (f, 20) for k, (f, _) in g.vertex_map().items()}
    assert [lv.i for lv in result.trajectory] == [1, 2, 3]


def test_identical_pool_without_edges_has_no_ac():
    g = make_lon({"a": 1.0, "b": 2.0}, [])
    with pytest.raises(InsufficientDataError):
        detect_stable(StabilityConfig([g] * 9, step=3, resamples=5))


def test_deterministic_for_seed(nk_pool):
    a = detect_stable(StabilityConfig(nk_pool, step=5, resamples=8, seed=3))
    b = detect_stable(StabilityConfig(nk_pool, step=5, resamples=8, seed=3, parallelism=4))
    assert (a.decision_i, a.n_stable, a.converged) == (b.decision_i, b.n_stable, b.converged)
    assert lon_to_json(a.stable_lon) == lon_to_json(b.stable_lon)
    assert [lv.acc for lv in a.trajectory] == [lv.acc for lv in b.trajectory]


def test_result_shape(nk_pool):
    r = detect_stable(StabilityConfig(nk_pool, step=5, resamples=8, seed=1))
    assert len(r.stable_lon.provenance) == r.n_stable
    assert set(r.stable_lon.provenance) <= {t.seed for t in nk_pool}
    assert r.n_stable == 5 * (r.decision_i - 1) if r.converged else r.n_stable == 5 * r.decision_i
    for lv in r.trajectory:
        assert len(lv.acc) == len(lv.ac) == 8
        for p in (lv.p_ac_prev, lv.p_acc_prev):
            assert p is None or 0.0 < p <= 1.0
    assert r.trajectory[0].p_acc_prev is None


def test_exhausted_pool_reports_not_converged(nk_pool):
    # three levels fit in the pool and alpha this high rejects any real difference
    r = detect_stable(StabilityConfig(nk_pool, step=13, resamples=6, alpha=0.999, seed=0))
    assert not r.converged
    assert r.decision_i == 3
    assert r.n_stable == 39
    assert len(r.stable_lon.provenance) == 39


def test_config_validation():
    g = _lon_with_defined_ac()
    with pytest.raises(ValidationError):
        StabilityConfig([g] * 29, step=10)
    for bad in (dict(step=0), dict(resamples=1), dict(alpha=0.0), dict(alpha=1.0)):
        with pytest.raises(ValidationError):
            StabilityConfig([g] * 30, **bad)
