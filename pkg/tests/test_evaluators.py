import itertools
import sys
import threading

import numpy as np
import pytest

from lonscape.errors import (
    DomainError,
    MeasurementFailure,
    MeasurementParseError,
    MeasurementTimeout,
    MissingMeasurementError,
)
from lonscape.evaluators import (
    EvaluationCache,
    ExternalCommandEvaluator,
    NKLandscape,
    NKLandscapeSpec,
    TableEvaluator,
    evaluate_nk,
    load_table,
    write_table,
)
from lonscape.space import ConfigurationSpace, canonical_key

PY = sys.executable


def test_table_lookup():
    space = ConfigurationSpace.binary(2)
    ev = TableEvaluator(space, {"0|0": 5.0})
    assert ev((0, 0)) == 5.0
    with pytest.raises(MissingMeasurementError, match=r"1\|1"):
        ev((1, 1))


def test_table_csv_round_trip(tmp_path):
    space = ConfigurationSpace.binary(3)
    rng = np.random.default_rng(3)
    table = {canonical_key(space, x): float(rng.normal() * 1e3) for x in space.enumerate()}
    path = tmp_path / "m.csv"
    write_table(space, table, path)
    loaded = TableEvaluator.from_csv(space, path)
    assert len(loaded.table) == 8
    for x in space.enumerate():
        assert loaded(x) == table[canonical_key(space, x)]


def test_table_maximize_negates(tmp_path):
    space = ConfigurationSpace.binary(1)
    path = tmp_path / "m.csv"
    path.write_text("x0,fitness\n0,3.5\n1,-1\n")
    assert load_table(space, path, maximize=True) == {"0": -3.5, "1": 1.0}


def test_table_bad_header(tmp_path):
    space = ConfigurationSpace.binary(2)
    path = tmp_path / "m.csv"
    path.write_text("a,b,fitness\n0,0,1\n")
    with pytest.raises(ValueError, match="header"):
        load_table(space, path)


def test_nk_constant_tables():
    spec = NKLandscapeSpec(5, 0, 1)
    nk = NKLandscape(spec, tables=np.full((5, 2), 0.37))
    for x in nk.space.enumerate():
        assert nk(x) == pytest.approx(0.37, abs=1e-15)


def test_nk_deterministic_and_reconstructible():
    spec = NKLandscapeSpec(8, 3, 42)
    a, b = NKLandscape(spec), NKLandscape(NKLandscapeSpec(8, 3, 42))
    for x in itertools.islice(a.space.enumerate(), 50):
        assert a(x) == a(x) == b(x)
        assert 0.0 <= a(x) <= 1.0


def test_nk_rejects_non_binary():
    nk = NKLandscape(NKLandscapeSpec(3, 1, 0))
    with pytest.raises(DomainError):
        nk((0, 2, 1))


def test_nk_adjacent_epistasis_definition():
    # independent re-derivation of one fitness value from the raw tables
    spec = NKLandscapeSpec(4, 1, 7)
    tables = spec.contributions()
    x = (1, 0, 1, 1)
    expected = np.mean([tables[i][x[i] * 2 + x[(i + 1) % 4]] for i in range(4)])
    assert NKLandscape(spec)(x) == pytest.approx(expected, abs=1e-15)
    assert evaluate_nk(tables, 1, x) == pytest.approx(expected, abs=1e-15)


def test_nk_global_minimum_by_enumeration():
    spec = NKLandscapeSpec(4, 1, 7)
    tables = spec.contributions()
    oracle = {
        x: sum(tables[i][2 * x[i] + x[(i + 1) % 4]] for i in range(4)) / 4
        for x in itertools.product((0, 1), repeat=4)
    }
    nk = NKLandscape(spec)
    found = min(nk.space.enumerate(), key=nk)
    assert nk(found) == pytest.approx(min(oracle.values()), abs=1e-15)
    assert found == min(oracle, key=oracle.get)


def _echo_space():
    return ConfigurationSpace.binary(1, prefix="v")


def test_external_single(tmp_path):
    ev = ExternalCommandEvaluator(_echo_space(), f"{PY} -c \"print('noise'); print(3.25)\" # {{v0}}")
    assert ev((0,)) == 3.25


def test_external_repeats_mean(tmp_path):
    counter = tmp_path / "n"
    counter.write_text("0")
    script = tmp_path / "m.py"
    script.write_text(
        "import pathlib, sys\n"
        f"p = pathlib.Path({str(counter)!r})\n"
        "n = int(p.read_text()) + 1\n"
        "p.write_text(str(n))\n"
        "print(2.0 * n)\n"
    )
    ev = ExternalCommandEvaluator(_echo_space(), f"{PY} {script} {{v0}}", repeats=3, aggregation="mean")
    assert ev((1,)) == 4.0


def test_external_failure_modes():
    space = _echo_space()
    with pytest.raises(MeasurementFailure) as info:
        ExternalCommandEvaluator(space, f"{PY} -c 'import sys; sys.exit(1)' {{v0}}")((0,))
    assert "sys.exit(1)" in info.value.command and info.value.command.endswith(" 0")
    with pytest.raises(MeasurementParseError):
        ExternalCommandEvaluator(space, "echo fast {v0}")((0,))
    with pytest.raises(MeasurementTimeout):
        ExternalCommandEvaluator(space, f"{PY} -c 'import time; time.sleep(5)' {{v0}}", timeout=0.3)((0,))


def test_external_template_must_cover_options():
    with pytest.raises(ValueError):
        ExternalCommandEvaluator(ConfigurationSpace.binary(2), "run {x0}")


def test_cache_counts_and_stability():
    calls = []

    def backend(x):
        calls.append(x)
        return float(sum(x))

    cache = EvaluationCache(backend)
    for x in [(0, 1), (0, 1), (1, 1), (0, 1)]:
        cache(x)
    assert cache.hits == 2 and cache.misses == 2 and cache.lookups == 4
    assert len(cache) == len(set(calls)) == 2


def test_cache_concurrent_single_computation():
    gate = threading.Event()
    calls = []

    def slow(x):
        calls.append(x)
        gate.wait(1)
        return 1.5

    cache = EvaluationCache(slow)
    threads = [threading.Thread(target=cache, args=((0,),)) for _ in range(8)]
    for t in threads:
        t.start()
    gate.set()
    for t in threads:
        t.join()
    assert calls == [(0,)]
    assert cache.lookups == 8


def test_cache_rejects_non_finite():
    with pytest.raises(ValueError):
        EvaluationCache(lambda x: float("nan"))((0,))
