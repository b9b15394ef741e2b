import json

import numpy as np
import pytest

from exactmultinom import ConfigError, Dataset, InferenceConfig, causal_lower_bound, cell_probability
from exactmultinom.simulation import (
    DiscreteSEM,
    Scenario,
    bench,
    bundled_scenarios,
    load_scenario,
    run_coverage,
    stability_traces,
)


def test_bundled_scenarios_present():
    assert {"bhattacharyya_n10_k2_d4", "causal_lower_n10", "point_mass"} <= set(bundled_scenarios())


@pytest.mark.parametrize("name, truth", [
    ("bhattacharyya_n10_k2_d4", 0.98),
    ("causal_lower_n10", -0.05),
    ("causal_lower_n10_strong_instrument", -0.05),
])
def test_scenario_true_values(name, truth):
    sc = load_scenario(name)
    psi = sc.build_psi()
    assert psi(np.concatenate(sc.true_theta())) == pytest.approx(truth, abs=5e-5)


def test_sem_observed_probabilities():
    # a perfect complier population that always follows X: Y = X = Z
    sem = DiscreteSEM((1.0,), ((0, 1, 0, 0),), ((0, 1, 0, 0),), 0.5)
    assert sem.observed().tolist() == [1, 0, 0, 0, 0, 0, 0, 1]
    assert sem.beta() == 1.0
    assert causal_lower_bound()(sem.observed()) == 1.0


def test_sem_validation():
    with pytest.raises(ConfigError):
        DiscreteSEM((0.5, 0.4), ((1, 0, 0, 0),) * 2, ((1, 0, 0, 0),) * 2)


def test_sem_blocks_are_probabilities():
    rng = np.random.default_rng(0)
    for _ in range(50):
        p = DiscreteSEM.random(rng, 3).observed()
        assert np.all(p >= 0)
        assert p[:4].sum() == pytest.approx(1) and p[4:].sum() == pytest.approx(1)


def test_point_mass_full_coverage():
    rows = run_coverage(load_scenario("point_mass"))
    assert [r.method for r in rows] == ["exact", "bootstrap"]
    assert all(r.coverage == 1.0 and r.passed for r in rows)
    assert rows[0].replicates == 20 and rows[0].seed == 7


def test_coverage_reproducible_and_worker_independent():
    sc = load_scenario("causal_lower_n10")
    a = run_coverage(sc, replicates=6)
    b = run_coverage(sc, workers=3, replicates=6)
    strip = lambda rows: [(r.method, r.coverage, r.mean_width) for r in rows]
    assert strip(a) == strip(b)


def test_sem_generator_requires_causal_shape():
    doc = load_scenario("causal_lower_n10").to_dict()
    doc["psi"] = {"name": "causal_lower", "limits": [-1, 1]}
    doc["generator"] = {"type": "theta", "theta": [[0.5, 0.5], [0.5, 0.5]]}
    with pytest.raises(ConfigError):
        Scenario.from_dict(doc).build_psi()
    doc = load_scenario("causal_lower_n10").to_dict()
    doc["n"] = [5, 5, 5]
    with pytest.raises(ConfigError):
        run_coverage(Scenario.from_dict(doc), replicates=1)


def test_recorded_true_value_checked():
    doc = load_scenario("causal_lower_n10").to_dict()
    doc["true_value"] = 0.3
    with pytest.raises(ConfigError, match="true value"):
        run_coverage(Scenario.from_dict(doc), replicates=1)


def test_scenario_from_file(tmp_path):
    doc = load_scenario("point_mass").to_dict()
    path = tmp_path / "s.json"
    path.write_text(json.dumps(doc))
    assert load_scenario(str(path)).to_dict() == doc
    with pytest.raises(ConfigError):
        load_scenario("no_such_scenario")
    with pytest.raises(ConfigError):
        Scenario.from_dict({**doc, "bogus": 1})


def test_stability_traces_binomial():
    data = Dataset.from_counts([[5, 0]])
    rows = stability_traces(data, cell_probability(0), [0.3, 0.5], InferenceConfig(maxit=200, chunksize=50, seed=2))
    for psi0 in (0.3, 0.5):
        series = [p for x, _, p in rows if x == psi0]
        assert len(series) == 200
        assert all(b >= a for a, b in zip(series, series[1:]))
    final = [p for x, _, p in rows if x == 0.5][-1]
    assert abs(final - 0.03125) <= 0.002
    assert rows == stability_traces(data, cell_probability(0), [0.3, 0.5], InferenceConfig(maxit=200, chunksize=50, seed=2))


def test_bench_rows():
    rows = bench([(1, 2, 10), (2, 4, 5), (2, 4, 80)], B=500, runs=3, cap=10_000)
    assert [r["status"] for r in rows] == ["ok", "ok", "skipped"]
    assert rows[0]["cardinality"] == 11 and rows[1]["cardinality"] == 56 ** 2
    assert rows[0]["pvalue_s"] < 1.0


def test_bench_enumeration_time_grows_with_cardinality():
    rows = bench([(1, 2, 10), (2, 4, 4), (2, 4, 12)], B=100, runs=3)
    times = [r["enumeration_s"] for r in rows]
    assert [r["cardinality"] for r in rows] == sorted(r["cardinality"] for r in rows)
    assert times == sorted(times)
