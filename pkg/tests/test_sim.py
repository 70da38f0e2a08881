import csv
import io
import json
import math
from collections import Counter
from itertools import combinations

import numpy as np
import pytest

from ksgt.designs import TestMatrix, ks_build, write_matrix
from ksgt.errors import BadNoise, BadSize, ConfigError, IndexOutOfRange
from ksgt.gf import PrimeField
from ksgt.oracle import exact_comp_error_prob
from ksgt.rscode import RSCode
from ksgt.sim import (CSV_FIELDS, PRESETS, TrialConfig, csv_text, expand_grid, load_grid,
                      measure, run_trials, sample_defective_set, sweep, trial_rng,
                      wilson_interval)

SMALL = TestMatrix.from_dense(np.array([[1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 1]], bool))


@pytest.fixture
def small_path(tmp_path):
    path = tmp_path / "small.gtm"
    write_matrix(SMALL, path)
    return str(path)


def test_sampling_uniform():
    rng = np.random.default_rng(123)
    draws = 60000
    counts = Counter(frozenset(sample_defective_set(4, 2, rng)) for _ in range(draws))
    assert set(counts) == {frozenset(c) for c in combinations(range(4), 2)}
    expected = draws / 6
    sigma = math.sqrt(draws * (1 / 6) * (5 / 6))
    for n in counts.values():
        assert abs(n - expected) <= 3 * sigma


def test_sampling_edge_cases():
    rng = np.random.default_rng(0)
    assert sample_defective_set(5, 5, rng) == set(range(5))
    assert sample_defective_set(5, 0, rng) == set()
    with pytest.raises(BadSize):
        sample_defective_set(5, 6, rng)
    with pytest.raises(BadSize):
        sample_defective_set(5, -1, rng)
    with_rep = sample_defective_set(3, 3, np.random.default_rng(1), with_replacement=True)
    assert with_rep <= {0, 1, 2} and 1 <= len(with_rep) <= 3


def test_measure_examples():
    y = measure(SMALL, {0, 3}, 0.0)
    assert y.tolist() == [True, False, True]
    assert measure(SMALL, set(), 0.0).tolist() == [False] * 3
    with pytest.raises(ConfigError):
        measure(SMALL, {0}, 0.5)
    with pytest.raises(ConfigError):
        measure(SMALL, {0}, 0.1)
    with pytest.raises(IndexOutOfRange):
        measure(SMALL, {4}, 0.0)


def test_measure_flip_rate():
    m = TestMatrix.from_dense(np.zeros((20000, 2), bool))
    y = measure(m, {0}, 0.1, np.random.default_rng(4))
    sigma = math.sqrt(0.1 * 0.9 / 20000)
    assert abs(y.mean() - 0.1) <= 3 * sigma


def test_trial_rng_streams_independent_of_order():
    a = trial_rng(7, 3).random(4)
    b = trial_rng(7, 3).random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, trial_rng(7, 4).random(4))


def test_disjunct_ks_always_succeeds():
    cfg = TrialConfig(N=25, d=4, q=5, rs_n=5, rs_k=2, trials=500, seed=1)
    rep = run_trials(cfg)
    assert (rep.t, rep.q, rep.n) == (25, 5, 5)
    assert rep.successes == 500


def test_file_matrix_matches_oracle(small_path):
    cfg = TrialConfig(N=4, d=2, design="file", matrix_path=small_path, trials=6000, seed=3)
    rep = run_trials(cfg)
    exact = 1 - float(exact_comp_error_prob(SMALL, 2))
    assert exact == 0.5
    sigma = math.sqrt(exact * (1 - exact) / 6000)
    assert abs(rep.success_rate - exact) <= 3 * sigma


def test_mc_agrees_with_exact_error_on_ks(tmp_path):
    m = ks_build(RSCode(PrimeField(5), 3, 2), 25)
    path = tmp_path / "ks.gtm"
    write_matrix(m, path)
    exact = 1 - float(exact_comp_error_prob(m, 3))
    rep = run_trials(TrialConfig(N=25, d=3, design="file", matrix_path=str(path),
                                 trials=4000, seed=8))
    sigma = math.sqrt(exact * (1 - exact) / 4000)
    assert abs(rep.success_rate - exact) <= 3 * sigma + 1e-12


def test_workers_deterministic():
    cfg = TrialConfig(N=200, d=5, design="bernoulli", tests=60, matrices=4, trials=400, seed=2)
    one = run_trials(cfg, workers=1)
    two = run_trials(cfg, workers=2)
    assert one.successes == two.successes
    assert one.row() == two.row()


def test_noisy_threshold_decoder_runs():
    cfg = TrialConfig(N=500, d=10, p=0.1, decoder="ncomp", q=41, rs_n=30, trials=200, seed=0)
    rep = run_trials(cfg)
    assert rep.tau == 3.0
    assert rep.success_rate > 0.9


def test_recursive_decoder_point():
    rep = run_trials(TrialConfig(N=81, d=3, decoder="recursive", trials=300, seed=4))
    assert rep.t == 377 and rep.q is None
    assert rep.success_rate >= 0.9


@pytest.mark.parametrize("kw", [dict(N=10, d=0), dict(N=10, d=10), dict(N=10, d=2, p=0.5),
                                dict(N=10, d=2, design="other"), dict(N=10, d=2, trials=0),
                                dict(N=10, d=2, decoder="ncomp"),
                                dict(N=10, d=2, design="bernoulli"),
                                dict(N=10, d=2, design="ncc", tests=5, matrices=5, trials=4),
                                dict(N=10, d=2, design="file")])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        TrialConfig(**kw)


def test_config_rejects_tau_outside_range():
    with pytest.raises(BadNoise):
        TrialConfig(N=10, d=2, p=0.1, decoder="ncomp", tau=100.0)


def test_wilson_interval():
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi
    assert wilson_interval(100, 100)[1] == pytest.approx(1.0)
    assert wilson_interval(0, 100)[0] == pytest.approx(0.0)
    # textbook value for 8/10 at 95%
    assert wilson_interval(8, 10) == pytest.approx((0.4902, 0.9433), abs=1e-3)


def parse(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_sweep_empty():
    assert csv_text(sweep({}, [])).strip() == ",".join(CSV_FIELDS)


def test_sweep_sorted_with_errors():
    base = {"N": 500, "d": 10, "trials": 50, "seed": 0}
    points = [{"q": 41, "rs_n": 9}, {"q": 41, "rs_n": 5}, {"q": 41, "rs_n": 50},
              {"q": 40, "rs_n": 5}]
    rows = parse(csv_text(sweep(base, points)))
    assert [r["t"] for r in rows[:2]] == ["205", "369"]
    assert rows[0]["error"] == "" and rows[1]["error"] == ""
    errors = rows[2:]
    assert len(errors) == 2 and all(r["error"] for r in errors)
    assert "Infeasible" in errors[0]["error"]
    assert "NotPrime" in errors[1]["error"]


def test_expand_grid_and_baselines():
    spec = PRESETS["fig2"](100, 0)
    base, points = expand_grid(spec)
    ks = [p for p in points if p["design"] == "ks"]
    assert [p["rs_n"] for p in ks] == list(range(4, 12))
    for design in ("bernoulli", "ncc"):
        tests = sorted(p["tests"] for p in points if p["design"] == design)
        assert tests == [41 * n for n in range(4, 12)]
    assert all(p["matrices"] == 100 for p in points if p["design"] != "ks")
    with pytest.raises(ConfigError):
        expand_grid({"bogus": 1})
    with pytest.raises(ConfigError):
        expand_grid({"points": [{"colour": 1}]})


def test_load_grid(tmp_path):
    path = tmp_path / "g.json"
    path.write_text(json.dumps({"base": {"N": 25, "d": 2, "trials": 10},
                                "grid": {"q": [5], "rs_n": [3, 5]}}))
    base, points = expand_grid(load_grid(path))
    rows = sweep(base, points)
    assert [r["n"] for r in rows] == [3, 5]


def test_sweep_workers_identical():
    base, points = expand_grid({"base": {"N": 200, "d": 4, "trials": 120, "seed": 5},
                                "grid": {"q": [17], "rs_n": [4, 6]},
                                "match_baselines": {"designs": ["bernoulli"], "matrices": 3}})
    a = csv_text(sweep(base, points, workers=1))
    b = csv_text(sweep(base, points, workers=2))
    assert a == b
