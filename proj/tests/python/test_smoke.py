import csv

import numpy as np
import pytest

import nmm

QUADRATIC = "problem=quadratic\nn_coarse=7\nlevels=3\nmax_cycles=200\n"


def test_parse_config_echoes_defaults():
    echo = nmm.parse_config(QUADRATIC)
    assert echo["problem"] == "quadratic"
    assert echo["levels"] == "3"


def test_config_error_is_value_error():
    with pytest.raises(ValueError, match="unknown"):
        nmm.parse_config("bogus_key=1\n")


def test_problem_gradient_matches_finite_differences():
    p = nmm.Problem(QUADRATIC)
    assert p.levels == 3
    assert p.dims == [7, 15, 31]
    rng = np.random.default_rng(0)
    x = rng.standard_normal(p.dims[-1])
    g = p.gradient(2, x)
    h = 1e-6
    fd = np.array(
        [(p.value(2, x + h * e) - p.value(2, x - h * e)) / (2 * h) for e in np.eye(x.size)]
    )
    assert np.max(np.abs(fd - g)) <= 1e-5 * (1 + np.max(np.abs(g)))


def test_run_reaches_tolerance_and_decreases():
    p = nmm.Problem(QUADRATIC)
    r = p.run("add", 1)
    assert r["converged"]
    assert r["rows"][-1]["grad_norm"] <= 1e-6
    values = r["accepted_fine_values"]
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_run_experiment_writes_summary(tmp_path):
    rows = nmm.run_experiment(QUADRATIC + "model=add,mix-mfv\nseeds=1,2\n", tmp_path)
    assert [r["variant"] for r in rows] == ["add", "mix-mfv"]
    with open(tmp_path / "summary.csv") as fh:
        body = [line for line in fh if not line.startswith("#")]
    table = list(csv.DictReader(body))
    assert float(table[0]["mean_cost"]) == pytest.approx(rows[0]["mean_cost"], rel=1e-15)


def test_generate_dataset_is_deterministic():
    a, la = nmm.generate_dataset("spiral", 50, 3)
    b, lb = nmm.generate_dataset("spiral", 50, 3)
    assert a.shape == (50, 2)
    assert np.array_equal(a, b) and la == lb


def test_checks_pass():
    assert all(r["passed"] for r in nmm.run_checks(0))
