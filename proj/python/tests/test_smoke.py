import math
import os
from pathlib import Path

import pytest

import nash_realize as nr

CATALOG = Path(os.environ.get("NASH_CATALOG", Path(__file__).resolve().parents[2] / "catalog"))


def load(stem):
    return nr.load_system(str(CATALOG / f"{stem}.json"))


def test_simulate_matches_closed_form():
    lin1 = load("lin1")
    report = nr.simulate(lin1, [["a0", 0.5], ["a1", 0.2]])
    assert report["success"]
    assert math.isclose(report["terminal"][0], math.exp(0.3), rel_tol=1e-8)
    assert nr.simulate(lin1, [])["terminal"] == [1.0]


def test_trdeg_estimates():
    assert nr.response_trdeg(load("diag"))["estimated_trdeg"] == 1
    assert nr.reachable_trdeg(load("diag"))["estimated_trdeg"] == 1
    assert nr.obs_trdeg(load("bilinear"))["estimated_trdeg"] == 2


def test_minimize_and_verify():
    red = nr.minimize(load("redundant3"), nr.config(epsilon=0.05))
    assert red.dim == 1
    assert red.shift_time < 0.05
    report = nr.verify(red)
    assert report["pass"]
    assert report["max_deviation"] <= 1e-6
    assert red.provenance == "MINIMIZED"


def test_observability_reduce_needs_reachable_input():
    with pytest.raises(nr.NashError) as err:
        nr.observability_reduce(load("lin1_unobserved"))
    assert err.value.code == "NotReachableInput"
    assert nr.observability_reduce(load("lin1_unobserved"), restrict_to_reachable=True).dim == 1


def test_minimality_and_isomorphism():
    assert nr.check_minimality(load("lin1"))["verdict"] == "MINIMAL"
    assert nr.check_minimality(load("diag"))["verdict"] == "NOT_MINIMAL"
    iso = nr.construct_isomorphism(load("lin1"), load("cubing"))
    assert math.isclose(iso.apply([1.1])[0], 1.1**3, rel_tol=1e-6)
    assert nr.verify_isomorphism(iso)["pass"]
    with pytest.raises(nr.NashError) as err:
        nr.construct_isomorphism(load("lin1"), load("bilinear"))
    assert err.value.code == "DimensionMismatch"


def test_config_and_experiment():
    with pytest.raises(TypeError):
        nr.config(bogus=1)
    result = nr.run_experiment("A7", CATALOG)
    assert result["id"] == "A7"
    assert result["pass"]
    assert nr.experiment_ids()[0] == "A1"
