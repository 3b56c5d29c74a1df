import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from edfix.gen import _closure
from edfix.errors import DomainError, MalformedInputError
from edfix.spaces import (
    DistanceFunction,
    FiniteMetricSpace,
    check_tau1,
    check_zero_structure,
    classify,
    point_to_set,
    sequence_oracle_tau3,
    validate_metric,
    witness_reproduces,
)
from strategies import e0_kappas, kappas


def naive_tau1(k):
    n = len(k)
    return all(k[x][z] <= k[x][y] + k[y][z] for x, y, z in itertools.product(range(n), repeat=3))


def naive_closure(w):
    """Floyd-Warshall written out as the textbook triple loop."""
    n = len(w)
    d = [list(map(float, row)) for row in w]
    for m in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][m] + d[m][j] < d[i][j]:
                    d[i][j] = d[i][m] + d[m][j]
    return d


def test_line_space_is_metric(line3):
    assert validate_metric(line3)["metric"]


def test_triangle_violation_witness():
    space = FiniteMetricSpace.from_matrix([[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    report = validate_metric(space)
    assert not report["metric"]
    assert report.witnesses["metric"]["points"] == [0, 1, 2]
    assert witness_reproduces(space.d, report.witnesses["metric"])


def test_one_point_space():
    assert validate_metric(FiniteMetricSpace.from_matrix([[0.0]]))["metric"]


@pytest.mark.parametrize("bad", [[[0, 1]], [[0, float("nan")], [1, 0]], [], [["a"]]])
def test_malformed_matrix_rejected(bad):
    with pytest.raises(MalformedInputError):
        FiniteMetricSpace.from_matrix(bad)


def test_tau1_examples(line3, d_line3):
    assert check_tau1(d_line3)["tau1"]
    k = DistanceFunction(line3, [[0, 1, 10], [1, 0, 1], [1, 1, 0]])
    report = check_tau1(k)
    assert not report["tau1"]
    assert report.witnesses["tau1"]["points"] == [0, 1, 2]


@given(st.integers(2, 7).flatmap(lambda n: st.lists(st.integers(1, 200), min_size=n * n, max_size=n * n)))
def test_closure_satisfies_tau1(flat):
    n = int(round(len(flat) ** 0.5))
    w = np.array(flat, dtype=np.float64).reshape(n, n) / 64
    np.fill_diagonal(w, 0)
    closed = _closure(w)
    assert np.array_equal(closed, np.array(naive_closure(w)))
    assert naive_tau1(closed.tolist())
    assert check_tau1(DistanceFunction(FiniteMetricSpace.on_line(range(0, 2 * n, 2)), closed))["tau1"]


def test_zero_structure_examples(line3, d_line3):
    r = check_zero_structure(d_line3)
    assert r["tau3"] and r["tau4prime"] and r["tau2"] and r["tau4"]

    k = DistanceFunction(line3, [[0, 0, 1], [1, 0, 1], [1, 1, 0]])
    r = check_zero_structure(k)
    assert not r["tau3"]
    assert r.witnesses["tau3"]["points"] == [0, 1]
    oracle = sequence_oracle_tau3(k, 1)
    assert not oracle.passed
    assert oracle.witness["x_cycle"] == [0] and oracle.witness["y_cycle"] == [1]


def test_classify_examples(line3, d_line3):
    r = classify(d_line3)
    assert r["is_e_distance"] and r["is_e0_distance"] and r["is_tau_function"]
    zero = DistanceFunction(FiniteMetricSpace.on_line([0, 1]), np.zeros((2, 2)))
    r = classify(zero)
    assert not r["tau3"] and not r["is_e_distance"]


def test_tau4_without_diagonal_hypothesis(line3):
    # row 0 has two zeros but kappa(0,0) > 0: (tau4)' and (tau3) hold, (tau4) does not
    k = DistanceFunction(line3, [[1, 0, 0], [1, 0, 1], [1, 1, 0]])
    r = check_zero_structure(k)
    assert r["tau3"] and r["tau4prime"] and not r["tau4"]
    assert witness_reproduces(k.kappa, r.witnesses["tau4"])


def test_oracle_passes_on_metric(d_line3):
    assert sequence_oracle_tau3(d_line3, 3).passed


def test_point_to_set_examples(d_line3):
    assert point_to_set(d_line3, 0, [1, 2]) == 1
    assert point_to_set(d_line3, 1, [1, 2]) == 0
    assert point_to_set(d_line3, 2, [0]) == 3
    with pytest.raises(DomainError):
        point_to_set(d_line3, 0, [])


@given(kappas(max_n=4))
def test_tau3_implies_tau4prime(k):
    r = check_zero_structure(k)
    if r["tau3"]:
        assert r["tau4prime"]


@given(kappas(max_n=4))
def test_tau_function_is_e_distance(k):
    r = classify(k)
    if r["is_tau_function"]:
        assert r["is_e_distance"]


@given(kappas(max_n=3, values=[0.0, 1.0]))
def test_oracle_agrees_with_zero_structure(k):
    assert sequence_oracle_tau3(k, 3).passed == check_zero_structure(k)["tau3"]


@given(kappas(max_n=4, zero_diagonal=True), st.data())
def test_zero_distance_to_set_means_membership(k, data):
    if not check_zero_structure(k)["tau3"]:
        return
    C = data.draw(st.sets(st.integers(0, k.n - 1), min_size=1))
    z = data.draw(st.integers(0, k.n - 1))
    assert (point_to_set(k, z, C) == 0) == (z in C)


@given(kappas(max_n=5))
def test_witnesses_reproduce(k):
    r = classify(k)
    for name in ("tau1", "tau3", "tau4", "tau4prime", "zero_diagonal"):
        if not r[name]:
            assert witness_reproduces(k.kappa, r.witnesses[name])


@given(e0_kappas())
def test_closures_are_e0(k):
    assert classify(k)["is_e0_distance"]
