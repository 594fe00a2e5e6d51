"""Test exact enumeration of conditional expectations"""

import json
import math
import os

import numpy as np

from hypothesis import given, reject, settings, strategies as st
from pytest import approx, raises

from rfclt.conditions import linear_b, volterra_b_sq
from rfclt.errors import (
    DimensionError,
    EnumerationSizeError,
    LatticeRangeError,
    ParameterError,
    UnsupportedStructureError,
)
from rfclt.innovations import Distribution, Structure
from rfclt.oracle import (
    RectStatistic,
    check_commuting,
    enumerate_model,
    exact_cond_expectation,
    exact_moment,
    exact_var_ratio,
    partial_sum,
    small_model_suite,
    tower_deviation,
    verify_case,
    verify_suite,
)

from .conftest import get_linear, get_volterra

GOLDEN = os.path.join(os.path.dirname(__file__), "golden", "oracle_var_ratio.json")


def rademacher(entries, structure=Structure.IID):
    return get_linear(entries, dist=Distribution.RADEMACHER, structure=structure)


def test_site_counts():
    assert enumerate_model(rademacher({(0, 0): 1.0}), (1, 1)).site_count == 1
    assert enumerate_model(rademacher({(0, 0): 1.0}), (2, 2)).site_count == 4
    diagonal = enumerate_model(rademacher({(0, 0): 1.0, (1, 1): -0.5}), (2, 2))
    assert diagonal.site_count == 7
    assert diagonal.configurations == 128

    mds = enumerate_model(rademacher({(0, 0): 1.0}, Structure.COLUMN_MDS), (2, 2))
    assert mds.xi_sites == [(1, 1), (1, 2), (2, 1), (2, 2)]
    assert mds.sites == [(0, 1), (0, 2), (1, 1), (1, 2), (2, 1), (2, 2)]


def test_iid_cond_expectations():
    m = enumerate_model(rademacher({(0, 0): 1.0}), (2, 2))
    whole = partial_sum((2, 2))
    assert exact_cond_expectation(m, whole, (0, 0)).norm == 0.0
    assert exact_cond_expectation(m, whole, (1, 1)).norm == approx(1.0)
    assert exact_cond_expectation(m, whole, (1, 2)).norm == approx(math.sqrt(2.0))
    assert exact_cond_expectation(m, whole, (2, 2)).norm == approx(2.0)
    assert exact_moment(m, whole) == (0.0, approx(4.0))

    shifted = RectStatistic((1, 1), (1, 1), constant=3.0)
    expectation = exact_cond_expectation(m, shifted, (0, 0))
    assert expectation.mean == approx(3.0)
    assert len(expectation.class_means) == 1


def test_cond_expectation_values():
    # S = X_{1,1} + X_{1,2} with X_k = xi_k / 2 + xi_{k-(0,1)} / 2
    m = enumerate_model(rademacher({(0, 0): 0.5, (0, 1): 0.5}), (1, 2))
    expectation = exact_cond_expectation(m, partial_sum((1, 2)), (1, 1))
    sign = {site: b for b, site in enumerate(m.sites)}
    values = expectation.values()
    assert values.shape == (8,)
    for config, value in enumerate(values):
        xi = {site: 1.0 - 2.0 * ((config >> b) & 1) for site, b in sign.items()}
        assert value == approx(0.5 * xi[(1, 0)] + xi[(1, 1)])


lags = st.tuples(st.integers(0, 2), st.integers(0, 2))
coefficients = st.sampled_from([1.0, -1.0, 0.5, -0.5])
rectangles = st.tuples(st.integers(1, 3), st.integers(1, 3))


def enumerate_or_reject(model, extent):
    try:
        return enumerate_model(model, extent)
    except EnumerationSizeError:
        reject()


@settings(max_examples=60, deadline=None)
@given(
    st.dictionaries(lags, coefficients, min_size=1, max_size=5),
    rectangles,
    st.sampled_from(list(Structure)),
)
def test_linear_closed_form(entries, u, structure):
    model = rademacher(entries, structure)
    m = enumerate_or_reject(model, u)
    norm = exact_cond_expectation(m, partial_sum(u), (0, 0)).norm
    assert norm == approx(linear_b(model.coeffs, u), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(
    st.dictionaries(
        st.tuples(lags, lags).filter(lambda uv: uv[0] != uv[1]),
        coefficients,
        min_size=1,
        max_size=4,
    ),
    rectangles,
)
def test_volterra_closed_form(entries, j):
    model = get_volterra(entries, dist=Distribution.RADEMACHER)
    m = enumerate_or_reject(model, j)
    second = exact_cond_expectation(m, partial_sum(j), (0, 0)).second_moment
    assert second == approx(volterra_b_sq(model.coeffs, j), abs=1e-9)


def test_commuting_and_tower():
    m = enumerate_model(rademacher({(0, 0): 0.5, (0, 1): 0.5, (1, 0): 0.25}), (2, 3))
    whole = partial_sum((2, 3))
    for a, b, u, v in [(2, 1, 1, 3), (1, 3, 0, 2), (2, 0, 2, 3), (1, 2, 1, 1)]:
        assert check_commuting(m, a, b, u, v) <= 1e-12

    assert tower_deviation(m, whole, (2, 2), (1, 0)) <= 1e-12
    with raises(ParameterError):
        tower_deviation(m, whole, (1, 1), (2, 0))
    with raises(ParameterError):
        check_commuting(m, 0, 1, 1, 1)

    line = enumerate_model(rademacher({(1,): 1.0}), (3,))
    with raises(DimensionError):
        check_commuting(line, 1, 1, 1, 1)


def test_total_expectation():
    m = enumerate_model(get_volterra({((0, 0), (1, 1)): 1.0}, Distribution.RADEMACHER), (2, 2))
    whole = partial_sum((2, 2))
    mean, second = exact_moment(m, whole)
    assert mean == 0.0
    assert second == approx(4.0)
    for cond in [(0, 0), (1, 1), (2, 1)]:
        assert exact_cond_expectation(m, whole, cond).mean == approx(mean, abs=1e-12)


def test_var_ratio():
    iid = enumerate_model(rademacher({(0, 0): 1.0}), (2, 2))
    ratio = exact_var_ratio(iid, (2, 2))
    assert ratio.lhs == approx(1.0)
    assert ratio.rhs_series == approx(1.0 + 2.0 * 2.0 ** -1.5 + 4.0 ** -1.5)
    assert not ratio.degenerate

    zero = enumerate_model(rademacher({(0, 0): 0.0}), (2, 2))
    assert exact_var_ratio(zero, (2, 2)).degenerate

    # nothing in the window is measurable at the strict past
    assert exact_var_ratio(iid, (2, 2), anchor=(0, 0)).unbounded


def test_var_ratio_golden():
    with open(GOLDEN) as f:
        golden = json.load(f)["ma-1d"]
    model = rademacher({(int(k),): v for k, v in golden["coeffs"].items()})
    for row in golden["rows"]:
        m = enumerate_model(model, (row["n"],))
        ratio = exact_var_ratio(m, (row["n"],), anchor=golden["anchor"])
        assert ratio.lhs == approx(row["lhs"], abs=5e-7)
        assert ratio.rhs_series == approx(row["rhs"], abs=5e-7)
        assert ratio.implied_constant == approx(row["implied"], abs=5e-6)
        assert ratio.implied_constant <= golden["bound"]


def test_enumeration_errors():
    with raises(EnumerationSizeError) as info:
        enumerate_model(rademacher({(0, 0): 1.0}), (5, 5))
    assert info.value.sites == 25
    assert info.value.cap == 24

    with raises(DimensionError):
        enumerate_model(rademacher({(0, 0): 1.0}), (0, 2))
    with raises(ParameterError):
        enumerate_model(rademacher({(1, 1): 1.0}), (2, 2), pad=(1, 0))
    with raises(UnsupportedStructureError):
        enumerate_model(rademacher({(1,): 1.0}, Structure.COLUMN_MDS), (3,))

    m = enumerate_model(rademacher({(0, 0): 1.0}), (2, 2))
    with raises(LatticeRangeError):
        exact_cond_expectation(m, RectStatistic((1, 1), (3, 2)), (0, 0))


def test_verify_suite():
    names = [case.name for case in small_model_suite()]
    assert len(names) == len(set(names))

    report = verify_suite()
    assert report.passed
    assert report.max_deviation <= 1e-10
    assert {check.case for check in report.checks} == set(names)
    assert report.to_dict()["passed"] is True

    lagged = next(case for case in small_model_suite() if case.name == "lagged")
    checks = verify_case(lagged)
    assert any(check.check.startswith("commuting") for check in checks)
    assert all(check.passed for check in checks)
    assert np.isfinite([check.deviation for check in checks]).all()
