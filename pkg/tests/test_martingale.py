"""Test block sums and the martingale projection"""

import math

import numpy as np

from pytest import approx, raises

from rfclt.errors import ParameterError, UnsupportedStructureError
from rfclt.innovations import Distribution, InnovationArray, InnovationSpec, gen_innovations
from rfclt.lattice import Window, prefix_sums, rect_sum
from rfclt.martingale import block_sums, column_mds_sums, mds_project_linear
from rfclt.models import CoeffArray
from rfclt.oracle import RectStatistic, enumerate_model, exact_cond_expectation
from rfclt.simulate import simulate

from .conftest import get_linear, get_test_models


def _xi_at(xi, k):
    return xi.values[tuple(c - o for c, o in zip(k, xi.pad_origin))]


def test_block_sums():
    field = simulate(get_test_models()["ma"], (3, 8))
    assert np.array_equal(block_sums(field, 1).values, field.values)

    blocks = block_sums(Window(np.ones((2, 6)), origin=(4, 1)), 3)
    assert blocks.extent == (2, 2)
    assert blocks.origin == (4, 1)
    assert np.allclose(blocks.values, math.sqrt(3.0))

    # the seventh cell of each line is dropped
    assert block_sums(Window(np.ones((2, 7))), 3).extent == (2, 2)

    with raises(ParameterError):
        block_sums(field, 0)
    with raises(ParameterError):
        block_sums(field, 9)


def test_block_sums_match_rect_sums():
    field = simulate(get_test_models()["iid"], (4, 10))
    p = prefix_sums(field.window)
    blocks = block_sums(field, 3)
    for j in range(1, 5):
        for i in range(1, 4):
            expected = rect_sum(p, (j, 3 * i - 2), (j, 3 * i)) / math.sqrt(3.0)
            assert blocks[(j, i)] == approx(expected, abs=1e-12)


def test_iid_blocks_are_martingale_differences():
    model = get_test_models()["iid"]
    xi = gen_innovations(model.innovations, (3, 12), model.max_lag)
    dec = mds_project_linear(model.coeffs, xi, 4, (3, 12))
    assert dec.blocks == 3
    assert np.array_equal(dec.y_blocks.values, dec.x_blocks.values)
    assert np.all(dec.past_blocks == 0.0)


def test_moving_average_projection():
    model = get_test_models()["ma"]
    xi = gen_innovations(model.innovations, (4, 9), model.max_lag)

    dec = mds_project_linear(model.coeffs, xi, 1, (4, 9))
    assert np.allclose(dec.y_blocks.values, 0.5 * xi.region((1, 1), (4, 9)))

    dec = mds_project_linear(model.coeffs, xi, 3, (4, 9))
    assert dec.y_blocks.extent == (4, 3)
    for j in range(1, 5):
        for i in range(1, 4):
            expected = (
                _xi_at(xi, (j, 3 * i - 2))
                + _xi_at(xi, (j, 3 * i - 1))
                + 0.5 * _xi_at(xi, (j, 3 * i))
            ) / math.sqrt(3.0)
            assert dec.y_blocks[(j, i)] == approx(expected, abs=1e-12)
            past = 0.5 * _xi_at(xi, (j, 3 * i - 3)) / math.sqrt(3.0)
            assert dec.past_blocks[j - 1, i - 1] == approx(past, abs=1e-12)


def test_projection_agrees_with_enumeration():
    model = get_linear(
        {(0, 0): 0.5, (0, 1): 0.5, (1, 0): 0.25}, dist=Distribution.RADEMACHER
    )
    m = enumerate_model(model, (2, 2))
    position = {site: p for p, site in enumerate(m.xi_sites)}
    expectations = [
        exact_cond_expectation(m, RectStatistic((j, 1), (j, 2)), (j, 0)).values()
        for j in (1, 2)
    ]

    for index, _, xi in m.chunks():
        for row, config in zip(xi, index):
            grid = np.zeros((3, 3))
            for site, p in position.items():
                grid[site] = row[p]
            xi_array = InnovationArray(grid, (0, 0), model.innovations)
            dec = mds_project_linear(model.coeffs, xi_array, 2, (2, 2))
            for j in (1, 2):
                expected = expectations[j - 1][config] / math.sqrt(2.0)
                assert dec.past_blocks[j - 1, 0] == approx(expected, abs=1e-12)


def test_martingale_part_is_uncorrelated():
    model = get_test_models()["ma"]
    xi = gen_innovations(model.innovations.for_replication(5), (50, 400), model.max_lag)
    y = mds_project_linear(model.coeffs, xi, 4, (50, 400)).y_blocks.values
    assert y.shape == (50, 100)
    r = np.corrcoef(y[:, :-1].ravel(), y[:, 1:].ravel())[0, 1]
    assert abs(r) < 0.06
    # Var Y = (3 + 1/4) / 4
    assert np.var(y) == approx(0.8125, rel=0.1)


def test_column_mds_sums():
    model = get_test_models()["ma"]
    xi = gen_innovations(model.innovations, (4, 9), model.max_lag)
    dec = mds_project_linear(model.coeffs, xi, 3, (4, 9))
    y = dec.y_blocks.values

    d = column_mds_sums(dec, 2)
    assert d.shape == (3,)
    assert np.allclose(d, (y[0] + y[1]) / math.sqrt(2.0))
    assert np.allclose(column_mds_sums(dec, (4,)), y.sum(axis=0) / 2.0)

    with raises(ParameterError):
        column_mds_sums(dec, 5)
    with raises(ParameterError):
        column_mds_sums(dec, 0)

    line = get_test_models()["ma-1d"]
    xi = gen_innovations(line.innovations, (9,), line.max_lag)
    dec = mds_project_linear(line.coeffs, xi, 3, (9,))
    assert np.array_equal(column_mds_sums(dec, ()), dec.y_blocks.values)
    # X_{3i+1} and half of X_{3i+2} are predictable from the previous block
    expected = [
        (_xi_at(xi, (3 * i + 1,)) + 0.5 * _xi_at(xi, (3 * i + 2,))) / math.sqrt(3.0)
        for i in range(3)
    ]
    assert np.allclose(dec.y_blocks.values, expected)


def test_projection_errors():
    volterra = get_test_models()["volterra"]
    xi = gen_innovations(InnovationSpec(), (4, 4), (1, 1))
    with raises(UnsupportedStructureError):
        mds_project_linear(volterra.coeffs, xi, 2, (4, 4))
    with raises(ParameterError):
        mds_project_linear(CoeffArray([[1.0]]), xi, 5, (4, 4))
