"""Test lattice indices, windows and prefix sums"""

import numpy as np

from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays, array_shapes
from pytest import approx, raises

from rfclt.errors import DimensionError, LatticeRangeError
from rfclt.lattice import (
    Window,
    as_index,
    box,
    norm,
    prefix_sums,
    rect_sum,
)


def test_index_basics():
    assert as_index([1, 2]) == (1, 2)
    with raises(DimensionError):
        as_index([])
    with raises(DimensionError):
        as_index([1, 2, 3, 4, 5])
    with raises(DimensionError):
        as_index([1, 2], dim=3)

    assert norm((2, 3, 4)) == 24
    with raises(LatticeRangeError):
        norm((0, 3))

    assert list(box((1, 1), (2, 3))) == [
        (1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3)
    ]


def test_window():
    w = Window(np.arange(12.0).reshape(3, 4), origin=(0, -1))
    assert w.extent == (3, 4)
    assert w.last == (2, 2)
    assert w[(0, -1)] == 0.0
    assert w[(2, 2)] == 11.0
    assert not w.contains((3, 0))
    with raises(LatticeRangeError):
        w.position((3, 0))

    sub = w.crop((1, 0), (2, 1))
    assert sub.origin == (1, 0)
    assert sub.values.tolist() == [[5.0, 6.0], [9.0, 10.0]]

    with raises(DimensionError):
        Window(np.zeros((0, 3)))
    with raises(DimensionError):
        Window(np.zeros((1, 1, 1, 1, 1)))


def test_prefix_sums_single_cell():
    p = prefix_sums(Window([[2.5]]))
    assert rect_sum(p, (1, 1), (1, 1)) == 2.5


def test_rect_sum_errors():
    p = prefix_sums(Window(np.ones((4, 4))))
    assert rect_sum(p, (1, 1), (4, 4)) == 16.0
    assert p.total == 16.0
    with raises(LatticeRangeError):
        rect_sum(p, (3, 1), (2, 4))
    with raises(LatticeRangeError):
        rect_sum(p, (1, 1), (5, 4))


@settings(max_examples=50, deadline=None)
@given(
    arrays(
        np.float64,
        array_shapes(min_dims=1, max_dims=3, min_side=1, max_side=6),
        elements=st.floats(-100, 100),
    ),
    st.data(),
)
def test_rect_sum_matches_direct_sum(values, data):
    w = Window(values, origin=(-2,) * values.ndim)
    p = prefix_sums(w)
    lo = []
    hi = []
    for n in values.shape:
        a = data.draw(st.integers(0, n - 1))
        b = data.draw(st.integers(a, n - 1))
        lo.append(a - 2)
        hi.append(b - 2)
    direct = values[tuple(slice(a + 2, b + 3) for a, b in zip(lo, hi))].sum()
    assert rect_sum(p, lo, hi) == approx(direct, abs=1e-9)
