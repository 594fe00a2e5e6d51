"""Test field simulation"""

import numpy as np

from pytest import approx, mark, raises

from rfclt.errors import ModelValidationError, PadError
from rfclt.innovations import Distribution, InnovationSpec, gen_innovations
from rfclt.lattice import box
from rfclt.models import CoeffArray, VolterraCoeffs
from rfclt.simulate import Method, simulate, simulate_linear, simulate_volterra

from .conftest import get_linear, get_test_models, get_volterra


def _xi_at(xi, k):
    return xi.values[tuple(c - o for c, o in zip(k, xi.pad_origin))]


def test_iid_field_is_the_innovations():
    model = get_test_models()["iid"]
    field = simulate(model, (5, 4))
    xi = gen_innovations(model.innovations, (5, 4), (0, 0))
    assert np.array_equal(field.values, xi.values)
    assert field.window.origin == (1, 1)


def test_linear_matches_definition():
    rng = np.random.default_rng(0)
    c = CoeffArray(rng.normal(size=(3, 4)))
    xi = gen_innovations(InnovationSpec(seed=17), (6, 7), c.max_lag)
    field = simulate_linear(c, (6, 7), xi)
    for k in box((1, 1), (6, 7)):
        expected = sum(
            a_j * _xi_at(xi, (k[0] - j[0], k[1] - j[1])) for j, a_j in c.nonzero()
        )
        assert field.window[k] == approx(expected, abs=1e-12)


def test_fft_agrees_with_direct():
    rng = np.random.default_rng(1)
    c = CoeffArray(rng.normal(size=(4, 3)))
    xi = gen_innovations(InnovationSpec(seed=3), (40, 50), c.max_lag)
    direct = simulate_linear(c, (40, 50), xi)
    fft = simulate_linear(c, (40, 50), xi, method=Method.FFT)
    assert np.max(np.abs(direct.values - fft.values)) < 1e-10


def test_volterra_product():
    model = get_test_models()["volterra"]
    field = simulate(model, (6, 6))
    xi = gen_innovations(model.innovations, (6, 6), (0, 1))
    for k in box((1, 1), (6, 6)):
        expected = _xi_at(xi, k) * _xi_at(xi, (k[0], k[1] - 1))
        assert field.window[k] == approx(expected, abs=1e-14)


def test_sub_window_consistency():
    model = get_test_models()["ma"]
    whole = simulate(model, (10, 10), replication=2)
    part = simulate(model, (4, 5), replication=2, origin=(3, 4))
    assert np.array_equal(part.values, whole.window.crop((3, 4), (6, 8)).values)

    volterra = get_test_models()["volterra"]
    whole = simulate(volterra, (8, 8))
    part = simulate(volterra, (2, 3), origin=(5, 2))
    assert np.array_equal(part.values, whole.window.crop((5, 2), (6, 4)).values)


def test_errors():
    c = CoeffArray.from_entries({(1, 1): 1.0}, 2)
    xi = gen_innovations(InnovationSpec(), (4, 4), (0, 0))
    with raises(PadError):
        simulate_linear(c, (4, 4), xi)

    v = VolterraCoeffs({((0,), (1,)): 1.0})
    # a diagonal entry smuggled in after construction
    v._entries[((2,), (2,))] = 1.0
    with raises(ModelValidationError):
        simulate_volterra(v, (4,), gen_innovations(InnovationSpec(), (4,), (2,)))


def second_moment_z(sample, expected):
    squares = np.ravel(sample) ** 2
    return (np.mean(squares) - expected) / (np.std(squares) / np.sqrt(squares.size))


@mark.parametrize("dist", list(Distribution))
def test_linear_variance(dist):
    model = get_linear({(0, 0): 1.0, (1, 1): 0.5}, dist=dist, seed=404)
    field = simulate(model, (400, 400))
    # sites two apart on both axes share no innovation
    sample = field.values[::2, ::2]
    assert abs(np.mean(sample)) <= 4.0 * np.std(sample) / np.sqrt(sample.size)
    assert abs(second_moment_z(sample, 1.25 * dist.variance)) <= 3.0


@mark.parametrize("dist", [Distribution.STANDARD_NORMAL, Distribution.CENTERED_UNIFORM])
def test_volterra_variance(dist):
    model = get_volterra({((0, 0), (0, 1)): 2.0}, dist=dist, seed=505)
    field = simulate(model, (400, 400))
    sample = field.values[:, ::2]
    assert abs(second_moment_z(sample, 4.0 * dist.variance ** 2)) <= 3.0
