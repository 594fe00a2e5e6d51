"""Test counter-based innovation generation"""

import numpy as np

from pytest import approx, mark, raises

from rfclt.errors import DimensionError, PadError, ParameterError, UnsupportedStructureError
from rfclt.innovations import (
    Distribution,
    InnovationSpec,
    Structure,
    base_noise,
    gen_innovations,
)


def test_same_spec_same_values():
    spec = InnovationSpec(seed=7)
    a = gen_innovations(spec, (6, 5), (2, 1))
    b = gen_innovations(InnovationSpec(seed=7), (6, 5), (2, 1))
    assert np.array_equal(a.values, b.values)
    assert a.pad_origin == (-1, 0)
    assert a.last == (6, 5)


def test_sub_windows_are_consistent():
    spec = InnovationSpec(Distribution.CENTERED_UNIFORM, seed=99, replication=3)
    whole = gen_innovations(spec, (8, 8), (2, 2))
    part = gen_innovations(spec, (3, 4), (0, 0), origin=(4, 3))
    assert np.array_equal(part.values, whole.region((4, 3), (6, 6)))

    # starts that are not multiples of the Philox lane count
    line = base_noise(spec, (-7,), (20,))
    assert np.array_equal(base_noise(spec, (5,), (9,)), line[12:17])
    assert np.array_equal(base_noise(spec, (-6,), (-6,)), line[1:2])

    cube = base_noise(spec, (0, 0, 0), (3, 3, 3))
    assert np.array_equal(base_noise(spec, (1, 2, 1), (2, 3, 3)), cube[1:3, 2:4, 1:4])


def test_streams_differ():
    spec = InnovationSpec(seed=1)
    first = base_noise(spec, (1, 1), (4, 4))
    assert not np.array_equal(first, base_noise(spec.for_replication(1), (1, 1), (4, 4)))
    assert not np.array_equal(first, base_noise(spec.with_seed(2), (1, 1), (4, 4)))


def test_distributions():
    rademacher = base_noise(InnovationSpec(Distribution.RADEMACHER, seed=5), (1, 1), (200, 200))
    assert set(np.unique(rademacher)) == {-1.0, 1.0}
    assert np.mean(rademacher) == approx(0.0, abs=0.025)

    uniform = base_noise(InnovationSpec(Distribution.CENTERED_UNIFORM, seed=5), (1, 1), (200, 200))
    assert np.all(np.abs(uniform) < 1.0)
    assert np.var(uniform) == approx(1.0 / 3.0, abs=0.01)

    normal = base_noise(InnovationSpec(seed=5), (1, 1), (200, 200))
    assert np.mean(normal) == approx(0.0, abs=0.025)
    assert np.var(normal) == approx(1.0, abs=0.035)


def test_column_mds():
    spec = InnovationSpec(Distribution.RADEMACHER, Structure.COLUMN_MDS, seed=3)
    xi = gen_innovations(spec, (50, 40), (1, 2))
    eps = base_noise(spec, (-1, -1), (50, 40))
    expected = eps[1:, :] * np.sqrt(2.0) * (eps[:-1, :] > 0)
    assert np.array_equal(xi.values, expected)
    assert np.all(np.isin(np.abs(xi.values), [0.0, np.sqrt(2.0)]))
    assert np.mean(xi.values ** 2) == approx(1.0, abs=0.1)

    with raises(UnsupportedStructureError):
        gen_innovations(InnovationSpec(structure=Structure.COLUMN_MDS), (4,), (1,))


def test_errors():
    spec = InnovationSpec()
    xi = gen_innovations(spec, (4, 4), (1, 1))
    with raises(PadError):
        xi.region((-1, 0), (4, 4))
    with raises(ParameterError):
        gen_innovations(spec, (4, -1), (0, 0))
    with raises(DimensionError):
        gen_innovations(spec, (4, 0), (0, 0))
    with raises(ParameterError):
        InnovationSpec(seed=-1)
    with raises(ParameterError):
        InnovationSpec(seed=2 ** 64)


def z_score(sample, expected=0.0):
    sample = np.ravel(sample)
    return (np.mean(sample) - expected) / (np.std(sample) / np.sqrt(sample.size))


@mark.parametrize("dist", list(Distribution))
def test_innovation_means(dist):
    noise = base_noise(InnovationSpec(dist, seed=2718), (1, 1), (400, 400))
    assert abs(z_score(noise)) <= 4.0
    if dist == Distribution.RADEMACHER:
        assert np.all(noise ** 2 == 1.0)
    else:
        assert abs(z_score(noise ** 2, dist.variance)) <= 4.0


def test_column_mds_uncorrelated():
    spec = InnovationSpec(Distribution.RADEMACHER, Structure.COLUMN_MDS, seed=31)
    xi = gen_innovations(spec, (400, 400), (1, 0)).values
    # the products along a column are themselves martingale differences
    assert abs(z_score(xi[1:, :] * xi[:-1, :])) <= 3.0
    assert abs(z_score(xi)) <= 4.0
