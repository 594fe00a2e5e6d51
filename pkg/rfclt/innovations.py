"""Innovation fields

Values are generated counter-based: numpy's Philox bit generator is keyed
by (seed, replication, stream) and its 256-bit counter encodes the lattice
coordinates of each cell, so any sub-window is reproducible on its own,
whatever order cells are generated in.
"""

import logging

from enum import Enum
from typing import Optional, Sequence

import numpy as np
from numpy.random import Philox, SeedSequence
from scipy.special import ndtri

# rfclt imports:
from .errors import DimensionError, PadError, ParameterError, UnsupportedStructureError
from .lattice import LatticeIndex, as_index, box, leq, ones

_LOG = logging.getLogger(__name__)

MAX_SEED = 2 ** 64 - 1

# Philox produces four 64-bit words per counter value
LANES = 4

# Offsets keeping counter words nonnegative for negative coordinates
COUNTER_BASE = 2 ** 62
COORD_OFFSET = 2 ** 62

# Stream tag of the base noise
STREAM_BASE_NOISE = 0

_UNIT = 2.0 ** -53


class Distribution(Enum):
    """Base distributions, all centered"""

    STANDARD_NORMAL = "standard-normal"
    RADEMACHER = "rademacher"
    CENTERED_UNIFORM = "centered-uniform"

    @property
    def variance(self) -> float:
        if self == Distribution.CENTERED_UNIFORM:
            return 1.0 / 3.0
        return 1.0


class Structure(Enum):
    """Dependence structure of the innovation field"""

    IID = "iid"
    # Independent columns, each a stationary martingale difference sequence
    COLUMN_MDS = "column-mds"


class InnovationSpec:
    """Distribution, structure and seed of an innovation field"""

    def __init__(
        self,
        distribution: Distribution = Distribution.STANDARD_NORMAL,
        structure: Structure = Structure.IID,
        seed: int = 0,
        replication: int = 0,
    ) -> None:
        """
        Args:
            distribution: base distribution of the noise
            structure: iid or column-mds
            seed: unsigned 64-bit base seed
            replication: replication index, mixed into the Philox key

        Raises:
            ParameterError: if seed or replication is out of range
        """
        if not 0 <= int(seed) <= MAX_SEED:
            raise ParameterError("Seed {} is not an unsigned 64-bit integer".format(seed))
        if int(replication) < 0:
            raise ParameterError("Replication index {} is negative".format(replication))
        self._distribution = Distribution(distribution)
        self._structure = Structure(structure)
        self._seed = int(seed)
        self._replication = int(replication)

    @property
    def distribution(self) -> Distribution:
        return self._distribution

    @property
    def structure(self) -> Structure:
        return self._structure

    @property
    def seed(self) -> int:
        return self._seed

    @property
    def replication(self) -> int:
        return self._replication

    @property
    def variance(self) -> float:
        """sigma^2 of a single innovation (column-mds keeps the base variance)"""
        return self._distribution.variance

    def for_replication(self, replication: int) -> "InnovationSpec":
        """Same spec, independent stream for the given replication"""
        return InnovationSpec(
            self._distribution, self._structure, self._seed, replication
        )

    def with_seed(self, seed: int) -> "InnovationSpec":
        return InnovationSpec(
            self._distribution, self._structure, seed, self._replication
        )

    def to_dict(self) -> dict:
        return {
            "dist": self._distribution.value,
            "structure": self._structure.value,
            "seed": self._seed,
        }

    def __eq__(self, other) -> bool:
        if not isinstance(other, InnovationSpec):
            return NotImplemented
        return (
            self._distribution,
            self._structure,
            self._seed,
            self._replication,
        ) == (
            other._distribution,
            other._structure,
            other._seed,
            other._replication,
        )

    def __repr__(self) -> str:
        return "InnovationSpec({}, {}, seed={}, replication={})".format(
            self._distribution.value,
            self._structure.value,
            self._seed,
            self._replication,
        )


class InnovationArray:
    """Realised innovations on the rectangle [pad_origin, last]"""

    def __init__(
        self, values: np.ndarray, pad_origin: Sequence[int], spec: InnovationSpec
    ) -> None:
        values = np.asarray(values, dtype=np.float64)
        values.flags.writeable = False
        self._values = values
        self._pad_origin = as_index(pad_origin, values.ndim)
        self._spec = spec

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def pad_origin(self) -> LatticeIndex:
        return self._pad_origin

    @property
    def spec(self) -> InnovationSpec:
        return self._spec

    @property
    def dim(self) -> int:
        return self._values.ndim

    @property
    def last(self) -> LatticeIndex:
        return tuple(o + n - 1 for o, n in zip(self._pad_origin, self._values.shape))

    def covers(self, lo: Sequence[int], hi: Sequence[int]) -> bool:
        return leq(self._pad_origin, lo) and leq(hi, self.last)

    def region(self, lo: Sequence[int], hi: Sequence[int]) -> np.ndarray:
        """Innovation values on the lattice rectangle [lo, hi]

        Raises:
            PadError: naming the missing index range if [lo, hi] is not covered
        """
        lo = as_index(lo, self.dim)
        hi = as_index(hi, self.dim)
        if not self.covers(lo, hi):
            missing_lo = tuple(min(a, o) for a, o in zip(lo, self._pad_origin))
            missing_hi = tuple(max(b, t) for b, t in zip(hi, self.last))
            raise PadError(
                "Innovations cover [{}, {}] but [{}, {}] is required "
                "(missing cells within [{}, {}])".format(
                    self._pad_origin, self.last, lo, hi, missing_lo, missing_hi
                )
            )
        slices = tuple(
            slice(a - o, b - o + 1) for a, b, o in zip(lo, hi, self._pad_origin)
        )
        return self._values[slices]


def _philox_key(spec: InnovationSpec, stream: int) -> np.ndarray:
    sequence = SeedSequence(spec.seed, spawn_key=(spec.replication, stream))
    return sequence.generate_state(2, dtype=np.uint64)


def _raw_region(key: np.ndarray, lo: LatticeIndex, hi: LatticeIndex) -> np.ndarray:
    """Raw 64-bit draws for every cell of [lo, hi], one draw per cell.

    Each row along the last axis is one Philox stream whose counter holds the
    leading coordinates; the low counter word walks the last coordinate.
    """
    shape = tuple(b - a + 1 for a, b in zip(lo, hi))
    raw = np.empty(shape, dtype=np.uint64)
    start = lo[-1]
    count = shape[-1]
    block, lane = divmod(start, LANES)
    for lead in box(lo[:-1], hi[:-1]):
        words = [COUNTER_BASE + block] + [c + COORD_OFFSET for c in lead]
        words += [0] * (LANES - len(words))
        bit_generator = Philox(counter=np.array(words, dtype=np.uint64), key=key)
        draws = bit_generator.random_raw(lane + count)
        position = tuple(c - a for c, a in zip(lead, lo[:-1]))
        raw[position] = draws[lane:]
    return raw


def _transform(raw: np.ndarray, distribution: Distribution) -> np.ndarray:
    """Map raw 64-bit draws to the base distribution by inverse transform"""
    if distribution == Distribution.RADEMACHER:
        return np.where((raw >> np.uint64(63)) == 1, 1.0, -1.0)
    uniform = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _UNIT
    if distribution == Distribution.CENTERED_UNIFORM:
        return 2.0 * uniform - 1.0
    return ndtri(uniform)


def mds_gate(previous: np.ndarray) -> np.ndarray:
    """g(x) = sqrt(2) * 1{x > median}; every base distribution has median 0"""
    return np.sqrt(2.0) * (previous > 0.0)


def base_noise(spec: InnovationSpec, lo: Sequence[int], hi: Sequence[int]) -> np.ndarray:
    """The iid base noise epsilon on [lo, hi]"""
    lo = as_index(lo)
    hi = as_index(hi, len(lo))
    key = _philox_key(spec, STREAM_BASE_NOISE)
    return _transform(_raw_region(key, lo, hi), spec.distribution)


def gen_innovations(
    spec: InnovationSpec,
    extent: Sequence[int],
    pad: Sequence[int],
    origin: Optional[Sequence[int]] = None,
) -> InnovationArray:
    """Generate innovations for a window plus a pad on the negative side.

    Covers the lattice rectangle [origin - pad, origin + extent - 1].

    Args:
        spec: innovation specification
        extent: window extent (componentwise >= 0)
        pad: cells materialised below the window origin (componentwise >= 0)
        origin: window origin, defaults to (1, ..., 1)

    Raises:
        ParameterError: negative extent or pad
        DimensionError: nothing to generate, or mismatched dimensions
        UnsupportedStructureError: column-mds with d != 2
    """
    extent = as_index(extent)
    dim = len(extent)
    pad = as_index(pad, dim)
    origin = ones(dim) if origin is None else as_index(origin, dim)
    if any(n < 0 for n in extent) or any(p < 0 for p in pad):
        raise ParameterError(
            "Extent {} and pad {} must be componentwise >= 0".format(extent, pad)
        )
    if any(n + p == 0 for n, p in zip(extent, pad)):
        raise DimensionError("Nothing to generate for extent {} pad {}".format(extent, pad))

    lo = tuple(o - p for o, p in zip(origin, pad))
    hi = tuple(o + n - 1 for o, n in zip(origin, extent))

    if spec.structure == Structure.IID:
        values = base_noise(spec, lo, hi)
    else:
        if dim != 2:
            raise UnsupportedStructureError(
                "Column-mds innovations need d = 2 (got d = {})".format(dim)
            )
        # columns run along axis 0: xi[n, m] = eps[n, m] * g(eps[n - 1, m])
        eps = base_noise(spec, (lo[0] - 1, lo[1]), hi)
        values = eps[1:, :] * mds_gate(eps[:-1, :])

    _LOG.debug("Generated innovations %s on [%s, %s]", spec, lo, hi)
    return InnovationArray(values, lo, spec)
