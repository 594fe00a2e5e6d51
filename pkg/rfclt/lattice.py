"""Lattice indices, rectangular windows and prefix sums

Windows are stored row-major (C order). Axis 0 is the "vertical" axis
(first lattice coordinate) and the last axis is the blocking axis used by
the martingale construction.
"""

import logging

from itertools import product
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

# rfclt imports:
from .errors import DimensionError, LatticeRangeError

_LOG = logging.getLogger(__name__)

# Supported lattice dimensions
MIN_DIM = 1
MAX_DIM = 4

LatticeIndex = Tuple[int, ...]


def as_index(coords: Iterable[int], dim: Optional[int] = None) -> LatticeIndex:
    """Normalise coords to a tuple of python ints.

    Raises:
        DimensionError: if the dimension is outside MIN_DIM..MAX_DIM or
            does not match dim
    """
    index = tuple(int(c) for c in coords)
    if not MIN_DIM <= len(index) <= MAX_DIM:
        raise DimensionError(
            "Index {} has dimension {} (supported {}..{})".format(
                index, len(index), MIN_DIM, MAX_DIM
            )
        )
    if dim is not None and len(index) != dim:
        raise DimensionError(
            "Index {} has dimension {} (expecting {})".format(index, len(index), dim)
        )
    return index


def ones(dim: int) -> LatticeIndex:
    return (1,) * dim


def zeros(dim: int) -> LatticeIndex:
    return (0,) * dim


def leq(j: Sequence[int], k: Sequence[int]) -> bool:
    """Componentwise order j <= k"""
    return all(a <= b for a, b in zip(j, k))


def norm(n: Sequence[int]) -> int:
    """Product norm |n| = n_1 * ... * n_d, defined for strictly positive n"""
    if any(c <= 0 for c in n):
        raise LatticeRangeError("|n| is only defined for n >= 1, got {}".format(n))
    return int(np.prod(n, dtype=np.int64))


def box(lo: Sequence[int], hi: Sequence[int]) -> Iterable[LatticeIndex]:
    """All indices u with lo <= u <= hi, in lexicographic (row-major) order"""
    return product(*(range(a, b + 1) for a, b in zip(lo, hi)))


class Window:
    """Real values on the rectangle [origin, origin + extent - 1]"""

    def __init__(
        self, values: np.ndarray, origin: Optional[Sequence[int]] = None
    ) -> None:
        """Create a window.

        Args:
            values: dense array whose shape is the extent
            origin: lattice index of values[0, ..., 0] (defaults to (1,...,1))

        Raises:
            DimensionError: for empty windows or unsupported dimensions
        """
        array = np.array(values, dtype=np.float64)
        if array.ndim < MIN_DIM or array.ndim > MAX_DIM:
            raise DimensionError(
                "Window has dimension {} (supported {}..{})".format(
                    array.ndim, MIN_DIM, MAX_DIM
                )
            )
        if array.size == 0:
            raise DimensionError("Window is empty: extent {}".format(array.shape))
        array.flags.writeable = False
        self._values = array
        self._origin = (
            ones(array.ndim) if origin is None else as_index(origin, array.ndim)
        )

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def origin(self) -> LatticeIndex:
        return self._origin

    @property
    def extent(self) -> LatticeIndex:
        return tuple(int(n) for n in self._values.shape)

    @property
    def dim(self) -> int:
        return self._values.ndim

    @property
    def last(self) -> LatticeIndex:
        """Largest lattice index inside the window"""
        return tuple(o + n - 1 for o, n in zip(self._origin, self.extent))

    def contains(self, k: Sequence[int]) -> bool:
        return len(k) == self.dim and leq(self._origin, k) and leq(k, self.last)

    def position(self, k: Sequence[int]) -> Tuple[int, ...]:
        """Array position of lattice index k

        Raises:
            LatticeRangeError: if k is outside the window
        """
        if not self.contains(k):
            raise LatticeRangeError(
                "Index {} outside window [{}, {}]".format(
                    tuple(k), self._origin, self.last
                )
            )
        return tuple(a - o for a, o in zip(k, self._origin))

    def __getitem__(self, k: Sequence[int]) -> float:
        return float(self._values[self.position(k)])

    def crop(self, lo: Sequence[int], hi: Sequence[int]) -> "Window":
        """Sub-window [lo, hi] as a new Window (lattice coordinates kept)"""
        if not leq(lo, hi):
            raise LatticeRangeError("lo {} is not <= hi {}".format(tuple(lo), tuple(hi)))
        start = self.position(lo)
        stop = tuple(p + 1 for p in self.position(hi))
        slices = tuple(slice(a, b) for a, b in zip(start, stop))
        return Window(self._values[slices], origin=lo)


class PrefixArray:
    """Rectangle sums S_k = sum of values over [origin, k] for every k in a window"""

    def __init__(self, sums: np.ndarray, origin: Sequence[int]) -> None:
        sums = np.asarray(sums, dtype=np.float64)
        sums.flags.writeable = False
        self._sums = sums
        self._origin = as_index(origin, sums.ndim)

    @property
    def sums(self) -> np.ndarray:
        return self._sums

    @property
    def origin(self) -> LatticeIndex:
        return self._origin

    @property
    def extent(self) -> LatticeIndex:
        return tuple(int(n) for n in self._sums.shape)

    @property
    def dim(self) -> int:
        return self._sums.ndim

    @property
    def total(self) -> float:
        """Sum over the whole window"""
        return float(self._sums[(-1,) * self.dim])


def prefix_sums(w: Window) -> PrefixArray:
    """Summed-area table of a window, one cumulative pass per axis

    Raises:
        DimensionError: for an empty window
    """
    if w.values.size == 0:
        raise DimensionError("Cannot take prefix sums of an empty window")
    sums = w.values
    for axis in range(w.dim):
        sums = np.cumsum(sums, axis=axis)
    return PrefixArray(sums, w.origin)


def rect_sum(p: PrefixArray, lo: Sequence[int], hi: Sequence[int]) -> float:
    """Sum of the source window over the rectangle [lo, hi]

    Uses 2^d-term inclusion-exclusion on the prefix array.

    Raises:
        LatticeRangeError: if lo is not <= hi or either lies outside the window
    """
    dim = p.dim
    lo = as_index(lo, dim)
    hi = as_index(hi, dim)
    if not leq(lo, hi):
        raise LatticeRangeError("lo {} is not <= hi {}".format(lo, hi))
    last = tuple(o + n - 1 for o, n in zip(p.origin, p.extent))
    if not (leq(p.origin, lo) and leq(hi, last)):
        raise LatticeRangeError(
            "Rectangle [{}, {}] outside window [{}, {}]".format(lo, hi, p.origin, last)
        )

    start = [a - o for a, o in zip(lo, p.origin)]
    stop = [b - o for b, o in zip(hi, p.origin)]
    total = 0.0
    for corner in product((False, True), repeat=dim):
        # corner[i] True -> use (start_i - 1), which vanishes when start_i == 0
        position = []
        for use_lower, a, b in zip(corner, start, stop):
            position.append(a - 1 if use_lower else b)
        if any(c < 0 for c in position):
            continue
        sign = -1.0 if sum(corner) % 2 else 1.0
        total += sign * p.sums[tuple(position)]
    return float(total)
