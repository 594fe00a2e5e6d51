"""Blocking construction of row-wise martingale differences

Values along the last (blocking) axis are grouped into blocks of length ell
and normalised by sqrt(ell). For linear models the conditional expectation
of a block given everything up to the end of the previous block is a
truncated convolution, so the martingale part is obtained exactly.
"""

import logging
import math

from typing import Optional, Sequence, Union

import numpy as np

# rfclt imports:
from .errors import ParameterError, UnsupportedStructureError
from .innovations import InnovationArray
from .lattice import LatticeIndex, Window, as_index, ones
from .models import CoeffArray
from .simulate import FieldWindow, simulate_linear

_LOG = logging.getLogger(__name__)


class BlockDecomposition:
    """X^(ell), its martingale part Y^(ell) and the predictable part in between"""

    def __init__(self, ell: int, x_blocks: Window, y_blocks: Window) -> None:
        self._ell = int(ell)
        self._x_blocks = x_blocks
        self._y_blocks = y_blocks

    @property
    def ell(self) -> int:
        return self._ell

    @property
    def x_blocks(self) -> Window:
        return self._x_blocks

    @property
    def y_blocks(self) -> Window:
        return self._y_blocks

    @property
    def past_blocks(self) -> np.ndarray:
        """E(X^(ell)_{j,i} | F^(ell)_{j,i-1}) = X^(ell) - Y^(ell)"""
        return self._x_blocks.values - self._y_blocks.values

    @property
    def blocks(self) -> int:
        """Blocks per line"""
        return self._x_blocks.extent[-1]

    def __repr__(self) -> str:
        return "BlockDecomposition(ell={}, extent={})".format(
            self._ell, self._x_blocks.extent
        )


def _block_values(values: np.ndarray, ell: int) -> np.ndarray:
    k = values.shape[-1] // ell
    trimmed = values[..., : k * ell]
    return trimmed.reshape(values.shape[:-1] + (k, ell)).sum(axis=-1) / math.sqrt(ell)


def _check_ell(ell: int, length: int) -> None:
    if ell < 1 or ell > length:
        raise ParameterError(
            "Block length {} is invalid for a blocking axis of extent {} "
            "(expecting 1..{})".format(ell, length, length)
        )


def block_sums(w: Union[FieldWindow, Window], ell: int) -> Window:
    """X^(ell)_{j,i} = ell^{-1/2} sum of the i-th block of line j

    Cells beyond floor(n_d / ell) * ell are dropped. The returned window keeps
    the leading origin; block indices start at 1.

    Raises:
        ParameterError: if ell is not in 1..n_d
    """
    window = w.window if isinstance(w, FieldWindow) else w
    _check_ell(ell, window.extent[-1])
    origin = window.origin[:-1] + (1,)
    return Window(_block_values(window.values, ell), origin)


def mds_project_linear(
    c: CoeffArray,
    xi: InnovationArray,
    ell: int,
    extent: Sequence[int],
    origin: Optional[Sequence[int]] = None,
) -> BlockDecomposition:
    """Block sums of a linear field and their martingale part

    The cell at offset r (1..ell) inside block i depends on the past of the
    block through the coefficients with last lag >= r. Summing those truncated
    convolutions gives E(X^(ell)_{j,i} | F^(ell)_{j,i-1}) for iid and for
    column-mds innovations alike.

    Raises:
        UnsupportedStructureError: for non-linear models
        ParameterError: if ell is not in 1..extent[-1]
        PadError: if xi does not cover the window and the coefficient lags
    """
    if not isinstance(c, CoeffArray):
        raise UnsupportedStructureError(
            "Martingale projection needs a linear model (got {})".format(c)
        )
    extent = as_index(extent, c.dim)
    origin = ones(c.dim) if origin is None else as_index(origin, c.dim)
    _check_ell(ell, extent[-1])

    field = simulate_linear(c, extent, xi, origin)
    x_blocks = _block_values(field.values, ell)

    k = extent[-1] // ell
    past = np.zeros(x_blocks.shape)
    support = c.support_extent[-1]
    for r in range(1, min(ell, support - 1) + 1):
        truncated = np.array(c.a)
        truncated[..., :r] = 0.0
        if not truncated.any():
            continue
        part = simulate_linear(CoeffArray(truncated), extent, xi, origin).values
        past += part[..., [(i * ell) + r - 1 for i in range(k)]]
    past /= math.sqrt(ell)

    block_origin = origin[:-1] + (1,)
    _LOG.debug("Projected %s with ell %s on extent %s", c, ell, extent)
    return BlockDecomposition(
        ell, Window(x_blocks, block_origin), Window(x_blocks - past, block_origin)
    )


def _leading(n1: Union[int, Sequence[int]], dim: int) -> LatticeIndex:
    if isinstance(n1, (int, np.integer)):
        return (int(n1),) * (dim - 1)
    return tuple(int(c) for c in n1)


def column_mds_sums(dec: BlockDecomposition, n1: Union[int, Sequence[int]]) -> np.ndarray:
    """D_{n1,i} = |n1|^{-1/2} sum_{j <= n1} Y^(ell)_{j,i}

    For d > 2 an integer n1 applies to every leading axis.

    Raises:
        ParameterError: if n1 exceeds the leading extent
    """
    y = dec.y_blocks.values
    lead = _leading(n1, y.ndim)
    if len(lead) != y.ndim - 1 or any(
        not 1 <= n <= size for n, size in zip(lead, y.shape[:-1])
    ):
        raise ParameterError(
            "n1 = {} is invalid for leading extent {}".format(n1, y.shape[:-1])
        )
    if not lead:
        return np.array(y)
    part = y[tuple(slice(0, n) for n in lead)]
    return part.sum(axis=tuple(range(len(lead)))) / math.sqrt(int(np.prod(lead)))
