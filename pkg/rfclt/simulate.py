"""Simulation of linear and Volterra fields on finite windows"""

import logging

from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy.signal import fftconvolve

# rfclt imports:
from .innovations import InnovationArray, InnovationSpec, gen_innovations
from .lattice import LatticeIndex, Window, as_index, ones
from .models import CoeffArray, FieldCoeffs, ModelDescriptor, ModelKind, VolterraCoeffs

_LOG = logging.getLogger(__name__)


class Method(Enum):
    """Execution path of the linear convolution"""

    DIRECT = "direct"
    FFT = "fft"


class FieldWindow:
    """Realised field values together with what produced them"""

    def __init__(
        self, window: Window, coeffs: FieldCoeffs, innovations: InnovationSpec
    ) -> None:
        self._window = window
        self._coeffs = coeffs
        self._innovations = innovations

    @property
    def window(self) -> Window:
        return self._window

    @property
    def values(self) -> np.ndarray:
        return self._window.values

    @property
    def coeffs(self) -> FieldCoeffs:
        return self._coeffs

    @property
    def innovations(self) -> InnovationSpec:
        return self._innovations

    @property
    def extent(self) -> LatticeIndex:
        return self._window.extent


def _bounds(extent: Sequence[int], origin: Optional[Sequence[int]], dim: int):
    extent = as_index(extent, dim)
    origin = ones(dim) if origin is None else as_index(origin, dim)
    hi = tuple(o + n - 1 for o, n in zip(origin, extent))
    return extent, origin, hi


def _shifted(region: np.ndarray, offset: Sequence[int], extent: Sequence[int]) -> np.ndarray:
    return region[tuple(slice(o, o + n) for o, n in zip(offset, extent))]


def simulate_linear(
    c: CoeffArray,
    extent: Sequence[int],
    xi: InnovationArray,
    origin: Optional[Sequence[int]] = None,
    method: Method = Method.DIRECT,
) -> FieldWindow:
    """X_k = sum_j a_j xi_{k-j} on the window [origin, origin + extent - 1]

    The direct path is the definition; the FFT path must agree with it
    within 1e-10.

    Raises:
        PadError: if xi does not cover [origin - max_lag, last]
    """
    extent, origin, hi = _bounds(extent, origin, c.dim)
    lag = c.max_lag
    region = xi.region(tuple(o - l for o, l in zip(origin, lag)), hi)

    if Method(method) == Method.FFT:
        values = fftconvolve(region, c.a, mode="valid")
    else:
        values = np.zeros(extent)
        for j, a_j in c.nonzero():
            offset = tuple(l - i for l, i in zip(lag, j))
            values += a_j * _shifted(region, offset, extent)

    return FieldWindow(Window(values, origin), c, xi.spec)


def simulate_volterra(
    v: VolterraCoeffs,
    extent: Sequence[int],
    xi: InnovationArray,
    origin: Optional[Sequence[int]] = None,
) -> FieldWindow:
    """X_k = sum_{u,v} a_{u,v} xi_{k-u} xi_{k-v} on the window

    Raises:
        ModelValidationError: if a diagonal coefficient is stored
        PadError: if xi does not cover [origin - max_lag, last]
    """
    v.validate()
    extent, origin, hi = _bounds(extent, origin, v.dim)
    lag = v.max_lag
    region = xi.region(tuple(o - l for o, l in zip(origin, lag)), hi)

    values = np.zeros(extent)
    for (u, w), a_uw in sorted(v.entries.items()):
        left = _shifted(region, tuple(l - i for l, i in zip(lag, u)), extent)
        right = _shifted(region, tuple(l - i for l, i in zip(lag, w)), extent)
        values += a_uw * left * right

    return FieldWindow(Window(values, origin), v, xi.spec)


def simulate_field(
    coeffs: FieldCoeffs,
    extent: Sequence[int],
    xi: InnovationArray,
    origin: Optional[Sequence[int]] = None,
) -> FieldWindow:
    if isinstance(coeffs, CoeffArray):
        return simulate_linear(coeffs, extent, xi, origin)
    return simulate_volterra(coeffs, extent, xi, origin)


def simulate(
    model: ModelDescriptor,
    extent: Sequence[int],
    replication: int = 0,
    origin: Optional[Sequence[int]] = None,
) -> FieldWindow:
    """Generate innovations for one replication and simulate the model"""
    spec = model.innovations.for_replication(replication)
    xi = gen_innovations(spec, extent, model.max_lag, origin=origin)
    _LOG.debug(
        "Simulating %s model on extent %s (replication %s)",
        model.kind.value,
        tuple(extent),
        replication,
    )
    if model.kind == ModelKind.LINEAR:
        return simulate_linear(model.coeffs, extent, xi, origin)
    return simulate_volterra(model.coeffs, extent, xi, origin)
