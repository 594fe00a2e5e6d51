"""Field models and their JSON descriptors

Two model classes are supported:
    - linear fields       X_k = sum_j a_j xi_{k-j}
    - Volterra fields     X_k = sum_{u,v} a_{u,v} xi_{k-u} xi_{k-v}   (a_{u,u} = 0)

Both have finite coefficient support.
"""

import json
import logging

from enum import Enum
from functools import reduce
from typing import Dict, Iterator, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

# rfclt imports:
from .errors import ModelValidationError
from .innovations import Distribution, InnovationSpec, Structure
from .lattice import MAX_DIM, MIN_DIM, LatticeIndex, as_index
from .schema import validate

_LOG = logging.getLogger(__name__)

class ModelKind(Enum):
    LINEAR = "linear"
    VOLTERRA = "volterra"


class CoeffArray:
    """Finitely supported coefficients a_j, j >= 0, of a linear field"""

    def __init__(self, a: np.ndarray) -> None:
        """
        Args:
            a: dense array, a[j] is the coefficient at lag j; its shape is the
               support extent

        Raises:
            ModelValidationError: for empty or non-finite coefficients
        """
        a = np.array(a, dtype=np.float64)
        if a.ndim < MIN_DIM or a.ndim > MAX_DIM or a.size == 0:
            raise ModelValidationError(
                "Coefficient array of shape {} is not a supported support".format(
                    a.shape
                )
            )
        if not np.all(np.isfinite(a)):
            raise ModelValidationError("Coefficients must be finite")
        a.flags.writeable = False
        self._a = a

    @classmethod
    def from_entries(
        cls, entries: Mapping[Sequence[int], float], dim: int
    ) -> "CoeffArray":
        """Build from a sparse {lag: value} map; empty map gives a = 0 at lag 0"""
        lags = [as_index(j, dim) for j in entries]
        for j in lags:
            if any(c < 0 for c in j):
                raise ModelValidationError("Lag {} is not >= 0".format(j))
        shape = tuple(
            max([j[axis] for j in lags], default=0) + 1 for axis in range(dim)
        )
        a = np.zeros(shape)
        for j, value in zip(lags, entries.values()):
            a[j] += float(value)
        return cls(a)

    @property
    def a(self) -> np.ndarray:
        return self._a

    @property
    def dim(self) -> int:
        return self._a.ndim

    @property
    def support_extent(self) -> LatticeIndex:
        return tuple(int(n) for n in self._a.shape)

    @property
    def max_lag(self) -> LatticeIndex:
        """Innovation pad needed below a window"""
        return tuple(n - 1 for n in self._a.shape)

    @property
    def sum_sq(self) -> float:
        return float(np.sum(self._a ** 2))

    @property
    def total(self) -> float:
        """sum_j a_j (long-run variance is sigma^2 * total^2)"""
        return float(np.sum(self._a))

    def nonzero(self) -> Iterator[Tuple[LatticeIndex, float]]:
        for j in zip(*np.nonzero(self._a)):
            lag = tuple(int(c) for c in j)
            yield lag, float(self._a[lag])

    def __repr__(self) -> str:
        return "CoeffArray(support={}, nonzero={})".format(
            self.support_extent, int(np.count_nonzero(self._a))
        )


class VolterraCoeffs:
    """Sparse second-order coefficients a_{u,v}, u, v >= 0, zero diagonal"""

    def __init__(
        self,
        entries: Mapping[Tuple[Sequence[int], Sequence[int]], float],
        dim: Optional[int] = None,
    ) -> None:
        """
        Args:
            entries: {(u, v): a_uv}; zero values are dropped
            dim: lattice dimension (inferred from the entries when omitted)

        Raises:
            ModelValidationError: nonzero diagonal entry, negative lag or
                missing dimension
        """
        if dim is None:
            if not entries:
                raise ModelValidationError(
                    "Dimension must be given for an empty Volterra model"
                )
            dim = len(next(iter(entries))[0])
        stored = {}  # type: Dict[Tuple[LatticeIndex, LatticeIndex], float]
        for (u, v), value in entries.items():
            u = as_index(u, dim)
            v = as_index(v, dim)
            value = float(value)
            if any(c < 0 for c in u + v):
                raise ModelValidationError("Lags {}, {} are not >= 0".format(u, v))
            if not np.isfinite(value):
                raise ModelValidationError("Coefficient a_{},{} is not finite".format(u, v))
            if u == v:
                if value != 0.0:
                    raise ModelValidationError(
                        "Diagonal coefficient a_{},{} = {} must be zero".format(
                            u, v, value
                        )
                    )
                continue
            if value != 0.0:
                stored[(u, v)] = stored.get((u, v), 0.0) + value
        self._entries = stored
        self._dim = int(dim)

    @property
    def entries(self) -> Dict[Tuple[LatticeIndex, LatticeIndex], float]:
        return dict(self._entries)

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def sum_sq(self) -> float:
        return float(sum(value * value for value in self._entries.values()))

    @property
    def max_lag(self) -> LatticeIndex:
        """Componentwise max of u and v over stored entries"""
        lag = [0] * self._dim
        for u, v in self._entries:
            for axis in range(self._dim):
                lag[axis] = max(lag[axis], u[axis], v[axis])
        return tuple(lag)

    def validate(self) -> None:
        """Re-check the zero-diagonal requirement

        Raises:
            ModelValidationError: if a diagonal entry is stored
        """
        for u, v in self._entries:
            if u == v:
                raise ModelValidationError(
                    "Diagonal coefficient a_{},{} must be zero".format(u, v)
                )

    def __len__(self) -> int:
        return len(self._entries)

    def __repr__(self) -> str:
        return "VolterraCoeffs(dim={}, entries={})".format(self._dim, len(self._entries))


FieldCoeffs = Union[CoeffArray, VolterraCoeffs]


def alternating_family(dim: int, radius: int) -> CoeffArray:
    """a_u = prod_i (-1)^{u_i} / (sqrt(u_i) log u_i) for 2 <= u_i <= radius

    Coordinates below 2 carry a zero coefficient (log 1 = 0). The radius is an
    experimental parameter, the infinite family is not truncated silently.
    """
    if radius < 2:
        raise ModelValidationError("Radius {} leaves an empty support".format(radius))
    u = np.arange(radius + 1, dtype=np.float64)
    factor = np.zeros(radius + 1)
    tail = u[2:]
    factor[2:] = np.where(np.arange(2, radius + 1) % 2 == 0, 1.0, -1.0) / (
        np.sqrt(tail) * np.log(tail)
    )
    a = reduce(np.multiply.outer, [factor] * dim)
    return CoeffArray(a)


class ModelDescriptor:
    """A model together with the innovations that drive it"""

    def __init__(self, coeffs: FieldCoeffs, innovations: InnovationSpec) -> None:
        self._coeffs = coeffs
        self._innovations = innovations

    @property
    def kind(self) -> ModelKind:
        if isinstance(self._coeffs, CoeffArray):
            return ModelKind.LINEAR
        return ModelKind.VOLTERRA

    @property
    def coeffs(self) -> FieldCoeffs:
        return self._coeffs

    @property
    def innovations(self) -> InnovationSpec:
        return self._innovations

    @property
    def dim(self) -> int:
        return self._coeffs.dim

    @property
    def max_lag(self) -> LatticeIndex:
        return self._coeffs.max_lag

    def with_innovations(self, innovations: InnovationSpec) -> "ModelDescriptor":
        return ModelDescriptor(self._coeffs, innovations)

    def to_dict(self) -> dict:
        if self.kind == ModelKind.LINEAR:
            coeffs = [
                {"index": list(j), "value": value}
                for j, value in self._coeffs.nonzero()
            ]
        else:
            coeffs = [
                {"index": list(u) + list(v), "value": value}
                for (u, v), value in sorted(self._coeffs.entries.items())
            ]
        return {
            "kind": self.kind.value,
            "dim": self.dim,
            "coeffs": coeffs,
            "innovations": self._innovations.to_dict(),
        }

    def __repr__(self) -> str:
        return "ModelDescriptor({}, {})".format(self._coeffs, self._innovations)


def parse_descriptor(doc: Mapping, path: str = "") -> ModelDescriptor:
    """Create a ModelDescriptor from its JSON document

    The document is checked against the "model" definition of the bundled
    config schema, then against the model dimension.

    Raises:
        ModelValidationError: naming the offending field
    """
    validate(doc, ModelValidationError, "Descriptor", definition="model", prefix=path)
    kind = ModelKind(doc["kind"])
    dim = int(doc["dim"])
    width = dim if kind == ModelKind.LINEAR else 2 * dim
    entries = {}
    for number, item in enumerate(doc["coeffs"]):
        where = "{}coeffs[{}]".format(path, number)
        index = item["index"]
        if len(index) != width:
            raise ModelValidationError(
                "Descriptor field '{}.index' has length {} (expecting {})".format(
                    where, len(index), width
                )
            )
        key = tuple(int(c) for c in index)
        if kind == ModelKind.VOLTERRA:
            key = (key[:dim], key[dim:])
        if key in entries:
            raise ModelValidationError("Descriptor field '{}' repeats an index".format(where))
        entries[key] = float(item["value"])

    if kind == ModelKind.LINEAR:
        coeffs = CoeffArray.from_entries(entries, dim)  # type: FieldCoeffs
    else:
        coeffs = VolterraCoeffs(entries, dim)

    innovations = doc.get("innovations", {})
    return ModelDescriptor(
        coeffs,
        InnovationSpec(
            Distribution(innovations.get("dist", Distribution.STANDARD_NORMAL.value)),
            Structure(innovations.get("structure", Structure.IID.value)),
            int(innovations.get("seed", 0)),
        ),
    )


def loads(text: str) -> ModelDescriptor:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as ex:
        raise ModelValidationError(
            "Descriptor is not valid JSON (line {}, column {}): {}".format(
                ex.lineno, ex.colno, ex.msg
            )
        ) from None
    return parse_descriptor(doc)


def dumps(model: ModelDescriptor) -> str:
    return json.dumps(model.to_dict(), sort_keys=True)
