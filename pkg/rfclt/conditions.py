"""Projective quantities and series conditions, evaluated from coefficients

All conditional expectations are anchored at the strict past F_0 unless an
anchor is given explicitly. Everything here is exact for finitely supported
models: no simulation is involved.
"""

import logging
import math

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

# rfclt imports:
from .errors import NumericConsistencyError, ParameterError, UnsupportedStructureError
from .lattice import LatticeIndex, as_index, box, leq, norm, ones
from .models import CoeffArray, FieldCoeffs, VolterraCoeffs

_LOG = logging.getLogger(__name__)

# b_j^2 of a Volterra model may round slightly below zero
NEGATIVE_TOLERANCE = 1e-12

MW_EXPONENT = 1.5
MW_X_EXPONENT = 0.5


class Verdict(Enum):
    FINITE_BY_EXACTNESS = "finite-by-exactness"
    FINITE_BY_BOUND = "finite-by-bound"
    INCONCLUSIVE = "inconclusive"


@dataclass
class MWReport:
    """Partial sums of a projective series"""

    series: str
    terms: List[Tuple[LatticeIndex, float]]
    partial_sum: float
    tail_estimate: Optional[float]
    verdict: Verdict

    @property
    def upper_bound(self) -> Optional[float]:
        if self.tail_estimate is None:
            return self.partial_sum if self.verdict == Verdict.FINITE_BY_EXACTNESS else None
        return self.partial_sum + self.tail_estimate

    def partial_sums(self) -> List[float]:
        """Running sums in term order"""
        running = []
        values = []
        for _, term in self.terms:
            values.append(term)
            running.append(math.fsum(values))
        return running

    def to_dict(self) -> dict:
        return {
            "series": self.series,
            "terms": [{"j": list(j), "term": term} for j, term in self.terms],
            "partial_sum": self.partial_sum,
            "tail_estimate": self.tail_estimate,
            "verdict": self.verdict.value,
        }

    def csv_rows(self) -> List[List]:
        return [["j", "term"]] + [
            [" ".join(str(c) for c in j), repr(term)] for j, term in self.terms
        ]


@dataclass(frozen=True)
class ProjectiveNorm:
    u: LatticeIndex
    value: float


@dataclass
class AbsSumScan:
    """Partial absolute sums sum_{|u|_inf <= R} |a_u| and their increments"""

    rows: List[Tuple[int, float, Optional[float]]] = field(default_factory=list)

    @property
    def increments(self) -> List[float]:
        return [inc for _, _, inc in self.rows if inc is not None]

    def to_dict(self) -> dict:
        return {
            "rows": [
                {"radius": radius, "abs_sum": total, "increment": inc}
                for radius, total, inc in self.rows
            ]
        }


def _check_positive(j: Sequence[int], dim: int, name: str = "j") -> LatticeIndex:
    j = as_index(j, dim)
    if any(c < 1 for c in j):
        raise ParameterError("{} = {} must be >= 1 componentwise".format(name, j))
    return j


def _axis_window_sums(
    t: np.ndarray, axis: int, starts: np.ndarray, stops: np.ndarray
) -> np.ndarray:
    """Along axis, replace t by sums over [starts[m], stops[m]] clipped to t's range"""
    size = t.shape[axis]
    zero_shape = list(t.shape)
    zero_shape[axis] = 1
    csum = np.concatenate([np.zeros(zero_shape), np.cumsum(t, axis=axis)], axis=axis)
    lo = np.clip(starts, 0, size)
    hi = np.maximum(np.clip(stops + 1, 0, size), lo)
    return np.take(csum, hi, axis=axis) - np.take(csum, lo, axis=axis)


def linear_b_sq(c: CoeffArray, j: Sequence[int]) -> float:
    """b_j^2 = sum_{i >= 0} (sum_{u=1}^{j} a_{u+i})^2"""
    j = _check_positive(j, c.dim)
    t = c.a
    for axis, j_axis in enumerate(j):
        i = np.arange(t.shape[axis])
        t = _axis_window_sums(t, axis, i + 1, i + j_axis)
    return float(np.sum(t * t))


def linear_b(c: CoeffArray, j: Sequence[int]) -> float:
    return math.sqrt(linear_b_sq(c, j))


def linear_sum_norm(
    c: CoeffArray,
    n: Sequence[int],
    sigma_sq: float = 1.0,
    anchor: Optional[Sequence[int]] = None,
) -> float:
    """||S_n|| or, with an anchor, ||E(S_n | F_anchor)|| for a linear field

    S_n = sum_s W_s xi_s with W_s = sum_{1 <= k <= n} a_{k-s}; conditioning on
    F_anchor keeps the sites s <= anchor.
    """
    n = _check_positive(n, c.dim, "n")
    t = c.a
    for axis, (n_axis, lag) in enumerate(zip(n, c.max_lag)):
        s = np.arange(1 - lag, n_axis + 1)
        if anchor is not None:
            s = s[s <= anchor[axis]]
        if s.size == 0:
            return 0.0
        t = _axis_window_sums(t, axis, 1 - s, n_axis - s)
    return math.sqrt(sigma_sq * float(np.sum(t * t)))


def projective_norm_linear(
    c: CoeffArray, u: Sequence[int], sigma_sq: float
) -> ProjectiveNorm:
    """||E(S_u | F_0)|| = sigma * b_u"""
    if sigma_sq <= 0:
        raise ParameterError("sigma_sq = {} must be > 0".format(sigma_sq))
    u = _check_positive(u, c.dim, "u")
    return ProjectiveNorm(u, math.sqrt(sigma_sq) * linear_b(c, u))


def volterra_c(
    v: VolterraCoeffs, u: Sequence[int], w: Sequence[int], j: Sequence[int]
) -> float:
    """c_{u,w}(j) = sum_{k=1}^{j} a_{k+u, k+w}"""
    u = as_index(u, v.dim)
    w = as_index(w, v.dim)
    j = _check_positive(j, v.dim)
    terms = []
    for (p, q), value in sorted(v.entries.items()):
        k = tuple(a - b for a, b in zip(p, u))
        if k != tuple(a - b for a, b in zip(q, w)):
            continue
        if leq(ones(v.dim), k) and leq(k, j):
            terms.append(value)
    return math.fsum(terms)


def _volterra_c_table(
    v: VolterraCoeffs, j: LatticeIndex
) -> Dict[Tuple[LatticeIndex, LatticeIndex], float]:
    """Every nonzero c_{u,w}(j), keyed by (u, w)"""
    table = {}  # type: Dict[Tuple[LatticeIndex, LatticeIndex], List[float]]
    for (p, q), value in sorted(v.entries.items()):
        top = tuple(min(a, b, c) for a, b, c in zip(j, p, q))
        if not leq(ones(v.dim), top):
            continue
        for k in box(ones(v.dim), top):
            key = (
                tuple(a - b for a, b in zip(p, k)),
                tuple(a - b for a, b in zip(q, k)),
            )
            table.setdefault(key, []).append(value)
    return {key: math.fsum(values) for key, values in table.items()}


def volterra_b_sq(v: VolterraCoeffs, j: Sequence[int]) -> float:
    """b_j^2 = sum_{u != w} (c_{u,w}(j)^2 + c_{u,w}(j) c_{w,u}(j))

    Raises:
        NumericConsistencyError: if the total is below -1e-12
    """
    j = _check_positive(j, v.dim)
    table = _volterra_c_table(v, j)
    total = math.fsum(
        c_uw * (c_uw + table.get((w, u), 0.0)) for (u, w), c_uw in sorted(table.items())
    )
    if total < -NEGATIVE_TOLERANCE:
        raise NumericConsistencyError(
            "Volterra b_j^2 = {} is negative for j = {}".format(total, j)
        )
    return max(total, 0.0)


def volterra_b(v: VolterraCoeffs, j: Sequence[int]) -> float:
    return math.sqrt(volterra_b_sq(v, j))


def _mw_weight(j: Sequence[int], exponent: float) -> float:
    return float(norm(j)) ** -exponent


def _box_mw_sums(J_max: LatticeIndex) -> List[float]:
    return [
        math.fsum(k ** -MW_EXPONENT for k in range(1, J_axis + 1)) for J_axis in J_max
    ]


def mw_series(
    b: Callable[[LatticeIndex], float],
    d: int,
    J_max: Sequence[int],
    b_sup: Optional[float] = None,
) -> MWReport:
    """sum_{1 <= j <= J_max} b_j / |j|^{3/2}

    Args:
        b: j -> b_j >= 0
        d: lattice dimension
        J_max: upper corner of the summation box
        b_sup: supremum of b_j outside the box, when known. The remaining
            tail is then bounded using sum_{j > J} j^{-3/2} <= 2 / sqrt(J)
            in every coordinate. Pass 0 when b vanishes outside the box
            (finite support) to get FINITE_BY_EXACTNESS; without b_sup the
            verdict is INCONCLUSIVE even if every computed term is zero.

    Raises:
        ParameterError: for a negative b value or J_max not >= 1
    """
    J_max = _check_positive(J_max, d, "J_max")
    terms = []
    for j in box(ones(d), J_max):
        value = float(b(j))
        if value < 0 or math.isnan(value):
            raise ParameterError("b_{} = {} is negative".format(j, value))
        terms.append((j, value * _mw_weight(j, MW_EXPONENT)))
    partial_sum = math.fsum(term for _, term in terms)

    if b_sup is None:
        tail, verdict = None, Verdict.INCONCLUSIVE
    elif b_sup < 0:
        raise ParameterError("b_sup = {} is negative".format(b_sup))
    elif b_sup == 0:
        tail, verdict = None, Verdict.FINITE_BY_EXACTNESS
    else:
        inside = _box_mw_sums(J_max)
        outside = [s + 2.0 / math.sqrt(J_axis) for s, J_axis in zip(inside, J_max)]
        tail = b_sup * (math.prod(outside) - math.prod(inside))
        verdict = Verdict.FINITE_BY_BOUND

    _LOG.debug("MW series to %s: partial %s, tail %s", J_max, partial_sum, tail)
    return MWReport("MW", terms, partial_sum, tail, verdict)


def b_function(coeffs: FieldCoeffs) -> Callable[[LatticeIndex], float]:
    if isinstance(coeffs, CoeffArray):
        return lambda j: linear_b(coeffs, j)
    if isinstance(coeffs, VolterraCoeffs):
        return lambda j: volterra_b(coeffs, j)
    raise UnsupportedStructureError("Unsupported model {}".format(coeffs))


def b_supremum(coeffs: FieldCoeffs) -> float:
    """sup_{j >= 1} b_j of a finitely supported model

    b_j only depends on min(j, max_lag) componentwise, so the supremum is a
    maximum over a finite box.
    """
    b = b_function(coeffs)
    top = tuple(max(lag, 1) for lag in coeffs.max_lag)
    return max(b(j) for j in box(ones(coeffs.dim), top))


def model_mw_series(coeffs: FieldCoeffs, J_max: Sequence[int]) -> MWReport:
    """(MW) series of a finitely supported linear or Volterra model"""
    return mw_series(b_function(coeffs), coeffs.dim, J_max, b_sup=b_supremum(coeffs))


def _linear_x_norms(c: CoeffArray, sigma_sq: float) -> np.ndarray:
    """||E(X_j | F_0)|| for every lag j in the support: sigma^2 sum_{i>=0} a_{j+i}^2"""
    q = c.a ** 2
    for axis in range(c.dim):
        q = np.flip(np.cumsum(np.flip(q, axis=axis), axis=axis), axis=axis)
    return np.sqrt(sigma_sq * q)


def _volterra_x_norm(v: VolterraCoeffs, j: LatticeIndex, sigma_sq: float) -> float:
    entries = v.entries
    total = math.fsum(
        value * (value + entries.get((q, p), 0.0))
        for (p, q), value in sorted(entries.items())
        if leq(j, p) and leq(j, q)
    )
    return math.sqrt(max(total, 0.0)) * sigma_sq


def mw_x_series(
    coeffs: FieldCoeffs, J_max: Sequence[int], sigma_sq: float = 1.0
) -> MWReport:
    """sum_{1 <= j <= J_max} ||E(X_j | F_0)|| / |j|^{1/2}

    Terms vanish beyond the support, so the series is computed exactly; the
    tail estimate holds the exact in-support remainder outside the box, if any.

    Raises:
        UnsupportedStructureError: for anything but linear / Volterra models
    """
    if isinstance(coeffs, CoeffArray):
        norms = _linear_x_norms(coeffs, sigma_sq)

        def x_norm(j):
            if leq(j, coeffs.max_lag):
                return float(norms[j])
            return 0.0

    elif isinstance(coeffs, VolterraCoeffs):

        def x_norm(j):
            return _volterra_x_norm(coeffs, j, sigma_sq)

    else:
        raise UnsupportedStructureError("Unsupported model {}".format(coeffs))

    dim = coeffs.dim
    J_max = _check_positive(J_max, dim, "J_max")
    terms = [(j, x_norm(j) * _mw_weight(j, MW_X_EXPONENT)) for j in box(ones(dim), J_max)]
    partial_sum = math.fsum(term for _, term in terms)

    remainder = []
    top = tuple(max(lag, 1) for lag in coeffs.max_lag)
    if not leq(top, J_max):
        remainder = [
            x_norm(j) * _mw_weight(j, MW_X_EXPONENT)
            for j in box(ones(dim), top)
            if not leq(j, J_max)
        ]
    tail = math.fsum(remainder) if any(r > 0 for r in remainder) else None
    return MWReport("MW-X", terms, partial_sum, tail, Verdict.FINITE_BY_EXACTNESS)


def abs_sum_scan(
    family: Callable[[int], CoeffArray], radii: Iterable[int]
) -> AbsSumScan:
    """Partial absolute coefficient sums over growing radii

    A divergence diagnostic only: non-vanishing increments are reported,
    divergence itself is never asserted.

    Raises:
        ParameterError: if radii are not strictly increasing
    """
    radii = [int(r) for r in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])) or any(r < 0 for r in radii):
        raise ParameterError("Radii {} must be increasing and >= 0".format(radii))
    scan = AbsSumScan()
    previous = None
    for radius in radii:
        a = family(radius).a
        window = a[tuple(slice(0, radius + 1) for _ in range(a.ndim))]
        total = float(np.sum(np.abs(window)))
        increment = None if previous is None else total - previous
        scan.rows.append((radius, total, increment))
        previous = total
    return scan
