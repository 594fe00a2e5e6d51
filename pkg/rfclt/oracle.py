"""Exact expectations by enumerating Rademacher innovations

Every innovation site a statistic depends on carries a random sign; all 2^N
sign configurations are enumerated in vectorised chunks, configuration c
having sign 1 - 2 * bit_b(c) at site b. Conditional expectations given
F_cond average a statistic over the classes of configurations that agree on
every site <= cond componentwise.

Column-mds innovations xi[n, m] = eps[n, m] * g(eps[n - 1, m]) are derived
from enumerated base signs eps; filtrations are generated by eps.
"""

import logging
import math

from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

# rfclt imports:
from .conditions import linear_b, volterra_b_sq
from .errors import (
    DimensionError,
    EnumerationSizeError,
    LatticeRangeError,
    ParameterError,
    UnsupportedStructureError,
)
from .innovations import Distribution, InnovationSpec, Structure, mds_gate
from .lattice import LatticeIndex, as_index, box, leq, norm, ones, zeros
from .models import CoeffArray, ModelDescriptor, VolterraCoeffs

_LOG = logging.getLogger(__name__)

MAX_ORACLE_SITES = 24

# Configurations evaluated per vectorised step
ENUMERATION_CHUNK = 2 ** 16

DEVIATION_TOLERANCE = 1e-10


@dataclass(frozen=True)
class RectStatistic:
    """S = constant + sum of X_k over the rectangle [lo, hi]"""

    lo: LatticeIndex
    hi: LatticeIndex
    constant: float = 0.0


def partial_sum(n: Sequence[int]) -> RectStatistic:
    """S_n = sum over [1, n]"""
    n = as_index(n)
    return RectStatistic(ones(len(n)), n)


class ExactModel:
    """A finitely supported model on a small window, with enumerable innovations"""

    def __init__(
        self,
        model: ModelDescriptor,
        extent: LatticeIndex,
        xi_sites: List[LatticeIndex],
        sites: List[LatticeIndex],
    ) -> None:
        self._model = model
        self._extent = extent
        self._xi_sites = xi_sites
        self._sites = sites
        position = {site: b for b, site in enumerate(sites)}
        self._xi_position = np.array([position[s] for s in xi_sites], dtype=np.int64)
        self._xi_lookup = {site: p for p, site in enumerate(xi_sites)}
        if model.innovations.structure == Structure.COLUMN_MDS:
            self._gate_position = np.array(
                [position[(s[0] - 1,) + s[1:]] for s in xi_sites], dtype=np.int64
            )  # type: Optional[np.ndarray]
        else:
            self._gate_position = None

    @property
    def model(self) -> ModelDescriptor:
        return self._model

    @property
    def extent(self) -> LatticeIndex:
        return self._extent

    @property
    def dim(self) -> int:
        return len(self._extent)

    @property
    def sites(self) -> List[LatticeIndex]:
        """Enumerated (base) sites in canonical order: bit b is sites[b]"""
        return list(self._sites)

    @property
    def xi_sites(self) -> List[LatticeIndex]:
        return list(self._xi_sites)

    @property
    def site_count(self) -> int:
        return len(self._sites)

    @property
    def configurations(self) -> int:
        return 2 ** len(self._sites)

    def chunks(self) -> Iterator[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """Yield (config indices, sign bits, xi values) chunk by chunk"""
        count = len(self._sites)
        shifts = np.arange(count, dtype=np.int64)
        total = self.configurations
        for start in range(0, total, ENUMERATION_CHUNK):
            index = np.arange(start, min(start + ENUMERATION_CHUNK, total), dtype=np.int64)
            bits = (index[:, None] >> shifts[None, :]) & 1
            eps = 1.0 - 2.0 * bits
            xi = eps[:, self._xi_position]
            if self._gate_position is not None:
                xi = xi * mds_gate(eps[:, self._gate_position])
            yield index, bits, xi

    def check_statistic(self, statistic: RectStatistic) -> None:
        """
        Raises:
            LatticeRangeError: if the rectangle is not inside the window
        """
        lo = as_index(statistic.lo, self.dim)
        hi = as_index(statistic.hi, self.dim)
        if not (leq(ones(self.dim), lo) and leq(lo, hi) and leq(hi, self._extent)):
            raise LatticeRangeError(
                "Statistic rectangle [{}, {}] is outside the window [{}, {}]".format(
                    lo, hi, ones(self.dim), self._extent
                )
            )

    def evaluator(
        self, statistics: Sequence[RectStatistic]
    ) -> Callable[[np.ndarray], np.ndarray]:
        """Function mapping a chunk of xi values to one column per statistic"""
        for statistic in statistics:
            self.check_statistic(statistic)
        coeffs = self._model.coeffs
        size = len(self._xi_sites)
        constants = np.array([s.constant for s in statistics])

        if isinstance(coeffs, CoeffArray):
            weights = np.zeros((size, len(statistics)))
            for column, statistic in enumerate(statistics):
                for k in box(statistic.lo, statistic.hi):
                    for j, a_j in coeffs.nonzero():
                        site = tuple(c - l for c, l in zip(k, j))
                        weights[self._xi_lookup[site], column] += a_j

            def linear(xi: np.ndarray) -> np.ndarray:
                return xi @ weights + constants

            return linear

        forms = []
        for statistic in statistics:
            form = np.zeros((size, size))
            for k in box(statistic.lo, statistic.hi):
                for (u, v), a_uv in coeffs.entries.items():
                    left = self._xi_lookup[tuple(c - l for c, l in zip(k, u))]
                    right = self._xi_lookup[tuple(c - l for c, l in zip(k, v))]
                    form[left, right] += a_uv
            forms.append(form)

        def quadratic(xi: np.ndarray) -> np.ndarray:
            columns = [np.einsum("ci,ij,cj->c", xi, form, xi) for form in forms]
            return np.stack(columns, axis=1) + constants

        return quadratic

    def conditioning_bits(self, cond: Sequence[int]) -> np.ndarray:
        """Bit positions of the sites generating F_cond"""
        cond = as_index(cond, self.dim)
        return np.array(
            [b for b, site in enumerate(self._sites) if leq(site, cond)], dtype=np.int64
        )

    def __repr__(self) -> str:
        return "ExactModel({}, extent={}, N={})".format(
            self._model.kind.value, self._extent, self.site_count
        )


def _lags(coeffs) -> List[LatticeIndex]:
    if isinstance(coeffs, CoeffArray):
        return [j for j, _ in coeffs.nonzero()]
    lags = set()
    for u, v in coeffs.entries:
        lags.add(u)
        lags.add(v)
    return sorted(lags)


def enumerate_model(
    model: ModelDescriptor,
    extent: Sequence[int],
    pad: Optional[Sequence[int]] = None,
) -> ExactModel:
    """Collect the innovation sites needed by the window [1, extent]

    Args:
        model: linear or Volterra descriptor; the distribution is replaced by
            Rademacher signs
        extent: window extent
        pad: largest lag allowed below the window (defaults to the model's
            max_lag); a smaller pad than the support needs is an error

    Raises:
        EnumerationSizeError: if more than MAX_ORACLE_SITES sites are needed
        UnsupportedStructureError: column-mds outside d = 2
        DimensionError: mismatched dimensions or an empty window
    """
    dim = model.dim
    extent = as_index(extent, dim)
    if any(n < 1 for n in extent):
        raise DimensionError("Oracle window extent {} must be >= 1".format(extent))
    pad = model.max_lag if pad is None else as_index(pad, dim)
    if not leq(model.max_lag, pad):
        raise ParameterError(
            "Pad {} does not cover the model lags {}".format(pad, model.max_lag)
        )

    lags = _lags(model.coeffs)
    xi_sites = sorted(
        {tuple(c - l for c, l in zip(k, j)) for k in box(ones(dim), extent) for j in lags}
    )
    sites = set(xi_sites)
    if model.innovations.structure == Structure.COLUMN_MDS:
        if dim != 2:
            raise UnsupportedStructureError(
                "Column-mds innovations need d = 2 (got d = {})".format(dim)
            )
        sites.update((s[0] - 1, s[1]) for s in xi_sites)
    sites = sorted(sites)
    if len(sites) > MAX_ORACLE_SITES:
        raise EnumerationSizeError(len(sites), MAX_ORACLE_SITES)

    _LOG.debug("Enumerating %s sites for extent %s", len(sites), extent)
    return ExactModel(model, extent, xi_sites, sites)


class CondExpectation:
    """E(S | F_cond), stored as one mean per conditioning class"""

    def __init__(self, m: ExactModel, cond: LatticeIndex, class_means: np.ndarray) -> None:
        self._m = m
        self._cond = cond
        self._bits = m.conditioning_bits(cond)
        self._class_means = class_means

    @property
    def cond(self) -> LatticeIndex:
        return self._cond

    @property
    def class_means(self) -> np.ndarray:
        return self._class_means

    @property
    def second_moment(self) -> float:
        """E(E(S | F_cond)^2); classes are equally likely"""
        return float(np.mean(self._class_means ** 2))

    @property
    def norm(self) -> float:
        return math.sqrt(self.second_moment)

    @property
    def mean(self) -> float:
        return float(np.mean(self._class_means))

    def keys(self, bits: np.ndarray) -> np.ndarray:
        return _class_keys(bits, self._bits)

    def values(self) -> np.ndarray:
        """Per-configuration values (2^N entries)"""
        return np.concatenate(
            [self._class_means[self.keys(bits)] for _, bits, _ in self._m.chunks()]
        )


def _class_keys(bits: np.ndarray, positions: np.ndarray) -> np.ndarray:
    if positions.size == 0:
        return np.zeros(bits.shape[0], dtype=np.int64)
    ranks = np.arange(positions.size, dtype=np.int64)
    return (bits[:, positions] << ranks[None, :]).sum(axis=1)


def _class_means(
    m: ExactModel,
    cond: LatticeIndex,
    values: Callable[[np.ndarray, np.ndarray], np.ndarray],
) -> np.ndarray:
    """Average values(bits, xi) (one column per statistic) within each class"""
    positions = m.conditioning_bits(cond)
    classes = 2 ** positions.size
    sums = None
    for _, bits, xi in m.chunks():
        keys = _class_keys(bits, positions)
        chunk = values(bits, xi)
        columns = [
            np.bincount(keys, weights=chunk[:, c], minlength=classes)
            for c in range(chunk.shape[1])
        ]
        block = np.stack(columns, axis=1)
        sums = block if sums is None else sums + block
    return sums / (m.configurations // classes)


def exact_cond_expectations(
    m: ExactModel, statistics: Sequence[RectStatistic], cond: Sequence[int]
) -> List[CondExpectation]:
    """E(S | F_cond) for several statistics in one enumeration pass"""
    cond = as_index(cond, m.dim)
    evaluate = m.evaluator(statistics)
    means = _class_means(m, cond, lambda bits, xi: evaluate(xi))
    return [CondExpectation(m, cond, means[:, c]) for c in range(len(statistics))]


def exact_cond_expectation(
    m: ExactModel, statistic: RectStatistic, cond: Sequence[int]
) -> CondExpectation:
    """E(S | F_cond) by class averaging

    Raises:
        LatticeRangeError: if the statistic rectangle is outside the window
    """
    return exact_cond_expectations(m, [statistic], cond)[0]


def exact_moment(m: ExactModel, statistic: RectStatistic) -> Tuple[float, float]:
    """(E S, E S^2)"""
    evaluate = m.evaluator([statistic])
    first = []
    second = []
    for _, _, xi in m.chunks():
        s = evaluate(xi)[:, 0]
        first.append(float(np.sum(s)))
        second.append(float(np.sum(s * s)))
    return math.fsum(first) / m.configurations, math.fsum(second) / m.configurations


def _condition_values(
    m: ExactModel, inner: CondExpectation
) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    def values(bits: np.ndarray, xi: np.ndarray) -> np.ndarray:
        return inner.class_means[inner.keys(bits)][:, None]

    return values


def _max_deviation(m: ExactModel, left: CondExpectation, right: CondExpectation) -> float:
    worst = 0.0
    for _, bits, _ in m.chunks():
        difference = left.class_means[left.keys(bits)] - right.class_means[right.keys(bits)]
        worst = max(worst, float(np.max(np.abs(difference))))
    return worst


def iterated_deviation(
    m: ExactModel,
    statistic: RectStatistic,
    first: Sequence[int],
    then: Sequence[int],
    target: Sequence[int],
) -> float:
    """max |E(E(S | F_first) | F_then) - E(S | F_target)| over configurations"""
    first = as_index(first, m.dim)
    then = as_index(then, m.dim)
    inner = exact_cond_expectation(m, statistic, first)
    outer = CondExpectation(m, then, _class_means(m, then, _condition_values(m, inner))[:, 0])
    return _max_deviation(m, outer, exact_cond_expectation(m, statistic, target))


def tower_deviation(
    m: ExactModel, statistic: RectStatistic, a: Sequence[int], u: Sequence[int]
) -> float:
    """Deviation from E(E(S | F_a) | F_u) = E(S | F_u) for u <= a

    Raises:
        ParameterError: unless u <= a componentwise
    """
    if not leq(u, a):
        raise ParameterError("Tower property needs u {} <= a {}".format(tuple(u), tuple(a)))
    return iterated_deviation(m, statistic, a, u, u)


def check_commuting(
    m: ExactModel,
    a: int,
    b: int,
    u: int,
    v: int,
    statistic: Optional[RectStatistic] = None,
) -> float:
    """max |E(E(X | F_{a,b}) | F_{u,v}) - E(X | F_{u,min(b,v)})|

    X defaults to the sum over the whole window.

    Raises:
        DimensionError: unless d = 2
        ParameterError: unless a >= u
    """
    if m.dim != 2:
        raise DimensionError("Commuting check needs d = 2 (got d = {})".format(m.dim))
    if a < u:
        raise ParameterError("Commuting check needs a >= u (got a={}, u={})".format(a, u))
    statistic = partial_sum(m.extent) if statistic is None else statistic
    deviation = iterated_deviation(m, statistic, (a, b), (u, v), (u, min(b, v)))
    _LOG.debug("Commuting (%s, %s, %s, %s): deviation %s", a, b, u, v, deviation)
    return deviation


@dataclass
class VarRatio:
    """lhs = ||S_n|| / sqrt|n| against the anchored projective series"""

    n: LatticeIndex
    lhs: float
    rhs_series: float
    implied_constant: Optional[float]
    degenerate: bool = False
    unbounded: bool = False

    def to_dict(self) -> dict:
        return {
            "n": list(self.n),
            "lhs": self.lhs,
            "rhs_series": self.rhs_series,
            "implied_constant": self.implied_constant,
            "degenerate": self.degenerate,
            "unbounded": self.unbounded,
        }


def implied_ratio(n: LatticeIndex, lhs: float, rhs: float) -> VarRatio:
    """Flags 0/0 as degenerate and lhs > 0 = rhs as unbounded"""
    if rhs > 0:
        return VarRatio(n, lhs, rhs, lhs / rhs)
    if lhs > 0:
        _LOG.warning("Zero right-hand side with lhs %s at n=%s", lhs, n)
        return VarRatio(n, lhs, rhs, None, unbounded=True)
    return VarRatio(n, lhs, rhs, None, degenerate=True)


def exact_var_ratio(
    m: ExactModel,
    n: Sequence[int],
    anchor: Optional[Sequence[int]] = None,
    J_cap: Optional[Sequence[int]] = None,
) -> VarRatio:
    """Exact ||S_n|| / sqrt|n| and sum_{1 <= j <= J_cap} ||E(S_j | F_anchor)|| / |j|^{3/2}

    Args:
        anchor: conditioning corner, F_1 by default (F_0 with zeros)
        J_cap: upper corner of the series, n by default; must lie in the window
    """
    n = as_index(n, m.dim)
    anchor = ones(m.dim) if anchor is None else as_index(anchor, m.dim)
    J_cap = n if J_cap is None else as_index(J_cap, m.dim)
    _, second = exact_moment(m, partial_sum(n))
    lhs = math.sqrt(max(second, 0.0) / norm(n))

    corners = list(box(ones(m.dim), J_cap))
    expectations = exact_cond_expectations(m, [partial_sum(j) for j in corners], anchor)
    rhs = math.fsum(e.norm / norm(j) ** 1.5 for j, e in zip(corners, expectations))
    return implied_ratio(n, lhs, rhs)


@dataclass
class OracleCase:
    name: str
    model: ModelDescriptor
    extent: LatticeIndex


@dataclass
class OracleCheck:
    case: str
    check: str
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "check": self.check,
            "deviation": self.deviation,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


@dataclass
class OracleSuiteReport:
    checks: List[OracleCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def max_deviation(self) -> float:
        return max((check.deviation for check in self.checks), default=0.0)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_deviation": self.max_deviation,
            "checks": [check.to_dict() for check in self.checks],
        }


def _rademacher(structure: Structure = Structure.IID) -> InnovationSpec:
    return InnovationSpec(Distribution.RADEMACHER, structure)


def _linear_case(name, entries: Dict, dim: int, extent, structure=Structure.IID):
    model = ModelDescriptor(CoeffArray.from_entries(entries, dim), _rademacher(structure))
    return OracleCase(name, model, tuple(extent))


def _volterra_case(name, entries: Dict, extent):
    model = ModelDescriptor(VolterraCoeffs(entries), _rademacher())
    return OracleCase(name, model, tuple(extent))


def small_model_suite() -> List[OracleCase]:
    """Bundled models small enough to enumerate in well under a second each"""
    return [
        _linear_case("iid", {(0, 0): 1.0}, 2, (2, 2)),
        _linear_case("lagged", {(1, 1): 1.0}, 2, (2, 2)),
        _linear_case("ma-vertical", {(0, 0): 1.0, (1, 0): 0.5}, 2, (2, 2)),
        _linear_case("ma-horizontal", {(0, 0): 0.5, (0, 1): 0.5}, 2, (2, 3)),
        _linear_case("diagonal", {(0, 0): 1.0, (1, 1): -0.5}, 2, (2, 2)),
        _linear_case(
            "ma-horizontal-mds", {(0, 0): 0.5, (0, 1): 0.5}, 2, (2, 2), Structure.COLUMN_MDS
        ),
        _linear_case("iid-mds", {(0, 0): 1.0}, 2, (2, 2), Structure.COLUMN_MDS),
        _linear_case("ma-1d", {(1,): 0.5, (2,): 0.5}, 1, (6,)),
        _volterra_case("volterra-single", {((0, 0), (0, 1)): 1.0}, (2, 2)),
        _volterra_case(
            "volterra-double", {((0, 0), (1, 1)): 1.0, ((1, 0), (0, 1)): -0.5}, (2, 2)
        ),
    ]


def _closed_form_checks(case: OracleCase, m: ExactModel, tolerance: float) -> List[OracleCheck]:
    coeffs = case.model.coeffs
    corners = list(box(ones(m.dim), m.extent))
    expectations = exact_cond_expectations(
        m, [partial_sum(u) for u in corners], zeros(m.dim)
    )
    checks = []
    for u, expectation in zip(corners, expectations):
        if isinstance(coeffs, CoeffArray):
            deviation = abs(expectation.norm - linear_b(coeffs, u))
            label = "closed-form-linear {}".format(u)
        elif case.model.innovations.structure == Structure.IID:
            deviation = abs(expectation.second_moment - volterra_b_sq(coeffs, u))
            label = "closed-form-volterra {}".format(u)
        else:
            continue
        checks.append(OracleCheck(case.name, label, deviation, tolerance))
    return checks


def verify_case(case: OracleCase, tolerance: float = DEVIATION_TOLERANCE) -> List[OracleCheck]:
    """Every oracle invariant that applies to a single model"""
    m = enumerate_model(case.model, case.extent)
    whole = partial_sum(m.extent)
    checks = _closed_form_checks(case, m, tolerance)

    mean, _ = exact_moment(m, whole)
    for cond in (zeros(m.dim), ones(m.dim)):
        expectation = exact_cond_expectation(m, whole, cond)
        checks.append(
            OracleCheck(
                case.name, "total-expectation {}".format(cond), abs(expectation.mean - mean), tolerance
            )
        )

    checks.append(
        OracleCheck(
            case.name,
            "tower",
            tower_deviation(m, whole, m.extent, zeros(m.dim)),
            tolerance,
        )
    )

    if m.dim == 2:
        rows, columns = m.extent
        for a, u in ((a, u) for a in range(rows + 1) for u in range(a + 1)):
            for b, v in box((0, 0), (columns, columns)):
                checks.append(
                    OracleCheck(
                        case.name,
                        "commuting {}".format((a, b, u, v)),
                        check_commuting(m, a, b, u, v),
                        tolerance,
                    )
                )
    return checks


def verify_suite(
    cases: Optional[Sequence[OracleCase]] = None, tolerance: float = DEVIATION_TOLERANCE
) -> OracleSuiteReport:
    """Run verify_case over the bundled suite (or the given cases)"""
    report = OracleSuiteReport()
    for case in small_model_suite() if cases is None else cases:
        checks = verify_case(case, tolerance)
        _LOG.info(
            "Oracle case %s: %s checks, max deviation %s",
            case.name,
            len(checks),
            max((c.deviation for c in checks), default=0.0),
        )
        report.checks.extend(checks)
    return report
