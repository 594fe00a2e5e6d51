"""Monte Carlo experiments on standardised partial sums, and exact ratio scans"""

import logging
import math

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import zeta
from scipy.stats import kstest

# rfclt imports:
from .config import ExperimentConfig
from .conditions import linear_sum_norm
from .diagnostics import mean_and_se
from .errors import DimensionError, ParameterError
from .lattice import LatticeIndex, box, norm, prefix_sums, rect_sum, zeros
from .models import CoeffArray, ModelDescriptor
from .oracle import VarRatio, implied_ratio
from .replication import ReplicationRunner, replicate
from .simulate import simulate

_LOG = logging.getLogger(__name__)

# Asymptotic 1% critical value of sqrt(R) * KS
KS_CRITICAL_1PCT = 1.63

MIN_KS_REPLICATIONS = 500

# Rows closer than this many pooled standard errors count as monotone
MONOTONE_TOLERANCE_SE = 2.0


@dataclass
class VarianceScan:
    """Rows of (extent, mean of S_n^2 / |n|, standard error)"""

    rows: List[Tuple[LatticeIndex, float, float]] = field(default_factory=list)

    @property
    def final(self) -> float:
        return self.rows[-1][1]

    def pooled_se(self, i: int, j: int) -> float:
        return math.sqrt(self.rows[i][2] ** 2 + self.rows[j][2] ** 2)

    @property
    def last_difference(self) -> Optional[float]:
        """Convergence diagnostic: difference of the last two rows"""
        if len(self.rows) < 2:
            return None
        return self.rows[-1][1] - self.rows[-2][1]

    def is_monotone(self, tolerance_se: float = MONOTONE_TOLERANCE_SE) -> bool:
        """Nondecreasing rows, up to tolerance_se pooled standard errors"""
        return all(
            self.rows[i + 1][1] >= self.rows[i][1] - tolerance_se * self.pooled_se(i, i + 1)
            for i in range(len(self.rows) - 1)
        )

    def to_dict(self) -> dict:
        return {
            "rows": [
                {"extent": list(extent), "variance": variance, "se": se}
                for extent, variance, se in self.rows
            ],
            "last_difference": self.last_difference,
            "last_pooled_se": self.pooled_se(-1, -2) if len(self.rows) > 1 else None,
            "monotone": self.is_monotone(),
        }


@dataclass
class CLTRow:
    """Distributional test of S_n / sqrt|n| at one extent"""

    extent: LatticeIndex
    samples: np.ndarray
    c_sq_hat: float
    c_sq_se: float
    ks_statistic: Optional[float]
    threshold: float
    degenerate: bool = False
    diagnostic_only: bool = False

    @property
    def passed(self) -> Optional[bool]:
        if self.ks_statistic is None:
            return None
        return self.ks_statistic < self.threshold

    def to_dict(self) -> dict:
        return {
            "extent": list(self.extent),
            "mean": float(np.mean(self.samples)),
            "c_sq_hat": self.c_sq_hat,
            "c_sq_se": self.c_sq_se,
            "ks_statistic": self.ks_statistic,
            "threshold": self.threshold,
            "passed": self.passed,
            "degenerate": self.degenerate,
            "diagnostic_only": self.diagnostic_only,
        }


@dataclass
class CLTReport:
    rows: List[CLTRow] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """Every tested, non-diagnostic extent passes"""
        return all(
            row.passed for row in self.rows if not row.diagnostic_only and not row.degenerate
        )

    def to_dict(self) -> dict:
        return {"passed": self.passed, "rows": [row.to_dict() for row in self.rows]}


@dataclass
class RatioScan:
    """Implied constants ||S_n|| / sqrt(n) over the projective series, per n"""

    rows: List[VarRatio] = field(default_factory=list)

    @property
    def sup(self) -> Optional[float]:
        values = [r.implied_constant for r in self.rows if r.implied_constant is not None]
        return max(values) if values else None

    @property
    def degenerate(self) -> bool:
        return any(r.degenerate or r.unbounded for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "rows": [row.to_dict() for row in self.rows],
            "sup": self.sup,
            "degenerate": self.degenerate,
        }


def _tile_origins(extent: LatticeIndex, tiles: int) -> List[LatticeIndex]:
    return [
        tuple(1 + t * n for t, n in zip(offset, extent))
        for offset in box(zeros(len(extent)), (tiles - 1,) * len(extent))
    ]


async def variance_scan(
    cfg: ExperimentConfig, runner: Optional[ReplicationRunner] = None
) -> VarianceScan:
    """Mean of S_n^2 / |n| over R replications for every configured extent

    Each replication simulates one box holding cfg.tiles^d disjoint
    translates of every extent; the per-replication value averages the
    translates, which are identically distributed by stationarity.
    """
    model = cfg.seeded_model
    tiles = cfg.tiles
    whole = tuple(
        tiles * max(e[axis] for e in cfg.extents) for axis in range(cfg.dim)
    )

    def one(r: int) -> List[float]:
        sums = prefix_sums(simulate(model, whole, r).window)
        values = []
        for extent in cfg.extents:
            size = norm(extent)
            squares = [
                rect_sum(sums, lo, tuple(o + n - 1 for o, n in zip(lo, extent))) ** 2 / size
                for lo in _tile_origins(extent, tiles)
            ]
            values.append(math.fsum(squares) / len(squares))
        return values

    values = np.array(await replicate(one, cfg.replications, runner, "variance-scan"))
    scan = VarianceScan()
    for position, extent in enumerate(cfg.extents):
        mean, se = mean_and_se(values[:, position])
        scan.rows.append((extent, mean, se))
    _LOG.info("Variance scan: %s", [(e, m) for e, m, _ in scan.rows])
    return scan


async def clt_experiment(
    cfg: ExperimentConfig, runner: Optional[ReplicationRunner] = None
) -> CLTReport:
    """Kolmogorov-Smirnov test of S_n / sqrt|n| against N(0, c_sq_hat)

    Non-square extents are reported as diagnostic-only; a zero c_sq_hat is
    flagged as degenerate and not tested.

    Raises:
        ParameterError: for fewer than 500 replications
    """
    if cfg.replications < MIN_KS_REPLICATIONS:
        raise ParameterError(
            "The distributional test needs R >= {} (got {})".format(
                MIN_KS_REPLICATIONS, cfg.replications
            )
        )
    model = cfg.seeded_model
    R = cfg.replications
    threshold = (
        cfg.threshold if cfg.threshold is not None else KS_CRITICAL_1PCT / math.sqrt(R)
    )

    def one(r: int) -> List[float]:
        return [
            float(np.sum(simulate(model, extent, r).values)) / math.sqrt(norm(extent))
            for extent in cfg.extents
        ]

    values = np.array(await replicate(one, R, runner, "clt"))
    report = CLTReport()
    for position, extent in enumerate(cfg.extents):
        z = values[:, position]
        c_sq_hat, c_sq_se = mean_and_se(z ** 2)
        diagnostic_only = len(set(extent)) > 1
        if c_sq_hat == 0.0:
            _LOG.warning("Degenerate standardised sums at extent %s", extent)
            row = CLTRow(extent, z, 0.0, 0.0, None, threshold, degenerate=True)
        else:
            statistic = kstest(z, "norm", args=(0.0, math.sqrt(c_sq_hat))).statistic
            row = CLTRow(extent, z, c_sq_hat, c_sq_se, float(statistic), threshold)
        if diagnostic_only:
            _LOG.warning("Extent %s is not square: diagnostic only", extent)
            row.diagnostic_only = True
        report.rows.append(row)
    return report


def _constant_tail_start(c: CoeffArray) -> int:
    """||E(S_k | F_1)|| is constant for k beyond the support"""
    return c.max_lag[0] + 1


def sequence_ratio_scan(
    model: ModelDescriptor, n_grid: Sequence[int], sigma_sq: Optional[float] = None
) -> RatioScan:
    """||S_n|| / sqrt(n) against sum_{k >= 1} ||E(S_k | F_1)|| / k^{3/2}, exactly

    Terms beyond the support share one norm, so the infinite series closes
    with a Hurwitz zeta tail.

    Raises:
        DimensionError: unless the model is a 1-D linear model
    """
    c = model.coeffs
    if not isinstance(c, CoeffArray) or c.dim != 1:
        raise DimensionError("Ratio scans need a 1-D linear model (got {})".format(c))
    sigma_sq = model.innovations.variance if sigma_sq is None else sigma_sq
    start = _constant_tail_start(c)
    terms = [
        linear_sum_norm(c, (k,), sigma_sq, anchor=(1,)) * k ** -1.5 for k in range(1, start)
    ]
    tail = linear_sum_norm(c, (start,), sigma_sq, anchor=(1,)) * float(zeta(1.5, start))
    rhs = math.fsum(terms) + tail

    scan = RatioScan()
    for n in n_grid:
        if n < 1:
            raise ParameterError("n = {} must be >= 1".format(n))
        lhs = linear_sum_norm(c, (n,), sigma_sq) / math.sqrt(n)
        scan.rows.append(implied_ratio((int(n),), lhs, rhs))
    _LOG.debug("Ratio scan rhs %s, sup %s", rhs, scan.sup)
    return scan
