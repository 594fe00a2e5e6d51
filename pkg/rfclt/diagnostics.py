"""Replicated diagnostics of the martingale approximation

All estimates are Monte Carlo averages over independent replications; each
replication is a pure function of (seed, replication index).
"""

import logging
import math

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

# rfclt imports:
from .errors import ParameterError, UnsupportedStructureError
from .innovations import gen_innovations
from .lattice import LatticeIndex
from .martingale import BlockDecomposition, column_mds_sums, mds_project_linear
from .models import ModelDescriptor, ModelKind
from .replication import ReplicationRunner, replicate
from .simulate import simulate

_LOG = logging.getLogger(__name__)

MIN_MCLEISH_REPLICATIONS = 100

# Lags k of corr(D_{n,1}, D_{n,k}) reported for orthogonality
ORTHOGONALITY_LAGS = (2, 3, 4)

# Slack, in pooled standard errors, for growth of successive sigma_ell^2 increments
CAUCHY_TOLERANCE_SE = 2.0


def mean_and_se(values: Sequence[float]) -> Tuple[float, float]:
    """Sample mean and its standard error (0 for fewer than two values)"""
    data = np.asarray(values, dtype=np.float64)
    mean = float(np.mean(data))
    if data.size < 2:
        return mean, 0.0
    return mean, float(np.std(data, ddof=1) / math.sqrt(data.size))


def correlation(x: np.ndarray, y: np.ndarray) -> float:
    """Sample correlation; 0 when either sample is constant"""
    sx = float(np.std(x))
    sy = float(np.std(y))
    if sx == 0.0 or sy == 0.0:
        return 0.0
    return float(np.mean((x - np.mean(x)) * (y - np.mean(y))) / (sx * sy))


@dataclass
class McLeishReport:
    """Empirical McLeish conditions for the triangular array D_{n,i}"""

    max_over_n: float
    max_over_n_se: float
    sum_sq_over_n: float
    sum_sq_over_n_se: float
    replications: int
    orthogonality: Dict[int, float] = field(default_factory=dict)

    @property
    def c_sq_hat(self) -> float:
        return self.sum_sq_over_n

    def orthogonality_ok(self) -> bool:
        """|corr(D_1, D_k)| <= 4 / sqrt(R) for every reported lag"""
        bound = 4.0 / math.sqrt(self.replications)
        return all(abs(value) <= bound for value in self.orthogonality.values())

    def to_dict(self) -> dict:
        return {
            "max_over_n": self.max_over_n,
            "max_over_n_se": self.max_over_n_se,
            "sum_sq_over_n": self.sum_sq_over_n,
            "sum_sq_over_n_se": self.sum_sq_over_n_se,
            "c_sq_hat": self.c_sq_hat,
            "replications": self.replications,
            "orthogonality": {str(k): v for k, v in sorted(self.orthogonality.items())},
        }


@dataclass
class SigmaEllEstimate:
    """Second moments of D_{n1,i} over an n1 grid for one block length"""

    ell: int
    rows: List[Tuple[int, float, float]]

    @property
    def estimate(self) -> float:
        return self.rows[-1][1]

    @property
    def standard_error(self) -> float:
        return self.rows[-1][2]

    def to_dict(self) -> dict:
        return {
            "ell": self.ell,
            "rows": [{"n1": n1, "mean": m, "se": se} for n1, m, se in self.rows],
            "estimate": self.estimate,
            "se": self.standard_error,
        }


@dataclass
class SigmaEllScan:
    """sigma_ell^2 estimates along increasing block lengths"""

    estimates: List[SigmaEllEstimate]

    @property
    def increments(self) -> List[Tuple[int, float, float]]:
        """(ell, |sigma_next^2 - sigma_ell^2|, pooled standard error) per step"""
        steps = []
        for lower, upper in zip(self.estimates, self.estimates[1:]):
            steps.append(
                (
                    lower.ell,
                    abs(upper.estimate - lower.estimate),
                    math.hypot(lower.standard_error, upper.standard_error),
                )
            )
        return steps

    def is_cauchy(self, tolerance_se: float = CAUCHY_TOLERANCE_SE, min_ell: int = 2) -> bool:
        """Increments from min_ell on do not grow by more than tolerance_se
        pooled standard errors"""
        steps = [step for step in self.increments if step[0] >= min_ell]
        return all(
            later <= earlier + tolerance_se * math.hypot(se_a, se_b)
            for (_, earlier, se_a), (_, later, se_b) in zip(steps, steps[1:])
        )

    def to_dict(self) -> dict:
        return {
            "estimates": [
                {"ell": e.ell, "sigma_sq": e.estimate, "se": e.standard_error}
                for e in self.estimates
            ],
            "increments": [
                {"ell": ell, "increment": inc, "se": se}
                for ell, inc, se in self.increments
            ],
            "cauchy": self.is_cauchy(),
        }


@dataclass
class ResidualScan:
    """L2 distance between S_n / sqrt|n| and sum_i D_{n1,i} / sqrt(k), per ell"""

    rows: List[Tuple[int, float, float]]

    def to_dict(self) -> dict:
        return {"rows": [{"ell": e, "residual": r, "se": se} for e, r, se in self.rows]}


def _decompose(
    model: ModelDescriptor, replication: int, extent: LatticeIndex, ell: int
) -> BlockDecomposition:
    if model.kind != ModelKind.LINEAR:
        raise UnsupportedStructureError(
            "Martingale diagnostics need a linear model (got {})".format(model.kind.value)
        )
    spec = model.innovations.for_replication(replication)
    xi = gen_innovations(spec, extent, model.max_lag)
    return mds_project_linear(model.coeffs, xi, ell, extent)


def _seeded(model: ModelDescriptor, seed: Optional[int]) -> ModelDescriptor:
    if seed is None:
        return model
    return model.with_innovations(model.innovations.with_seed(seed))


def _extent(dim: int, n1: int, length: int) -> LatticeIndex:
    return (int(n1),) * (dim - 1) + (int(length),)


async def mcleish_diagnostics(
    model: ModelDescriptor,
    ell: int,
    n1: int,
    k: int,
    replications: int,
    seed: Optional[int] = None,
    runner: Optional[ReplicationRunner] = None,
) -> McLeishReport:
    """Estimate E(max_i D_{n1,i}^2 / k) and E((1/k) sum_i D_{n1,i}^2)

    Args:
        model: linear model descriptor
        ell: block length
        n1: leading extent (each leading axis for d > 2)
        k: blocks per line; the blocking axis has extent k * ell
        replications: R >= 100
        seed: overrides the descriptor seed

    Raises:
        ParameterError: R < 100 or k < 1
        UnsupportedStructureError: non-linear model
    """
    if replications < MIN_MCLEISH_REPLICATIONS:
        raise ParameterError(
            "McLeish diagnostics need R >= {} (got {})".format(
                MIN_MCLEISH_REPLICATIONS, replications
            )
        )
    if k < 1:
        raise ParameterError("Block count {} must be >= 1".format(k))
    model = _seeded(model, seed)
    extent = _extent(model.dim, n1, k * ell)

    def one(r: int) -> np.ndarray:
        return column_mds_sums(_decompose(model, r, extent, ell), n1)

    rows = np.array(await replicate(one, replications, runner, "mcleish"))
    squares = rows ** 2
    max_over_n, max_se = mean_and_se(np.max(squares, axis=1) / k)
    sum_sq, sum_sq_se = mean_and_se(np.mean(squares, axis=1))
    orthogonality = {
        lag: correlation(rows[:, 0], rows[:, lag - 1])
        for lag in ORTHOGONALITY_LAGS
        if lag <= k
    }
    _LOG.info("McLeish ell=%s n1=%s k=%s: max/n %s, mean %s", ell, n1, k, max_over_n, sum_sq)
    return McLeishReport(max_over_n, max_se, sum_sq, sum_sq_se, replications, orthogonality)


async def sigma_ell_estimate(
    model: ModelDescriptor,
    ell: int,
    n1_grid: Sequence[int],
    replications: int,
    seed: Optional[int] = None,
    blocks: int = 1,
    runner: Optional[ReplicationRunner] = None,
) -> SigmaEllEstimate:
    """Empirical E(D_{n1,1}^2) along an increasing n1 grid

    D_{n1,i} is stationary in i, so the per-replication value averages
    D_{n1,i}^2 over the given number of blocks.

    Raises:
        ParameterError: for an empty or non-increasing grid
    """
    grid = [int(n) for n in n1_grid]
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 1:
        raise ParameterError("n1 grid {} must be increasing and >= 1".format(grid))
    if blocks < 1:
        raise ParameterError("Block count {} must be >= 1".format(blocks))
    model = _seeded(model, seed)
    extent = _extent(model.dim, grid[-1], blocks * ell)

    def one(r: int) -> List[float]:
        dec = _decompose(model, r, extent, ell)
        return [float(np.mean(column_mds_sums(dec, n1) ** 2)) for n1 in grid]

    values = np.array(await replicate(one, replications, runner, "sigma-ell"))
    rows = []
    for position, n1 in enumerate(grid):
        mean, se = mean_and_se(values[:, position])
        rows.append((n1, mean, se))
    _LOG.debug("sigma_%s^2 rows: %s", ell, rows)
    return SigmaEllEstimate(ell, rows)


async def sigma_ell_scan(
    model: ModelDescriptor,
    ells: Sequence[int],
    n1_grid: Sequence[int],
    replications: int,
    seed: Optional[int] = None,
    blocks: int = 1,
    runner: Optional[ReplicationRunner] = None,
) -> SigmaEllScan:
    """sigma_ell_estimate for each block length of an increasing ladder

    Raises:
        ParameterError: for an empty or non-increasing ladder
    """
    ladder = [int(ell) for ell in ells]
    if not ladder or any(b <= a for a, b in zip(ladder, ladder[1:])) or ladder[0] < 1:
        raise ParameterError("Block lengths {} must be increasing and >= 1".format(ladder))
    estimates = []
    for ell in ladder:
        estimates.append(
            await sigma_ell_estimate(
                model, ell, n1_grid, replications, seed, blocks=blocks, runner=runner
            )
        )
    scan = SigmaEllScan(estimates)
    _LOG.info("sigma_ell increments: %s", scan.increments)
    return scan


async def residual_scan(
    model: ModelDescriptor,
    ells: Sequence[int],
    n1: int,
    n2: int,
    replications: int,
    seed: Optional[int] = None,
    runner: Optional[ReplicationRunner] = None,
) -> ResidualScan:
    """Root mean square of S_n / sqrt|n| - sum_i D_{n1,i} / sqrt(k) per ell

    S_n keeps the remainder cells beyond k * ell that the blocks drop.
    """
    model = _seeded(model, seed)
    extent = _extent(model.dim, n1, n2)
    size = float(np.prod(extent))
    ells = [int(e) for e in ells]

    def one(r: int) -> List[float]:
        residuals = []
        total = float(np.sum(simulate(model, extent, r).values))
        for ell in ells:
            dec = _decompose(model, r, extent, ell)
            d = column_mds_sums(dec, n1)
            residuals.append((total / math.sqrt(size) - float(np.sum(d)) / math.sqrt(d.size)) ** 2)
        return residuals

    values = np.array(await replicate(one, replications, runner, "residual"))
    rows = []
    for position, ell in enumerate(ells):
        mean, se = mean_and_se(values[:, position])
        rms = math.sqrt(mean)
        # delta method
        rows.append((ell, rms, se / (2.0 * rms) if rms > 0 else 0.0))
    return ResidualScan(rows)

