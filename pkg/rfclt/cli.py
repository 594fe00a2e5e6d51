"""Command line interface

    rfclt <subcommand> --config <path> [--out <dir>] [--seed <u64>] [--threads <k>]

Exit codes: 0 when every acceptance check passes, 2 when one fails (or the
experiment times out), 1 for input errors.
"""

import argparse
import asyncio
import logging
import sys

from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

# rfclt imports:
from .conditions import Verdict, model_mw_series, mw_x_series
from .config import ExperimentConfig, load_config
from .diagnostics import mcleish_diagnostics, residual_scan, sigma_ell_scan
from .errors import (
    ConfigError,
    DimensionError,
    EnumerationSizeError,
    LatticeRangeError,
    ModelValidationError,
    PadError,
    ParameterError,
    UnsupportedStructureError,
)
from .experiments import clt_experiment, sequence_ratio_scan, variance_scan
from .lattice import box
from .models import CoeffArray, ModelKind
from .oracle import OracleCase, enumerate_model, small_model_suite, verify_suite
from .replication import ReplicationListener, ReplicationRunner, replication_runner
from .report import build_report, write_csv, write_report
from .simulate import simulate

_LOG = logging.getLogger(__name__)

EXIT_PASSED = 0
EXIT_INPUT_ERROR = 1
EXIT_FAILED = 2

DEFAULT_OUT_DIR = "."

INPUT_ERRORS = (
    ConfigError,
    DimensionError,
    EnumerationSizeError,
    LatticeRangeError,
    ModelValidationError,
    PadError,
    ParameterError,
    UnsupportedStructureError,
)

# header, rows and file name of an optional CSV side file
SideFile = Tuple[List[str], List[list], str]
Outcome = Tuple[bool, dict, Optional[SideFile]]


class ProgressLogger(ReplicationListener):
    """Logs replication progress in tenths"""

    def replication_done(self, name: str, index: int, count: int) -> None:
        step = max(count // 10, 1)
        if (index + 1) % step == 0:
            _LOG.debug("%s: replication %s of %s done", name, index + 1, count)

    def experiment_finished(self, name: str, count: int) -> None:
        _LOG.info("%s: %s replications finished", name, count)


async def _simulate(cfg: ExperimentConfig, runner: ReplicationRunner) -> Outcome:
    extent = cfg.extents[0]
    field = simulate(cfg.seeded_model, extent)
    values = field.values
    results = {
        "extent": list(extent),
        "origin": list(field.window.origin),
        "sum": float(np.sum(values)),
        "mean": float(np.mean(values)),
        "variance": float(np.var(values)),
    }
    side = None
    if cfg.write_samples:
        header = ["x{}".format(axis + 1) for axis in range(cfg.dim)] + ["value"]
        rows = [
            list(k) + [field.window[k]] for k in box(field.window.origin, field.window.last)
        ]
        side = (header, rows, "samples.csv")
    return True, results, side


def _default_j_max(cfg: ExperimentConfig) -> Tuple[int, ...]:
    if cfg.j_max is not None:
        return cfg.j_max
    return tuple(2 * max(lag, 1) for lag in cfg.model.max_lag)


async def _check_conditions(cfg: ExperimentConfig, runner: ReplicationRunner) -> Outcome:
    coeffs = cfg.model.coeffs
    j_max = _default_j_max(cfg)
    mw = model_mw_series(coeffs, j_max)
    mw_x = mw_x_series(coeffs, j_max, cfg.model.innovations.variance)

    # unit innovation variance matches the units of b_j
    unit_x = mw_x_series(coeffs, j_max, 1.0)
    x_total = unit_x.partial_sum + (unit_x.tail_estimate or 0.0)
    bound = 3 ** cfg.dim * x_total
    dominated = mw.partial_sum <= bound + 1e-12

    results = {
        "mw": mw.to_dict(),
        "mw_x": mw_x.to_dict(),
        "domination": {"mw_partial_sum": mw.partial_sum, "bound": bound, "holds": dominated},
    }
    if isinstance(coeffs, CoeffArray) and cfg.dim == 1:
        scan = sequence_ratio_scan(cfg.model, sorted({e[0] for e in cfg.extents}))
        results["ratio_scan"] = scan.to_dict()

    side = None
    if cfg.write_samples:
        rows = mw.csv_rows()
        side = (rows[0], rows[1:], "mw_terms.csv")
    return mw.verdict != Verdict.INCONCLUSIVE and dominated, results, side


async def _clt_test(cfg: ExperimentConfig, runner: ReplicationRunner) -> Outcome:
    report = await clt_experiment(cfg, runner)
    side = None
    if cfg.write_samples:
        header = ["replication", "extent", "z"]
        rows = [
            [r, row.extent, float(z)] for row in report.rows for r, z in enumerate(row.samples)
        ]
        side = (header, rows, "samples.csv")
    return report.passed, report.to_dict(), side


async def _variance_scan(cfg: ExperimentConfig, runner: ReplicationRunner) -> Outcome:
    scan = await variance_scan(cfg, runner)
    return scan.is_monotone(), scan.to_dict(), None


async def _mart_decompose(cfg: ExperimentConfig, runner: ReplicationRunner) -> Outcome:
    if cfg.model.kind != ModelKind.LINEAR:
        raise UnsupportedStructureError("mart-decompose needs a linear model")
    model = cfg.seeded_model
    n1 = cfg.leading_extent
    grid = cfg.n1_grid or [n1]
    R = cfg.replications
    sigma = await sigma_ell_scan(model, cfg.ells, grid, R, blocks=cfg.blocks, runner=runner)
    per_ell = []
    passed = sigma.is_cauchy()
    for ell, estimate in zip(cfg.ells, sigma.estimates):
        mcleish = await mcleish_diagnostics(model, ell, n1, cfg.blocks, R, runner=runner)
        passed = passed and mcleish.orthogonality_ok()
        per_ell.append(
            {"ell": ell, "mcleish": mcleish.to_dict(), "sigma_ell": estimate.to_dict()}
        )
    residuals = await residual_scan(
        model, cfg.ells, n1, max(cfg.ells) * cfg.blocks, R, runner=runner
    )
    results = {"ells": per_ell, "sigma_ell": sigma.to_dict(), "residuals": residuals.to_dict()}
    return passed, results, None


async def _oracle_verify(cfg: ExperimentConfig, runner: ReplicationRunner) -> Outcome:
    cases = small_model_suite()
    try:
        enumerate_model(cfg.model, cfg.extents[0])
        cases.append(OracleCase("config", cfg.model, cfg.extents[0]))
    except EnumerationSizeError as ex:
        _LOG.warning("Config model is not enumerable (%s); running the bundled suite", ex)
    report = verify_suite(cases)
    return report.passed, report.to_dict(), None


COMMANDS = {
    "simulate": _simulate,
    "check-conditions": _check_conditions,
    "clt-test": _clt_test,
    "variance-scan": _variance_scan,
    "mart-decompose": _mart_decompose,
    "oracle-verify": _oracle_verify,
}  # type: Dict[str, Callable]


async def run_async(
    command: str, cfg: ExperimentConfig, out_dir: str = DEFAULT_OUT_DIR
) -> int:
    """Run one subcommand on a validated config and write its reports"""
    try:
        async with replication_runner(
            ProgressLogger(), threads=cfg.threads, limit=cfg.timeout
        ) as runner:
            passed, results, side = await COMMANDS[command](cfg, runner)
    except asyncio.TimeoutError:
        _LOG.error("%s timed out after %s s", command, cfg.timeout)
        passed, results, side = False, {"timed_out": True}, None

    write_report(out_dir, build_report(command, passed, results, cfg.to_dict()))
    if side is not None:
        header, rows, name = side
        write_csv(out_dir, header, rows, name)
    _LOG.info("%s %s", command, "passed" if passed else "FAILED")
    return EXIT_PASSED if passed else EXIT_FAILED


def run(
    config_path: str,
    command: str,
    out_dir: str = DEFAULT_OUT_DIR,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
) -> int:
    """Load the config, run the subcommand and return the exit code"""
    if command not in COMMANDS:
        _LOG.error("Unknown subcommand '%s' (expecting %s)", command, sorted(COMMANDS))
        return EXIT_INPUT_ERROR
    try:
        cfg = load_config(config_path).with_overrides(seed=seed, threads=threads)
        return asyncio.run(run_async(command, cfg, out_dir))
    except INPUT_ERRORS as ex:
        _LOG.error("%s: %s", command, ex)
        return EXIT_INPUT_ERROR


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rfclt",
        description="Simulate stationary random fields and check limit theorems",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="experiment config (JSON)")
    parser.add_argument("--out", default=DEFAULT_OUT_DIR, help="report directory")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--threads", type=int, help="override the worker thread count")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as ex:
        return EXIT_PASSED if ex.code == 0 else EXIT_INPUT_ERROR
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    return run(args.config, args.command, args.out, args.seed, args.threads)


if __name__ == "__main__":
    sys.exit(main())
