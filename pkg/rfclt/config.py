"""Experiment configuration: one JSON document per experiment"""

import json
import logging

from dataclasses import dataclass, field, replace
from typing import Any, List, Mapping, Optional

# rfclt imports:
from .errors import ConfigError, ModelValidationError
from .innovations import MAX_SEED
from .lattice import LatticeIndex, norm
from .models import ModelDescriptor, parse_descriptor
from .replication import DEFAULT_THREADS
from .schema import validate

_LOG = logging.getLogger(__name__)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment configuration"""

    model: ModelDescriptor
    extents: List[LatticeIndex]
    replications: int
    seed: Optional[int] = None
    ells: List[int] = field(default_factory=lambda: [1])
    n1: Optional[int] = None
    n1_grid: List[int] = field(default_factory=list)
    blocks: int = 16
    tiles: int = 1
    j_max: Optional[LatticeIndex] = None
    test_kind: str = "ks"
    threshold: Optional[float] = None
    threads: int = DEFAULT_THREADS
    timeout: Optional[float] = None
    write_samples: bool = False
    schema_version: int = SCHEMA_VERSION

    @property
    def dim(self) -> int:
        return self.model.dim

    @property
    def seeded_model(self) -> ModelDescriptor:
        """The model with the configured seed applied"""
        if self.seed is None:
            return self.model
        return self.model.with_innovations(self.model.innovations.with_seed(self.seed))

    @property
    def leading_extent(self) -> int:
        """n1 for the martingale experiments, defaulting to the first extent"""
        if self.n1 is not None:
            return self.n1
        return self.extents[0][0]

    def with_overrides(
        self, seed: Optional[int] = None, threads: Optional[int] = None
    ) -> "ExperimentConfig":
        """Apply command line overrides"""
        changes = {}
        if seed is not None:
            changes["seed"] = _seed(seed, "seed")
        if threads is not None:
            changes["threads"] = _positive_int(threads, "threads")
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "model": self.model.to_dict(),
            "extents": [list(e) for e in self.extents],
            "replications": self.replications,
            "seed": self.seed,
            "ells": list(self.ells),
            "n1": self.n1,
            "n1_grid": list(self.n1_grid),
            "blocks": self.blocks,
            "tiles": self.tiles,
            "j_max": None if self.j_max is None else list(self.j_max),
            "test": {"kind": self.test_kind, "threshold": self.threshold},
            "threads": self.threads,
            "timeout": self.timeout,
            "write_samples": self.write_samples,
        }


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _positive_int(value: Any, path: str, minimum: int = 1) -> int:
    if not _is_int(value) or value < minimum:
        raise ConfigError(
            "Config field '{}' has invalid value: {} (expecting an integer >= {})".format(
                path, value, minimum
            )
        )
    return value


def _seed(value: Any, path: str) -> int:
    if not _is_int(value) or not 0 <= value <= MAX_SEED:
        raise ConfigError(
            "Config field '{}' has invalid value: {} (expecting 0..2^64-1)".format(
                path, value
            )
        )
    return value


def _index(value: List[int], path: str, dim: int) -> LatticeIndex:
    if len(value) != dim:
        raise ConfigError(
            "Config field '{}' has dimension {} (expecting {})".format(path, len(value), dim)
        )
    return tuple(int(c) for c in value)


def parse_config(doc: Mapping) -> ExperimentConfig:
    """Validate a parsed JSON document

    Types and ranges are checked against the bundled schema; the checks
    that span fields (dimensions, ordering) follow.

    Raises:
        ConfigError: naming the dotted path of the offending field
    """
    validate(doc, ConfigError, "Config")
    try:
        model = parse_descriptor(doc["model"], "model.")
    except ModelValidationError as ex:
        raise ConfigError(str(ex)) from None
    dim = model.dim

    extents = [_index(e, "extents[{}]".format(i), dim) for i, e in enumerate(doc["extents"])]
    sizes = [norm(e) for e in extents]
    if any(b < a for a, b in zip(sizes, sizes[1:])):
        raise ConfigError("Config field 'extents' is not sorted by |n|: {}".format(sizes))

    ells = [int(ell) for ell in doc.get("ells", [1])]
    if any(b <= a for a, b in zip(ells, ells[1:])):
        raise ConfigError("Config field 'ells' is not increasing: {}".format(ells))

    n1_grid = [int(n) for n in doc.get("n1_grid", [])]
    if any(b <= a for a, b in zip(n1_grid, n1_grid[1:])):
        raise ConfigError("Config field 'n1_grid' is not increasing: {}".format(n1_grid))

    j_max = doc.get("j_max")
    if j_max is not None:
        j_max = _index(j_max, "j_max", dim)

    test = doc.get("test", {})
    threshold = test.get("threshold")
    timeout = doc.get("timeout")
    seed = doc.get("seed")
    n1 = doc.get("n1")

    return ExperimentConfig(
        model=model,
        extents=extents,
        replications=int(doc["replications"]),
        seed=None if seed is None else int(seed),
        ells=ells,
        n1=None if n1 is None else int(n1),
        n1_grid=n1_grid,
        blocks=int(doc.get("blocks", 16)),
        tiles=int(doc.get("tiles", 1)),
        j_max=j_max,
        test_kind=test.get("kind", "ks"),
        threshold=None if threshold is None else float(threshold),
        threads=int(doc.get("threads", DEFAULT_THREADS)),
        timeout=None if timeout is None else float(timeout),
        write_samples=doc.get("write_samples", False),
    )


def loads(text: str) -> ExperimentConfig:
    """
    Raises:
        ConfigError: with line and column for JSON syntax errors
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as ex:
        raise ConfigError(
            "Config is not valid JSON (line {}, column {}): {}".format(
                ex.lineno, ex.colno, ex.msg
            )
        ) from None
    return parse_config(doc)


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as ex:
        raise ConfigError("Cannot read config '{}': {}".format(path, ex.strerror)) from None
    _LOG.debug("Loaded config from %s", path)
    return loads(text)
