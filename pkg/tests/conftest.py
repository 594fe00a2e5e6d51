import json

from rfclt.config import ExperimentConfig, parse_config
from rfclt.innovations import Distribution, InnovationSpec, Structure
from rfclt.models import CoeffArray, ModelDescriptor, VolterraCoeffs


def get_linear(
    entries,
    dim=None,
    dist=Distribution.STANDARD_NORMAL,
    structure=Structure.IID,
    seed=12345,
):
    """Linear model from a {lag: value} map"""
    if dim is None:
        dim = len(next(iter(entries)))
    coeffs = CoeffArray.from_entries(entries, dim)
    return ModelDescriptor(coeffs, InnovationSpec(dist, structure, seed))


def get_volterra(entries, dist=Distribution.STANDARD_NORMAL, seed=12345):
    """Volterra model from a {(u, v): value} map"""
    return ModelDescriptor(VolterraCoeffs(entries), InnovationSpec(dist, seed=seed))


def get_test_models():
    """Named models used across the tests"""
    return {
        "iid": get_linear({(0, 0): 1.0}),
        "iid-rademacher": get_linear({(0, 0): 1.0}, dist=Distribution.RADEMACHER),
        "zero": get_linear({(0, 0): 0.0}),
        "ma": get_linear({(0, 0): 0.5, (0, 1): 0.5}),
        "ma-1d": get_linear({(1,): 0.5, (2,): 0.5}),
        "lag-1d": get_linear({(1,): 1.0}),
        "volterra": get_volterra({((0, 0), (0, 1)): 1.0}),
    }


def get_config_doc(model, extents, replications, **fields):
    """A config document as it would be read from JSON"""
    doc = {
        "schema_version": 1,
        "model": model.to_dict(),
        "extents": [list(e) for e in extents],
        "replications": replications,
    }
    doc.update(fields)
    return doc


def get_test_config(model, extents, replications, **fields) -> ExperimentConfig:
    return parse_config(get_config_doc(model, extents, replications, **fields))


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)
