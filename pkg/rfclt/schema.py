"""JSON schema validation of experiment configs and model descriptors"""

import json
import logging
import os

from functools import lru_cache
from typing import Any, Iterable, Optional, Type

from jsonschema import Draft202012Validator
from jsonschema.exceptions import ValidationError, best_match

_LOG = logging.getLogger(__name__)

SCHEMA_PATH = os.path.join(os.path.dirname(__file__), "config.schema.json")


@lru_cache(maxsize=1)
def config_schema() -> dict:
    with open(SCHEMA_PATH, encoding="utf-8") as handle:
        return json.load(handle)


@lru_cache(maxsize=None)
def _validator(definition: Optional[str]) -> Draft202012Validator:
    schema = config_schema()
    if definition is not None:
        schema = {"$ref": "#/$defs/" + definition, "$defs": schema["$defs"]}
    return Draft202012Validator(schema)


def dotted(parts: Iterable[Any], prefix: str = "") -> str:
    """Render a JSON path as model.coeffs[0].index"""
    text = prefix
    for part in parts:
        if isinstance(part, int):
            text += "[{}]".format(part)
        else:
            text += "{}{}".format("." if text and not text.endswith(".") else "", part)
    return text.rstrip(".")


def describe(error: ValidationError, label: str, prefix: str = "") -> str:
    """One line naming the offending field"""
    path = list(error.absolute_path)
    if error.validator == "required":
        missing = [name for name in error.validator_value if name not in error.instance]
        return "{} field '{}' is missing".format(label, dotted(path + missing[:1], prefix))
    if error.validator == "additionalProperties":
        known = error.schema.get("properties", {})
        unknown = sorted(name for name in error.instance if name not in known)
        return "{} has unknown field(s) {}".format(
            label, ", ".join("'{}'".format(dotted(path + [name], prefix)) for name in unknown)
        )
    if not path and not prefix:
        return "{} document is invalid: {}".format(label, error.message)
    return "{} field '{}' has invalid value: {} ({})".format(
        label, dotted(path, prefix), json.dumps(error.instance, default=str), error.message
    )


def validate(
    doc: Any,
    error: Type[Exception],
    label: str,
    definition: Optional[str] = None,
    prefix: str = "",
) -> None:
    """Check doc against the bundled schema

    Args:
        doc: parsed JSON document
        error: exception class raised on failure
        label: "Config" or "Descriptor", leads the message
        definition: validate against one of the schema $defs instead of
            the whole config
        prefix: dotted path of doc inside the enclosing document

    Raises:
        error: for the most relevant schema violation
    """
    found = best_match(_validator(definition).iter_errors(doc))
    if found is not None:
        message = describe(found, label, prefix)
        _LOG.debug("Schema check failed: %s", found.message)
        raise error(message)
