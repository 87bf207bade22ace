"""Conformance checking against a bounded subset of the JSON Schema vocabulary.

Extractor input gates and link targets both use these schemas. The vocabulary
is closed: ``type``, ``const``, ``enum``, ``pattern``, ``properties``,
``required``, ``items``, ``minimum`` and ``maximum``. Anything else is
rejected at load time so a typo cannot silently widen a gate.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Optional

from .model import FieldValue, values_equal

_KEYWORDS = {
    "type", "const", "enum", "pattern", "properties", "required",
    "items", "minimum", "maximum",
}

_TYPE_NAMES = {"object", "array", "string", "number", "integer", "boolean", "null"}

# distinguishes an absent `const` from `const: null`
_MISSING = object()


class SchemaError(Exception):
    """A schema document failed to load; message names the keyword and path."""


class UnknownKeyword(SchemaError):
    pass


class BadPattern(SchemaError):
    pass


class BadKeywordShape(SchemaError):
    pass


@dataclass
class SchemaNode:
    """One validated schema level. Immutable after load."""

    types: Optional[list[str]] = None
    const: Any = _MISSING
    enum: Optional[list[FieldValue]] = None
    pattern: Optional[re.Pattern] = None
    properties: Optional[dict[str, "SchemaNode"]] = None
    required: Optional[list[str]] = None
    items: Optional["SchemaNode"] = None
    minimum: Optional[float] = None
    maximum: Optional[float] = None
    doc: dict = field(default_factory=dict, repr=False)

    @property
    def has_const(self) -> bool:
        return self.const is not _MISSING


def load_schema(doc: FieldValue, path: str = "") -> SchemaNode:
    """Validate a schema document into a SchemaNode.

    Raises UnknownKeyword, BadPattern or BadKeywordShape naming the offending
    keyword and its location.
    """
    if not isinstance(doc, dict):
        raise BadKeywordShape(f"schema at {path or '/'} must be an object")
    node = SchemaNode(doc=doc)
    for keyword, value in doc.items():
        if keyword not in _KEYWORDS:
            raise UnknownKeyword(f"unknown schema keyword {keyword!r} at {path or '/'}")
        if keyword == "type":
            names = value if isinstance(value, list) else [value]
            for name in names:
                if not isinstance(name, str) or name not in _TYPE_NAMES:
                    raise BadKeywordShape(f"bad type name {name!r} at {path or '/'}")
            node.types = list(names)
        elif keyword == "const":
            node.const = value
        elif keyword == "enum":
            if not isinstance(value, list):
                raise BadKeywordShape(f"enum must be an array at {path or '/'}")
            node.enum = list(value)
        elif keyword == "pattern":
            if not isinstance(value, str):
                raise BadKeywordShape(f"pattern must be a string at {path or '/'}")
            try:
                node.pattern = re.compile(value)
            except re.error as exc:
                raise BadPattern(f"bad pattern {value!r} at {path or '/'}: {exc}") from exc
        elif keyword == "properties":
            if not isinstance(value, dict):
                raise BadKeywordShape(f"properties must be an object at {path or '/'}")
            node.properties = {
                key: load_schema(sub, f"{path}/properties/{key}")
                for key, sub in value.items()
            }
        elif keyword == "required":
            if not isinstance(value, list) or not all(isinstance(k, str) for k in value):
                raise BadKeywordShape(f"required must be an array of strings at {path or '/'}")
            node.required = list(value)
        elif keyword == "items":
            node.items = load_schema(value, f"{path}/items")
        elif keyword in ("minimum", "maximum"):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise BadKeywordShape(f"{keyword} must be a number at {path or '/'}")
            setattr(node, keyword, float(value))
    return node


def _type_of(value: FieldValue) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, (int, float)):
        return "number"
    if isinstance(value, str):
        return "string"
    if isinstance(value, dict):
        return "object"
    return "array"


def _matches_type(value: FieldValue, name: str) -> bool:
    actual = _type_of(value)
    if name == "integer":
        return actual == "number" and float(value) == int(value)
    return actual == name


def conforms(value: FieldValue, schema: SchemaNode) -> bool:
    """True iff the value satisfies every keyword present in the schema.

    Absent keywords impose no constraint, so the empty schema matches
    everything. ``properties`` constrains only keys that are present;
    presence itself is enforced solely by ``required``. ``pattern`` uses
    unanchored search semantics and, like ``minimum``/``maximum``, only
    constrains values of the kind it applies to.
    """
    if schema.types is not None:
        if not any(_matches_type(value, t) for t in schema.types):
            return False
    if schema.has_const and not values_equal(value, schema.const):
        return False
    if schema.enum is not None:
        if not any(values_equal(value, member) for member in schema.enum):
            return False
    if schema.pattern is not None and isinstance(value, str):
        if not schema.pattern.search(value):
            return False
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        if schema.minimum is not None and value < schema.minimum:
            return False
        if schema.maximum is not None and value > schema.maximum:
            return False
    if isinstance(value, dict):
        if schema.required is not None:
            if any(key not in value for key in schema.required):
                return False
        if schema.properties is not None:
            for key, sub in schema.properties.items():
                if key in value and not conforms(value[key], sub):
                    return False
    if isinstance(value, list) and schema.items is not None:
        if not all(conforms(element, schema.items) for element in value):
            return False
    return True
