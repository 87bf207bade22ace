import pytest
from hypothesis import given
import hypothesis.strategies as st

from archrec.schema import (
    BadKeywordShape,
    BadPattern,
    UnknownKeyword,
    conforms,
    load_schema,
)
from helpers import field_values

MODEL_GATE_SCHEMA = {
    "type": "object",
    "properties": {
        "$TYPE": {"const": "$MODEL"},
        "$path": {"type": "string"},
    },
    "required": ["$TYPE", "$path"],
}

SERVICE_GATE_SCHEMA = {
    "type": "object",
    "properties": {
        "$TYPE": {"const": "microservice"},
        "$path": {"type": "string"},
    },
    "required": ["$TYPE", "$path"],
}

NAMED_SERVICE_TARGET = {
    "type": "object",
    "properties": {
        "$TYPE": {"const": "microservice"},
        "name": {"const": "bar"},
    },
    "required": ["$TYPE", "name"],
}


class TestLoadSchema:
    def test_gate_schema_loads(self):
        node = load_schema(MODEL_GATE_SCHEMA)
        assert set(node.properties) == {"$TYPE", "$path"}
        assert node.required == ["$TYPE", "$path"]

    def test_empty_schema(self):
        node = load_schema({})
        assert node.types is None and not node.has_const

    def test_unknown_keyword_rejected(self):
        with pytest.raises(UnknownKeyword, match="oneOf"):
            load_schema({"type": "object", "oneOf": []})

    def test_bad_pattern(self):
        with pytest.raises(BadPattern):
            load_schema({"pattern": "["})

    def test_bad_keyword_shapes(self):
        with pytest.raises(BadKeywordShape):
            load_schema({"type": "integerish"})
        with pytest.raises(BadKeywordShape):
            load_schema({"required": "name"})
        with pytest.raises(BadKeywordShape):
            load_schema({"enum": 3})
        with pytest.raises(BadKeywordShape):
            load_schema({"minimum": True})

    def test_error_names_nested_path(self):
        with pytest.raises(UnknownKeyword, match="properties/x"):
            load_schema({"properties": {"x": {"nope": 1}}})

    def test_non_object_rejected(self):
        with pytest.raises(BadKeywordShape):
            load_schema("string")


class TestConforms:
    def test_target_matches_named_service_only(self):
        target = load_schema(NAMED_SERVICE_TARGET)
        bar = {"$TYPE": "microservice", "name": "bar", "extra": 1}
        foo = {"$TYPE": "microservice", "name": "foo"}
        assert conforms(bar, target)
        assert not conforms(foo, target)

    @given(field_values())
    def test_empty_schema_matches_everything(self, value):
        assert conforms(value, load_schema({}))

    def test_gate_requires_path(self):
        schema = load_schema(SERVICE_GATE_SCHEMA)
        assert not conforms({"$TYPE": "microservice"}, schema)
        assert conforms({"$TYPE": "microservice", "$path": "/x"}, schema)

    def test_properties_constrain_only_present_keys(self):
        schema = load_schema({"properties": {"x": {"type": "number"}}})
        assert conforms({}, schema)
        assert conforms({"x": 3}, schema)
        assert not conforms({"x": "three"}, schema)

    def test_type_lists(self):
        schema = load_schema({"type": ["string", "null"]})
        assert conforms("a", schema) and conforms(None, schema)
        assert not conforms(3, schema)

    def test_integer_means_zero_fraction(self):
        schema = load_schema({"type": "integer"})
        assert conforms(3, schema) and conforms(3.0, schema)
        assert not conforms(3.5, schema)
        assert not conforms(True, schema)

    def test_boolean_is_not_number(self):
        assert not conforms(True, load_schema({"type": "number"}))
        assert not conforms(1, load_schema({"type": "boolean"}))

    def test_const_null_is_a_constraint(self):
        schema = load_schema({"const": None})
        assert conforms(None, schema)
        assert not conforms(0, schema)

    def test_enum(self):
        schema = load_schema({"enum": ["a", 1, None]})
        assert conforms("a", schema) and conforms(1, schema) and conforms(None, schema)
        assert not conforms("b", schema)

    def test_pattern_unanchored_and_strings_only(self):
        schema = load_schema({"pattern": "^svc-[0-9]+"})
        assert conforms("svc-12", schema)
        assert not conforms("x svc-12", schema)
        loose = load_schema({"pattern": "svc"})
        assert conforms("a-svc-b", loose)
        assert conforms(42, loose)  # non-strings are unconstrained

    def test_minimum_maximum_inclusive(self):
        schema = load_schema({"minimum": 1, "maximum": 3})
        assert conforms(1, schema) and conforms(3, schema) and conforms(2.5, schema)
        assert not conforms(0.9, schema) and not conforms(3.1, schema)
        assert conforms("not a number", schema)

    def test_items_applies_to_every_element(self):
        schema = load_schema({"items": {"type": "string"}})
        assert conforms(["a", "b"], schema) and conforms([], schema)
        assert not conforms(["a", 1], schema)

    def test_required_applies_to_objects_only(self):
        schema = load_schema({"required": ["x"]})
        assert conforms("scalar", schema)
        assert not conforms({}, schema)


# -- invariants ---------------------------------------------------------------

_SCHEMA_VALUES = field_values(max_leaves=8)


@given(_SCHEMA_VALUES, st.sampled_from(["$TYPE", "$path", "name", "x"]))
def test_required_monotonicity(value, dropped):
    full = load_schema({"required": ["$TYPE", "$path", "name", "x"]})
    reduced = load_schema({"required": [k for k in ["$TYPE", "$path", "name", "x"] if k != dropped]})
    if conforms(value, full):
        assert conforms(value, reduced)


@given(_SCHEMA_VALUES, _SCHEMA_VALUES)
def test_const_conformance_implies_enum_conformance(value, other):
    const_schema = load_schema({"const": value})
    enum_schema = load_schema({"enum": [other, value]})
    if conforms(value, const_schema):
        assert conforms(value, enum_schema)


@given(_SCHEMA_VALUES)
def test_conforms_is_pure(value):
    schema = load_schema(SERVICE_GATE_SCHEMA)
    assert conforms(value, schema) == conforms(value, schema)
