import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from archrec.aggregate import (
    ConflictError,
    aggregatable,
    aggregate,
    aggregate_arrays,
    aggregate_collect,
    aggregate_objects,
)
from archrec.model import get_path, values_equal
from helpers import equal_up_to_array_order, field_values, model_families, object_trees

SERVICES_A = {
    "flags": {"flag1": True},
    "microservices": [
        {"name": "service1", "java": True},
        {"name": "service2", "java": False},
    ],
}

SERVICES_B = {
    "flags": {"flag2": True},
    "microservices": [
        {"name": "service1", "version": "1.0.2"},
        {"name": "service3", "version": "2.3.4"},
    ],
}

SERVICES_MERGED = {
    "flags": {"flag1": True, "flag2": True},
    "microservices": [
        {"name": "service1", "java": True, "version": "1.0.2"},
        {"name": "service2", "java": False},
        {"name": "service3", "version": "2.3.4"},
    ],
}


class TestAggregate:
    def test_two_model_merge_golden(self):
        assert values_equal(aggregate(SERVICES_A, SERVICES_B), SERVICES_MERGED)

    def test_scalar_conflict_carries_path_and_provenance(self):
        with pytest.raises(ConflictError) as err:
            aggregate({"v": "1.0"}, {"v": "2.0"}, "model-a", "model-b")
        conflict = err.value.conflict
        assert conflict.path == "/v"
        assert (conflict.left, conflict.right) == ("1.0", "2.0")
        assert (conflict.left_source, conflict.right_source) == ("model-a", "model-b")

    def test_kind_mismatch_is_a_conflict(self):
        with pytest.raises(ConflictError):
            aggregate({"x": [1]}, {"x": 1})

    def test_inputs_not_mutated(self):
        a = {"flags": {"f": True}, "arr": [{"name": "a"}]}
        b = {"flags": {"g": True}, "arr": [{"name": "a", "v": 1}]}
        aggregate(a, b)
        assert a == {"flags": {"f": True}, "arr": [{"name": "a"}]}
        assert b == {"flags": {"g": True}, "arr": [{"name": "a", "v": 1}]}

    def test_result_shares_no_structure(self):
        a = {"inner": {"x": 1}}
        out = aggregate(a, {})
        out["inner"]["x"] = 2
        assert a["inner"]["x"] == 1


class TestAggregateObjects:
    def test_flags_union(self):
        assert aggregate_objects({"flags": {"flag1": True}}, {"flags": {"flag2": True}}) == \
            {"flags": {"flag1": True, "flag2": True}}

    @given(st.dictionaries(st.sampled_from("abc"), st.integers(), max_size=3))
    def test_empty_object_identity(self, x):
        assert aggregate_objects({}, x) == x
        assert aggregate_objects(x, {}) == x

    def test_service1_union(self):
        merged = aggregate_objects(
            {"name": "service1", "java": True},
            {"name": "service1", "version": "1.0.2"})
        assert merged == {"name": "service1", "java": True, "version": "1.0.2"}


class TestAggregateArrays:
    def test_service_arrays_pair_by_name(self):
        out = aggregate_arrays(SERVICES_A["microservices"], SERVICES_B["microservices"])
        assert values_equal(out, SERVICES_MERGED["microservices"])

    def test_empty_array_identity(self):
        assert aggregate_arrays([1, {"a": 2}], []) == [1, {"a": 2}]

    def test_equal_scalars_dedupe(self):
        assert aggregate_arrays(["java", "python"], ["python", "go"]) == ["java", "python", "go"]

    def test_unpairable_objects_append(self):
        out = aggregate_arrays([{"a": 1}], [{"b": 2}])
        assert out == [{"a": 1}, {"b": 2}]


class TestAggregatable:
    def test_shared_name_merges(self):
        assert aggregatable({"name": "service1", "java": True},
                            {"name": "service1", "version": "1.0.2"})

    def test_conflicting_name_appends(self):
        assert not aggregatable({"name": "service2", "java": False},
                                {"name": "service3", "version": "2.3.4"})

    def test_no_identity_evidence_appends(self):
        assert not aggregatable({"a": 1}, {"b": 2})

    def test_differing_type_tags_never_merge(self):
        assert not aggregatable({"$TYPE": "a", "name": "x"}, {"$TYPE": "b", "name": "x"})

    def test_transient_keys_are_not_identity_evidence(self):
        assert not aggregatable({"$path": "/same", "a": 1}, {"$path": "/same", "b": 2})

    def test_equal_trees_always_aggregatable(self):
        assert aggregatable({"s": [1]}, {"s": [1]})
        assert aggregatable("x", "x")

    def test_unequal_scalars_not_aggregatable(self):
        assert not aggregatable("x", "y")


class TestCollectMode:
    def test_collects_all_conflicts(self):
        a = {"x": 1, "y": {"z": "p"}, "ok": 1}
        b = {"x": 2, "y": {"z": "q"}, "ok": 1}
        merged, conflicts = aggregate_collect(a, b, "one", "two")
        assert sorted(c.path for c in conflicts) == ["/x", "/y/z"]
        assert merged["ok"] == 1

    def test_no_conflicts_empty_list(self):
        merged, conflicts = aggregate_collect({"a": 1}, {"b": 2})
        assert conflicts == []
        assert merged == {"a": 1, "b": 2}

    def test_render_format(self):
        _, conflicts = aggregate_collect({"v": "1.0"}, {"v": "2.0"}, "m1.json", "m2.json")
        assert conflicts[0].render() == \
            'conflict at /v: "1.0" (from m1.json) vs "2.0" (from m2.json)'


# -- invariants ---------------------------------------------------------------


@given(field_values())
def test_idempotence_any_tree(x):
    assert values_equal(aggregate(x, x), x)


@settings(max_examples=300)
@given(model_families(), model_families())
def test_commutativity_up_to_array_order(a, b):
    try:
        left = aggregate(a, b)
    except ConflictError as err:
        with pytest.raises(ConflictError) as other:
            aggregate(b, a)
        assert other.value.conflict.path == err.conflict.path
        assert values_equal(other.value.conflict.left, err.conflict.right)
        assert values_equal(other.value.conflict.right, err.conflict.left)
        return
    right = aggregate(b, a)
    assert equal_up_to_array_order(left, right)


@given(object_trees(), object_trees())
def test_key_union_no_information_loss(a, b):
    def paths(tree, base=""):
        out = {base}
        if isinstance(tree, dict):
            for k, v in tree.items():
                out |= paths(v, f"{base}/{k}")
        return out

    try:
        merged = aggregate(a, b)
    except ConflictError:
        return
    assert paths(merged) == paths(a) | paths(b)


@given(field_values(), field_values())
def test_conflict_path_exact(a, b):
    try:
        aggregate(a, b)
    except ConflictError as err:
        conflict = err.conflict
        assert values_equal(get_path(a, conflict.path), conflict.left)
        assert values_equal(get_path(b, conflict.path), conflict.right)


@settings(max_examples=150)
@given(st.lists(model_families(depth=1), min_size=2, max_size=4), st.randoms())
def test_associativity_up_to_array_order_on_model_families(models, rng):
    def fold(order):
        acc = models[order[0]]
        for i in order[1:]:
            acc = aggregate(acc, models[i])
        return acc

    base_order = list(range(len(models)))
    shuffled = list(base_order)
    rng.shuffle(shuffled)
    try:
        expected = fold(base_order)
    except ConflictError:
        return
    try:
        actual = fold(shuffled)
    except ConflictError:
        pytest.fail("fold order changed conflict outcome")
    assert equal_up_to_array_order(expected, actual)
