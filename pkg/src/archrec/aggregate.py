"""Recursive-union aggregation of model trees with conflict detection.

Two objects merge to the union of their keys, recursing where a key exists on
both sides. Two arrays merge element-wise: each right-hand element either
combines with the first compatible element already in the result or is
appended. Equal values unify; unequal scalars (or mismatched kinds) are a
conflict, which is an error by default so that disagreeing sources are never
silently papered over. A collecting mode gathers every conflict in one pass
for reporting instead of aborting on the first.

The same routine merges extractor outputs into the model during a
reconstruction run and combines per-repository models afterwards.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .model import (
    FieldValue,
    TYPE_KEY,
    deep_copy,
    is_scalar,
    is_transient_key,
    join_path,
    values_equal,
)


@dataclass(frozen=True)
class Conflict:
    """Two sources disagree about the value at one model path."""

    path: str
    left: FieldValue
    right: FieldValue
    left_source: str
    right_source: str

    def render(self) -> str:
        return (
            f"conflict at {self.path or '/'}: {json.dumps(self.left, sort_keys=True)}"
            f" (from {self.left_source}) vs {json.dumps(self.right, sort_keys=True)}"
            f" (from {self.right_source})"
        )


class ConflictError(Exception):
    def __init__(self, conflict: Conflict):
        super().__init__(conflict.render())
        self.conflict = conflict


class _Ctx:
    __slots__ = ("prov_a", "prov_b", "conflicts")

    def __init__(self, prov_a: str, prov_b: str, collect: bool):
        self.prov_a = prov_a
        self.prov_b = prov_b
        self.conflicts: list[Conflict] | None = [] if collect else None

    def conflict(self, path: str, left: FieldValue, right: FieldValue) -> None:
        found = Conflict(path, deep_copy(left), deep_copy(right), self.prov_a, self.prov_b)
        if self.conflicts is None:
            raise ConflictError(found)
        self.conflicts.append(found)


def aggregate(
    a: FieldValue,
    b: FieldValue,
    prov_a: str = "left",
    prov_b: str = "right",
) -> FieldValue:
    """Merge two value trees; raises ConflictError on the first disagreement.

    Inputs are never mutated; the result shares no structure with them.
    """
    ctx = _Ctx(prov_a, prov_b, collect=False)
    return _merge(a, b, "", ctx)


def aggregate_collect(
    a: FieldValue,
    b: FieldValue,
    prov_a: str = "left",
    prov_b: str = "right",
) -> tuple[FieldValue, list[Conflict]]:
    """Merge while collecting every conflict instead of aborting.

    At conflicting sites the left value is kept so the scan can continue;
    callers must treat the merged tree as diagnostic-only when conflicts
    are returned.
    """
    ctx = _Ctx(prov_a, prov_b, collect=True)
    merged = _merge(a, b, "", ctx)
    return merged, list(ctx.conflicts or [])


def aggregate_objects(
    a: dict,
    b: dict,
    prov_a: str = "left",
    prov_b: str = "right",
) -> dict:
    """Union-merge two objects (both inputs must be objects)."""
    ctx = _Ctx(prov_a, prov_b, collect=False)
    return _merge_objects(a, b, "", ctx)


def aggregate_arrays(
    a: list,
    b: list,
    prov_a: str = "left",
    prov_b: str = "right",
) -> list:
    """Element-wise merge of two arrays (both inputs must be arrays)."""
    ctx = _Ctx(prov_a, prov_b, collect=False)
    return _merge_arrays(a, b, "", ctx)


def _merge(a: FieldValue, b: FieldValue, path: str, ctx: _Ctx) -> FieldValue:
    if isinstance(a, dict) and isinstance(b, dict):
        return _merge_objects(a, b, path, ctx)
    if isinstance(a, list) and isinstance(b, list):
        return _merge_arrays(a, b, path, ctx)
    if values_equal(a, b):
        return deep_copy(a)
    ctx.conflict(path, a, b)
    return deep_copy(a)  # collect mode continues with the left value


def _merge_objects(a: dict, b: dict, path: str, ctx: _Ctx) -> dict:
    # sorted key order makes the first-reported conflict independent of the
    # inputs' insertion orders (and of which side is which)
    merged: dict = {}
    for key in sorted(set(a) | set(b)):
        if key in a and key in b:
            merged[key] = _merge(a[key], b[key], join_path(path, key), ctx)
        elif key in a:
            merged[key] = deep_copy(a[key])
        else:
            merged[key] = deep_copy(b[key])
    return merged


def _merge_arrays(a: list, b: list, path: str, ctx: _Ctx) -> list:
    result = [deep_copy(e) for e in a]
    for element in b:
        index = _pair_index(result, element)
        if index is None:
            result.append(deep_copy(element))
        else:
            # a confirmed pairing cannot conflict: aggregatable() already
            # performed the merge tentatively
            result[index] = _merge(result[index], element, join_path(path, index), ctx)
    return result


def _pair_index(result: list, element: FieldValue) -> int | None:
    # exact duplicates pair with themselves first, so that a tree aggregated
    # with itself is unchanged even when siblings would pair greedily
    for i, candidate in enumerate(result):
        if values_equal(candidate, element):
            return i
    for i, candidate in enumerate(result):
        if aggregatable(candidate, element):
            return i
    return None


def aggregatable(x: FieldValue, y: FieldValue) -> bool:
    """Can two array elements be combined rather than appended?

    Equal values always can. Two objects can when their ``$TYPE`` tags (if
    both are tagged) agree, a tentative merge raises no conflict, and they
    share at least one non-transient key whose values are equal scalars --
    the shared-identity evidence that keeps unrelated objects from being
    glued together just because their keys happen not to collide.
    """
    if values_equal(x, y):
        return True
    if not isinstance(x, dict) or not isinstance(y, dict):
        return False
    if TYPE_KEY in x and TYPE_KEY in y and not values_equal(x[TYPE_KEY], y[TYPE_KEY]):
        return False
    if not _shares_identity_evidence(x, y):
        return False
    try:
        aggregate_objects(x, y)
    except ConflictError:
        return False
    return True


def _shares_identity_evidence(x: dict, y: dict) -> bool:
    # transient values (machine-specific paths, run-local uids) must not
    # drive identity even though they participate in the merge itself
    for key, value in x.items():
        if is_transient_key(key):
            continue
        if key in y and is_scalar(value) and is_scalar(y[key]) and values_equal(value, y[key]):
            return True
    return False
