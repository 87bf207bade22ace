"""Shared test utilities: fixture builders, canonical ordering, strategies."""

from __future__ import annotations

import json
from pathlib import Path

import hypothesis.strategies as st

from archrec.model import values_equal


def write_files(base: Path, files: dict[str, str]) -> Path:
    """Create a directory tree from {relative path: content}."""
    for rel, content in files.items():
        target = base / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(content, encoding="utf-8")
    return base


def canonical_key(value) -> str:
    return json.dumps(canonical_sort(value), sort_keys=True)


def canonical_sort(tree):
    """Recursively sort arrays by their canonical JSON text."""
    if isinstance(tree, dict):
        return {k: canonical_sort(v) for k, v in tree.items()}
    if isinstance(tree, list):
        return sorted((canonical_sort(v) for v in tree), key=lambda v: json.dumps(v, sort_keys=True))
    return tree


def equal_up_to_array_order(a, b) -> bool:
    return values_equal(canonical_sort(a), canonical_sort(b))


# --- hypothesis strategies ---------------------------------------------------

# small alphabets so independently generated trees actually collide/merge
SCALARS = st.one_of(
    st.none(),
    st.booleans(),
    st.integers(min_value=-1000, max_value=1000),
    st.floats(min_value=-1000, max_value=1000, allow_nan=False),
    st.sampled_from(["", "a", "b", "service1", "1.0.2", "x/y", "~z"]),
)

PLAIN_KEYS = st.sampled_from(["alpha", "beta", "gamma", "name", "flags", "version"])
MIXED_KEYS = st.sampled_from(
    ["alpha", "beta", "name", "$TYPE", "$path", "$tmp_0", "$ROOT", "weird~/key"])


def field_values(max_leaves: int = 15):
    """Arbitrary value trees, including transient and framework keys."""
    return st.recursive(
        SCALARS,
        lambda children: st.one_of(
            st.lists(children, max_size=4),
            st.dictionaries(MIXED_KEYS, children, max_size=4),
        ),
        max_leaves=max_leaves,
    )


def object_trees(max_leaves: int = 15):
    """Nested objects with scalar leaves and no arrays."""
    return st.recursive(
        SCALARS,
        lambda children: st.dictionaries(PLAIN_KEYS, children, max_size=4),
        max_leaves=max_leaves,
    )


def _scalar_array():
    return st.lists(SCALARS, max_size=4, unique_by=lambda v: json.dumps(v, sort_keys=True))


def _family_value(depth: int):
    if depth <= 0:
        return SCALARS
    return st.one_of(
        SCALARS,
        st.dictionaries(PLAIN_KEYS, _family_value(depth - 1), max_size=3),
        _scalar_array(),
        _entity_array(depth - 1),
    )


@st.composite
def _entity_array(draw, depth: int):
    names = draw(st.lists(st.sampled_from([f"svc{i}" for i in range(6)]),
                          max_size=3, unique=True))
    entities = []
    for name in names:
        fields = draw(st.dictionaries(
            st.sampled_from(["alpha", "beta", "version"]), _family_value(depth), max_size=2))
        entities.append({"$TYPE": "svc", "name": name, **fields})
    return entities


def model_families(depth: int = 2):
    """Identity-disciplined model trees.

    Arrays are either scalar sets (no duplicate values) or arrays of
    entities tagged "$TYPE" with per-array-unique names, the discipline
    under which array pairing is unambiguous and aggregation is
    commutative and associative up to array order.
    """
    return st.dictionaries(PLAIN_KEYS, _family_value(depth), max_size=4)
