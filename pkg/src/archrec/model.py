"""Architecture model document tree.

The model is a recursive JSON-style value tree. Object nodes tagged with a
``$TYPE`` key are model entities (the top-level entity uses ``$TYPE: "$MODEL"``).
Keys matching the transient pattern ``^\\$[a-z0-9_]+$`` (for example ``$path``
or ``$uid``) are working data shared between extractors during a run and are
stripped from every exported document; uppercase framework keys such as
``$TYPE``, ``$ROOT`` and ``$TARGET`` are retained.

Nodes are addressed by model paths, which follow the JSON-Pointer convention:
``""`` is the root, segments are separated by ``/``, and ``~``/``/`` inside a
key are escaped as ``~0``/``~1``.
"""

from __future__ import annotations

import copy
import json
import re
from typing import Any, Iterator

# FieldValue trees are plain Python values: None, bool, int/float, str,
# dict (ordered, str keys) and list.
FieldValue = Any

TYPE_KEY = "$TYPE"
MODEL_TYPE = "$MODEL"
LINK_TYPE = "$LINK"
ROOT_KEY = "$ROOT"
TARGET_KEY = "$TARGET"
PATH_KEY = "$path"
UID_KEY = "$uid"

TRANSIENT_RE = re.compile(r"^\$[a-z0-9_]+$")


class PathMalformed(Exception):
    """The model path string itself is not syntactically valid."""


class PathNotFound(Exception):
    """The path is valid but does not resolve in the given tree."""


def is_scalar(value: FieldValue) -> bool:
    """True for null, boolean, number and string values."""
    return value is None or isinstance(value, (bool, int, float, str))


def values_equal(a: FieldValue, b: FieldValue) -> bool:
    """JSON-semantic equality.

    Booleans never equal numbers (Python's ``True == 1`` does not apply),
    numbers compare by value (``1 == 1.0``), objects compare key-set plus
    values regardless of key order, arrays compare element-wise in order.
    """
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return float(a) == float(b)
    if isinstance(a, dict) and isinstance(b, dict):
        if set(a.keys()) != set(b.keys()):
            return False
        return all(values_equal(v, b[k]) for k, v in a.items())
    if isinstance(a, list) and isinstance(b, list):
        if len(a) != len(b):
            return False
        return all(values_equal(x, y) for x, y in zip(a, b))
    if type(a) is not type(b):
        return False
    return a == b


def is_transient_key(key: str) -> bool:
    return bool(TRANSIENT_RE.match(key))


def strip_transient(entity: FieldValue) -> FieldValue:
    """Deep copy of the tree with every transient key removed at every depth.

    Uppercase framework keys (``$TYPE``, ``$ROOT``, ``$TARGET``) fail the
    lowercase pattern and are kept. Idempotent.
    """
    if isinstance(entity, dict):
        return {
            k: strip_transient(v)
            for k, v in entity.items()
            if not is_transient_key(k)
        }
    if isinstance(entity, list):
        return [strip_transient(v) for v in entity]
    return entity


def escape_segment(segment: str) -> str:
    return segment.replace("~", "~0").replace("/", "~1")


def unescape_segment(segment: str) -> str:
    # "~1" before "~0" so "~01" round-trips to "~1" and not "/".
    out = []
    i = 0
    while i < len(segment):
        ch = segment[i]
        if ch == "~":
            if i + 1 >= len(segment) or segment[i + 1] not in "01":
                raise PathMalformed(f"invalid escape in segment {segment!r}")
            out.append("~" if segment[i + 1] == "0" else "/")
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def join_path(path: str, segment: str | int) -> str:
    """Append one object key or array index to a model path."""
    if isinstance(segment, int):
        return f"{path}/{segment}"
    return f"{path}/{escape_segment(segment)}"


def split_path(path: str) -> list[str]:
    """Split a model path into unescaped segments. "" denotes the root."""
    if path == "":
        return []
    if not path.startswith("/"):
        raise PathMalformed(f"path must start with '/': {path!r}")
    return [unescape_segment(seg) for seg in path[1:].split("/")]


def get_path(root: FieldValue, path: str) -> FieldValue:
    """Resolve a model path against a tree.

    Raises PathMalformed for syntactically invalid paths and PathNotFound
    when a key is missing or an index is out of range.
    """
    node = root
    for seg in split_path(path):
        if isinstance(node, dict):
            if seg not in node:
                raise PathNotFound(f"no key {seg!r} at {path!r}")
            node = node[seg]
        elif isinstance(node, list):
            if not re.fullmatch(r"0|[1-9][0-9]*", seg):
                raise PathNotFound(f"bad array index {seg!r} at {path!r}")
            idx = int(seg)
            if idx >= len(node):
                raise PathNotFound(f"index {idx} out of range at {path!r}")
            node = node[idx]
        else:
            raise PathNotFound(f"cannot descend into scalar at {path!r}")
    return node


def set_path(root: FieldValue, path: str, value: FieldValue) -> FieldValue:
    """Replace the node at ``path``, returning the (possibly new) root."""
    if path == "":
        return value
    segments = split_path(path)
    parent_path = "/" + "/".join(escape_segment(s) for s in segments[:-1]) if len(segments) > 1 else ""
    parent = get_path(root, parent_path)
    last = segments[-1]
    if isinstance(parent, dict):
        parent[last] = value
    elif isinstance(parent, list):
        if not re.fullmatch(r"0|[1-9][0-9]*", last) or int(last) >= len(parent):
            raise PathNotFound(f"bad array index {last!r} at {path!r}")
        parent[int(last)] = value
    else:
        raise PathNotFound(f"cannot set into scalar at {path!r}")
    return root


def iter_objects(root: FieldValue, base: str = "") -> Iterator[tuple[str, dict]]:
    """All object nodes in preorder, skipping $LINK nodes and $TARGET subtrees."""
    if isinstance(root, dict):
        if root.get(TYPE_KEY) == LINK_TYPE:
            return
        yield base, root
        for key, value in root.items():
            if key == TARGET_KEY:
                continue
            yield from iter_objects(value, join_path(base, key))
    elif isinstance(root, list):
        for i, value in enumerate(root):
            yield from iter_objects(value, join_path(base, i))


def find_entities(root: FieldValue) -> list[tuple[str, dict]]:
    """All model entities in depth-first preorder, paired with their paths.

    An entity is an object node carrying a ``$TYPE`` key. ``$LINK`` entities
    are not returned and not descended into (links are resolved separately,
    never dispatched on), and ``$TARGET`` subtrees are skipped entirely:
    schemas are data, not entities, even where their keys look like tags.
    """
    return [(path, node) for path, node in iter_objects(root) if TYPE_KEY in node]


def deep_copy(value: FieldValue) -> FieldValue:
    return copy.deepcopy(value)


def dumps_canonical(tree: FieldValue) -> str:
    """Canonical document text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(tree, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def read_model(path: str) -> FieldValue:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def write_model(path: str, tree: FieldValue, keep_transient: bool = False) -> None:
    """Write a model document; transient keys are stripped unless kept."""
    out = tree if keep_transient else strip_transient(tree)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_canonical(out))
