"""Retroactive link resolution.

A ``$LINK`` entity names a search root (``$ROOT``, a model path) and a target
schema (``$TARGET``). Links are written by extractors that cannot know where
-- or whether -- their target exists, and are resolved only after every
contributing model has been aggregated: each link's subtree is searched for
entities conforming to its target schema, and exactly one hit resolves the
link. Zero hits (the target changed or was never reconstructed) and multiple
hits (duplicate targets) are reported as distinct outcomes rather than
errors, because both are architecture diagnostics in their own right.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import (
    FieldValue,
    LINK_TYPE,
    ROOT_KEY,
    TARGET_KEY,
    TYPE_KEY,
    deep_copy,
    get_path,
    iter_objects,
    join_path,
    split_path,
    PathMalformed,
    PathNotFound,
)
from .schema import SchemaError, conforms, load_schema

RESOLVED = "resolved"
UNRESOLVED = "unresolved"
AMBIGUOUS = "ambiguous"


class MalformedLink(Exception):
    pass


@dataclass
class LinkResolution:
    """Outcome of resolving a single link."""

    link_path: str
    outcome: str
    target: str | None = None
    candidates: list[str] = field(default_factory=list)

    def to_doc(self) -> dict:
        doc: dict = {"link": self.link_path, "outcome": self.outcome}
        if self.outcome == RESOLVED:
            doc["target"] = self.target
        if self.outcome == AMBIGUOUS:
            doc["candidates"] = list(self.candidates)
        return doc

    def render(self) -> str:
        if self.outcome == RESOLVED:
            return f"link {self.link_path or '/'}: resolved -> {self.target}"
        if self.outcome == AMBIGUOUS:
            return (f"link {self.link_path or '/'}: ambiguous "
                    f"({len(self.candidates)} candidates: {', '.join(self.candidates)})")
        return f"link {self.link_path or '/'}: unresolved"


def collect_links(model: FieldValue) -> list[tuple[str, dict]]:
    """All $LINK entities in depth-first preorder, validated.

    Raises MalformedLink (with the link's path) when $ROOT or $TARGET is
    missing or does not load.
    """
    links: list[tuple[str, dict]] = []

    def walk(node: FieldValue, path: str) -> None:
        if isinstance(node, dict):
            if node.get(TYPE_KEY) == LINK_TYPE:
                _validate_link(node, path)
                links.append((path, node))
                return
            for key, value in node.items():
                if key == TARGET_KEY:
                    continue
                walk(value, join_path(path, key))
        elif isinstance(node, list):
            for i, value in enumerate(node):
                walk(value, join_path(path, i))

    walk(model, "")
    return links


def _validate_link(link: dict, path: str) -> None:
    root = link.get(ROOT_KEY)
    if not isinstance(root, str):
        raise MalformedLink(f"link at {path or '/'}: missing or bad {ROOT_KEY}")
    try:
        split_path(root)
    except PathMalformed as exc:
        raise MalformedLink(f"link at {path or '/'}: bad {ROOT_KEY}: {exc}") from exc
    if TARGET_KEY not in link:
        raise MalformedLink(f"link at {path or '/'}: missing {TARGET_KEY}")
    try:
        load_schema(link[TARGET_KEY])
    except SchemaError as exc:
        raise MalformedLink(f"link at {path or '/'}: bad {TARGET_KEY}: {exc}") from exc


def resolve_links(model: FieldValue) -> tuple[FieldValue, list[LinkResolution]]:
    """Resolve every link in an aggregated model.

    Returns a new model (resolved links gain a ``target`` path; ``$ROOT``
    and ``$TARGET`` are kept for traceability) plus one report entry per
    link. Pure with respect to the input; idempotent on its own output.
    """
    model = deep_copy(model)
    report: list[LinkResolution] = []
    for path, link in collect_links(model):
        schema = load_schema(link[TARGET_KEY])
        try:
            scope = get_path(model, link[ROOT_KEY])
        except PathNotFound:
            report.append(LinkResolution(path, UNRESOLVED))
            continue
        candidates = [
            node_path
            for node_path, node in iter_objects(scope, base=link[ROOT_KEY])
            if conforms(node, schema)
        ]
        if len(candidates) == 1:
            link["target"] = candidates[0]
            report.append(LinkResolution(path, RESOLVED, target=candidates[0]))
        elif not candidates:
            report.append(LinkResolution(path, UNRESOLVED))
        else:
            report.append(LinkResolution(path, AMBIGUOUS, candidates=candidates))
    return model, report
