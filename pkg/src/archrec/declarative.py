"""Declarative extractor definitions: add extractors without writing code.

A definition names an input gate (``match``), where to look (``sources``,
each a glob plus a parser) and what to write back (``emit`` templates).
Sources produce binding sets -- one per regex match, per wildcard fan-out
element of a structured document, or per file -- and every emit rule is
instantiated once per binding set, then aggregated into the entity at its
target field. Config values flow into globs and templates as
``${config.<key>}``.

File format (JSON or YAML), one definition per file::

    id: compose-services
    match:
      type: object
      required: ["$TYPE", "$path"]
      properties:
        "$TYPE": {const: "$MODEL"}
        "$path": {type: string}
    config_defaults:
      filename: docker-compose.yml
    sources:
      - glob: "${config.filename}"
        parser: yaml
        select:
          - {bind: service, path: "services.*"}
          - {bind: image, path: "services.*.image"}
    emit:
      - target: "microservices[]"
        template: {"$TYPE": "microservice", "name": "${key}"}
      - target: "microservices[]"
        template: {"$TYPE": "microservice", "name": "${key}", "image": "${image}"}

An emit rule whose placeholders are not all bound in a given binding set is
skipped for that set (``image`` above is absent for build-only services); a
placeholder that no source can ever bind is a load-time error.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field

from .aggregate import aggregate
from .extractor_api import ExtractorApi, parse, regex_search
from .model import FieldValue, deep_copy
from .schema import SchemaError, SchemaNode, load_schema

_PARSERS = ("json", "yaml", "toml", "xml", "regex", "path")
_PLACEHOLDER_RE = re.compile(r"\$\{([^}]+)\}")
_WILDCARD = object()

# bindings available to every rule regardless of parser
_FILE_BINDINGS = ("root", "file.path", "file.dir", "file.name", "file.stem", "file.ext")


class BadDefinition(Exception):
    pass


class TemplateError(Exception):
    pass


@dataclass(frozen=True)
class ValuePath:
    """Dotted path over a parsed tree; one ``*`` segment fans out."""

    segments: tuple
    wildcard_at: int | None

    @classmethod
    def parse(cls, text: str) -> "ValuePath":
        if not isinstance(text, str) or not text:
            raise BadDefinition(f"bad value path: {text!r}")
        segments: list = []
        wildcard_at = None
        for i, raw in enumerate(text.split(".")):
            if raw == "*":
                if wildcard_at is not None:
                    raise BadDefinition(f"more than one wildcard in value path {text!r}")
                wildcard_at = i
                segments.append(_WILDCARD)
            elif raw == "":
                raise BadDefinition(f"empty segment in value path {text!r}")
            elif re.fullmatch(r"0|[1-9][0-9]*", raw):
                segments.append(int(raw))
            else:
                segments.append(raw)
        return cls(tuple(segments), wildcard_at)


@dataclass(frozen=True)
class Select:
    bind: str
    path: ValuePath


@dataclass(frozen=True)
class SourceRule:
    glob: str
    parser: str
    pattern: str | None = None
    select: tuple[Select, ...] = ()

    def produced_bindings(self) -> set[str]:
        names = set(_FILE_BINDINGS)
        if self.parser == "regex":
            names.update(re.compile(self.pattern).groupindex)
        else:
            names.update(s.bind for s in self.select)
            if any(s.path.wildcard_at is not None for s in self.select):
                names.add("key")
        return names


@dataclass(frozen=True)
class EmitRule:
    target: str
    append: bool
    template: FieldValue
    placeholders: frozenset[str]


@dataclass
class DeclarativeExtractorDef:
    id: str
    match: SchemaNode
    config_defaults: dict = field(default_factory=dict)
    sources: tuple[SourceRule, ...] = ()
    emit: tuple[EmitRule, ...] = ()


def _template_placeholders(template: FieldValue) -> set[str]:
    names: set[str] = set()
    if isinstance(template, str):
        names.update(_PLACEHOLDER_RE.findall(template))
    elif isinstance(template, dict):
        for key, value in template.items():
            names.update(_PLACEHOLDER_RE.findall(key))
            names.update(_template_placeholders(value))
    elif isinstance(template, list):
        for value in template:
            names.update(_template_placeholders(value))
    return names


def _load_source(doc: FieldValue, where: str) -> SourceRule:
    if not isinstance(doc, dict):
        raise BadDefinition(f"{where}: source rule must be an object")
    glob = doc.get("glob")
    if not isinstance(glob, str) or not glob:
        raise BadDefinition(f"{where}: missing or bad 'glob'")
    parser = doc.get("parser")
    if parser not in _PARSERS:
        raise BadDefinition(f"{where}: unknown parser {parser!r}")
    pattern = doc.get("pattern")
    select_docs = doc.get("select", [])
    unknown = set(doc) - {"glob", "parser", "pattern", "select"}
    if unknown:
        raise BadDefinition(f"{where}: unknown source fields {sorted(unknown)}")
    if parser == "regex":
        if not isinstance(pattern, str):
            raise BadDefinition(f"{where}: regex parser requires a 'pattern'")
        try:
            re.compile(pattern)
        except re.error as exc:
            raise BadDefinition(f"{where}: bad pattern: {exc}") from exc
        if select_docs:
            raise BadDefinition(f"{where}: 'select' does not apply to the regex parser")
    elif parser == "path":
        if pattern is not None or select_docs:
            raise BadDefinition(f"{where}: path parser takes no 'pattern' or 'select'")
    else:
        if pattern is not None:
            raise BadDefinition(f"{where}: 'pattern' only applies to the regex parser")
    selects = []
    if select_docs:
        if not isinstance(select_docs, list):
            raise BadDefinition(f"{where}: 'select' must be a list")
        for j, sel in enumerate(select_docs):
            if not isinstance(sel, dict) or not isinstance(sel.get("bind"), str):
                raise BadDefinition(f"{where}: select[{j}] needs a 'bind' name")
            selects.append(Select(sel["bind"], ValuePath.parse(sel.get("path"))))
        prefixes = {
            s.path.segments[: s.path.wildcard_at]
            for s in selects
            if s.path.wildcard_at is not None
        }
        if len(prefixes) > 1:
            raise BadDefinition(f"{where}: wildcard selects must share one prefix")
    return SourceRule(glob, parser, pattern, tuple(selects))


def load_def(doc: FieldValue) -> DeclarativeExtractorDef:
    """Validate a definition document; errors name the offending field."""
    if not isinstance(doc, dict):
        raise BadDefinition("definition must be an object")
    def_id = doc.get("id")
    if not isinstance(def_id, str) or not def_id:
        raise BadDefinition("missing or bad 'id'")
    if "match" not in doc:
        raise BadDefinition(f"{def_id}: missing 'match' schema")
    try:
        match = load_schema(doc["match"])
    except SchemaError as exc:
        raise BadDefinition(f"{def_id}: bad 'match' schema: {exc}") from exc
    config_defaults = doc.get("config_defaults", {})
    if not isinstance(config_defaults, dict):
        raise BadDefinition(f"{def_id}: 'config_defaults' must be an object")
    unknown = set(doc) - {"id", "match", "config_defaults", "sources", "emit"}
    if unknown:
        raise BadDefinition(f"{def_id}: unknown fields {sorted(unknown)}")

    sources = tuple(
        _load_source(src, f"{def_id}: sources[{i}]")
        for i, src in enumerate(doc.get("sources", []))
    )
    emit_docs = doc.get("emit", [])
    if not isinstance(emit_docs, list):
        raise BadDefinition(f"{def_id}: 'emit' must be a list")
    emits = []
    for i, rule in enumerate(emit_docs):
        if not isinstance(rule, dict) or not isinstance(rule.get("target"), str):
            raise BadDefinition(f"{def_id}: emit[{i}] needs a 'target'")
        if "template" not in rule:
            raise BadDefinition(f"{def_id}: emit[{i}] needs a 'template'")
        target = rule["target"]
        append = target.endswith("[]")
        base = target[:-2] if append else target
        if not base:
            raise BadDefinition(f"{def_id}: emit[{i}] has an empty target")
        emits.append(EmitRule(base, append, rule["template"],
                              frozenset(_template_placeholders(rule["template"]))))

    available = set(_FILE_BINDINGS)
    for source in sources:
        available.update(source.produced_bindings())
    available.update(f"config.{key}" for key in config_defaults)
    for i, rule in enumerate(emits):
        unbound = rule.placeholders - available
        if unbound:
            raise BadDefinition(
                f"{def_id}: emit[{i}] references bindings no source produces: {sorted(unbound)}")
    for name in _PLACEHOLDER_RE.findall(" ".join(s.glob for s in sources)):
        if name not in available:
            raise BadDefinition(f"{def_id}: glob references unknown binding {name!r}")

    return DeclarativeExtractorDef(def_id, match, dict(config_defaults), sources, tuple(emits))


def _stringify(value: FieldValue) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (dict, list)):
        raise TemplateError(f"cannot interpolate composite value {value!r} into a string")
    return json.dumps(value)


def _instantiate(template: FieldValue, bindings: dict) -> FieldValue:
    if isinstance(template, str):
        whole = _PLACEHOLDER_RE.fullmatch(template)
        if whole:
            name = whole.group(1)
            if name not in bindings:
                raise TemplateError(f"unbound placeholder ${{{name}}}")
            return deep_copy(bindings[name])
        def sub(match: re.Match) -> str:
            name = match.group(1)
            if name not in bindings:
                raise TemplateError(f"unbound placeholder ${{{name}}}")
            return _stringify(bindings[name])
        return _PLACEHOLDER_RE.sub(sub, template)
    if isinstance(template, dict):
        return {
            _stringify(_instantiate(k, bindings)): _instantiate(v, bindings)
            for k, v in template.items()
        }
    if isinstance(template, list):
        return [_instantiate(v, bindings) for v in template]
    return template


def _eval_segments(tree: FieldValue, segments: tuple) -> tuple[bool, FieldValue]:
    node = tree
    for segment in segments:
        if isinstance(node, dict):
            if segment not in node:
                return False, None
            node = node[segment]
        elif isinstance(node, list) and isinstance(segment, int):
            if segment >= len(node):
                return False, None
            node = node[segment]
        else:
            return False, None
    return True, node


def _binding_sets(rule: SourceRule, tree: FieldValue, base: dict) -> list[dict]:
    constants = dict(base)
    wildcards = [s for s in rule.select if s.path.wildcard_at is not None]
    for sel in rule.select:
        if sel.path.wildcard_at is None:
            found, value = _eval_segments(tree, sel.path.segments)
            if found:
                constants[sel.bind] = value
    if not wildcards:
        return [constants]
    prefix = wildcards[0].path.segments[: wildcards[0].path.wildcard_at]
    found, fan_root = _eval_segments(tree, prefix)
    if not found:
        return []
    if isinstance(fan_root, dict):
        items = list(fan_root.items())
    elif isinstance(fan_root, list):
        items = list(enumerate(fan_root))
    else:
        return []
    sets = []
    for key, element in items:
        bindings = dict(constants)
        bindings["key"] = key
        for sel in wildcards:
            rest = sel.path.segments[sel.path.wildcard_at + 1:]
            found, value = _eval_segments(element, rest)
            if found:
                bindings[sel.bind] = value
        sets.append(bindings)
    return sets


def run_declarative(
    defn: DeclarativeExtractorDef,
    entity: dict,
    config: dict | None,
    api: ExtractorApi,
) -> dict:
    """Execute a definition against one entity; returns the enriched entity."""
    if api is None:
        raise TemplateError(f"{defn.id}: entity has no $path to search from")
    effective = {**defn.config_defaults, **(config or {})}
    config_bindings = {f"config.{key}": value for key, value in effective.items()}
    for source in defn.sources:
        glob = _stringify(_instantiate(source.glob, config_bindings))
        for rel_path in api.get_paths(glob):
            base = dict(config_bindings)
            base["root"] = api.root
            base["file.path"] = rel_path
            base["file.dir"] = os.path.dirname(rel_path) or "."
            base["file.name"] = os.path.basename(rel_path)
            base["file.stem"], ext = os.path.splitext(os.path.basename(rel_path))
            base["file.ext"] = ext
            if source.parser == "path":
                sets = [base]
            elif source.parser == "regex":
                sets = []
                for match in regex_search(api.read_text(rel_path), source.pattern):
                    bindings = dict(base)
                    bindings.update(match.captures)
                    sets.append(bindings)
            else:
                tree = parse(api.read_text(rel_path), source.parser)
                sets = _binding_sets(source, tree, base)
            for bindings in sets:
                for rule in defn.emit:
                    if not rule.placeholders <= bindings.keys():
                        continue  # optional binding absent for this set
                    value = _instantiate(rule.template, bindings)
                    patch = {rule.target: [value] if rule.append else value}
                    entity = aggregate(entity, patch, "entity", defn.id)
    return entity


def make_behavior(defn: DeclarativeExtractorDef):
    """Adapt a definition to the orchestrator's behavior signature."""
    def behavior(entity: dict, api, config: dict) -> dict:
        return run_declarative(defn, entity, config, api)
    return behavior
