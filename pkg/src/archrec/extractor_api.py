"""Services available to extractors: rooted file access and format parsing.

Every file operation is confined to a root directory (the ``$path`` of the
entity being processed), so an extractor targeting one microservice can only
see that service's files. Glob patterns support ``*``, ``?``, character
classes, ``{a,b}`` alternation and ``**`` across directory boundaries.
"""

from __future__ import annotations

import json
import os
import re
import sys
from dataclasses import dataclass
from datetime import date, datetime, time
from xml.etree import ElementTree

import yaml

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .model import FieldValue


class RootMissing(Exception):
    pass


class FileMissing(Exception):
    pass


class PathEscapesRoot(Exception):
    pass


class BadPattern(ValueError):
    pass


class ParseError(Exception):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


@dataclass(frozen=True)
class RegexMatch:
    """One regular-expression match: whole text, span, and named captures."""

    text: str
    start: int
    end: int
    captures: dict[str, str]


# Pre-made patterns for common extraction needs. STRING_LITERAL matches both
# double- and single-quoted literals, quotes included in the match text.
PATTERNS = {
    "URI": r"[A-Za-z][A-Za-z0-9+.-]*://[^\s\"'<>]+",
    "STRING_LITERAL": r"\"(?:[^\"\\\n]|\\.)*\"|'(?:[^'\\\n]|\\.)*'",
    "IDENTIFIER": r"\b[A-Za-z_][A-Za-z0-9_]*\b",
}


def _expand_braces(pattern: str) -> list[str]:
    """Expand the first {a,b} alternation; recurses until none remain."""
    depth = 0
    start = -1
    for i, ch in enumerate(pattern):
        if ch == "{":
            if depth == 0:
                start = i
            depth += 1
        elif ch == "}" and depth > 0:
            depth -= 1
            if depth == 0:
                body = pattern[start + 1:i]
                expanded = []
                for alt in _split_alternatives(body):
                    expanded.extend(_expand_braces(pattern[:start] + alt + pattern[i + 1:]))
                return expanded
    return [pattern]


def _split_alternatives(body: str) -> list[str]:
    parts, depth, current = [], 0, []
    for ch in body:
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    parts.append("".join(current))
    return parts


def _glob_segment_to_regex(segment: str) -> str:
    out = []
    i = 0
    while i < len(segment):
        ch = segment[i]
        if ch == "*":
            out.append("[^/]*")
            while i + 1 < len(segment) and segment[i + 1] == "*":
                i += 1  # a non-whole-segment "**" degrades to "*"
        elif ch == "?":
            out.append("[^/]")
        elif ch == "[":
            j = i + 1
            if j < len(segment) and segment[j] in "!^":
                j += 1
            if j < len(segment) and segment[j] == "]":
                j += 1
            while j < len(segment) and segment[j] != "]":
                j += 1
            if j >= len(segment):
                out.append(re.escape(ch))  # unterminated class: literal "["
            else:
                body = segment[i + 1:j].replace("\\", "\\\\")
                if body.startswith("!"):
                    body = "^" + body[1:]
                out.append(f"[{body}]")
                i = j
        else:
            out.append(re.escape(ch))
        i += 1
    return "".join(out)


def glob_to_regex(pattern: str) -> re.Pattern:
    """Translate one glob (without brace alternation) to an anchored regex."""
    parts = []
    segments = pattern.split("/")
    for idx, segment in enumerate(segments):
        last = idx == len(segments) - 1
        if segment == "**":
            parts.append(".*" if last else "(?:[^/]+/)*")
        else:
            parts.append(_glob_segment_to_regex(segment) + ("" if last else "/"))
    return re.compile("".join(parts) + r"\Z")


class ExtractorApi:
    """File operations rooted at one directory, plus format parsing."""

    def __init__(self, root: str):
        self.root = root

    def get_paths(self, glob: str) -> list[str]:
        """Relative paths of regular files matching the glob, sorted.

        ``**`` crosses directory boundaries, hidden files are included and
        symlinked directories are not followed. Results use "/" separators
        on every platform and never escape the root.
        """
        if not os.path.isdir(self.root):
            raise RootMissing(f"root directory missing: {self.root}")
        regexes = [glob_to_regex(p) for p in _expand_braces(glob)]
        matches = set()
        for dirpath, dirnames, filenames in os.walk(self.root, followlinks=False):
            dirnames.sort()
            rel_dir = os.path.relpath(dirpath, self.root)
            for name in filenames:
                rel = name if rel_dir == "." else f"{rel_dir}/{name}"
                rel = rel.replace(os.sep, "/")
                if any(rx.match(rel) for rx in regexes):
                    if os.path.isfile(os.path.join(dirpath, name)):
                        matches.add(rel)
        return sorted(matches)

    def _resolve(self, path: str) -> str:
        joined = os.path.normpath(os.path.join(self.root, path))
        root = os.path.normpath(os.path.abspath(self.root))
        absolute = os.path.abspath(joined)
        if absolute != root and not absolute.startswith(root + os.sep):
            raise PathEscapesRoot(f"path escapes root: {path!r}")
        return joined

    def read_text(self, path: str) -> str:
        """UTF-8 contents of a file under the root; bad bytes become U+FFFD."""
        resolved = self._resolve(path)
        if not os.path.isfile(resolved):
            raise FileMissing(f"no such file: {path!r}")
        with open(resolved, "rb") as fh:
            return fh.read().decode("utf-8", errors="replace")


def regex_search(text: str, pattern: str) -> list[RegexMatch]:
    """All non-overlapping matches, left to right, with named captures.

    Groups that did not participate in the match are absent from captures.
    """
    try:
        compiled = re.compile(pattern)
    except re.error as exc:
        raise BadPattern(f"bad pattern {pattern!r}: {exc}") from exc
    out = []
    for m in compiled.finditer(text):
        captures = {k: v for k, v in m.groupdict().items() if v is not None}
        out.append(RegexMatch(m.group(0), m.start(), m.end(), captures))
    return out


def parse(text: str, format: str) -> FieldValue:
    """Parse json/yaml/toml/xml text into a value tree.

    XML elements become objects keyed by tag name (namespaces dropped),
    attributes live under "@attr", trailing text under "#text", repeated
    sibling tags become arrays, and childless, attributeless elements
    collapse to their text.
    """
    if format == "json":
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid json: {exc.msg}", exc.lineno, exc.colno) from exc
    if format == "yaml":
        try:
            doc = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            line = mark.line + 1 if mark else None
            col = mark.column + 1 if mark else None
            raise ParseError(f"invalid yaml: {exc}", line, col) from exc
        return _to_field_value(doc)
    if format == "toml":
        try:
            doc = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ParseError(f"invalid toml: {exc}") from exc
        return _to_field_value(doc)
    if format == "xml":
        try:
            root = ElementTree.fromstring(text)
        except ElementTree.ParseError as exc:
            line, col = exc.position
            raise ParseError(f"invalid xml: {exc.msg if hasattr(exc, 'msg') else exc}", line, col + 1) from exc
        return {_local_tag(root.tag): _xml_value(root)}
    raise ParseError(f"unsupported format {format!r}")


def _local_tag(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _xml_value(element: ElementTree.Element) -> FieldValue:
    obj: dict = {}
    for key, value in element.attrib.items():
        obj["@" + _local_tag(key)] = value
    for child in element:
        tag = _local_tag(child.tag)
        value = _xml_value(child)
        if tag in obj:
            if not isinstance(obj[tag], list):
                obj[tag] = [obj[tag]]
            obj[tag].append(value)
        else:
            obj[tag] = value
    text = (element.text or "").strip()
    if not obj:
        return text
    if text:
        obj["#text"] = text
    return obj


def _to_field_value(value) -> FieldValue:
    """Normalize parser output (yaml/toml allow dates etc.) to a value tree."""
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if isinstance(value, (datetime, date, time)):
        return value.isoformat()
    if isinstance(value, bytes):
        return value.decode("utf-8", errors="replace")
    if isinstance(value, dict):
        return {str(k): _to_field_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set)):
        return [_to_field_value(v) for v in value]
    return str(value)
