"""Command-line surface for CI use.

Subcommands: ``reconstruct`` one repository into a model file, ``aggregate``
model files into one, ``resolve`` retroactive links, and ``pipeline`` for the
whole multi-repository flow. Models are always written to files (canonical
JSON: sorted keys, trailing newline); standard output stays empty and human
diagnostics go to standard error, so CI redirection is unambiguous.

Exit codes: 0 success, 2 aggregation conflict, 3 unresolved or ambiguous
link under --strict, 4 configuration or definition error, 5 divergence
(orchestration limits exceeded).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import yaml

from .aggregate import ConflictError, aggregate, aggregate_collect
from .builtins import BUILTIN_IDS, builtin_descriptor
from .declarative import BadDefinition, load_def, make_behavior
from .linking import MalformedLink, RESOLVED, resolve_links
from .model import (
    MODEL_TYPE,
    PATH_KEY,
    TYPE_KEY,
    dumps_canonical,
    read_model,
    strip_transient,
    write_model,
)
from .orchestrate import (
    DivergenceError,
    DuplicateId,
    ExtractorDescriptor,
    ExtractorError,
    ExtractorRegistry,
    OrchestrationLimits,
    run,
)
from .schema import SchemaError

EXIT_OK = 0
EXIT_CONFLICT = 2
EXIT_UNRESOLVED = 3
EXIT_CONFIG = 4
EXIT_DIVERGENCE = 5

DEF_SUFFIXES = (".extractor.json", ".extractor.yaml")


class ConfigError(Exception):
    pass


def _err(message: str) -> None:
    print(message, file=sys.stderr)


def _load_doc_file(path: str):
    if not os.path.isfile(path):
        raise ConfigError(f"file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        if path.endswith(".json"):
            return json.loads(text)
        return yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc


def _read_model_file(path: str):
    if not os.path.isfile(path):
        raise ConfigError(f"model file not found: {path}")
    try:
        return read_model(path)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"cannot parse model file {path}: {exc}") from exc


def _load_overrides(path: str | None) -> dict:
    if path is None:
        return {}
    doc = _load_doc_file(path)
    if doc is None:
        return {}
    if not isinstance(doc, dict) or not all(isinstance(v, dict) for v in doc.values()):
        raise ConfigError(f"config file {path} must map extractor ids to option objects")
    return doc


def _build_registry(args, overrides: dict) -> ExtractorRegistry:
    registry = ExtractorRegistry()
    for name in _builtin_names(args):
        registry.register_extractor(builtin_descriptor(name, overrides.get(name)))
    for directory in args.extractors or []:
        if not os.path.isdir(directory):
            raise ConfigError(f"extractor directory not found: {directory}")
        for filename in sorted(os.listdir(directory)):
            if not filename.endswith(DEF_SUFFIXES):
                continue
            defn = load_def(_load_doc_file(os.path.join(directory, filename)))
            config = {**defn.config_defaults, **overrides.get(defn.id, {})}
            registry.register_extractor(
                ExtractorDescriptor(defn.id, defn.match, make_behavior(defn), config))
    known = {descriptor.id for descriptor in registry}
    unknown = set(overrides) - known
    if unknown:
        raise ConfigError(f"config overrides for unknown extractors: {sorted(unknown)}")
    return registry


def _builtin_names(args) -> list[str]:
    names: list[str] = []
    for chunk in args.builtins or []:
        names.extend(n.strip() for n in chunk.split(",") if n.strip())
    if names == ["all"]:
        return list(BUILTIN_IDS)
    for name in names:
        if name not in BUILTIN_IDS:
            raise ConfigError(f"unknown built-in extractor {name!r} "
                              f"(available: {', '.join(BUILTIN_IDS)})")
    return names


def _limits(args) -> OrchestrationLimits:
    return OrchestrationLimits(max_rounds=args.max_rounds, max_entities=args.max_entities)


def _initial_model(repo: str, init_path: str | None) -> dict:
    if not os.path.isdir(repo):
        raise ConfigError(f"repository directory not found: {repo}")
    initial = {TYPE_KEY: MODEL_TYPE, PATH_KEY: os.path.abspath(repo)}
    if init_path is not None:
        fields = _load_doc_file(init_path)
        if not isinstance(fields, dict):
            raise ConfigError(f"init file {init_path} must contain an object")
        initial = aggregate(initial, fields, "initial", init_path)
    return initial


def cmd_reconstruct(args) -> int:
    overrides = _load_overrides(args.config)
    registry = _build_registry(args, overrides)
    initial = _initial_model(args.repo, args.init)
    model = run(initial, registry, _limits(args))
    write_model(args.out, model, keep_transient=args.keep_transient)
    _err(f"wrote {args.out}")
    return EXIT_OK


def cmd_aggregate(args) -> int:
    merged = _read_model_file(args.files[0])
    provenance = args.files[0]
    conflicts = []
    for path in args.files[1:]:
        tree = _read_model_file(path)
        if args.on_conflict == "collect":
            merged, found = aggregate_collect(merged, tree, provenance, path)
            conflicts.extend(found)
        else:
            merged = aggregate(merged, tree, provenance, path)
        provenance = f"{provenance}+{path}"
    if conflicts:
        for conflict in conflicts:
            _err(conflict.render())
        _err(f"{len(conflicts)} conflicts; nothing written")
        return EXIT_CONFLICT
    write_model(args.out, merged)
    _err(f"wrote {args.out}")
    return EXIT_OK


def _resolve_and_report(model, report_path: str | None) -> tuple[dict, bool]:
    resolved, report = resolve_links(model)
    for entry in report:
        _err(entry.render())
    if report_path is not None:
        with open(report_path, "w", encoding="utf-8") as fh:
            fh.write(dumps_canonical([entry.to_doc() for entry in report]))
    return resolved, all(entry.outcome == RESOLVED for entry in report)


def cmd_resolve(args) -> int:
    model = _read_model_file(args.file)
    resolved, all_ok = _resolve_and_report(model, args.report)
    if args.strict and not all_ok:
        _err("strict mode: not all links resolved; nothing written")
        return EXIT_UNRESOLVED
    write_model(args.out, resolved)
    _err(f"wrote {args.out}")
    return EXIT_OK


def cmd_pipeline(args) -> int:
    overrides = _load_overrides(args.config)
    registry = _build_registry(args, overrides)
    intermediates = []
    for repo in args.repos:
        initial = _initial_model(repo, None)
        model = run(initial, registry, _limits(args))
        intermediates.append((repo, strip_transient(model)))
    merged, provenance = intermediates[0][1], intermediates[0][0]
    for repo, tree in intermediates[1:]:
        merged = aggregate(merged, tree, provenance, repo)
        provenance = f"{provenance}+{repo}"
    resolved, all_ok = _resolve_and_report(merged, None)
    if args.strict and not all_ok:
        _err("strict mode: not all links resolved; nothing written")
        return EXIT_UNRESOLVED
    write_model(args.out, resolved)
    _err(f"wrote {args.out}")
    return EXIT_OK


def _add_extractor_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--extractors", action="append", metavar="DIR",
                        help="directory of *.extractor.json / *.extractor.yaml definitions "
                             "(repeatable; loaded in sorted filename order)")
    parser.add_argument("--builtins", action="append", metavar="NAMES",
                        help="comma-separated built-in extractors to enable, or 'all'")
    parser.add_argument("--config", metavar="FILE",
                        help="per-extractor config overrides, keyed by extractor id")
    parser.add_argument("--max-rounds", type=int, default=1000)
    parser.add_argument("--max-entities", type=int, default=100000)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="archrec",
        description="Static architecture reconstruction for microservice codebases.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_rec = sub.add_parser("reconstruct", help="reconstruct one repository into a model file")
    p_rec.add_argument("--repo", required=True)
    _add_extractor_options(p_rec)
    p_rec.add_argument("--init", metavar="FILE", help="initial model fields (JSON/YAML object)")
    p_rec.add_argument("--out", required=True)
    p_rec.add_argument("--keep-transient", action="store_true",
                       help="keep $-transient fields in the output")
    p_rec.set_defaults(func=cmd_reconstruct)

    p_agg = sub.add_parser("aggregate", help="merge model files into one")
    p_agg.add_argument("files", nargs="+", metavar="FILE")
    p_agg.add_argument("--out", required=True)
    p_agg.add_argument("--on-conflict", choices=("fail", "collect"), default="fail")
    p_agg.set_defaults(func=cmd_aggregate)

    p_res = sub.add_parser("resolve", help="resolve retroactive links in a model file")
    p_res.add_argument("file", metavar="FILE")
    p_res.add_argument("--out", required=True)
    p_res.add_argument("--strict", action="store_true",
                       help="fail (exit 3) unless every link resolves")
    p_res.add_argument("--report", metavar="FILE", help="write a JSON resolution report")
    p_res.set_defaults(func=cmd_resolve)

    p_pipe = sub.add_parser("pipeline",
                            help="reconstruct multiple repositories, aggregate, resolve")
    p_pipe.add_argument("--repo", dest="repos", action="append", required=True, metavar="P")
    _add_extractor_options(p_pipe)
    p_pipe.add_argument("--out", required=True)
    p_pipe.add_argument("--strict", action="store_true")
    p_pipe.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConflictError as exc:
        _err(exc.conflict.render())
        return EXIT_CONFLICT
    except (ConfigError, BadDefinition, SchemaError, DuplicateId, MalformedLink) as exc:
        _err(f"error: {exc}")
        return EXIT_CONFIG
    except DivergenceError as exc:
        _err(f"error: {exc}")
        return EXIT_DIVERGENCE
    except ExtractorError as exc:
        _err(f"error: {exc}")
        return 1
    except OSError as exc:
        _err(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
