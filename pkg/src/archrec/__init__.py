"""archrec: static architecture reconstruction for microservice codebases.

Extractors gated by input schemas enrich a shared model tree to a fixpoint;
per-repository models aggregate by recursive union with conflict detection;
retroactive links resolve against the combined model afterwards.
"""

from .aggregate import (
    Conflict,
    ConflictError,
    aggregatable,
    aggregate,
    aggregate_arrays,
    aggregate_collect,
    aggregate_objects,
)
from .builtins import BUILTIN_IDS, builtin_descriptor
from .declarative import BadDefinition, DeclarativeExtractorDef, load_def, make_behavior, run_declarative
from .extractor_api import ExtractorApi, PATTERNS, RegexMatch, parse, regex_search
from .linking import LinkResolution, MalformedLink, collect_links, resolve_links
from .model import (
    FieldValue,
    PathMalformed,
    PathNotFound,
    dumps_canonical,
    find_entities,
    get_path,
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
    Orchestrator,
    run,
)
from .schema import SchemaError, SchemaNode, conforms, load_schema

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_IDS",
    "BadDefinition",
    "Conflict",
    "ConflictError",
    "DeclarativeExtractorDef",
    "DivergenceError",
    "DuplicateId",
    "ExtractorApi",
    "ExtractorDescriptor",
    "ExtractorError",
    "ExtractorRegistry",
    "FieldValue",
    "LinkResolution",
    "MalformedLink",
    "OrchestrationLimits",
    "Orchestrator",
    "PATTERNS",
    "PathMalformed",
    "PathNotFound",
    "RegexMatch",
    "SchemaError",
    "SchemaNode",
    "aggregatable",
    "aggregate",
    "aggregate_arrays",
    "aggregate_collect",
    "aggregate_objects",
    "builtin_descriptor",
    "collect_links",
    "conforms",
    "dumps_canonical",
    "find_entities",
    "get_path",
    "load_def",
    "load_schema",
    "make_behavior",
    "parse",
    "read_model",
    "regex_search",
    "resolve_links",
    "run",
    "run_declarative",
    "strip_transient",
    "write_model",
]
