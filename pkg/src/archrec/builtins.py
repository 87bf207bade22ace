"""Shipped extractors for common microservice technologies.

Each built-in is a native ExtractorDescriptor whose behavior reads files under
the target entity's ``$path`` and aggregates a patch back into the entity, so
repeated runs and overlapping sources deduplicate instead of duplicating.
Selective output (the ports/environment/depends_on facets of the compose
extractor) is controlled through config rather than variant copies of the
extractor.
"""

from __future__ import annotations

import os

from .aggregate import aggregate
from .extractor_api import ExtractorApi, parse, regex_search
from .model import LINK_TYPE, PATH_KEY, ROOT_KEY, TARGET_KEY, TYPE_KEY
from .orchestrate import ExtractorDescriptor
from .schema import load_schema

_MODEL_GATE = {
    "type": "object",
    "properties": {TYPE_KEY: {"const": "$MODEL"}, PATH_KEY: {"type": "string"}},
    "required": [TYPE_KEY, PATH_KEY],
}

_SERVICE_GATE = {
    "type": "object",
    "properties": {TYPE_KEY: {"const": "microservice"}, PATH_KEY: {"type": "string"}},
    "required": [TYPE_KEY, PATH_KEY],
}

# Conformance cannot express "array contains X" in the supported schema
# subset, so extractors needing a specific language gate on the presence of
# the languages field and test membership themselves.
_LANGUAGES_GATE = {
    "type": "object",
    "properties": {
        TYPE_KEY: {"const": "microservice"},
        PATH_KEY: {"type": "string"},
        "languages": {"type": "array", "items": {"type": "string"}},
    },
    "required": [TYPE_KEY, PATH_KEY, "languages"],
}

COMPOSE_FILENAMES = [
    "compose.yaml",
    "compose.yml",
    "docker-compose.yaml",
    "docker-compose.yml",
]

LANGUAGE_EXTENSIONS = {
    ".java": "Java",
    ".py": "Python",
    ".js": "JavaScript",
    ".ts": "TypeScript",
    ".go": "Go",
    ".rb": "Ruby",
    ".cs": "C#",
    ".rs": "Rust",
    ".php": "PHP",
    ".kt": "Kotlin",
}


def _service_link(target_schema_properties: dict, required: list, kind: str) -> dict:
    return {
        TYPE_KEY: LINK_TYPE,
        ROOT_KEY: "/microservices",
        TARGET_KEY: {
            "type": "object",
            "properties": target_schema_properties,
            "required": required,
        },
        "kind": kind,
    }


def _dependency_link(service_name: str) -> dict:
    return _service_link(
        {TYPE_KEY: {"const": "microservice"}, "name": {"const": service_name}},
        [TYPE_KEY, "name"],
        kind="dependency",
    )


def docker_compose_services(entity: dict, api: ExtractorApi, config: dict) -> dict:
    """Create microservice entities from compose files at the model root.

    `filenames` are globs tried in order; `include` facets extend the base
    name/build-path/image output with ports, environment and depends_on
    links. A build context only becomes the service's transient $path when
    the directory actually exists in this repository (deployment-only repos
    reference service directories that live elsewhere).
    """
    filenames = config.get("filenames", COMPOSE_FILENAMES)
    include = config.get("include", ["services"])
    services: list[dict] = []
    for pattern in filenames:
        for rel in api.get_paths(pattern):
            doc = parse(api.read_text(rel), "yaml")
            if not isinstance(doc, dict) or not isinstance(doc.get("services"), dict):
                continue
            compose_dir = os.path.dirname(rel)
            for name, svc in doc["services"].items():
                if not isinstance(svc, dict):
                    svc = {}
                services.append(_service_entity(api.root, compose_dir, name, svc, include))
    if services:
        entity = aggregate(entity, {"microservices": services}, "entity", "docker-compose-services")
    return entity


def _service_entity(root: str, compose_dir: str, name: str, svc: dict, include: list) -> dict:
    out = {TYPE_KEY: "microservice", "name": str(name)}
    build = svc.get("build")
    context = build.get("context") if isinstance(build, dict) else build
    if isinstance(context, str):
        build_dir = os.path.normpath(os.path.join(root, compose_dir, context))
        if os.path.isdir(build_dir):
            out[PATH_KEY] = build_dir
    if isinstance(svc.get("image"), str):
        out["image"] = svc["image"]
    if "ports" in include and "ports" in svc:
        out["ports"] = svc["ports"]
    if "environment" in include and "environment" in svc:
        out["environment"] = svc["environment"]
    if "depends_on" in include:
        deps = svc.get("depends_on")
        names = list(deps) if isinstance(deps, (list, dict)) else []
        links = [_dependency_link(str(dep)) for dep in names]
        if links:
            out["dependencies"] = links
    return out


def language_detect(entity: dict, api: ExtractorApi, config: dict) -> dict:
    """Detect languages from file extensions; writes a sorted `languages` array."""
    extensions = config.get("extensions", LANGUAGE_EXTENSIONS)
    found = set()
    for rel in api.get_paths("**/*"):
        ext = os.path.splitext(rel)[1]
        if ext in extensions:
            found.add(extensions[ext])
    return aggregate(entity, {"languages": sorted(found)}, "entity", "language-detect")


def maven_detect(entity: dict, api: ExtractorApi, config: dict) -> dict:
    """pom.xml at the service root marks maven and lists dependency coordinates."""
    if not api.get_paths("pom.xml"):
        return entity
    patch: dict = {"buildTool": "maven"}
    doc = parse(api.read_text("pom.xml"), "xml")
    project = doc.get("project")
    section = project.get("dependencies") if isinstance(project, dict) else None
    entries = section.get("dependency") if isinstance(section, dict) else None
    if isinstance(entries, dict):
        entries = [entries]
    coords = []
    for dep in entries or []:
        if not isinstance(dep, dict):
            continue
        group, artifact = dep.get("groupId"), dep.get("artifactId")
        if isinstance(group, str) and isinstance(artifact, str):
            version = dep.get("version")
            coord = f"{group}:{artifact}"
            if isinstance(version, str):
                coord += f":{version}"
            coords.append(coord)
    if coords:
        patch["dependencies"] = coords
    return aggregate(entity, patch, "entity", "maven-detect")


def nodejs_detect(entity: dict, api: ExtractorApi, config: dict) -> dict:
    """package.json at the service root marks npm and lists dependency names."""
    if not api.get_paths("package.json"):
        return entity
    patch: dict = {"buildTool": "npm"}
    doc = parse(api.read_text("package.json"), "json")
    deps = doc.get("dependencies") if isinstance(doc, dict) else None
    if isinstance(deps, dict) and deps:
        patch["dependencies"] = sorted(str(k) for k in deps)
    return aggregate(entity, patch, "entity", "nodejs-detect")


_MAPPING_PATTERN = (
    r'@(?P<kind>Request|Get|Post|Put|Delete)Mapping\s*\(\s*'
    r'(?:(?:value|path)\s*=\s*)?"(?P<path>[^"]*)"'
)

_MAPPING_METHODS = {
    "Request": "ANY",
    "Get": "GET",
    "Post": "POST",
    "Put": "PUT",
    "Delete": "DELETE",
}


def spring_endpoints(entity: dict, api: ExtractorApi, config: dict) -> dict:
    """Collect HTTP endpoints from Spring mapping annotations in Java sources."""
    if "Java" not in entity.get("languages", []):
        return entity
    endpoints = []
    for rel in api.get_paths("**/*.java"):
        for match in regex_search(api.read_text(rel), _MAPPING_PATTERN):
            endpoints.append({
                "method": _MAPPING_METHODS[match.captures["kind"]],
                "path": match.captures["path"],
            })
    if endpoints:
        entity = aggregate(entity, {"endpoints": endpoints}, "entity", "spring-endpoints")
    return entity


def spring_eureka(entity: dict, api: ExtractorApi, config: dict) -> dict:
    """Mark Eureka servers and link discovery clients to them retroactively.

    Clients cannot know which service is the registry, so they depend on a
    link whose target schema simply demands a microservice with
    eurekaServer set; resolution happens after all models are aggregated.
    """
    if "Java" not in entity.get("languages", []):
        return entity
    server = client = False
    for rel in api.get_paths("**/*.java"):
        text = api.read_text(rel)
        server = server or "@EnableEurekaServer" in text
        client = client or "@EnableDiscoveryClient" in text or "@EnableEurekaClient" in text
    patch: dict = {}
    if server:
        patch["eurekaServer"] = True
    if client:
        patch["dependencies"] = [_service_link(
            {TYPE_KEY: {"const": "microservice"}, "eurekaServer": {"const": True}},
            [TYPE_KEY, "eurekaServer"],
            kind="discovery",
        )]
    if patch:
        entity = aggregate(entity, patch, "entity", "spring-eureka")
    return entity


_BUILTINS = {
    "docker-compose-services": (_MODEL_GATE, docker_compose_services,
                                {"filenames": COMPOSE_FILENAMES, "include": ["services"]}),
    "language-detect": (_SERVICE_GATE, language_detect, {"extensions": LANGUAGE_EXTENSIONS}),
    "maven-detect": (_SERVICE_GATE, maven_detect, {}),
    "nodejs-detect": (_SERVICE_GATE, nodejs_detect, {}),
    "spring-endpoints": (_LANGUAGES_GATE, spring_endpoints, {}),
    "spring-eureka": (_LANGUAGES_GATE, spring_eureka, {}),
}

BUILTIN_IDS = list(_BUILTINS)


def builtin_descriptor(name: str, config_override: dict | None = None) -> ExtractorDescriptor:
    """Fresh descriptor for one built-in, with config overrides applied."""
    if name not in _BUILTINS:
        raise KeyError(f"unknown built-in extractor {name!r}")
    gate, behavior, defaults = _BUILTINS[name]
    config = {**defaults, **(config_override or {})}
    return ExtractorDescriptor(name, load_schema(gate), behavior, config)
