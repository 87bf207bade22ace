"""The reconstruction loop: schema-gated extractor dispatch to a fixpoint.

Rounds repeat until one completes without invoking anything. Each round
enumerates the model's entities and offers every entity to every registered
extractor, in registration order, whose input schema the entity conforms to
and which has not already run on that entity. Extractor output is aggregated
back into the model immediately, so an extractor can conform to (and run on)
fields another extractor produced earlier in the same round, and entities
created by a merge become dispatch targets in the next.

A run-once ledger keyed on entity uid (not tree position) guarantees each
(extractor, entity) pair executes at most once per run; limits on rounds and
entity count turn non-terminating extractor sets into a reported error
instead of a hang.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Iterator, Optional

from .aggregate import ConflictError, aggregate
from .extractor_api import ExtractorApi
from .model import (
    FieldValue,
    MODEL_TYPE,
    PATH_KEY,
    TYPE_KEY,
    UID_KEY,
    deep_copy,
    find_entities,
    get_path,
    set_path,
)
from .schema import SchemaNode, conforms

# behavior(entity_copy, api, config) -> modified entity
Behavior = Callable[[dict, Optional[ExtractorApi], dict], dict]


class DuplicateId(Exception):
    pass


class DivergenceError(Exception):
    pass


class ExtractorError(Exception):
    def __init__(self, extractor_id: str, cause: Exception):
        super().__init__(f"extractor {extractor_id!r} failed: {cause}")
        self.extractor_id = extractor_id
        self.cause = cause


@dataclass
class ExtractorDescriptor:
    """A registered extractor: id, input gate, runtime config and behavior."""

    id: str
    input_schema: SchemaNode
    behavior: Behavior
    config: dict = field(default_factory=dict)


@dataclass
class OrchestrationLimits:
    max_rounds: int = 1000
    max_entities: int = 100000

    def __post_init__(self):
        if self.max_rounds <= 0 or self.max_entities <= 0:
            raise ValueError("limits must be positive")


class ExtractorRegistry:
    """Ordered collection of extractors with unique ids."""

    def __init__(self, descriptors: Iterable[ExtractorDescriptor] = ()):
        self._descriptors: list[ExtractorDescriptor] = []
        self._ids: set[str] = set()
        for descriptor in descriptors:
            self.register_extractor(descriptor)

    def register_extractor(self, descriptor: ExtractorDescriptor) -> "ExtractorRegistry":
        if descriptor.id in self._ids:
            raise DuplicateId(f"extractor id already registered: {descriptor.id!r}")
        self._ids.add(descriptor.id)
        self._descriptors.append(descriptor)
        return self

    def __iter__(self) -> Iterator[ExtractorDescriptor]:
        return iter(self._descriptors)

    def __len__(self) -> int:
        return len(self._descriptors)

    def __contains__(self, extractor_id: str) -> bool:
        return extractor_id in self._ids


class Orchestrator:
    """Runs the reconstruction loop; exposes the ledger for inspection."""

    def __init__(self, registry, limits: OrchestrationLimits | None = None):
        self.registry = registry if isinstance(registry, ExtractorRegistry) else ExtractorRegistry(registry)
        self.limits = limits or OrchestrationLimits()
        self.ledger: set[tuple[str, int]] = set()
        self.rounds = 0
        self.invocations: list[tuple[str, int]] = []
        self._uids = itertools.count(1)

    def run(self, initial: dict, workspace: str | None = None) -> dict:
        """Reconstruct starting from the given top-level model entity.

        The initial entity must be tagged ``$TYPE: "$MODEL"``; its transient
        ``$path`` names the repository directory (``workspace`` overrides it
        when given). Returns the final model with transients still present.
        """
        if not isinstance(initial, dict) or initial.get(TYPE_KEY) != MODEL_TYPE:
            raise ValueError(f"initial entity must have {TYPE_KEY} = {MODEL_TYPE!r}")
        model = deep_copy(initial)
        if workspace is not None:
            model[PATH_KEY] = str(workspace)
        self._assign_uids(model)

        while True:
            self.rounds += 1
            if self.rounds > self.limits.max_rounds:
                raise DivergenceError(
                    f"no fixpoint after {self.limits.max_rounds} rounds")
            invoked = False
            for path, _ in find_entities(model):
                for descriptor in self.registry:
                    entity = get_path(model, path)
                    key = (descriptor.id, entity[UID_KEY])
                    if key in self.ledger:
                        continue
                    if not conforms(entity, descriptor.input_schema):
                        continue
                    self.ledger.add(key)
                    self.invocations.append(key)
                    invoked = True
                    model = self._dispatch(model, path, entity, descriptor)
            if not invoked:
                break
        return model

    def _dispatch(self, model: dict, path: str, entity: dict, descriptor: ExtractorDescriptor) -> dict:
        entity_path = entity.get(PATH_KEY)
        api = ExtractorApi(entity_path) if isinstance(entity_path, str) else None
        try:
            output = descriptor.behavior(deep_copy(entity), api, descriptor.config)
        except ConflictError as exc:
            # a conflict inside the behavior means its output contradicts the
            # entity it was given; report it as model-vs-extractor
            raise ConflictError(replace(
                exc.conflict, left_source="model", right_source=descriptor.id)) from exc
        except Exception as exc:
            raise ExtractorError(descriptor.id, exc) from exc
        if not isinstance(output, dict):
            raise ExtractorError(
                descriptor.id, TypeError(f"behavior returned {type(output).__name__}, expected object"))
        merged = aggregate(get_path(model, path), output, prov_a="model", prov_b=descriptor.id)
        model = set_path(model, path, merged)
        self._assign_uids(model)
        count = len(find_entities(model))
        if count > self.limits.max_entities:
            raise DivergenceError(
                f"entity count {count} exceeds limit {self.limits.max_entities}")
        return model

    def _assign_uids(self, model: FieldValue) -> None:
        for _, entity in find_entities(model):
            if UID_KEY not in entity:
                entity[UID_KEY] = next(self._uids)


def run(
    initial: dict,
    registry,
    limits: OrchestrationLimits | None = None,
    workspace: str | None = None,
) -> dict:
    """One-shot reconstruction; see Orchestrator.run."""
    return Orchestrator(registry, limits).run(initial, workspace)
