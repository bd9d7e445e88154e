"""Concrete task output structures and their JSON parsing.

These mirror the classic shapes: span mentions, binary relations,
dependency edges, events with arguments, coreference entities, role
filler entities, n-ary relations, and templates with slot fillers.
Collections are kept in document order (deduplicated) so downstream
witness matchings are deterministic across runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .errors import DataError

MentionKey = Any  # span tuple or scalar identifier


@dataclass(frozen=True)
class Mention:
    left: int
    right: int

    def __post_init__(self):
        if self.left > self.right:
            raise DataError(f"mention has left {self.left} > right {self.right}")


@dataclass(frozen=True)
class IndexMention:
    """Mention as a bag of token indices (SciREX-style)."""

    indices: frozenset[int]

    def __post_init__(self):
        if not self.indices:
            raise DataError("index mention must be nonempty")


@dataclass(frozen=True)
class Relation:
    type: str
    subj: Mention
    obj: Mention


@dataclass(frozen=True)
class Dependency:
    gov: int
    dep: int
    rel: str


@dataclass(frozen=True)
class Trigger:
    mention: Mention
    type: str


@dataclass(frozen=True)
class Argument:
    mention: Mention
    role: str


@dataclass(frozen=True)
class Event:
    trig: Trigger
    args: tuple[Argument, ...]


@dataclass(frozen=True)
class Entity:
    """A set of coreferent mentions; stored sorted for determinism."""

    mentions: frozenset[MentionKey]

    def __post_init__(self):
        if not self.mentions:
            raise DataError("entity must contain at least one mention")

    def sorted_mentions(self) -> list[MentionKey]:
        return sorted(self.mentions, key=repr)


@dataclass(frozen=True)
class RoleFillerEntity:
    role: str
    entity: Entity


@dataclass(frozen=True)
class NAryRelation:
    type: str
    args: tuple[RoleFillerEntity, ...]


@dataclass(frozen=True)
class SlotFiller:
    slot: str
    value: Any  # scalar label, string, or tuple of entity strings


@dataclass(frozen=True)
class Template:
    type: str
    fillers: tuple[SlotFiller, ...]


@dataclass(frozen=True)
class TypePath:
    """Hierarchical type as a most-general-first tuple of labels."""

    levels: tuple[str, ...]

    def __post_init__(self):
        if not self.levels:
            raise DataError("type path must have at least one level")

    @property
    def depth(self) -> int:
        return len(self.levels)


class Ontology:
    """Forest of subtype edges: each label has at most one parent."""

    def __init__(self, edges: Sequence[tuple[str, str]], known: Sequence[str] = ()):
        parents: dict[str, str] = {}
        labels = set(known)
        for child, parent in edges:
            if child in parents and parents[child] != parent:
                raise DataError(f"label {child!r} has two parents")
            parents[child] = parent
            labels.add(child)
            labels.add(parent)
        self.parents = parents
        self.labels = frozenset(labels)
        for label in parents:
            seen = {label}
            cur = label
            while cur in parents:
                cur = parents[cur]
                if cur in seen:
                    raise DataError(f"ontology has a cycle through {cur!r}")
                seen.add(cur)

    def _walk_up(self, label: str):
        yield label
        cur = label
        while cur in self.parents:
            cur = self.parents[cur]
            yield cur

    def supertypes(self, label: str) -> frozenset[str]:
        """All ancestors of a label, including itself."""
        if label not in self.labels:
            raise DataError(f"unknown label {label!r}")
        return frozenset(self._walk_up(label))

    def is_strict_subtype(self, a: str, b: str) -> bool:
        if a not in self.labels or b not in self.labels:
            return False
        return a != b and b in self.supertypes(a)


@dataclass(frozen=True)
class DatasetConfig:
    """Per-dataset label sets, ontology, premodifiers, and slot kinds."""

    labels: Mapping[str, frozenset[str]] = field(default_factory=dict)
    ontology: Ontology = field(default_factory=lambda: Ontology(()))
    premodifiers: frozenset[str] = frozenset()
    slots: Mapping[str, str] = field(default_factory=dict)

    @classmethod
    def from_json(cls, doc: Mapping) -> "DatasetConfig":
        labels = {
            group: frozenset(map(str, values))
            for group, values in doc.get("labels", {}).items()
        }
        edges = [(str(c), str(p)) for c, p in doc.get("ontology", {}).get("edges", [])]
        known = [v for values in labels.values() for v in values]
        slots = {str(k): str(v) for k, v in doc.get("slots", {}).items()}
        for slot, kind in slots.items():
            if kind not in ("set", "string"):
                raise DataError(f"slot {slot!r} has unknown kind {kind!r}")
        return cls(
            labels=labels,
            ontology=Ontology(edges, known),
            premodifiers=frozenset(str(w).upper() for w in doc.get("premodifiers", [])),
            slots=slots,
        )

    def check_label(self, group: str, value: str, path: str):
        allowed = self.labels.get(group)
        if allowed is not None and value not in allowed:
            raise DataError(f"label {value!r} not in declared {group} set", path)


def _dedupe(items: Sequence) -> tuple:
    return tuple(dict.fromkeys(items))


def parse_mention(doc, path: str) -> Mention:
    try:
        if isinstance(doc, Mapping) and "left" in doc and "right" in doc:
            return Mention(int(doc["left"]), int(doc["right"]))
        if isinstance(doc, Sequence) and not isinstance(doc, str) and len(doc) == 2:
            return Mention(int(doc[0]), int(doc[1]))
    except (TypeError, ValueError):
        pass
    raise DataError("mention must be {'left': ..., 'right': ...} or [left, right]", path)


def mention_key(doc, path: str) -> MentionKey:
    """Coreference mentions may be spans or opaque scalar identifiers."""
    if isinstance(doc, (str, int, float, bool)):
        return doc
    m = parse_mention(doc, path)
    return (m.left, m.right)


def parse_relation_set(payload, path: str = "$", config: DatasetConfig | None = None) -> tuple[Relation, ...]:
    rels = payload.get("relations") if isinstance(payload, Mapping) else payload
    if not isinstance(rels, Sequence):
        raise DataError("expected {'relations': [...]}", path)
    out = []
    for i, r in enumerate(rels):
        p = f"{path}.relations[{i}]"
        if not isinstance(r, Mapping):
            raise DataError("relation must be an object", p)
        try:
            rel = Relation(
                str(r["type"]),
                parse_mention(r["subj"], f"{p}.subj"),
                parse_mention(r["obj"], f"{p}.obj"),
            )
        except KeyError as exc:
            raise DataError(f"relation missing field {exc.args[0]!r}", p) from None
        except (TypeError, ValueError) as exc:
            raise DataError(f"bad relation: {exc}", p) from None
        if config:
            config.check_label("relation_types", rel.type, p)
        out.append(rel)
    return _dedupe(out)


def parse_dependency_parse(payload, path: str = "$", config: DatasetConfig | None = None) -> tuple[Dependency, ...]:
    edges = payload.get("edges") if isinstance(payload, Mapping) else payload
    if not isinstance(edges, Sequence):
        raise DataError("expected {'edges': [...]}", path)
    out = []
    for i, e in enumerate(edges):
        p = f"{path}.edges[{i}]"
        try:
            out.append(Dependency(int(e["gov"]), int(e["dep"]), str(e.get("rel", ""))))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise DataError(f"bad dependency edge: {exc}", p) from None
    return _dedupe(out)


def parse_event_set(payload, path: str = "$", config: DatasetConfig | None = None) -> tuple[Event, ...]:
    events = payload.get("events") if isinstance(payload, Mapping) else payload
    if not isinstance(events, Sequence):
        raise DataError("expected {'events': [...]}", path)
    out = []
    for i, e in enumerate(events):
        p = f"{path}.events[{i}]"
        try:
            trig = Trigger(parse_mention(e["trigger"]["mention"], f"{p}.trigger.mention"),
                           str(e["trigger"]["type"]))
            args = tuple(
                Argument(parse_mention(a["mention"], f"{p}.args[{k}].mention"), str(a["role"]))
                for k, a in enumerate(e.get("args", []))
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"bad event: {exc}", p) from None
        if config:
            config.check_label("event_types", trig.type, p)
            for arg in args:
                config.check_label("role_types", arg.role, p)
        out.append(Event(trig, _dedupe(args)))
    return _dedupe(out)


def parse_entity(doc, path: str) -> Entity:
    mentions = doc.get("mentions") if isinstance(doc, Mapping) else doc
    if not isinstance(mentions, Sequence) or isinstance(mentions, str):
        raise DataError("entity must be a list of mentions", path)
    return Entity(frozenset(mention_key(m, f"{path}[{k}]") for k, m in enumerate(mentions)))


def parse_entity_set(payload, path: str = "$", config: DatasetConfig | None = None) -> tuple[Entity, ...]:
    ents = payload.get("entities") if isinstance(payload, Mapping) else payload
    if not isinstance(ents, Sequence):
        raise DataError("expected {'entities': [...]}", path)
    return _dedupe(parse_entity(e, f"{path}.entities[{i}]") for i, e in enumerate(ents))


def _parse_index_mention(doc, path: str) -> IndexMention:
    if isinstance(doc, Sequence) and not isinstance(doc, str):
        try:
            return IndexMention(frozenset(int(i) for i in doc))
        except (TypeError, ValueError):
            pass
    raise DataError("index mention must be a list of token indices", path)


def parse_index_entity(doc, path: str) -> tuple[IndexMention, ...]:
    mentions = doc.get("mentions") if isinstance(doc, Mapping) else doc
    if not isinstance(mentions, Sequence):
        raise DataError("entity must be a list of index mentions", path)
    return _dedupe(_parse_index_mention(m, f"{path}[{k}]") for k, m in enumerate(mentions))


def parse_nary_relation(doc, path: str = "$", index_mentions: bool = False,
                        config: DatasetConfig | None = None) -> NAryRelation:
    if not isinstance(doc, Mapping):
        raise DataError("relation must be an object", path)
    args = []
    for k, a in enumerate(doc.get("args", [])):
        p = f"{path}.args[{k}]"
        try:
            if index_mentions:
                entity = Entity(frozenset(parse_index_entity(a["entity"], f"{p}.entity")))
            else:
                entity = parse_entity(a["entity"], f"{p}.entity")
            args.append(RoleFillerEntity(str(a["role"]), entity))
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"bad role filler: {exc}", p) from None
    return NAryRelation(str(doc.get("type", "")), _dedupe(args))


def parse_nary_relation_set(payload, path: str = "$", index_mentions: bool = True,
                            config: DatasetConfig | None = None) -> tuple[NAryRelation, ...]:
    rels = payload.get("relations") if isinstance(payload, Mapping) else payload
    if not isinstance(rels, Sequence):
        raise DataError("expected {'relations': [...]}", path)
    return _dedupe(
        parse_nary_relation(r, f"{path}.relations[{i}]", index_mentions, config)
        for i, r in enumerate(rels)
    )


def _parse_filler_value(doc, path: str):
    if isinstance(doc, (str, int, float, bool)):
        return doc
    if isinstance(doc, Sequence):
        return tuple(str(s) for s in doc)
    raise DataError("slot filler value must be a scalar or a list of strings", path)


def parse_template_set(payload, path: str = "$", config: DatasetConfig | None = None) -> tuple[Template, ...]:
    templates = payload.get("templates") if isinstance(payload, Mapping) else payload
    if not isinstance(templates, Sequence):
        raise DataError("expected {'templates': [...]}", path)
    out = []
    for i, t in enumerate(templates):
        p = f"{path}.templates[{i}]"
        if not isinstance(t, Mapping) or "type" not in t:
            raise DataError("template needs a type", p)
        try:
            fillers = tuple(
                SlotFiller(str(f["slot"]), _parse_filler_value(f["value"], f"{p}.fillers[{k}].value"))
                for k, f in enumerate(t.get("fillers", []))
            )
        except (KeyError, TypeError) as exc:
            raise DataError(f"bad slot filler: {exc}", p) from None
        if config:
            config.check_label("template_types", str(t["type"]), p)
            for f in fillers:
                config.check_label("slot_types", f.slot, p)
        out.append(Template(str(t["type"]), _dedupe(fillers)))
    return _dedupe(out)
