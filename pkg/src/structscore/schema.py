"""Declarative output-type schemas compiled into metric evaluators.

A schema describes the shape of a task's output (records, sets,
sequences, graphs, latent variables) and optionally attaches similarity
combinators to each type. Compilation walks the types bottom-up and
assembles an evaluator from the matching core, so a new metric is
derived from the structure description rather than written by hand.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from . import zoo
from .errors import ConfigurationError, DataError, SchemaError
from .latent import VarId, build_ilp, solve_ilp
from .bnb import DEFAULT_NODE_LIMIT
from .matching import MatchConstraint, WeightMatrix, match_score
from .ordered import OrderedCollection, graph_match_score, seq_match_score
from .records import Ontology, TypePath, parse_entity_set
from .report import MetricResult
from .similarity import Normalizer, OverlapTriple, normalize

RESERVED_PRIMITIVES = ("int", "str", "float", "bool")


# ---------------------------------------------------------------------------
# similarity AST

@dataclass(frozen=True)
class DiscreteSpec:
    pass


@dataclass(frozen=True)
class ProductSpec:
    fields: tuple[tuple[str, "SimSpec | None"], ...]


@dataclass(frozen=True)
class SetMatchSpec:
    constraint: MatchConstraint = MatchConstraint.ONE_TO_ONE
    inner: "SimSpec | None" = None
    normalizer: Normalizer | None = None


@dataclass(frozen=True)
class LatentSetMatchSpec:
    constraint: MatchConstraint = MatchConstraint.ONE_TO_ONE
    inner: "SimSpec | None" = None
    var_fields: tuple[str, ...] = ()


@dataclass(frozen=True)
class SeqMatchSpec:
    inner: "SimSpec | None" = None


@dataclass(frozen=True)
class GraphMatchSpec:
    constraint: MatchConstraint = MatchConstraint.ONE_TO_ONE
    inner: "SimSpec | None" = None


@dataclass(frozen=True)
class ThresholdSpec:
    inner: "SimSpec | None"
    cutoff: float
    strict: bool = True


@dataclass(frozen=True)
class TableSpec:
    pairs: tuple[tuple[Any, Any, float], ...]
    default: float = 0.0


@dataclass(frozen=True)
class HierarchyLevelSpec:
    depth: int


@dataclass(frozen=True)
class HierarchySupertypesSpec:
    edges: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class NamedSpec:
    id: str


SimSpec = (
    DiscreteSpec
    | ProductSpec
    | SetMatchSpec
    | LatentSetMatchSpec
    | SeqMatchSpec
    | GraphMatchSpec
    | ThresholdSpec
    | TableSpec
    | HierarchyLevelSpec
    | HierarchySupertypesSpec
    | NamedSpec
)


@dataclass(frozen=True)
class FieldDecl:
    name: str
    type: str
    sim: SimSpec | None = None


@dataclass(frozen=True)
class TypeDecl:
    name: str
    kind: str  # Record | Set | Sequence | Graph | Primitive | Variable
    fields: tuple[FieldDecl, ...] = ()
    element: str | None = None
    sim: SimSpec | None = None


@dataclass(frozen=True)
class MetricDef:
    root: str
    report: tuple[Normalizer, ...] = (Normalizer.PRECISION, Normalizer.RECALL, Normalizer.F)
    aggregation: str = "micro"


@dataclass(frozen=True)
class SolverOptions:
    mode: str = "exact"
    seed: int = 0
    node_limit: int = DEFAULT_NODE_LIMIT


@dataclass(frozen=True)
class Schema:
    types: Mapping[str, TypeDecl]
    metric: MetricDef | None = None

    def decl(self, name: str, path: str = "$") -> TypeDecl:
        if name in self.types:
            return self.types[name]
        if name in RESERVED_PRIMITIVES:
            return TypeDecl(name, "Primitive")
        raise SchemaError(f"unknown type {name!r}", path)

    def to_json(self) -> dict:
        return _serialize_schema(self)


# ---------------------------------------------------------------------------
# parsing

_KINDS = ("Record", "Set", "Sequence", "Graph", "Primitive", "Variable")


def _parse_sim(doc, path: str) -> SimSpec:
    if not isinstance(doc, Mapping) or "node" not in doc:
        raise SchemaError("similarity spec must be an object with a 'node' key", path)
    node = doc["node"]
    inner = _parse_sim(doc["inner"], f"{path}.inner") if doc.get("inner") is not None else None
    try:
        if node == "Discrete":
            return DiscreteSpec()
        if node == "Product":
            fields = doc.get("fields")
            if not isinstance(fields, Mapping) or not fields:
                raise SchemaError("Product needs a nonempty 'fields' object", path)
            parsed = tuple(
                (name, _parse_sim(spec, f"{path}.fields.{name}") if spec is not None else None)
                for name, spec in fields.items()
            )
            return ProductSpec(parsed)
        if node == "SetMatch":
            return SetMatchSpec(
                MatchConstraint.parse(doc.get("constraint", "1:1")),
                inner,
                Normalizer.parse(doc["normalizer"]) if doc.get("normalizer") else None,
            )
        if node == "LatentSetMatch":
            var_fields = tuple(doc.get("var_fields", ()))
            if not var_fields:
                raise SchemaError("LatentSetMatch needs var_fields", path)
            return LatentSetMatchSpec(
                MatchConstraint.parse(doc.get("constraint", "1:1")), inner, var_fields
            )
        if node == "SeqMatch":
            return SeqMatchSpec(inner)
        if node == "GraphMatch":
            return GraphMatchSpec(MatchConstraint.parse(doc.get("constraint", "1:1")), inner)
        if node == "Threshold":
            if "cutoff" not in doc:
                raise SchemaError("Threshold needs a cutoff", path)
            cutoff = float(doc["cutoff"])
            if not 0.0 <= cutoff <= 1.0:
                raise SchemaError(f"cutoff must be in [0, 1], got {cutoff}", path)
            return ThresholdSpec(inner, cutoff, bool(doc.get("strict", True)))
        if node == "Table":
            pairs = []
            for k, row in enumerate(doc.get("pairs", ())):
                if not isinstance(row, Sequence) or len(row) != 3:
                    raise SchemaError("Table pairs must be [x, y, value] triples", f"{path}.pairs[{k}]")
                x, y, v = row
                v = float(v)
                if not 0.0 <= v <= 1.0:
                    raise SchemaError(f"table value {v} outside [0, 1]", f"{path}.pairs[{k}]")
                if x == y and v != 1.0:
                    raise SchemaError(f"table diagonal ({x!r}, {x!r}) must map to 1", f"{path}.pairs[{k}]")
                pairs.append((x, y, v))
            default = float(doc.get("default", 0.0))
            if not 0.0 <= default <= 1.0:
                raise SchemaError(f"table default {default} outside [0, 1]", path)
            return TableSpec(tuple(pairs), default)
        if node == "HierarchyLevel":
            depth = int(doc.get("depth", 0))
            if depth < 1:
                raise SchemaError("HierarchyLevel needs depth >= 1", path)
            return HierarchyLevelSpec(depth)
        if node == "HierarchySupertypes":
            edges = tuple((str(c), str(p)) for c, p in doc.get("edges", ()))
            return HierarchySupertypesSpec(edges)
        if node == "Named":
            if not doc.get("id"):
                raise SchemaError("Named needs an id", path)
            return NamedSpec(str(doc["id"]))
    except ConfigurationError as exc:
        raise SchemaError(str(exc), path) from None
    raise SchemaError(f"unknown similarity node {node!r}", path)


def _parse_field(name: str, doc, path: str) -> FieldDecl:
    if isinstance(doc, str):
        return FieldDecl(name, doc)
    if isinstance(doc, Mapping) and "type" in doc:
        sim = _parse_sim(doc["sim"], f"{path}.sim") if doc.get("sim") is not None else None
        return FieldDecl(name, str(doc["type"]), sim)
    raise SchemaError("field must be a type name or {'type': ..., 'sim': ...}", path)


def parse_schema(text: str | Mapping) -> Schema:
    """Parse and validate a JSON schema document."""
    if isinstance(text, str):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"schema is not valid JSON: {exc}") from None
    else:
        doc = text
    if not isinstance(doc, Mapping) or not isinstance(doc.get("types"), Mapping):
        raise SchemaError("schema must be an object with a 'types' map")

    types: dict[str, TypeDecl] = {}
    for name, tdoc in doc["types"].items():
        path = f"$.types.{name}"
        if name in RESERVED_PRIMITIVES:
            raise SchemaError(f"type name {name!r} is reserved", path)
        if not isinstance(tdoc, Mapping):
            raise SchemaError("type declaration must be an object", path)
        kind = tdoc.get("kind")
        if kind not in _KINDS:
            raise SchemaError(f"unknown kind {kind!r}", path)
        fields = tuple(
            _parse_field(fname, fdoc, f"{path}.fields.{fname}")
            for fname, fdoc in tdoc.get("fields", {}).items()
        )
        element = tdoc.get("element")
        sim = _parse_sim(tdoc["sim"], f"{path}.sim") if tdoc.get("sim") is not None else None
        if kind == "Record" and not fields:
            raise SchemaError("Record needs fields", path)
        if kind in ("Set", "Sequence", "Graph") and not element:
            raise SchemaError(f"{kind} needs an element type", path)
        if kind in ("Primitive", "Variable") and (fields or element):
            raise SchemaError(f"{kind} carries no fields or element", path)
        if kind == "Variable" and sim is not None:
            raise SchemaError("Variable types cannot carry a similarity", path)
        types[name] = TypeDecl(name, kind, fields, element, sim)

    metric = None
    if doc.get("metric") is not None:
        mdoc = doc["metric"]
        if not isinstance(mdoc, Mapping) or "root" not in mdoc:
            raise SchemaError("metric must be an object with a root type", "$.metric")
        try:
            report = tuple(Normalizer.parse(r) for r in mdoc.get("report", ("P", "R", "F")))
        except ConfigurationError as exc:
            raise SchemaError(str(exc), "$.metric.report") from None
        aggregation = mdoc.get("aggregation", "micro")
        if aggregation not in ("micro", "macro"):
            raise SchemaError(f"unknown aggregation {aggregation!r}", "$.metric.aggregation")
        metric = MetricDef(str(mdoc["root"]), report, aggregation)

    schema = Schema(types, metric)
    _validate(schema)
    return schema


def _validate(schema: Schema):
    for name, decl in schema.types.items():
        path = f"$.types.{name}"
        for f in decl.fields:
            schema.decl(f.type, f"{path}.fields.{f.name}")
        if decl.element:
            schema.decl(decl.element, f"{path}.element")
        if decl.sim is not None:
            _check_sim_kind(schema, decl.sim, decl, f"{path}.sim")
        for f in decl.fields:
            if f.sim is not None:
                _check_sim_kind(schema, f.sim, schema.decl(f.type), f"{path}.fields.{f.name}.sim")
    _check_record_cycles(schema)
    if schema.metric is not None:
        root = schema.decl(schema.metric.root, "$.metric.root")
        if root.kind not in ("Set", "Sequence", "Graph"):
            raise SchemaError("metric root must be a Set, Sequence, or Graph", "$.metric.root")


def _check_sim_kind(schema: Schema, sim: SimSpec, decl: TypeDecl, path: str):
    kind = decl.kind
    if isinstance(sim, DiscreteSpec):
        if kind != "Primitive":
            raise SchemaError(f"Discrete applies to primitives, not {kind}", path)
    elif isinstance(sim, ProductSpec):
        if kind != "Record":
            raise SchemaError(f"Product applies to records, not {kind}", path)
        declared = {f.name: f for f in decl.fields}
        for fname, child in sim.fields:
            if fname not in declared:
                raise SchemaError(f"record {decl.name!r} has no field {fname!r}", f"{path}.fields.{fname}")
            if child is not None:
                _check_sim_kind(schema, child, schema.decl(declared[fname].type), f"{path}.fields.{fname}")
    elif isinstance(sim, (SetMatchSpec, LatentSetMatchSpec)):
        if kind != "Set":
            raise SchemaError(f"{type(sim).__name__[:-4]} applies to sets, not {kind}", path)
        element = schema.decl(decl.element, path)
        if isinstance(sim, LatentSetMatchSpec):
            if element.kind != "Record":
                raise SchemaError("LatentSetMatch needs a record element type", path)
            declared = {f.name: f for f in element.fields}
            for vf in sim.var_fields:
                if vf not in declared:
                    raise SchemaError(f"var field {vf!r} not in element record", path)
                if schema.decl(declared[vf].type).kind != "Variable":
                    raise SchemaError(f"var field {vf!r} is not Variable-typed", path)
            missing = [
                f.name
                for f in element.fields
                if schema.decl(f.type).kind == "Variable" and f.name not in sim.var_fields
            ]
            if missing:
                raise SchemaError(f"Variable fields {missing} must be listed in var_fields", path)
        if sim.inner is not None:
            _check_sim_kind(schema, sim.inner, element, f"{path}.inner")
    elif isinstance(sim, SeqMatchSpec):
        if kind != "Sequence":
            raise SchemaError(f"SeqMatch applies to sequences, not {kind}", path)
        if sim.inner is not None:
            _check_sim_kind(schema, sim.inner, schema.decl(decl.element, path), f"{path}.inner")
    elif isinstance(sim, GraphMatchSpec):
        if kind != "Graph":
            raise SchemaError(f"GraphMatch applies to graphs, not {kind}", path)
        if sim.inner is not None:
            _check_sim_kind(schema, sim.inner, schema.decl(decl.element, path), f"{path}.inner")
    elif isinstance(sim, ThresholdSpec):
        if sim.inner is not None:
            _check_sim_kind(schema, sim.inner, decl, f"{path}.inner")
    elif isinstance(sim, TableSpec):
        if kind != "Primitive":
            raise SchemaError(f"Table applies to primitives, not {kind}", path)
    elif isinstance(sim, HierarchyLevelSpec):
        if kind != "Sequence":
            raise SchemaError("HierarchyLevel applies to sequences of labels", path)
    elif isinstance(sim, HierarchySupertypesSpec):
        if kind not in ("Primitive", "Set"):
            raise SchemaError("HierarchySupertypes applies to labels or label sets", path)
    elif isinstance(sim, NamedSpec):
        if sim.id not in NAMED_METRICS:
            raise SchemaError(f"unknown builtin {sim.id!r}", path)


def _check_record_cycles(schema: Schema):
    # cycles are fine through Set/Sequence/Graph indirection, but a record
    # directly containing itself can never typecheck a finite document
    state: dict[str, int] = {}

    def visit(name: str, path: str):
        if state.get(name) == 1:
            raise SchemaError(f"cyclic record nesting through {name!r}", path)
        if state.get(name) == 2:
            return
        decl = schema.decl(name, path)
        if decl.kind != "Record":
            state[name] = 2
            return
        state[name] = 1
        for f in decl.fields:
            if schema.decl(f.type, path).kind == "Record":
                visit(f.type, f"{path}.{f.name}")
        state[name] = 2

    for name in schema.types:
        visit(name, f"$.types.{name}")


def _serialize_sim(sim: SimSpec) -> dict:
    if isinstance(sim, DiscreteSpec):
        return {"node": "Discrete"}
    if isinstance(sim, ProductSpec):
        return {
            "node": "Product",
            "fields": {n: _serialize_sim(s) if s else None for n, s in sim.fields},
        }
    if isinstance(sim, SetMatchSpec):
        return {
            "node": "SetMatch",
            "constraint": sim.constraint.value,
            "inner": _serialize_sim(sim.inner) if sim.inner else None,
            "normalizer": sim.normalizer.value if sim.normalizer else None,
        }
    if isinstance(sim, LatentSetMatchSpec):
        return {
            "node": "LatentSetMatch",
            "constraint": sim.constraint.value,
            "inner": _serialize_sim(sim.inner) if sim.inner else None,
            "var_fields": list(sim.var_fields),
        }
    if isinstance(sim, SeqMatchSpec):
        return {"node": "SeqMatch", "inner": _serialize_sim(sim.inner) if sim.inner else None}
    if isinstance(sim, GraphMatchSpec):
        return {
            "node": "GraphMatch",
            "constraint": sim.constraint.value,
            "inner": _serialize_sim(sim.inner) if sim.inner else None,
        }
    if isinstance(sim, ThresholdSpec):
        return {
            "node": "Threshold",
            "inner": _serialize_sim(sim.inner) if sim.inner else None,
            "cutoff": sim.cutoff,
            "strict": sim.strict,
        }
    if isinstance(sim, TableSpec):
        return {
            "node": "Table",
            "pairs": [[x, y, v] for x, y, v in sim.pairs],
            "default": sim.default,
        }
    if isinstance(sim, HierarchyLevelSpec):
        return {"node": "HierarchyLevel", "depth": sim.depth}
    if isinstance(sim, HierarchySupertypesSpec):
        return {"node": "HierarchySupertypes", "edges": [[c, p] for c, p in sim.edges]}
    if isinstance(sim, NamedSpec):
        return {"node": "Named", "id": sim.id}
    raise TypeError(f"unknown sim spec {sim!r}")


def _serialize_schema(schema: Schema) -> dict:
    types: dict = {}
    for name, decl in schema.types.items():
        out: dict = {"kind": decl.kind}
        if decl.fields:
            out["fields"] = {
                f.name: ({"type": f.type, "sim": _serialize_sim(f.sim)} if f.sim else f.type)
                for f in decl.fields
            }
        if decl.element:
            out["element"] = decl.element
        if decl.sim:
            out["sim"] = _serialize_sim(decl.sim)
        types[name] = out
    doc: dict = {"types": types}
    if schema.metric:
        doc["metric"] = {
            "root": schema.metric.root,
            "report": [n.value for n in schema.metric.report],
            "aggregation": schema.metric.aggregation,
        }
    return doc


# ---------------------------------------------------------------------------
# document typechecking and conversion

def check_document(schema: Schema, type_name: str, value, path: str = "$"):
    """Validate a document against a type and convert it to evaluation
    form (variables become VarId, constants stay as scalars)."""
    decl = schema.decl(type_name, path)
    if decl.kind == "Primitive":
        return _check_primitive(type_name, value, path)
    if decl.kind == "Variable":
        if isinstance(value, Mapping):
            if "var" in value:
                return VarId(str(value["var"]))
            if "concept" in value:
                return value["concept"]
            raise DataError("variable value must be {'var': ...} or {'concept': ...}", path)
        if isinstance(value, (str, int, float, bool)):
            return value
        raise DataError("variable value must be a tagged object or scalar", path)
    if decl.kind == "Record":
        if not isinstance(value, Mapping):
            raise DataError(f"expected an object for {type_name}", path)
        out = {}
        for f in decl.fields:
            if f.name not in value:
                raise DataError(f"missing field {f.name!r}", path)
            out[f.name] = check_document(schema, f.type, value[f.name], f"{path}.{f.name}")
        return out
    if decl.kind in ("Set", "Sequence"):
        if not isinstance(value, Sequence) or isinstance(value, str):
            raise DataError(f"expected a list for {type_name}", path)
        items = [
            check_document(schema, decl.element, v, f"{path}[{i}]")
            for i, v in enumerate(value)
        ]
        if decl.kind == "Set":
            # set semantics: duplicates carry no weight of their own
            items = list({_canonical(schema, decl.element, v): v for v in items}.values())
        return items
    # Graph
    if not isinstance(value, Mapping) or "items" not in value:
        raise DataError("expected {'items': ..., 'order': ..., 'kind': ...}", path)
    items = [
        check_document(schema, decl.element, v, f"{path}.items[{i}]")
        for i, v in enumerate(value["items"])
    ]
    return OrderedCollection.from_json({**value, "items": items}, path)


def _canonical(schema: Schema, type_name: str, value):
    """Hashable, order-insensitive canonical form of a converted value."""
    decl = schema.decl(type_name)
    if decl.kind == "Record":
        return tuple(
            (f.name, _canonical(schema, f.type, value[f.name])) for f in decl.fields
        )
    if decl.kind == "Set":
        keys = [_canonical(schema, decl.element, v) for v in value]
        return ("#set", tuple(sorted(keys, key=repr)))
    if decl.kind == "Sequence":
        return ("#seq", tuple(_canonical(schema, decl.element, v) for v in value))
    if decl.kind == "Graph":
        items = tuple(_canonical(schema, decl.element, v) for v in value.items)
        return ("#graph", items, tuple(sorted(value.order_pairs)), value.order_kind.value)
    if decl.kind == "Variable":
        return ("#var", value.name) if isinstance(value, VarId) else ("#const", value)
    return value


def _check_primitive(type_name: str, value, path: str):
    checks = {
        "int": lambda v: isinstance(v, int) and not isinstance(v, bool),
        "float": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
        "str": lambda v: isinstance(v, str),
        "bool": lambda v: isinstance(v, bool),
    }
    if type_name in checks:
        if not checks[type_name](value):
            raise DataError(f"expected {type_name}, got {type(value).__name__}", path)
        return value
    if not isinstance(value, (str, int, float, bool)):
        raise DataError(f"expected a scalar for {type_name}", path)
    return value


# ---------------------------------------------------------------------------
# compiled evaluators

class CompiledSimilarity:
    """Callable similarity produced from a schema type."""

    normalized = True

    def __call__(self, x, y) -> float:
        raise NotImplementedError

    def self_score(self, x) -> float:
        raise NotImplementedError

    def explain(self, x, y) -> dict:
        return {"score": self(x, y)}


class _Forward(CompiledSimilarity):
    """Late-bound reference, needed for recursive types."""

    def __init__(self):
        self.target: CompiledSimilarity | None = None

    @property
    def normalized(self):  # type: ignore[override]
        return self.target.normalized

    def __call__(self, x, y):
        return self.target(x, y)

    def self_score(self, x):
        return self.target.self_score(x)

    def explain(self, x, y):
        return self.target.explain(x, y)


class _Discrete(CompiledSimilarity):
    def __call__(self, x, y):
        return 1.0 if x == y else 0.0

    def self_score(self, x):
        return 1.0


class _Product(CompiledSimilarity):
    def __init__(self, fields: list[tuple[str, CompiledSimilarity]]):
        self.fields = fields
        self.normalized = all(s.normalized for _, s in fields)

    def _get(self, rec, name):
        try:
            return rec[name]
        except (KeyError, TypeError) as exc:
            raise DataError(f"record is missing field {name!r}") from exc

    def __call__(self, x, y):
        value = 1.0
        for name, sim in self.fields:
            value *= sim(self._get(x, name), self._get(y, name))
            if value == 0.0:
                return 0.0
        return value

    def self_score(self, x):
        value = 1.0
        for name, sim in self.fields:
            value *= sim.self_score(self._get(x, name))
        return value


def _self_sum(items, inner: CompiledSimilarity) -> float:
    return float(sum(inner.self_score(e) for e in items))


class _SetMatch(CompiledSimilarity):
    def __init__(self, constraint, inner: CompiledSimilarity, normalizer):
        self.constraint = constraint
        self.inner = inner
        self.normalizer = normalizer
        self.normalized = normalizer is not None

    def _triple(self, x, y):
        w = WeightMatrix.build(x, y, self.inner)
        matching = match_score(w, self.constraint)
        triple = OverlapTriple(matching.score, _self_sum(x, self.inner), _self_sum(y, self.inner))
        return triple, matching

    def __call__(self, x, y):
        triple, _ = self._triple(x, y)
        if self.normalizer is None:
            return triple.sigma_pr
        return normalize(self.normalizer, triple).value

    def self_score(self, x):
        if self.normalizer is not None:
            return 1.0
        return _self_sum(x, self.inner)

    def explain(self, x, y):
        triple, matching = self._triple(x, y)
        pairs = [
            {"pred": i, "gold": j, "inner": self.inner.explain(x[i], y[j])}
            for i, j in matching.pairs
        ]
        score = (
            triple.sigma_pr
            if self.normalizer is None
            else normalize(self.normalizer, triple).value
        )
        return {"score": score, "sigma": triple.sigma_pr, "pairs": pairs}


class _LatentSetMatch(CompiledSimilarity):
    normalized = False

    def __init__(self, constraint, upper: CompiledSimilarity, var_fields, solver: SolverOptions):
        self.constraint = constraint
        self.upper = upper
        self.var_fields = var_fields
        self.solver = solver

    def _solve(self, x, y):
        inst = build_ilp(x, y, self.upper, self.var_fields, self.constraint)
        return solve_ilp(
            inst,
            mode=self.solver.mode,
            seed=self.solver.seed,
            node_limit=self.solver.node_limit,
        )

    def __call__(self, x, y):
        return self._solve(x, y).score

    def self_score(self, x):
        return _self_sum(x, self.upper)

    def explain(self, x, y):
        sol = self._solve(x, y)
        return {
            "score": sol.score,
            "pairs": [{"pred": i, "gold": j} for i, j in sol.item_pairs],
            "var_alignment": [[a.name, b.name] for a, b in sol.var_alignment.pairs],
            "exact": sol.exact,
        }


class _UpperBound(CompiledSimilarity):
    """Pair similarity assuming latent fields already match."""

    def __init__(self, fields: list[tuple[str, CompiledSimilarity]], var_fields: tuple[str, ...]):
        self.inner = _Product([(n, s) for n, s in fields if n not in var_fields])
        self.var_fields = var_fields
        self.normalized = self.inner.normalized

    def __call__(self, x, y):
        return self.inner(x, y)

    def self_score(self, x):
        # constants in var-capable fields contribute 1 to their own score
        return self.inner.self_score(x)


class _SeqMatch(CompiledSimilarity):
    normalized = False

    def __init__(self, inner: CompiledSimilarity):
        self.inner = inner

    def _matching(self, x, y):
        return seq_match_score(OrderedCollection.total(x), OrderedCollection.total(y), self.inner)

    def __call__(self, x, y):
        return self._matching(x, y).score

    def self_score(self, x):
        return _self_sum(x, self.inner)

    def explain(self, x, y):
        m = self._matching(x, y)
        return {
            "score": m.score,
            "pairs": [
                {"pred": i, "gold": j, "inner": self.inner.explain(x[i], y[j])}
                for i, j in m.pairs
            ],
        }


class _GraphMatch(CompiledSimilarity):
    normalized = False

    def __init__(self, constraint, inner: CompiledSimilarity, solver: SolverOptions):
        self.constraint = constraint
        self.inner = inner
        self.solver = solver

    def _matching(self, x: OrderedCollection, y: OrderedCollection):
        return graph_match_score(x, y, self.inner, self.constraint, self.solver.node_limit)

    def __call__(self, x, y):
        return self._matching(x, y).score

    def self_score(self, x: OrderedCollection):
        return _self_sum(x.items, self.inner)

    def explain(self, x, y):
        m = self._matching(x, y)
        return {"score": m.score, "pairs": [{"pred": i, "gold": j} for i, j in m.pairs]}


class _Threshold(CompiledSimilarity):
    def __init__(self, inner: CompiledSimilarity, cutoff: float, strict: bool):
        self.inner = inner
        self.cutoff = cutoff
        self.strict = strict

    def _apply(self, value: float) -> float:
        hit = value > self.cutoff if self.strict else value >= self.cutoff
        return 1.0 if hit else 0.0

    def __call__(self, x, y):
        return self._apply(min(self.inner(x, y), 1.0))

    def self_score(self, x):
        return self._apply(min(self.inner.self_score(x), 1.0))


class _Table(CompiledSimilarity):
    def __init__(self, pairs, default: float):
        self.table = {(x, y): v for x, y, v in pairs}
        self.default = default

    def __call__(self, x, y):
        if x == y:
            return 1.0
        return self.table.get((x, y), self.default)

    def self_score(self, x):
        return 1.0


class _HierarchyLevel(CompiledSimilarity):
    def __init__(self, depth: int):
        self.depth = depth

    def _path(self, value) -> TypePath:
        if len(value) != self.depth:
            raise DataError(f"type path has {len(value)} levels, schema declares {self.depth}")
        return TypePath(tuple(value))

    def __call__(self, x, y):
        return zoo.type_similarity_level(self._path(x), self._path(y)).value

    def self_score(self, x):
        return 1.0


class _HierarchySupertypes(CompiledSimilarity):
    def __init__(self, edges):
        self.ontology = Ontology(edges)

    def __call__(self, x, y):
        xs = x if isinstance(x, list) else [x]
        ys = y if isinstance(y, list) else [y]
        return zoo.type_similarity_supertypes(xs, ys, self.ontology).value

    def self_score(self, x):
        return 1.0


# builtin metrics not expressible in the similarity AST (they need
# side-dependent inner normalizers); usable only as a metric root
def _named_muc(pred, gold) -> MetricResult:
    return zoo.coref_scores(parse_entity_set(pred), parse_entity_set(gold))["muc"]


def _named_b3(pred, gold) -> MetricResult:
    return zoo.coref_scores(parse_entity_set(pred), parse_entity_set(gold))["b3"]


NAMED_METRICS = {"muc": _named_muc, "b3": _named_b3}


# ---------------------------------------------------------------------------
# derivation

class _Compiler:
    def __init__(self, schema: Schema, solver: SolverOptions):
        self.schema = schema
        self.solver = solver
        self.cache: dict[str, CompiledSimilarity] = {}

    def type_sim(self, name: str, path: str) -> CompiledSimilarity:
        if name in self.cache:
            return self.cache[name]
        fwd = _Forward()
        self.cache[name] = fwd
        decl = self.schema.decl(name, path)
        if decl.sim is not None:
            built = self.build(decl.sim, decl, path)
        else:
            built = self.default_sim(decl, path)
        fwd.target = built
        self.cache[name] = built
        return built

    def default_sim(self, decl: TypeDecl, path: str) -> CompiledSimilarity:
        if decl.kind == "Primitive":
            return _Discrete()
        if decl.kind == "Variable":
            raise SchemaError(
                "Variable fields can only be compared inside a LatentSetMatch", path
            )
        if decl.kind == "Record":
            return _Product(
                [(f.name, self.field_sim(f, path)) for f in decl.fields]
            )
        inner = self.type_sim(decl.element, path)
        if decl.kind == "Set":
            return _SetMatch(MatchConstraint.ONE_TO_ONE, inner, None)
        if decl.kind == "Sequence":
            return _SeqMatch(inner)
        return _GraphMatch(MatchConstraint.ONE_TO_ONE, inner, self.solver)

    def field_sim(self, f: FieldDecl, path: str) -> CompiledSimilarity:
        if f.sim is not None:
            return self.build(f.sim, self.schema.decl(f.type, path), f"{path}.{f.name}")
        return self.type_sim(f.type, f"{path}.{f.name}")

    def build(self, sim: SimSpec, decl: TypeDecl, path: str) -> CompiledSimilarity:
        if isinstance(sim, DiscreteSpec):
            return _Discrete()
        if isinstance(sim, ProductSpec):
            declared = {f.name: f for f in decl.fields}
            fields = []
            for fname, child in sim.fields:
                f = declared[fname]
                if child is not None:
                    fields.append((fname, self.build(child, self.schema.decl(f.type), f"{path}.{fname}")))
                else:
                    fields.append((fname, self.field_sim(f, path)))
            return _Product(fields)
        if isinstance(sim, SetMatchSpec):
            element = self.schema.decl(decl.element, path)
            inner = (
                self.build(sim.inner, element, f"{path}.inner")
                if sim.inner is not None
                else self.type_sim(decl.element, path)
            )
            return _SetMatch(sim.constraint, inner, sim.normalizer)
        if isinstance(sim, LatentSetMatchSpec):
            element = self.schema.decl(decl.element, path)
            if sim.inner is not None:
                upper = self.build(sim.inner, element, f"{path}.inner")
            else:
                fields = [
                    (f.name, self.field_sim(f, path))
                    for f in element.fields
                    if f.name not in sim.var_fields
                ]
                upper = _UpperBound(fields, sim.var_fields)
            return _LatentSetMatch(sim.constraint, upper, sim.var_fields, self.solver)
        if isinstance(sim, SeqMatchSpec):
            inner = (
                self.build(sim.inner, self.schema.decl(decl.element), f"{path}.inner")
                if sim.inner is not None
                else self.type_sim(decl.element, path)
            )
            return _SeqMatch(inner)
        if isinstance(sim, GraphMatchSpec):
            inner = (
                self.build(sim.inner, self.schema.decl(decl.element), f"{path}.inner")
                if sim.inner is not None
                else self.type_sim(decl.element, path)
            )
            return _GraphMatch(sim.constraint, inner, self.solver)
        if isinstance(sim, ThresholdSpec):
            # the kind-default, not the declared sim: a Threshold may BE the
            # declared sim, and wrapping itself would never terminate
            inner = (
                self.build(sim.inner, decl, f"{path}.inner")
                if sim.inner is not None
                else self.default_sim(decl, path)
            )
            if not inner.normalized:
                raise SchemaError("Threshold needs a normalized inner similarity", path)
            return _Threshold(inner, sim.cutoff, sim.strict)
        if isinstance(sim, TableSpec):
            return _Table(sim.pairs, sim.default)
        if isinstance(sim, HierarchyLevelSpec):
            return _HierarchyLevel(sim.depth)
        if isinstance(sim, HierarchySupertypesSpec):
            return _HierarchySupertypes(sim.edges)
        if isinstance(sim, NamedSpec):
            raise SchemaError(f"builtin {sim.id!r} is only usable as a metric root", path)
        raise SchemaError(f"unsupported similarity node {sim!r}", path)


def derive_similarity(
    schema: Schema, type_name: str, solver: SolverOptions | None = None
) -> CompiledSimilarity:
    """Compile the similarity evaluator for a schema type.

    The returned object compares documents already converted by
    check_document; use evaluate_metric for end-to-end scoring.
    """
    compiler = _Compiler(schema, solver or SolverOptions())
    return compiler.type_sim(type_name, f"$.types.{type_name}")


def _root_named(schema: Schema, metric: MetricDef):
    root = schema.decl(metric.root)
    if root.sim is not None and isinstance(root.sim, NamedSpec):
        return NAMED_METRICS[root.sim.id]
    return None


def evaluate_metric(
    schema: Schema,
    metric: MetricDef,
    pred,
    gold,
    solver: SolverOptions | None = None,
) -> MetricResult:
    """Score one document pair against a schema metric definition."""
    named = _root_named(schema, metric)
    if named is not None:
        return named(pred, gold)
    pred_value = check_document(schema, metric.root, pred)
    gold_value = check_document(schema, metric.root, gold)
    evaluator = derive_similarity(schema, metric.root, solver)
    sigma_pr = evaluator(pred_value, gold_value)
    return MetricResult(
        sigma_pr, evaluator.self_score(pred_value), evaluator.self_score(gold_value)
    )


def explain_metric(
    schema: Schema,
    metric: MetricDef,
    pred,
    gold,
    solver: SolverOptions | None = None,
) -> dict:
    """Witness alignments at every level for one document pair."""
    named = _root_named(schema, metric)
    if named is not None:
        result = named(pred, gold)
        return {"score": result.to_json(), "pairs": []}
    pred_value = check_document(schema, metric.root, pred)
    gold_value = check_document(schema, metric.root, gold)
    evaluator = derive_similarity(schema, metric.root, solver)
    return evaluator.explain(pred_value, gold_value)
