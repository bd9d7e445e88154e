"""Corpus loading, batch evaluation, aggregation, and explain dumps.

Corpora are JSON Lines files, one document per line, joined across the
prediction and reference files by ``doc_id``. Builtin metrics read
their task-specific payload keys; schema metrics read the root value
from the ``value`` key.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Sequence

from . import zoo
from .matching import set_match_triple
from .errors import ConfigurationError, DataError
from .bnb import DEFAULT_NODE_LIMIT
from .latent import AmrGraph, smatch, smatch_solution
from .presets import PRESET_SCHEMAS
from .records import (
    DatasetConfig,
    parse_dependency_parse,
    parse_entity_set,
    parse_event_set,
    parse_nary_relation,
    parse_nary_relation_set,
    parse_relation_set,
    parse_template_set,
)
from .report import MetricValue, ProductResult, macro_average
from .schema import SolverOptions, evaluate_metric, explain_metric, parse_schema

REPORT_FIELDS = ("P", "R", "F", "J")


@dataclass(frozen=True)
class DocumentRecord:
    doc_id: str
    payload: Mapping[str, Any]


@dataclass(frozen=True)
class BuiltinSpec:
    """A builtin metric name and the evaluation group it belongs to."""

    name: str
    group: str
    payload_doc: str
    needs_config: bool = False


BUILTIN_METRICS: dict[str, BuiltinSpec] = {
    spec.name: spec
    for spec in [
        BuiltinSpec("rel_f1", "relations",
                    '{"relations": [{"type", "subj": {"left","right"}, "obj": {...}}]}'),
        BuiltinSpec("uas", "dependencies", '{"edges": [{"gov", "dep", "rel"}]}'),
        BuiltinSpec("las", "dependencies", '{"edges": [{"gov", "dep", "rel"}]}'),
        BuiltinSpec("trig_f1", "events",
                    '{"events": [{"trigger": {"mention", "type"}, "args": [{"mention", "role"}]}]}'),
        BuiltinSpec("arg_f1", "events",
                    '{"events": [{"trigger": {"mention", "type"}, "args": [{"mention", "role"}]}]}'),
        BuiltinSpec("muc", "coref", '{"entities": [[mention, ...], ...]}'),
        BuiltinSpec("b3", "coref", '{"entities": [[mention, ...], ...]}'),
        BuiltinSpec("ceaf_phi3", "coref", '{"entities": [[mention, ...], ...]}'),
        BuiltinSpec("ceaf_phi4", "coref", '{"entities": [[mention, ...], ...]}'),
        BuiltinSpec("ceaf_ree", "ree", '{"type", "args": [{"role", "entity": [mention, ...]}]}'),
        BuiltinSpec("ceaf_rme_subset", "ree", '{"type", "args": [{"role", "entity": [...]}]}'),
        BuiltinSpec("ceaf_rme_phi3", "ree", '{"type", "args": [{"role", "entity": [...]}]}'),
        BuiltinSpec("scirex", "scirex",
                    '{"relations": [{"type", "args": [{"role", "entity": [[token indices]]}]}]}'),
        BuiltinSpec("muc4", "templates",
                    '{"templates": [{"type", "fillers": [{"slot", "value"}]}]}', needs_config=True),
        BuiltinSpec("better_granular", "templates",
                    '{"templates": [{"type", "fillers": [{"slot", "value"}]}]}', needs_config=True),
        BuiltinSpec("smatch", "amr",
                    '{"props": [{"rel", "subj", "obj": {"var"} | {"concept"} | scalar}]}'),
    ]
}


def list_metrics(verbose: bool = False) -> list[dict]:
    out = []
    for spec in BUILTIN_METRICS.values():
        entry: dict[str, Any] = {"name": spec.name}
        if verbose:
            entry["payload"] = spec.payload_doc
            entry["needs_config"] = spec.needs_config
            entry["preset_schema"] = spec.name in PRESET_SCHEMAS
        out.append(entry)
    return out


def _evaluate_group(
    group: str,
    pred: Mapping,
    gold: Mapping,
    config: DatasetConfig,
    solver: SolverOptions,
) -> dict[str, MetricValue]:
    if group == "relations":
        return {"rel_f1": zoo.rel_f1(parse_relation_set(pred, config=config),
                                     parse_relation_set(gold, config=config))}
    if group == "dependencies":
        return zoo.attachment_scores(parse_dependency_parse(pred), parse_dependency_parse(gold))
    if group == "events":
        return zoo.event_scores(parse_event_set(pred, config=config),
                                parse_event_set(gold, config=config))
    if group == "coref":
        return zoo.coref_scores(parse_entity_set(pred), parse_entity_set(gold))
    if group == "ree":
        return zoo.ree_scores(parse_nary_relation(pred, index_mentions=False),
                              parse_nary_relation(gold, index_mentions=False))
    if group == "scirex":
        return {"scirex": zoo.scirex_score(parse_nary_relation_set(pred),
                                           parse_nary_relation_set(gold))}
    if group == "templates":
        pred_t = parse_template_set(pred, config=config)
        gold_t = parse_template_set(gold, config=config)
        type_r, slot_r, _ = zoo.better_granular_parts(pred_t, gold_t, config)
        return {
            "muc4": zoo.muc4_score(pred_t, gold_t, config),
            "better_granular": ProductResult(type_r, slot_r),
        }
    if group == "amr":
        return {
            "smatch": smatch(
                AmrGraph.from_triples(_amr_triples(pred)),
                AmrGraph.from_triples(_amr_triples(gold)),
                mode=solver.mode,
                seed=solver.seed,
                node_limit=solver.node_limit,
            )
        }
    raise ConfigurationError(f"unknown metric group {group!r}")


def _amr_triples(payload) -> Sequence[dict]:
    triples = payload.get("props") if isinstance(payload, Mapping) else payload
    if not isinstance(triples, Sequence):
        raise DataError("expected {'props': [...]}")
    return triples


def evaluate_builtins(
    names: Sequence[str],
    pred: Mapping,
    gold: Mapping,
    config: DatasetConfig | None = None,
    solver: SolverOptions | None = None,
) -> dict[str, MetricValue]:
    """Evaluate the named builtin metrics on one document pair."""
    config = config or DatasetConfig()
    solver = solver or SolverOptions()
    unknown = [n for n in names if n not in BUILTIN_METRICS]
    if unknown:
        raise ConfigurationError(f"unknown metrics {unknown}; see list-metrics")
    out: dict[str, MetricValue] = {}
    for group in dict.fromkeys(BUILTIN_METRICS[n].group for n in names):
        results = _evaluate_group(group, pred, gold, config, solver)
        for name in names:
            if BUILTIN_METRICS[name].group == group:
                out[name] = results[name]
    return out


def explain_builtins(
    names: Sequence[str],
    pred: Mapping,
    gold: Mapping,
    config: DatasetConfig | None = None,
    solver: SolverOptions | None = None,
) -> dict[str, dict]:
    """Witness alignments for the named builtin metrics."""
    config = config or DatasetConfig()
    solver = solver or SolverOptions()
    out: dict[str, dict] = {}
    for name in names:
        group = BUILTIN_METRICS[name].group
        if group == "relations":
            _, detail = zoo.rel_f1_detail(parse_relation_set(pred), parse_relation_set(gold))
        elif group == "dependencies":
            sim = (lambda a, b: float(a.gov == b.gov and a.dep == b.dep)) if name == "uas" else (
                lambda a, b: float(a.gov == b.gov and a.dep == b.dep and a.rel == b.rel))
            _, matching = set_match_triple(parse_dependency_parse(pred),
                                           parse_dependency_parse(gold), sim)
            detail = {"alignment": [{"pred": i, "gold": j} for i, j in matching.pairs]}
        elif group == "events":
            _, detail = zoo.event_scores_detail(parse_event_set(pred), parse_event_set(gold))
        elif group == "coref":
            _, details = zoo.coref_scores_detail(parse_entity_set(pred), parse_entity_set(gold))
            detail = details[name]
        elif group == "ree":
            _, details = zoo.ree_scores_detail(parse_nary_relation(pred), parse_nary_relation(gold))
            detail = details[name]
        elif group == "scirex":
            _, detail = zoo.scirex_score_detail(parse_nary_relation_set(pred),
                                                parse_nary_relation_set(gold))
        elif group == "templates":
            _, detail = zoo.muc4_score_detail(parse_template_set(pred, config=config),
                                              parse_template_set(gold, config=config), config)
        elif group == "amr":
            sol = smatch_solution(AmrGraph.from_triples(_amr_triples(pred)),
                                  AmrGraph.from_triples(_amr_triples(gold)),
                                  mode=solver.mode, seed=solver.seed,
                                  node_limit=solver.node_limit)
            detail = {
                "alignment": [{"pred": i, "gold": j} for i, j in sol.item_pairs],
                "var_alignment": [[a.name, b.name] for a, b in sol.var_alignment.pairs],
                "exact": sol.exact,
            }
        else:
            raise ConfigurationError(f"unknown metric group {group!r}")
        out[name] = detail
    return out


# ---------------------------------------------------------------------------
# corpus IO

def load_corpus(text: str, source: str = "corpus") -> list[DocumentRecord]:
    """Parse a JSON Lines corpus; every line is one document object."""
    records: list[DocumentRecord] = []
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{source} line {lineno}: malformed JSON ({exc.msg})")
        if not isinstance(doc, Mapping) or not str(doc.get("doc_id", "")):
            raise DataError(f"{source} line {lineno}: document needs a nonempty doc_id")
        doc_id = str(doc["doc_id"])
        if doc_id in seen:
            raise DataError(f"{source} line {lineno}: duplicate doc_id {doc_id!r}")
        seen.add(doc_id)
        payload = {k: v for k, v in doc.items() if k != "doc_id"}
        records.append(DocumentRecord(doc_id, payload))
    return records


def join_corpora(
    pred: Sequence[DocumentRecord], gold: Sequence[DocumentRecord]
) -> list[tuple[str, Mapping, Mapping]]:
    pred_by_id = {r.doc_id: r.payload for r in pred}
    gold_ids = [r.doc_id for r in gold]
    missing = [i for i in gold_ids if i not in pred_by_id]
    extra = [r.doc_id for r in pred if r.doc_id not in set(gold_ids)]
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"missing from predictions: {missing}")
        if extra:
            parts.append(f"not in reference: {extra}")
        raise DataError("doc_id mismatch between files; " + "; ".join(parts))
    gold_by_id = {r.doc_id: r.payload for r in gold}
    return [(i, pred_by_id[i], gold_by_id[i]) for i in gold_ids]


# ---------------------------------------------------------------------------
# batch evaluation

@dataclass(frozen=True)
class RunConfig:
    """Everything one evaluation run needs."""

    metrics: tuple[str, ...] = ()
    schema: Mapping | None = None
    dataset_config: Mapping | None = None
    report: tuple[str, ...] | None = None  # None: source default
    aggregation: str | None = None  # None: schema's declared, else micro
    solver: str = "exact"
    seed: int = 0
    node_limit: int = DEFAULT_NODE_LIMIT
    jobs: int = 1

    def __post_init__(self):
        if bool(self.metrics) == bool(self.schema is not None):
            raise ConfigurationError("exactly one of metrics or schema must be given")
        if self.aggregation not in (None, "micro", "macro"):
            raise ConfigurationError(f"unknown aggregation {self.aggregation!r}")
        if self.solver not in ("exact", "hillclimb"):
            raise ConfigurationError(f"unknown solver mode {self.solver!r}")
        bad = [r for r in self.report or ()  if r not in REPORT_FIELDS]
        if bad:
            raise ConfigurationError(f"unknown report fields {bad}")


def _schema_value(payload: Mapping):
    if "value" in payload:
        return payload["value"]
    return payload


def _doc_evaluator(cfg: RunConfig) -> tuple[Callable[[Mapping, Mapping], dict[str, MetricValue]], dict]:
    solver = SolverOptions(cfg.solver, cfg.seed, cfg.node_limit)
    if cfg.schema is not None:
        schema = parse_schema(cfg.schema)
        if schema.metric is None:
            raise ConfigurationError("schema has no metric definition")
        metric = schema.metric
        report = tuple(n.value for n in metric.report)

        def evaluate(pred, gold):
            return {"schema": evaluate_metric(schema, metric, _schema_value(pred),
                                              _schema_value(gold), solver)}

        return evaluate, {"report": report, "aggregation": metric.aggregation}
    dataset = DatasetConfig.from_json(cfg.dataset_config or {})

    def evaluate(pred, gold):
        return evaluate_builtins(cfg.metrics, pred, gold, dataset, solver)

    return evaluate, {"report": REPORT_FIELDS, "aggregation": "micro"}


def run_eval(cfg: RunConfig, pred_text: str, gold_text: str) -> dict:
    """Evaluate a corpus pair and build the aggregate report."""
    pairs = join_corpora(load_corpus(pred_text, "predictions"),
                         load_corpus(gold_text, "reference"))
    evaluate, meta = _doc_evaluator(cfg)
    report_fields = tuple(cfg.report or meta["report"])
    aggregation = cfg.aggregation or meta["aggregation"]

    if cfg.jobs > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            doc_results = list(pool.map(lambda pg: evaluate(pg[1], pg[2]), pairs))
    else:
        doc_results = [evaluate(p, g) for _, p, g in pairs]

    names = list(doc_results[0].keys()) if doc_results else list(cfg.metrics) or ["schema"]
    documents = {
        doc_id: {name: doc_results[k][name].to_json(report_fields) for name in names}
        for k, (doc_id, _, _) in enumerate(pairs)
    }
    metrics: dict[str, Any] = {}
    for name in names:
        series = [res[name] for res in doc_results]
        if not series:
            continue
        if aggregation == "micro":
            merged = type(series[0]).merge(series)
            metrics[name] = merged.to_json(report_fields)
        else:
            metrics[name] = dict(macro_average(series))
    return {
        "aggregation": aggregation,
        "solver_exact": cfg.solver == "exact",
        "metrics": metrics,
        "documents": documents,
    }


def explain(cfg: RunConfig, pred_text: str, gold_text: str, doc_id: str) -> dict:
    """Witness alignments for a single document of the corpus."""
    pairs = join_corpora(load_corpus(pred_text, "predictions"),
                         load_corpus(gold_text, "reference"))
    by_id = {i: (p, g) for i, p, g in pairs}
    if doc_id not in by_id:
        raise DataError(f"unknown doc_id {doc_id!r}")
    pred, gold = by_id[doc_id]
    solver = SolverOptions(cfg.solver, cfg.seed, cfg.node_limit)
    if cfg.schema is not None:
        schema = parse_schema(cfg.schema)
        if schema.metric is None:
            raise ConfigurationError("schema has no metric definition")
        detail = {
            "schema": explain_metric(schema, schema.metric, _schema_value(pred),
                                     _schema_value(gold), solver)
        }
    else:
        dataset = DatasetConfig.from_json(cfg.dataset_config or {})
        detail = explain_builtins(cfg.metrics, pred, gold, dataset, solver)
    return {"doc_id": doc_id, "metrics": detail}
