import json
import random

import pytest

from structscore import (
    ConfigurationError,
    DataError,
    RunConfig,
    SolverResourceError,
    builtin_schema,
    load_corpus,
    run_eval,
)
from structscore.corpus import explain, join_corpora
from structscore.report import MetricResult

from generators import payload_pair

TOL = 1e-9


def jsonl(docs):
    return "\n".join(json.dumps(d) for d in docs) + "\n"


REL_DOC = {
    "doc_id": "d1",
    "relations": [
        {"type": "t", "subj": {"left": 0, "right": 1}, "obj": {"left": 2, "right": 3}},
        {"type": "u", "subj": {"left": 4, "right": 5}, "obj": {"left": 6, "right": 7}},
    ],
}


class TestLoadCorpus:
    def test_two_line_file(self):
        text = jsonl([{"doc_id": "a", "x": 1}, {"doc_id": "b", "x": 2}])
        records = load_corpus(text)
        assert [r.doc_id for r in records] == ["a", "b"]
        assert records[0].payload == {"x": 1}

    def test_malformed_line_number(self):
        text = '{"doc_id": "a"}\nnot json\n'
        with pytest.raises(DataError) as err:
            load_corpus(text)
        assert "line 2" in str(err.value)

    def test_missing_doc_id(self):
        with pytest.raises(DataError):
            load_corpus('{"x": 1}\n')

    def test_duplicate_doc_id(self):
        with pytest.raises(DataError) as err:
            load_corpus(jsonl([{"doc_id": "a"}, {"doc_id": "a"}]))
        assert "duplicate" in str(err.value)

    def test_join_reports_missing_ids(self):
        pred = load_corpus(jsonl([{"doc_id": "a"}]))
        gold = load_corpus(jsonl([{"doc_id": "a"}, {"doc_id": "b"}]))
        with pytest.raises(DataError) as err:
            join_corpora(pred, gold)
        assert "b" in str(err.value)

    def test_empty_corpus(self):
        assert load_corpus("") == []
        cfg = RunConfig(metrics=("rel_f1",))
        report = run_eval(cfg, "", "")
        assert report["metrics"] == {} and report["documents"] == {}


class TestRunEval:
    def test_identity_corpus_all_ones(self):
        text = jsonl([REL_DOC])
        report = run_eval(RunConfig(metrics=("rel_f1",)), text, text)
        assert report["metrics"]["rel_f1"]["F"] == 1.0
        assert report["documents"]["d1"]["rel_f1"]["P"] == 1.0

    def test_config_requires_exactly_one_source(self):
        with pytest.raises(ConfigurationError):
            RunConfig(metrics=("rel_f1",), schema=builtin_schema("rel_f1"))
        with pytest.raises(ConfigurationError):
            RunConfig()

    def test_micro_recomputable_from_doc_triples(self):
        rng = random.Random(5)
        docs_pred, docs_gold = [], []
        for i in range(6):
            pred, gold = payload_pair("rel_f1", rng)
            docs_pred.append({"doc_id": f"d{i}", **pred})
            docs_gold.append({"doc_id": f"d{i}", **gold})
        report = run_eval(RunConfig(metrics=("rel_f1",)), jsonl(docs_pred), jsonl(docs_gold))
        merged = MetricResult.merge(
            MetricResult(
                d["rel_f1"]["sigma_pr"], d["rel_f1"]["sigma_pp"], d["rel_f1"]["sigma_rr"]
            )
            for d in report["documents"].values()
        )
        agg = report["metrics"]["rel_f1"]
        assert agg["sigma_pr"] == pytest.approx(merged.sigma_pr, abs=TOL)
        assert agg["P"] == pytest.approx(merged.precision, abs=TOL)
        assert agg["F"] == pytest.approx(merged.f1, abs=TOL)

    def test_macro_averages_documents(self):
        pred = jsonl([{"doc_id": "a", "relations": REL_DOC["relations"]},
                      {"doc_id": "b", "relations": []}])
        gold = jsonl([{"doc_id": "a", "relations": REL_DOC["relations"]},
                      {"doc_id": "b", "relations": REL_DOC["relations"]}])
        report = run_eval(RunConfig(metrics=("rel_f1",), aggregation="macro"), pred, gold)
        # doc a scores 1, doc b scores 0: macro F is exactly 1/2
        assert report["metrics"]["rel_f1"]["F"] == pytest.approx(0.5, abs=TOL)
        assert report["aggregation"] == "macro"

    def test_schema_route(self):
        schema = builtin_schema("rel_f1")
        docs = jsonl([{"doc_id": "d", "value": REL_DOC["relations"]}])
        report = run_eval(RunConfig(schema=schema), docs, docs)
        assert report["metrics"]["schema"]["F"] == 1.0

    def test_determinism_across_runs(self):
        rng = random.Random(11)
        docs_pred, docs_gold = [], []
        for i in range(4):
            pred, gold = payload_pair("smatch", rng)
            docs_pred.append({"doc_id": f"d{i}", **pred})
            docs_gold.append({"doc_id": f"d{i}", **gold})
        cfg = RunConfig(metrics=("smatch",), seed=7)
        a = json.dumps(run_eval(cfg, jsonl(docs_pred), jsonl(docs_gold)), sort_keys=True)
        b = json.dumps(run_eval(cfg, jsonl(docs_pred), jsonl(docs_gold)), sort_keys=True)
        assert a == b

    def test_jobs_do_not_change_results(self):
        rng = random.Random(13)
        docs_pred, docs_gold = [], []
        for i in range(6):
            pred, gold = payload_pair("ceaf_phi4", rng)
            docs_pred.append({"doc_id": f"d{i}", **pred})
            docs_gold.append({"doc_id": f"d{i}", **gold})
        serial = run_eval(RunConfig(metrics=("ceaf_phi4",)), jsonl(docs_pred), jsonl(docs_gold))
        parallel = run_eval(RunConfig(metrics=("ceaf_phi4",), jobs=4), jsonl(docs_pred), jsonl(docs_gold))
        assert json.dumps(serial, sort_keys=True) == json.dumps(parallel, sort_keys=True)

    def test_unknown_metric(self):
        with pytest.raises(ConfigurationError):
            run_eval(RunConfig(metrics=("nope",)), jsonl([{"doc_id": "d"}]), jsonl([{"doc_id": "d"}]))

    EMPTY_PAYLOADS = {
        "relations": {"relations": []},
        "dependencies": {"edges": []},
        "events": {"events": []},
        "coref": {"entities": []},
        "ree": {"type": "t", "args": []},
        "scirex": {"relations": []},
        "templates": {"templates": []},
        "amr": {"props": []},
    }

    def test_every_listed_metric_is_reachable(self):
        from structscore import BUILTIN_METRICS, list_metrics

        listed = {m["name"] for m in list_metrics()}
        assert listed == set(BUILTIN_METRICS)
        for name, spec in BUILTIN_METRICS.items():
            doc = {"doc_id": "d", **self.EMPTY_PAYLOADS[spec.group]}
            report = run_eval(RunConfig(metrics=(name,)), jsonl([doc]), jsonl([doc]))
            entry = report["metrics"][name]
            # both sides empty: perfect by convention
            assert entry.get("F", entry.get("score")) == 1.0, name

    def test_solver_limit_propagates(self):
        doc = {"doc_id": "d", "props": [
            {"rel": "instance", "subj": "x", "obj": {"concept": "boy"}},
            {"rel": "ARG0", "subj": "x", "obj": {"var": "y"}},
        ]}
        text = jsonl([doc])
        with pytest.raises(SolverResourceError):
            run_eval(RunConfig(metrics=("smatch",), node_limit=1), text, text)
        report = run_eval(RunConfig(metrics=("smatch",), solver="hillclimb", node_limit=1), text, text)
        assert report["solver_exact"] is False

    def test_better_granular_report_shape(self):
        pred = jsonl([
            {"doc_id": "d", "templates": [
                {"type": "atk", "fillers": [{"slot": "incident", "value": "bombing"}]}
            ]}
        ])
        report = run_eval(RunConfig(metrics=("better_granular", "muc4")), pred, pred)
        bg = report["metrics"]["better_granular"]
        assert bg["score"] == pytest.approx(1.0, abs=TOL)
        assert bg["type"]["F"] == 1.0 and bg["slots"]["F"] == 1.0
        assert report["metrics"]["muc4"]["F"] == 1.0


class TestExplain:
    def test_identity_alignment_is_diagonal(self):
        text = jsonl([REL_DOC])
        result = explain(RunConfig(metrics=("rel_f1",)), text, text, "d1")
        pairs = result["metrics"]["rel_f1"]["alignment"]
        assert pairs == [{"pred": 0, "gold": 0}, {"pred": 1, "gold": 1}]

    def test_ceaf_example_alignment(self):
        pred = jsonl([{"doc_id": "d", "entities": [[ "a", "b"], ["c"]]}])
        gold = jsonl([{"doc_id": "d", "entities": [["a", "b", "c"]]}])
        result = explain(RunConfig(metrics=("ceaf_phi4",)), pred, gold, "d")
        assert result["metrics"]["ceaf_phi4"]["alignment"] == [{"pred": 0, "gold": 0}]

    def test_empty_pred_empty_alignment(self):
        pred = jsonl([{"doc_id": "d", "entities": []}])
        gold = jsonl([{"doc_id": "d", "entities": [["a"]]}])
        result = explain(RunConfig(metrics=("ceaf_phi4",)), pred, gold, "d")
        assert result["metrics"]["ceaf_phi4"]["alignment"] == []

    def test_unknown_doc_id(self):
        text = jsonl([REL_DOC])
        with pytest.raises(DataError):
            explain(RunConfig(metrics=("rel_f1",)), text, text, "missing")

    def test_smatch_var_alignment(self):
        doc = jsonl([{"doc_id": "d", "props": [
            {"rel": "instance", "subj": "x", "obj": {"concept": "boy"}}
        ]}])
        gold = jsonl([{"doc_id": "d", "props": [
            {"rel": "instance", "subj": "z", "obj": {"concept": "boy"}}
        ]}])
        result = explain(RunConfig(metrics=("smatch",)), doc, gold, "d")
        assert result["metrics"]["smatch"]["var_alignment"] == [["x", "z"]]

    def test_schema_smatch_explain_has_var_alignment(self):
        schema = builtin_schema("smatch")
        pred = jsonl([{"doc_id": "d", "value": [
            {"rel": "instance", "subj": {"var": "x"}, "obj": {"concept": "boy"}}
        ]}])
        gold = jsonl([{"doc_id": "d", "value": [
            {"rel": "instance", "subj": {"var": "z"}, "obj": {"concept": "boy"}}
        ]}])
        result = explain(RunConfig(schema=schema), pred, gold, "d")
        detail = result["metrics"]["schema"]
        assert detail["var_alignment"] == [["x", "z"]]
        assert detail["exact"] is True

    def test_corpus_scaling_is_linear_enough(self):
        rng = random.Random(17)
        docs = []
        for i in range(500):
            payload, _ = payload_pair("rel_f1", rng)
            docs.append({"doc_id": f"d{i}", **payload})
        text = jsonl(docs)
        import time

        start = time.perf_counter()
        report = run_eval(RunConfig(metrics=("rel_f1",)), text, text)
        elapsed = time.perf_counter() - start
        assert len(report["documents"]) == 500
        assert elapsed < 10.0

    def test_schema_explain_nested(self):
        schema = builtin_schema("ceaf_phi4")
        pred = jsonl([{"doc_id": "d", "value": [
            [{"left": 1, "right": 1}, {"left": 2, "right": 2}], [{"left": 3, "right": 3}]
        ]}])
        gold = jsonl([{"doc_id": "d", "value": [
            [{"left": 1, "right": 1}, {"left": 2, "right": 2}, {"left": 3, "right": 3}]
        ]}])
        result = explain(RunConfig(schema=schema), pred, gold, "d")
        pairs = result["metrics"]["schema"]["pairs"]
        assert pairs[0]["pred"] == 0 and pairs[0]["gold"] == 0
        assert "inner" in pairs[0]
