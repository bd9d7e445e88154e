import random

import pytest

from structscore import (
    AmrGraph,
    MatchConstraint,
    Prop,
    SolverResourceError,
    VarId,
    WeightMatrix,
    build_ilp,
    match_score,
    smatch,
    solve_ilp,
)

from oracles import latent_oracle

TOL = 1e-9
ONE = MatchConstraint.ONE_TO_ONE


def lib_items(oracle_items):
    """Oracle items use '?'-prefixed strings for variables; the library
    uses VarId objects. Same problem, two encodings."""
    out = []
    for item in oracle_items:
        conv = dict(item)
        for key, value in conv.items():
            if isinstance(value, str) and value.startswith("?"):
                conv[key] = VarId(value)
        out.append(conv)
    return out


def rel_upper(u, v):
    return 1.0 if u["rel"] == v["rel"] else 0.0


class TestBuildIlp:
    def test_smallest_instance(self):
        pred = [{"rel": "r", "x": VarId("?a"), "c": 1}]
        ref = [{"rel": "r", "x": VarId("?b"), "c": 1}]
        inst = build_ilp(pred, ref, rel_upper, ["x"], ONE)
        assert len(inst.item_pairs) == 1
        assert len(inst.var_pairs) == 1
        assert len(inst.implications) == 1

    def test_row_constraints_present_for_all_rows(self):
        pred = [
            {"rel": "r", "x": VarId("?a")},
            {"rel": "r", "x": VarId("?b")},
        ]
        ref = [{"rel": "r", "x": VarId("?c")}]
        inst = build_ilp(pred, ref, rel_upper, ["x"], ONE)
        rows = {c[1] for c in inst.constraints if c[0] == "item_row_at_most_one"}
        assert rows == {0, 1}
        cols = {c[1] for c in inst.constraints if c[0] == "item_col_at_most_one"}
        assert cols == {0}

    def test_all_zero_upper_prunes_everything(self):
        pred = [{"rel": "r", "x": VarId("?a")}]
        ref = [{"rel": "s", "x": VarId("?b")}]
        inst = build_ilp(pred, ref, rel_upper, ["x"], ONE)
        assert inst.item_pairs == ()
        assert solve_ilp(inst).score == 0.0

    def test_var_vs_constant_is_pruned(self):
        pred = [{"rel": "r", "x": VarId("?a")}]
        ref = [{"rel": "r", "x": "boy"}]
        inst = build_ilp(pred, ref, rel_upper, ["x"], ONE)
        assert inst.item_pairs == ()

    def test_constants_compare_by_equality(self):
        pred = [{"rel": "r", "x": "boy"}]
        ref = [{"rel": "r", "x": "boy"}, {"rel": "r", "x": "girl"}]
        inst = build_ilp(pred, ref, rel_upper, ["x"], ONE)
        assert inst.item_pairs == ((0, 0),)

    def test_missing_field_is_schema_error(self):
        from structscore import SchemaError

        with pytest.raises(SchemaError):
            build_ilp([{"rel": "r"}], [{"rel": "r"}], rel_upper, ["x"], ONE)


def random_instance(rng, max_vars=4, max_items=5):
    variables = [f"?v{i}" for i in range(rng.randrange(1, max_vars + 1))]
    rels = ["a", "b", "c"]
    consts = ["boy", "girl"]

    def item():
        pick = lambda: rng.choice(variables) if rng.random() < 0.7 else rng.choice(consts)
        return {"rel": rng.choice(rels), "s": pick(), "o": pick()}

    pred = [item() for _ in range(rng.randrange(1, max_items + 1))]
    ref = [item() for _ in range(rng.randrange(1, max_items + 1))]
    return pred, ref


class TestSolveIlp:
    @pytest.mark.parametrize("constraint,tag", [
        (ONE, "1:1"),
        (MatchConstraint.MANY_TO_ONE, "N:1"),
        (MatchConstraint.ONE_TO_MANY, "1:N"),
        (MatchConstraint.MANY_TO_MANY, "N:N"),
    ])
    def test_exact_equals_enumeration(self, constraint, tag):
        rng = random.Random(hash(tag) & 0xFFFF)
        for _ in range(25):
            pred, ref = random_instance(rng)
            expected = latent_oracle(pred, ref, rel_upper, ["s", "o"], tag)
            inst = build_ilp(lib_items(pred), lib_items(ref), rel_upper, ["s", "o"], constraint)
            sol = solve_ilp(inst)
            assert sol.exact
            assert sol.score == pytest.approx(expected, abs=TOL)

    def test_hillclimb_is_a_lower_bound(self):
        rng = random.Random(42)
        for _ in range(20):
            pred, ref = random_instance(rng)
            inst = build_ilp(lib_items(pred), lib_items(ref), rel_upper, ["s", "o"], ONE)
            exact = solve_ilp(inst, mode="exact")
            climbed = solve_ilp(inst, mode="hillclimb", seed=1)
            assert not climbed.exact
            assert climbed.score <= exact.score + TOL

    def test_hillclimb_finds_optimum_on_small_instances(self):
        rng = random.Random(2718)
        for _ in range(30):
            pred, ref = random_instance(rng, max_vars=2, max_items=3)
            inst = build_ilp(lib_items(pred), lib_items(ref), rel_upper, ["s", "o"], ONE)
            exact = solve_ilp(inst, mode="exact")
            climbed = solve_ilp(inst, mode="hillclimb", seed=5)
            assert climbed.score == pytest.approx(exact.score, abs=TOL)

    def test_no_latent_fields_degenerates_to_assignment(self):
        rng = random.Random(7)
        for _ in range(10):
            pred = [{"rel": rng.choice("abc")} for _ in range(rng.randrange(1, 5))]
            ref = [{"rel": rng.choice("abc")} for _ in range(rng.randrange(1, 5))]
            inst = build_ilp(pred, ref, rel_upper, [], ONE)
            w = WeightMatrix([[rel_upper(u, v) for v in ref] for u in pred])
            assert solve_ilp(inst).score == pytest.approx(match_score(w, ONE).score, abs=TOL)

    def test_admissible_bound_holds(self):
        rng = random.Random(11)
        for _ in range(20):
            pred, ref = random_instance(rng)
            inst = build_ilp(lib_items(pred), lib_items(ref), rel_upper, ["s", "o"], ONE)
            row_bound = sum(
                max((inst.objective[k] for k, (i, _) in enumerate(inst.item_pairs) if i == u), default=0.0)
                for u in range(inst.n_rows)
            )
            assert solve_ilp(inst).score <= row_bound + TOL

    def test_node_limit_raises(self):
        # the optimum is only reachable by aligning a variable, which
        # takes at least one branch beyond the root node
        pred = [{"rel": "instance", "s": VarId("?x"), "o": "boy"}]
        ref = [{"rel": "instance", "s": VarId("?z"), "o": "boy"}]
        inst = build_ilp(pred, ref, rel_upper, ["s"], ONE)
        with pytest.raises(SolverResourceError):
            solve_ilp(inst, node_limit=1)
        assert solve_ilp(inst, node_limit=100).score == pytest.approx(1.0, abs=TOL)

    def test_var_alignment_is_injective(self):
        rng = random.Random(13)
        for _ in range(10):
            pred, ref = random_instance(rng)
            inst = build_ilp(lib_items(pred), lib_items(ref), rel_upper, ["s", "o"], ONE)
            sol = solve_ilp(inst)
            left = [a for a, _ in sol.var_alignment.pairs]
            right = [b for _, b in sol.var_alignment.pairs]
            assert len(set(left)) == len(left) and len(set(right)) == len(right)


def graph_of(*triples):
    return AmrGraph.from_triples(list(triples))


class TestSmatch:
    def test_identical_graphs(self):
        g = graph_of(
            {"rel": "instance", "subj": "x", "obj": {"concept": "want-01"}},
            {"rel": "ARG0", "subj": "x", "obj": {"var": "y"}},
            {"rel": "instance", "subj": "y", "obj": {"concept": "boy"}},
        )
        assert smatch(g, g).f1 == pytest.approx(1.0, abs=TOL)

    def test_renaming_invariance(self):
        a = graph_of(
            {"rel": "instance", "subj": "x", "obj": {"concept": "want-01"}},
            {"rel": "ARG0", "subj": "x", "obj": {"var": "y"}},
            {"rel": "instance", "subj": "y", "obj": {"concept": "boy"}},
        )
        b = graph_of(
            {"rel": "instance", "subj": "n1", "obj": {"concept": "want-01"}},
            {"rel": "ARG0", "subj": "n1", "obj": {"var": "n2"}},
            {"rel": "instance", "subj": "n2", "obj": {"concept": "boy"}},
        )
        assert smatch(b, a).f1 == pytest.approx(1.0, abs=TOL)

    def test_two_boys_vs_one(self):
        pred = graph_of(
            {"rel": "instance", "subj": "x", "obj": {"concept": "boy"}},
            {"rel": "instance", "subj": "y", "obj": {"concept": "boy"}},
        )
        ref = graph_of({"rel": "instance", "subj": "z", "obj": {"concept": "boy"}})
        result = smatch(pred, ref)
        assert result.precision == pytest.approx(0.5, abs=TOL)
        assert result.recall == pytest.approx(1.0, abs=TOL)
        assert result.f1 == pytest.approx(2 / 3, abs=TOL)

    def test_undeclared_variable_rejected(self):
        from structscore import DataError

        with pytest.raises(DataError):
            AmrGraph(
                props=frozenset({Prop("instance", VarId("x"), "boy")}),
                variables=frozenset(),
            )

    def test_scalar_objects_are_concepts(self):
        g = graph_of({"rel": "instance", "subj": "x", "obj": "boy"})
        h = graph_of({"rel": "instance", "subj": "q", "obj": {"concept": "boy"}})
        assert smatch(g, h).f1 == pytest.approx(1.0, abs=TOL)
