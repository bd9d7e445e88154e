import random

import numpy as np
import pytest

from structscore import (
    MatchConstraint,
    Normalizer,
    WeightMatrix,
    match_score,
    set_similarity,
)

from oracles import assignment_oracle, constrained_match_oracle

TOL = 1e-9
ONE = MatchConstraint.ONE_TO_ONE
N1 = MatchConstraint.MANY_TO_ONE
ONE_N = MatchConstraint.ONE_TO_MANY
NN = MatchConstraint.MANY_TO_MANY

delta = lambda x, y: float(x == y)


class TestMatchScore:
    def test_identity_matrix(self):
        m = match_score(WeightMatrix(np.eye(2)), ONE)
        assert m.score == pytest.approx(2.0, abs=TOL)
        assert m.pairs == ((0, 0), (1, 1))

    def test_two_by_two(self):
        # brute force over both permutations: 0.9 + 0.8 beats 0.1 + 0.2
        w = [[0.9, 0.1], [0.2, 0.8]]
        assert assignment_oracle(w) == pytest.approx(1.7, abs=TOL)
        m = match_score(WeightMatrix(w), ONE)
        assert m.score == pytest.approx(1.7, abs=TOL)
        assert m.pairs == ((0, 0), (1, 1))

    def test_many_to_many_sums_everything(self):
        m = match_score(WeightMatrix([[0.9, 0.1], [0.2, 0.8]]), NN)
        assert m.score == pytest.approx(2.0, abs=TOL)

    def test_empty(self):
        assert match_score(WeightMatrix(np.zeros((0, 3))), ONE).score == 0.0
        assert match_score(WeightMatrix(np.zeros((0, 3))), ONE).pairs == ()

    def test_negative_weights_rejected(self):
        with pytest.raises(ValueError):
            WeightMatrix([[-0.5]])

    def test_zero_weight_pairs_dropped_from_witness(self):
        m = match_score(WeightMatrix([[0.0, 1.0], [0.0, 0.0]]), ONE)
        assert m.pairs == ((0, 1),)

    @pytest.mark.parametrize("seed", range(40))
    def test_hungarian_equals_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        rows, cols = rng.integers(1, 8, size=2)
        w = rng.random((rows, cols))
        got = match_score(WeightMatrix(w), ONE).score
        assert got == pytest.approx(assignment_oracle(w), abs=TOL)

    @pytest.mark.parametrize("constraint,tag", [(N1, "N:1"), (ONE_N, "1:N"), (NN, "N:N")])
    def test_other_constraints_equal_oracle(self, constraint, tag):
        rng = np.random.default_rng(7)
        for _ in range(25):
            w = rng.random((rng.integers(1, 6), rng.integers(1, 6)))
            got = match_score(WeightMatrix(w), constraint).score
            assert got == pytest.approx(constrained_match_oracle(w, tag), abs=TOL)

    @pytest.mark.parametrize("seed", range(30))
    def test_constraint_ordering(self, seed):
        rng = np.random.default_rng(100 + seed)
        w = WeightMatrix(rng.random((rng.integers(1, 7), rng.integers(1, 7))))
        s = {c: match_score(w, c).score for c in (ONE, N1, ONE_N, NN)}
        assert s[ONE] <= s[N1] + TOL and s[N1] <= s[NN] + TOL
        assert s[ONE] <= s[ONE_N] + TOL and s[ONE_N] <= s[NN] + TOL

    @pytest.mark.parametrize("seed", range(15))
    def test_row_removal_never_helps(self, seed):
        rng = np.random.default_rng(200 + seed)
        w = rng.random((rng.integers(2, 6), rng.integers(1, 6)))
        full = match_score(WeightMatrix(w), ONE).score
        for r in range(w.shape[0]):
            reduced = match_score(WeightMatrix(np.delete(w, r, axis=0)), ONE).score
            assert reduced <= full + TOL

    def test_witness_constraint_shapes(self):
        rng = np.random.default_rng(3)
        w = WeightMatrix(rng.random((5, 4)))
        one = match_score(w, ONE)
        assert len({i for i, _ in one.pairs}) == len(one.pairs)
        assert len({j for _, j in one.pairs}) == len(one.pairs)
        n1 = match_score(w, N1)
        assert len({i for i, _ in n1.pairs}) == len(n1.pairs)
        one_n = match_score(w, ONE_N)
        assert len({j for _, j in one_n.pairs}) == len(one_n.pairs)

    def test_witness_score_consistency(self):
        rng = np.random.default_rng(4)
        w = WeightMatrix(rng.random((6, 6)))
        for c in (ONE, N1, ONE_N, NN):
            m = match_score(w, c)
            assert m.score == pytest.approx(sum(w.weights[i, j] for i, j in m.pairs), abs=TOL)


class TestSetSimilarity:
    def test_identity_sets(self):
        s = set_similarity(list("abc"), list("abc"), delta, ONE, Normalizer.F)
        assert s.value == pytest.approx(1.0, abs=TOL)

    def test_unnormalized_is_intersection_size(self):
        s = set_similarity(list("abx"), list("abc"), delta, ONE)
        assert s.value == pytest.approx(2.0, abs=TOL)
        assert not s.normalized

    def test_nested_sets_ceaf_style(self):
        # sets-of-sets with an F-normalized inner matching; the expected
        # value comes from the brute-force bijection oracle
        from oracles import ceaf_oracle, phi4

        pred = [{"a", "b"}, {"c"}]
        gold = [{"a", "b", "c"}]
        _, _, expected_f = ceaf_oracle(pred, gold, phi4)
        assert expected_f == pytest.approx(8 / 15, abs=TOL)

        def inner(x, y):
            return set_similarity(sorted(x), sorted(y), delta, ONE, Normalizer.F)

        s = set_similarity(pred, gold, inner, ONE, Normalizer.F)
        assert s.value == pytest.approx(8 / 15, abs=TOL)

    @pytest.mark.parametrize("seed", range(10))
    def test_score_symmetry_with_symmetric_inner(self, seed):
        rng = random.Random(seed)
        pool = "abcdef"
        p = [rng.choice(pool) for _ in range(rng.randrange(0, 6))]
        r = [rng.choice(pool) for _ in range(rng.randrange(0, 6))]
        assert set_similarity(p, r, delta, ONE).value == pytest.approx(
            set_similarity(r, p, delta, ONE).value, abs=TOL
        )

    @pytest.mark.parametrize("seed", range(10))
    def test_delta_matching_is_multiset_intersection(self, seed):
        rng = random.Random(100 + seed)
        pool = "abcd"
        p = [rng.choice(pool) for _ in range(rng.randrange(0, 7))]
        r = [rng.choice(pool) for _ in range(rng.randrange(0, 7))]
        expected = sum(min(p.count(c), r.count(c)) for c in pool)
        assert set_similarity(p, r, delta, ONE).value == pytest.approx(expected, abs=TOL)
