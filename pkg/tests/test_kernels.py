import random

import numpy as np
import pytest

from structscore import (
    ConfigurationError,
    GramMatrix,
    MatchConstraint,
    Normalizer,
    gram,
    is_psd,
    is_strong,
    jacobi_eigenvalues,
    set_similarity,
)

from oracles import eigvals_oracle

delta = lambda x, y: float(x == y)
ONE = MatchConstraint.ONE_TO_ONE


def random_sets(rng, count=12, pool="abcdefgh"):
    return [frozenset(rng.sample(pool, rng.randrange(0, 5))) for _ in range(count)]


def f_delta(x, y):
    return set_similarity(sorted(x), sorted(y), delta, ONE, Normalizer.F).value


def j_delta(x, y):
    return set_similarity(sorted(x), sorted(y), delta, ONE, Normalizer.JACCARD).value


def sigma_delta(x, y):
    return set_similarity(sorted(x), sorted(y), delta, ONE).value


class TestGram:
    def test_distinct_items_identity(self):
        g = gram(["a", "b", "c"], delta)
        assert np.array_equal(g.entries, np.eye(3))

    def test_duplicate_adds_symmetric_ones(self):
        g = gram(["a", "b", "a"], delta)
        assert g.entries[0, 2] == 1.0 and g.entries[2, 0] == 1.0

    def test_symmetric_unit_diagonal_for_f_match(self):
        rng = random.Random(0)
        items = random_sets(rng, count=8)
        g = gram(items, f_delta)
        assert np.allclose(g.entries, g.entries.T, atol=1e-9)
        assert np.allclose(np.diag(g.entries), 1.0)

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            GramMatrix(2, np.zeros((3, 3)))


class TestJacobi:
    def test_analytic_two_by_two(self):
        eigs = jacobi_eigenvalues(np.array([[1.0, 2.0], [2.0, 1.0]]))
        assert eigs == pytest.approx([-1.0, 3.0], abs=1e-9)

    @pytest.mark.parametrize("n", [1, 2, 5, 10, 20])
    def test_matches_numpy_on_random_symmetric(self, n):
        rng = np.random.default_rng(n)
        a = rng.standard_normal((n, n))
        sym = (a + a.T) / 2
        got = jacobi_eigenvalues(sym)
        assert got == pytest.approx(eigvals_oracle(sym), abs=1e-8)


class TestIsPsd:
    def test_identity(self):
        assert is_psd(GramMatrix(3, np.eye(3)))

    def test_indefinite_two_by_two(self):
        assert not is_psd(GramMatrix(2, np.array([[1.0, 2.0], [2.0, 1.0]])))

    def test_asymmetry_is_an_error(self):
        with pytest.raises(ConfigurationError):
            is_psd(GramMatrix(2, np.array([[1.0, 0.5], [0.0, 1.0]])))

    def test_constructed_counterexample_rejected(self):
        # similarity that is symmetric but not PSD: off-diagonal exceeds 1
        bad = np.ones((3, 3)) + 2 * (1 - np.eye(3))
        assert not is_psd(GramMatrix(3, bad))


class TestIsStrong:
    def test_delta_is_strong(self):
        assert is_strong(["a", "b", "a"], delta)

    def test_phi3_is_strong(self):
        rng = random.Random(1)
        assert is_strong(random_sets(rng), lambda x, y: float(len(x & y)))

    def test_broken_similarity_detected(self):
        broken = lambda x, y: 2.0 if x != y else 1.0
        assert not is_strong(["a", "b"], broken)

    @pytest.mark.parametrize("sim", [f_delta, j_delta, sigma_delta], ids=["F", "J", "Sigma"])
    def test_normalized_matchers_are_strong(self, sim):
        rng = random.Random(21)
        assert is_strong(random_sets(rng), sim)


class TestKernelLemmas:
    """Gram matrices of the framework's normalized matchers stay PSD."""

    @pytest.mark.parametrize("sim", [f_delta, j_delta, sigma_delta], ids=["F", "J", "Sigma"])
    def test_matching_kernels_are_psd(self, sim):
        for seed in range(4):
            rng = random.Random(seed)
            g = gram(random_sets(rng, count=10), sim)
            assert is_psd(g, tol=1e-8)

    def test_product_of_deltas_is_psd(self):
        rng = random.Random(9)
        items = [(rng.choice("ab"), rng.randrange(0, 3)) for _ in range(12)]
        sim = lambda x, y: delta(x[0], y[0]) * delta(x[1], y[1])
        assert is_psd(gram(items, sim), tol=1e-8)

    def test_unconstrained_sum_kernel_is_psd(self):
        rng = random.Random(10)
        sim = lambda x, y: set_similarity(
            sorted(x), sorted(y), delta, MatchConstraint.MANY_TO_MANY
        ).value
        assert is_psd(gram(random_sets(rng, count=10), sim), tol=1e-8)
