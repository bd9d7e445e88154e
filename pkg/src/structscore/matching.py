"""Maximum-weight matching of two collections under cardinality constraints.

The matching score between predicted and reference collections is the
best total weight of a bipartite matching whose shape is governed by a
constraint: 1:1 (partial bijection, solved by the Hungarian method),
N:1 / 1:N (partial function one way, solved by row/column maxima), or
N:N (any relation; with nonnegative weights the full edge set wins).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ConfigurationError
from .similarity import Normalizer, OverlapTriple, SimScore, normalize

# weights below this are noise and never appear in witness pair sets
WITNESS_EPS = 1e-12


class MatchConstraint(Enum):
    ONE_TO_ONE = "1:1"
    MANY_TO_ONE = "N:1"
    ONE_TO_MANY = "1:N"
    MANY_TO_MANY = "N:N"

    @classmethod
    def parse(cls, text: str) -> "MatchConstraint":
        aliases = {
            "1:1": cls.ONE_TO_ONE,
            "<->": cls.ONE_TO_ONE,
            "onetoone": cls.ONE_TO_ONE,
            "n:1": cls.MANY_TO_ONE,
            "->": cls.MANY_TO_ONE,
            "manytoone": cls.MANY_TO_ONE,
            "1:n": cls.ONE_TO_MANY,
            "<-": cls.ONE_TO_MANY,
            "onetomany": cls.ONE_TO_MANY,
            "n:n": cls.MANY_TO_MANY,
            "~": cls.MANY_TO_MANY,
            "manytomany": cls.MANY_TO_MANY,
        }
        key = text.strip().lower()
        if key not in aliases:
            raise ConfigurationError(f"unknown matching constraint {text!r}")
        return aliases[key]

    @property
    def limits_rows(self) -> bool:
        return self in (MatchConstraint.ONE_TO_ONE, MatchConstraint.MANY_TO_ONE)

    @property
    def limits_cols(self) -> bool:
        return self in (MatchConstraint.ONE_TO_ONE, MatchConstraint.ONE_TO_MANY)


class WeightMatrix:
    """Immutable |P| x |R| matrix of pairwise similarity weights."""

    __slots__ = ("weights",)

    def __init__(self, weights):
        arr = np.asarray(weights, dtype=float)
        if arr.size == 0:
            arr = arr.reshape((arr.shape[0] if arr.ndim else 0, 0))
        if arr.ndim != 2:
            raise ValueError("weight matrix must be two-dimensional")
        if arr.size and float(arr.min()) < 0:
            raise ValueError("matching weights must be nonnegative")
        arr.setflags(write=False)
        self.weights = arr

    @property
    def rows(self) -> int:
        return self.weights.shape[0]

    @property
    def cols(self) -> int:
        return self.weights.shape[1]

    @classmethod
    def build(cls, pred: Sequence, ref: Sequence, inner: Callable) -> "WeightMatrix":
        arr = np.zeros((len(pred), len(ref)))
        for i, u in enumerate(pred):
            for j, v in enumerate(ref):
                arr[i, j] = float(inner(u, v))
        return cls(arr)


@dataclass(frozen=True)
class Matching:
    """A constraint-satisfying pair set and its total weight."""

    pairs: tuple[tuple[int, int], ...]
    score: float


def _witness(weights: np.ndarray, pairs) -> Matching:
    kept = tuple(sorted((i, j) for i, j in pairs if weights[i, j] > WITNESS_EPS))
    return Matching(kept, float(sum(weights[i, j] for i, j in kept)))


def match_score(w: WeightMatrix, c: MatchConstraint) -> Matching:
    """Best matching of the weight matrix under the given constraint.

    1:1 runs the Hungarian method (rectangular matrices are handled by
    the solver directly); N:1 takes each row's best column, 1:N each
    column's best row, and N:N the whole edge set. Near-zero pairs are
    dropped from the witness; they cannot change the score.
    """
    weights = w.weights
    if weights.size == 0:
        return Matching((), 0.0)
    if c is MatchConstraint.ONE_TO_ONE:
        rows, cols = linear_sum_assignment(weights, maximize=True)
        return _witness(weights, zip(rows.tolist(), cols.tolist()))
    if c is MatchConstraint.MANY_TO_ONE:
        best = np.argmax(weights, axis=1)
        return _witness(weights, ((i, int(best[i])) for i in range(w.rows)))
    if c is MatchConstraint.ONE_TO_MANY:
        best = np.argmax(weights, axis=0)
        return _witness(weights, ((int(best[j]), j) for j in range(w.cols)))
    nz = np.argwhere(weights > WITNESS_EPS)
    pairs = tuple((int(i), int(j)) for i, j in nz)
    return Matching(pairs, float(sum(weights[i, j] for i, j in pairs)))


def self_overlap(items: Sequence, inner: Callable) -> float:
    """Sum of self-similarities, the denominator of every set score.

    The diagonal matching is optimal whenever the inner similarity is
    strong (phi(x, x) >= phi(x, y)); for anything else this sum is the
    *definition* of the self-overlap denominator.
    """
    return float(sum(float(inner(x, x)) for x in items))


def set_match_triple(
    pred: Sequence,
    ref: Sequence,
    inner: Callable,
    c: MatchConstraint = MatchConstraint.ONE_TO_ONE,
) -> tuple[OverlapTriple, Matching]:
    """Overlap triple plus witness matching for two collections."""
    w = WeightMatrix.build(pred, ref, inner)
    matching = match_score(w, c)
    triple = OverlapTriple(
        matching.score, self_overlap(pred, inner), self_overlap(ref, inner)
    )
    return triple, matching


def set_similarity(
    pred: Sequence,
    ref: Sequence,
    inner: Callable,
    c: MatchConstraint = MatchConstraint.ONE_TO_ONE,
    n: Normalizer | None = None,
) -> SimScore:
    """Matching score between two collections, optionally normalized.

    Without a normalizer this is the raw overlap sum; with one, the
    self-overlaps of each side become the denominators.
    """
    triple, _ = set_match_triple(pred, ref, inner, c)
    if n is None:
        return SimScore(triple.sigma_pr, normalized=False)
    return normalize(n, triple)
