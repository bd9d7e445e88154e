"""Order-preserving matching of sequences, DAGs, and directed graphs.

A matching between ordered collections must preserve both sides'
order relations: matched pairs (u, v), (u', v') require u preceding u'
iff v precedes v'. For total orders this is weighted longest common
subsequence, solved by dynamic programming; for partial orders and
preorders the pairwise consistency conditions are enforced by the same
branch-and-bound engine the latent matcher uses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .bnb import DEFAULT_NODE_LIMIT, NodeBudget, depth_first_maximize
from .errors import ConfigurationError, DataError
from .matching import WITNESS_EPS, MatchConstraint, Matching

DEFAULT_MAX_ITEMS = 50


class OrderKind(Enum):
    TOTAL = "total"
    PARTIAL = "partial"
    PREORDER = "preorder"


def _closure(n: int, pairs) -> np.ndarray:
    reach = np.eye(n, dtype=bool)
    for i, j in pairs:
        if not (0 <= i < n and 0 <= j < n):
            raise DataError(f"order pair ({i}, {j}) out of range for {n} items")
        reach[i, j] = True
    for k in range(n):
        reach |= reach[:, k : k + 1] & reach[k : k + 1, :]
    return reach


@dataclass(frozen=True)
class OrderedCollection:
    """Items plus the reflexive-transitive closure of their order.

    Total orders take their order from list position and must not pass
    explicit pairs; partial orders must be antisymmetric after closure;
    preorders have no antisymmetry requirement.
    """

    items: tuple
    order_kind: OrderKind
    order_pairs: frozenset[tuple[int, int]]
    reach: np.ndarray = field(compare=False, repr=False, default=None)

    def __post_init__(self):
        n = len(self.items)
        if self.order_kind is OrderKind.TOTAL:
            if self.order_pairs:
                raise DataError("total orders take their order from list position")
            reach = np.triu(np.ones((n, n), dtype=bool))
            closed = frozenset((i, j) for i in range(n) for j in range(i, n))
        else:
            reach = _closure(n, self.order_pairs)
            if self.order_kind is OrderKind.PARTIAL:
                both = reach & reach.T
                if bool((both & ~np.eye(n, dtype=bool)).any()):
                    raise DataError("partial order has a cycle (antisymmetry violated)")
            closed = frozenset((int(i), int(j)) for i, j in np.argwhere(reach))
        reach.setflags(write=False)
        object.__setattr__(self, "order_pairs", closed)
        object.__setattr__(self, "reach", reach)

    def precedes(self, i: int, j: int) -> bool:
        return bool(self.reach[i, j])

    @classmethod
    def total(cls, items: Sequence) -> "OrderedCollection":
        return cls(tuple(items), OrderKind.TOTAL, frozenset())

    @classmethod
    def from_pairs(cls, items: Sequence, kind: OrderKind, pairs) -> "OrderedCollection":
        return cls(tuple(items), kind, frozenset((int(i), int(j)) for i, j in pairs))

    @classmethod
    def from_json(cls, doc: dict, path: str = "$") -> "OrderedCollection":
        if not isinstance(doc, dict) or "items" not in doc:
            raise DataError("expected an object with items/order/kind", path)
        try:
            kind = OrderKind(doc.get("kind", "total"))
        except ValueError:
            raise DataError(f"unknown order kind {doc.get('kind')!r}", path) from None
        pairs = doc.get("order", [])
        checked = []
        for k, pair in enumerate(pairs):
            try:
                i, j = pair
                checked.append((int(i), int(j)))
            except (TypeError, ValueError):
                raise DataError(f"order entry {pair!r} is not an [i, j] pair", f"{path}.order[{k}]") from None
        if kind is OrderKind.TOTAL:
            return cls.total(doc["items"]) if not checked else cls(tuple(doc["items"]), kind, frozenset(checked))
        return cls.from_pairs(doc["items"], kind, checked)


def _weights(pred: OrderedCollection, ref: OrderedCollection, inner: Callable) -> np.ndarray:
    w = np.zeros((len(pred.items), len(ref.items)))
    for i, u in enumerate(pred.items):
        for j, v in enumerate(ref.items):
            w[i, j] = float(inner(u, v))
    if w.size and float(w.min()) < 0:
        raise ValueError("matching weights must be nonnegative")
    return w


def seq_match_score(
    pred: OrderedCollection, ref: OrderedCollection, inner: Callable
) -> Matching:
    """Maximum-weight strictly monotonic matching of two sequences.

    Weighted LCS: dynamic program over the |P| x |R| grid. Ties break
    toward the lexicographically smallest pair set.
    """
    if pred.order_kind is not OrderKind.TOTAL or ref.order_kind is not OrderKind.TOTAL:
        raise ConfigurationError("seq_match_score requires total orders on both sides")
    w = _weights(pred, ref, inner)
    m, n = w.shape
    best = np.zeros((m + 1, n + 1))
    for i in range(m - 1, -1, -1):
        for j in range(n - 1, -1, -1):
            best[i, j] = max(best[i + 1, j], best[i, j + 1], w[i, j] + best[i + 1, j + 1])
    pairs = []
    i = j = 0
    while i < m and j < n:
        if w[i, j] > WITNESS_EPS and abs(w[i, j] + best[i + 1, j + 1] - best[i, j]) <= WITNESS_EPS:
            pairs.append((i, j))
            i, j = i + 1, j + 1
        elif abs(best[i, j + 1] - best[i, j]) <= WITNESS_EPS:
            j += 1
        else:
            i += 1
    score = float(sum(w[i, j] for i, j in pairs))
    return Matching(tuple(pairs), score)


def _pairwise_consistent(
    pred: OrderedCollection, ref: OrderedCollection, cand: list[tuple[int, int]]
) -> np.ndarray:
    """Boolean matrix: candidate pairs that may coexist in a matching."""
    us = np.array([p[0] for p in cand])
    vs = np.array([p[1] for p in cand])
    fwd = pred.reach[us[:, None], us[None, :]] == ref.reach[vs[:, None], vs[None, :]]
    return fwd & fwd.T


def graph_match_score(
    pred: OrderedCollection,
    ref: OrderedCollection,
    inner: Callable,
    c: MatchConstraint = MatchConstraint.ONE_TO_ONE,
    node_limit: int = DEFAULT_NODE_LIMIT,
    max_items: int = DEFAULT_MAX_ITEMS,
) -> Matching:
    """Maximum-weight order-preserving matching for arbitrary orders.

    Exact search over candidate pairs with the pairwise monotonicity
    conditions as constraints. The pair-of-pairs constraint set grows
    as O(n^2 m^2); instances beyond ``max_items`` per side are refused
    unless the cap is raised explicitly.
    """
    if len(pred.items) > max_items or len(ref.items) > max_items:
        raise ConfigurationError(
            f"instance exceeds {max_items} items per side; raise max_items to override"
        )
    if c is MatchConstraint.ONE_TO_MANY:
        flipped = graph_match_score(ref, pred, lambda a, b: inner(b, a),
                                    MatchConstraint.MANY_TO_ONE, node_limit, max_items)
        return Matching(tuple(sorted((i, j) for j, i in flipped.pairs)), flipped.score)

    w = _weights(pred, ref, inner)
    cand = [(int(i), int(j)) for i, j in np.argwhere(w > WITNESS_EPS)]
    if not cand:
        return Matching((), 0.0)
    compat = _pairwise_consistent(pred, ref, cand)
    weights = np.array([w[i, j] for i, j in cand])
    budget = NodeBudget(node_limit)

    if c is MatchConstraint.MANY_TO_MANY:
        matching = _solve_unconstrained(cand, weights, compat, budget)
    else:
        matching = _solve_rowwise(len(pred.items), cand, weights, compat, budget,
                                  unique_cols=c is MatchConstraint.ONE_TO_ONE)
    return matching


def _solve_rowwise(
    n_rows: int,
    cand: list[tuple[int, int]],
    weights: np.ndarray,
    compat: np.ndarray,
    budget: NodeBudget,
    unique_cols: bool,
) -> Matching:
    by_row: list[list[int]] = [[] for _ in range(n_rows)]
    for k, (i, _) in enumerate(cand):
        by_row[i].append(k)

    def feasible(k: int, chosen: tuple[int, ...], used_cols: frozenset) -> bool:
        if unique_cols and cand[k][1] in used_cols:
            return False
        return all(compat[k, c0] for c0 in chosen)

    def expand(node):
        row, chosen, used_cols, score = node
        if row == n_rows:
            return score, score, chosen, ()
        bound = score
        for r in range(row, n_rows):
            opts = [weights[k] for k in by_row[r] if feasible(k, chosen, used_cols)]
            if opts:
                bound += max(opts)
        children = []
        for k in by_row[row]:
            if feasible(k, chosen, used_cols):
                cols = used_cols | {cand[k][1]} if unique_cols else used_cols
                children.append((row + 1, chosen + (k,), cols, score + weights[k]))
        children.append((row + 1, chosen, used_cols, score))
        return bound, score, chosen, children

    _, chosen = depth_first_maximize((0, (), frozenset(), 0.0), expand, budget)
    pairs = tuple(sorted(cand[k] for k in chosen))
    return Matching(pairs, float(sum(weights[k] for k in chosen)))


def _solve_unconstrained(
    cand: list[tuple[int, int]],
    weights: np.ndarray,
    compat: np.ndarray,
    budget: NodeBudget,
) -> Matching:
    n = len(cand)

    def expand(node):
        idx, chosen, score = node
        if idx == n:
            return score, score, chosen, ()
        remaining = [k for k in range(idx, n) if all(compat[k, c0] for c0 in chosen)]
        bound = score + float(sum(weights[k] for k in remaining))
        children = []
        if remaining and remaining[0] == idx:
            children.append((idx + 1, chosen + (idx,), score + weights[idx]))
        children.append((idx + 1, chosen, score))
        return bound, score, chosen, children

    _, chosen = depth_first_maximize((0, (), 0.0), expand, budget)
    pairs = tuple(sorted(cand[k] for k in chosen))
    return Matching(pairs, float(sum(weights[k] for k in chosen)))
