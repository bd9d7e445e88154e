"""Matching of collections whose elements mention latent variables.

Items on either side may reference opaque variables (AMR-style); the
matching score jointly optimizes a 1:1 variable alignment and an item
matching, where an item pair only counts if every variable it mentions
is aligned across sides. The optimization is cast as a small binary
ILP and solved by an internal exact branch-and-bound over variable
assignments, with a seeded hill-climbing fallback for large instances.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .bnb import DEFAULT_NODE_LIMIT, NodeBudget, depth_first_maximize
from .errors import DataError
from .matching import MatchConstraint, Matching, WeightMatrix, match_score
from .report import MetricResult
from .similarity import _access

DEFAULT_RESTARTS = 8


@dataclass(frozen=True)
class VarId:
    """Opaque variable identifier, scoped to one side of the matching."""

    name: str


@dataclass(frozen=True)
class Prop:
    """A logical triple: relation label, variable subject, object.

    The object is either a VarId or a concept constant (compared by
    exact equality).
    """

    rel: str
    subj: VarId
    obj: Any


@dataclass(frozen=True)
class AmrGraph:
    props: frozenset[Prop]
    variables: frozenset[VarId]

    def __post_init__(self):
        used = {p.subj for p in self.props}
        used |= {p.obj for p in self.props if isinstance(p.obj, VarId)}
        if not used <= self.variables:
            missing = sorted(v.name for v in used - self.variables)
            raise DataError(f"props mention undeclared variables: {missing}")

    @classmethod
    def from_triples(cls, triples: Sequence[dict]) -> "AmrGraph":
        """Build a graph from the JSON triple format.

        Each triple is {"rel": str, "subj": str, "obj": {"var": str} |
        {"concept": value} | scalar}; bare scalars are concepts.
        """
        props = set()
        for i, t in enumerate(triples):
            if not isinstance(t, dict) or "rel" not in t or "subj" not in t or "obj" not in t:
                raise DataError("triple needs rel/subj/obj fields", path=f"$[{i}]")
            obj = t["obj"]
            if isinstance(obj, dict):
                if "var" in obj:
                    obj = VarId(str(obj["var"]))
                elif "concept" in obj:
                    obj = obj["concept"]
                else:
                    raise DataError("object must be {'var': ...} or {'concept': ...}", path=f"$[{i}].obj")
            props.add(Prop(str(t["rel"]), VarId(str(t["subj"])), obj))
        variables = {p.subj for p in props}
        variables |= {p.obj for p in props if isinstance(p.obj, VarId)}
        return cls(frozenset(props), frozenset(variables))

    def sorted_props(self) -> list[Prop]:
        def key(p: Prop):
            obj = p.obj
            tag = ("v", obj.name) if isinstance(obj, VarId) else ("c", repr(obj))
            return (p.rel, p.subj.name, tag)

        return sorted(self.props, key=key)


@dataclass(frozen=True)
class VarAlignment:
    """Partial bijection between predicted and reference variables."""

    pairs: tuple[tuple[VarId, VarId], ...]

    def __post_init__(self):
        left = [x for x, _ in self.pairs]
        right = [y for _, y in self.pairs]
        if len(set(left)) != len(left) or len(set(right)) != len(right):
            raise ValueError("variable alignment must be one-to-one")


@dataclass(frozen=True)
class IlpInstance:
    """Binary program for joint item/variable matching.

    Decision variables are one boolean per candidate item pair and one
    per variable pair (the full cross product); only item pairs carry
    objective weight. ``constraints`` materializes every linear row as
    a tagged tuple for inspection.
    """

    n_rows: int
    n_cols: int
    p_vars: tuple[VarId, ...]
    r_vars: tuple[VarId, ...]
    item_pairs: tuple[tuple[int, int], ...]
    objective: tuple[float, ...]
    var_pairs: tuple[tuple[int, int], ...]
    implications: tuple[tuple[int, int], ...]
    constraint: MatchConstraint
    constraints: tuple = field(default=(), compare=False)

    def candidate_vars(self, x_idx: int) -> tuple[int, ...]:
        """Reference-variable indices that co-occur with x in an implication."""
        ys = set()
        for _, vp in self.implications:
            x, y = self.var_pairs[vp]
            if x == x_idx:
                ys.add(y)
        return tuple(sorted(ys))


@dataclass(frozen=True)
class LatentSolution:
    score: float
    item_pairs: tuple[tuple[int, int], ...]
    var_alignment: VarAlignment
    exact: bool


def build_ilp(
    pred: Sequence,
    ref: Sequence,
    item_sim_upper: Callable,
    var_fields: Sequence,
    constraint: MatchConstraint = MatchConstraint.ONE_TO_ONE,
) -> IlpInstance:
    """Translate a latent matching problem into an explicit binary ILP.

    ``item_sim_upper`` scores a pair assuming all its variables align;
    it should ignore the fields named in ``var_fields``. Those fields
    may also hold ground constants: constants compare by equality, and
    a variable can never match a constant. Pairs with zero objective
    weight are pruned, as are their implication rows.
    """
    p_vars: list[VarId] = []
    r_vars: list[VarId] = []

    def collect(items, into: list[VarId]):
        seen = set(into)
        for item in items:
            for f in var_fields:
                v = _access(item, f)
                if isinstance(v, VarId) and v not in seen:
                    seen.add(v)
                    into.append(v)

    collect(pred, p_vars)
    collect(ref, r_vars)
    p_index = {v: i for i, v in enumerate(p_vars)}
    r_index = {v: i for i, v in enumerate(r_vars)}
    var_pairs = tuple(itertools.product(range(len(p_vars)), range(len(r_vars))))
    var_pair_index = {pair: k for k, pair in enumerate(var_pairs)}

    item_pairs: list[tuple[int, int]] = []
    objective: list[float] = []
    implications: list[tuple[int, int]] = []
    for i, u in enumerate(pred):
        for j, v in enumerate(ref):
            weight = float(item_sim_upper(u, v))
            if weight <= 0:
                continue
            needed: list[int] = []
            ok = True
            for f in var_fields:
                a, b = _access(u, f), _access(v, f)
                a_var, b_var = isinstance(a, VarId), isinstance(b, VarId)
                if a_var and b_var:
                    needed.append(var_pair_index[(p_index[a], r_index[b])])
                elif a_var or b_var:
                    ok = False  # variable vs constant never matches
                    break
                elif a != b:
                    ok = False
                    break
            if not ok:
                continue
            pair_idx = len(item_pairs)
            item_pairs.append((i, j))
            objective.append(weight)
            implications.extend((pair_idx, vp) for vp in sorted(set(needed)))

    rows: list[tuple] = [("implies", ip, vp) for ip, vp in implications]
    rows += [("var_row_at_most_one", x) for x in range(len(p_vars))]
    rows += [("var_col_at_most_one", y) for y in range(len(r_vars))]
    if constraint.limits_rows:
        rows += [("item_row_at_most_one", u) for u in range(len(pred))]
    if constraint.limits_cols:
        rows += [("item_col_at_most_one", v) for v in range(len(ref))]

    return IlpInstance(
        n_rows=len(pred),
        n_cols=len(ref),
        p_vars=tuple(p_vars),
        r_vars=tuple(r_vars),
        item_pairs=tuple(item_pairs),
        objective=tuple(objective),
        var_pairs=var_pairs,
        implications=tuple(implications),
        constraint=constraint,
        constraints=tuple(rows),
    )


class _Evaluator:
    """Scores item matchings induced by (partial) variable assignments."""

    def __init__(self, inst: IlpInstance):
        self.inst = inst
        # implications grouped per item pair, as (x_idx, y_idx) lists
        self.needs: list[list[tuple[int, int]]] = [[] for _ in inst.item_pairs]
        for ip, vp in inst.implications:
            self.needs[ip].append(inst.var_pairs[vp])

    def masked_weights(self, assignment: dict[int, int | None], optimistic: bool) -> np.ndarray:
        """Weight matrix keeping pairs whose variable needs hold.

        Optimistic mode keeps pairs involving undecided variables (for
        bounds); strict mode drops them (for feasible incumbents).
        """
        w = np.zeros((self.inst.n_rows, self.inst.n_cols))
        for k, (i, j) in enumerate(self.inst.item_pairs):
            keep = True
            for x, y in self.needs[k]:
                if x in assignment:
                    if assignment[x] != y:
                        keep = False
                        break
                elif not optimistic:
                    keep = False
                    break
            if keep:
                w[i, j] = self.inst.objective[k]
        return w

    def bound(self, assignment: dict[int, int | None]) -> float:
        w = self.masked_weights(assignment, optimistic=True)
        if w.size == 0:
            return 0.0
        c = self.inst.constraint
        if c is MatchConstraint.MANY_TO_MANY:
            return float(w.sum())
        row = float(w.max(axis=1).sum()) if c.limits_rows else float("inf")
        col = float(w.max(axis=0).sum()) if c.limits_cols else float("inf")
        return min(row, col)

    def value(self, assignment: dict[int, int | None]) -> Matching:
        w = self.masked_weights(assignment, optimistic=False)
        return match_score(WeightMatrix(w), self.inst.constraint)


def _alignment_pairs(inst: IlpInstance, assignment: dict[int, int | None]) -> VarAlignment:
    pairs = tuple(
        (inst.p_vars[x], inst.r_vars[y])
        for x, y in sorted((x, y) for x, y in assignment.items() if y is not None)
    )
    return VarAlignment(pairs)


def _solve_exact(inst: IlpInstance, node_limit: int) -> LatentSolution:
    ev = _Evaluator(inst)
    budget = NodeBudget(node_limit)
    n_vars = len(inst.p_vars)
    candidates = [inst.candidate_vars(x) for x in range(n_vars)]

    def expand(node):
        depth, assignment = node
        matching = ev.value(assignment)
        payload = (matching, dict(assignment))
        if depth == n_vars:
            return matching.score, matching.score, payload, ()
        bound = ev.bound(assignment)
        used = {y for y in assignment.values() if y is not None}
        children = [
            (depth + 1, {**assignment, depth: y})
            for y in candidates[depth]
            if y not in used
        ]
        children.append((depth + 1, {**assignment, depth: None}))
        return bound, matching.score, payload, children

    _, payload = depth_first_maximize((0, {}), expand, budget)
    matching, assignment = payload
    return LatentSolution(matching.score, matching.pairs, _alignment_pairs(inst, assignment), True)


def _solve_hillclimb(inst: IlpInstance, seed: int, restarts: int) -> LatentSolution:
    ev = _Evaluator(inst)
    rng = random.Random(seed)
    n_vars = len(inst.p_vars)
    candidates = [inst.candidate_vars(x) for x in range(n_vars)]
    best: tuple[float, Matching, dict] | None = None

    def climb(assignment: dict[int, int | None]) -> tuple[float, Matching, dict]:
        current = ev.value(assignment)
        improved = True
        while improved:
            improved = False
            for x in range(n_vars):
                options: list[int | None] = [None] + list(candidates[x])
                used = {y for k, y in assignment.items() if k != x and y is not None}
                for y in options:
                    if y == assignment[x] or (y is not None and y in used):
                        continue
                    trial = {**assignment, x: y}
                    m = ev.value(trial)
                    if m.score > current.score + 1e-12:
                        assignment, current, improved = trial, m, True
            # pairwise swaps escape simple one-move local optima
            for a in range(n_vars):
                for b in range(a + 1, n_vars):
                    if assignment[a] == assignment[b]:
                        continue
                    trial = {**assignment, a: assignment[b], b: assignment[a]}
                    m = ev.value(trial)
                    if m.score > current.score + 1e-12:
                        assignment, current, improved = trial, m, True
        return current.score, current, assignment

    for _ in range(max(1, restarts)):
        free = list(range(len(inst.r_vars)))
        rng.shuffle(free)
        assignment: dict[int, int | None] = {}
        for x in range(n_vars):
            pool = [y for y in candidates[x] if y in free]
            pick = rng.choice(pool) if pool and rng.random() < 0.9 else None
            assignment[x] = pick
            if pick is not None:
                free.remove(pick)
        score, matching, final = climb(assignment)
        if best is None or score > best[0] + 1e-12:
            best = (score, matching, final)

    assert best is not None
    return LatentSolution(best[0], best[1].pairs, _alignment_pairs(inst, best[2]), False)


def solve_ilp(
    inst: IlpInstance,
    mode: str = "exact",
    seed: int = 0,
    node_limit: int = DEFAULT_NODE_LIMIT,
    restarts: int = DEFAULT_RESTARTS,
) -> LatentSolution:
    """Solve a latent matching instance.

    Exact mode is branch-and-bound over variable assignments with an
    admissible bound (row/column maxima of not-yet-excluded pair
    weights) and raises SolverResourceError past ``node_limit``.
    Hillclimb mode is seeded random-restart local search; its result is
    a lower bound and is flagged non-exact.
    """
    if mode == "exact":
        return _solve_exact(inst, node_limit)
    if mode == "hillclimb":
        return _solve_hillclimb(inst, seed, restarts)
    raise ValueError(f"unknown solver mode {mode!r}")


def _prop_upper(u: Prop, v: Prop) -> float:
    return 1.0 if u.rel == v.rel else 0.0


def smatch(
    pred: AmrGraph,
    ref: AmrGraph,
    mode: str = "exact",
    seed: int = 0,
    node_limit: int = DEFAULT_NODE_LIMIT,
) -> MetricResult:
    """Smatch: best proposition F over a 1:1 variable alignment."""
    sol = smatch_solution(pred, ref, mode=mode, seed=seed, node_limit=node_limit)
    return MetricResult(sol.score, float(len(pred.props)), float(len(ref.props)))


def smatch_solution(
    pred: AmrGraph,
    ref: AmrGraph,
    mode: str = "exact",
    seed: int = 0,
    node_limit: int = DEFAULT_NODE_LIMIT,
) -> LatentSolution:
    """Smatch with the witness matching and variable alignment."""
    inst = build_ilp(
        pred.sorted_props(),
        ref.sorted_props(),
        _prop_upper,
        ("subj", "obj"),
        MatchConstraint.ONE_TO_ONE,
    )
    return solve_ilp(inst, mode=mode, seed=seed, node_limit=node_limit)
