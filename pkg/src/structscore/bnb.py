"""Small depth-first branch-and-bound engine shared by the exact solvers."""

from __future__ import annotations

from typing import Any, Callable, Iterable

from .errors import SolverResourceError

DEFAULT_NODE_LIMIT = 10**6
PRUNE_EPS = 1e-12


class NodeBudget:
    """Counts expanded search nodes and aborts past the limit."""

    __slots__ = ("limit", "used")

    def __init__(self, limit: int = DEFAULT_NODE_LIMIT):
        self.limit = int(limit)
        self.used = 0

    def spend(self):
        self.used += 1
        if self.used > self.limit:
            raise SolverResourceError(self.limit)


def depth_first_maximize(
    root: Any,
    expand: Callable[[Any], tuple[float, float | None, Any, Iterable[Any]]],
    budget: NodeBudget,
) -> tuple[float, Any]:
    """Generic DFS maximization with admissible-bound pruning.

    ``expand(node)`` returns ``(bound, value, payload, children)`` where
    ``bound`` is an upper bound on any completion below the node and
    ``value``/``payload`` describe a feasible incumbent found at the
    node itself (``value`` may be None when the node has none).
    Children are explored in the order given, so a deterministic expand
    yields a deterministic optimum witness.
    """
    best_value = float("-inf")
    best_payload = None
    stack = [root]
    while stack:
        node = stack.pop()
        budget.spend()
        bound, value, payload, children = expand(node)
        if value is not None and value > best_value + PRUNE_EPS:
            best_value, best_payload = value, payload
        if bound <= best_value + PRUNE_EPS:
            continue
        stack.extend(reversed(list(children)))
    return best_value, best_payload
