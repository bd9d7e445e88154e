"""Similarity values, discrete/product primitives, and score normalizers.

A similarity maps a pair of values to [0, 1] with phi(x, x) = 1; the
unnormalized variant drops the upper bound. Everything else in the
package is built by composing these primitives and normalizing the
resulting overlap sums.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Sequence

from .errors import ConfigurationError, InvalidComparisonError, SchemaError

ABS_TOL = 1e-9

Accessor = Callable[[Any], Any] | str
SimFn = Callable[[Any, Any], "SimScore | float"]


@dataclass(frozen=True)
class SimScore:
    """A nonnegative similarity value, flagged normalized when <= 1."""

    value: float
    normalized: bool = True

    def __post_init__(self):
        if self.value < 0:
            raise ValueError(f"similarity value must be nonnegative, got {self.value}")
        if self.normalized and self.value > 1.0:
            if self.value > 1.0 + ABS_TOL:
                raise ValueError(f"normalized similarity exceeds 1: {self.value}")
            object.__setattr__(self, "value", 1.0)

    def __float__(self) -> float:
        return self.value


class Normalizer(Enum):
    """The four ways of turning an overlap triple into a [0, 1] score."""

    PRECISION = "P"
    RECALL = "R"
    F = "F"
    JACCARD = "J"

    @classmethod
    def parse(cls, text: str) -> "Normalizer":
        key = text.strip().upper()
        aliases = {
            "P": cls.PRECISION,
            "PRECISION": cls.PRECISION,
            "R": cls.RECALL,
            "RECALL": cls.RECALL,
            "F": cls.F,
            "F1": cls.F,
            "DICE": cls.F,
            "J": cls.JACCARD,
            "JACCARD": cls.JACCARD,
        }
        if key not in aliases:
            raise ConfigurationError(f"unknown normalizer {text!r}")
        return aliases[key]


@dataclass(frozen=True)
class OverlapTriple:
    """The three overlap sums a normalizer needs.

    sigma_pr is the predicted/reference overlap; sigma_pp and sigma_rr
    are the self-overlaps used as denominators.
    """

    sigma_pr: float
    sigma_pp: float
    sigma_rr: float

    def __post_init__(self):
        for name in ("sigma_pr", "sigma_pp", "sigma_rr"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    def swapped(self) -> "OverlapTriple":
        return OverlapTriple(self.sigma_pr, self.sigma_rr, self.sigma_pp)


def _value_kind(x: Any) -> str:
    if isinstance(x, bool):
        return "bool"
    if isinstance(x, (int, float)):
        return "number"
    if isinstance(x, str):
        return "string"
    if isinstance(x, tuple):
        return "tuple"
    return type(x).__name__


def discrete_sim(x: Any, y: Any) -> SimScore:
    """Exact-equality similarity: 1 iff x equals y structurally.

    Comparing values of different primitive kinds (say an offset and a
    label) is almost always a wiring bug, so it raises instead of
    silently returning 0. No normalization is applied to strings; any
    case folding or tokenization belongs to the caller.
    """
    kx, ky = _value_kind(x), _value_kind(y)
    if kx != ky:
        raise InvalidComparisonError(f"cannot compare {kx} with {ky} ({x!r} vs {y!r})")
    return SimScore(1.0 if x == y else 0.0)


def _access(record: Any, accessor: Accessor) -> Any:
    if callable(accessor):
        return accessor(record)
    if isinstance(record, dict):
        if accessor not in record:
            raise SchemaError(f"record has no field {accessor!r}")
        return record[accessor]
    try:
        return getattr(record, accessor)
    except AttributeError as exc:
        raise SchemaError(f"record has no field {accessor!r}") from exc


def product_sim(
    components: Sequence[tuple[Accessor, SimFn]], a: Any, b: Any
) -> SimScore:
    """Componentwise product of field similarities over two records.

    The result is normalized iff every component score is. A zero
    component short-circuits the product.
    """
    value = 1.0
    normalized = True
    for accessor, sim in components:
        score = sim(_access(a, accessor), _access(b, accessor))
        if isinstance(score, SimScore):
            normalized = normalized and score.normalized
            score = score.value
        value *= float(score)
        if value == 0.0:
            break
    return SimScore(value, normalized=normalized)


def normalize(n: Normalizer, t: OverlapTriple) -> SimScore:
    """Turn an overlap triple into precision, recall, F, or Jaccard.

    Degenerate denominators resolve by convention rather than failure:
    both self-overlaps zero means both sides are empty and every score
    is 1; a single zero denominator zeroes the corresponding score.
    """
    if t.sigma_pp == 0.0 and t.sigma_rr == 0.0:
        return SimScore(1.0)
    # One-sided constraints paired with unnormalized inner similarities can
    # push a raw ratio above 1; cap so the result stays a valid similarity.
    p = min(t.sigma_pr / t.sigma_pp, 1.0) if t.sigma_pp > 0 else 0.0
    r = min(t.sigma_pr / t.sigma_rr, 1.0) if t.sigma_rr > 0 else 0.0
    if n is Normalizer.PRECISION:
        return SimScore(p)
    if n is Normalizer.RECALL:
        return SimScore(r)
    if n is Normalizer.F:
        return SimScore(2.0 * p * r / (p + r) if p + r > 0 else 0.0)
    denom = t.sigma_pp + t.sigma_rr - t.sigma_pr
    if denom <= 0:
        # only reachable when sigma_pr >= sigma_pp + sigma_rr > 0
        return SimScore(1.0)
    return SimScore(min(t.sigma_pr / denom, 1.0))


def threshold_sim(inner: SimScore, cutoff: float, strict: bool = True) -> SimScore:
    """Indicator similarity: 1 iff the inner score clears the cutoff."""
    if not 0.0 <= cutoff <= 1.0:
        raise ConfigurationError(f"threshold cutoff must be in [0, 1], got {cutoff}")
    if not inner.normalized:
        raise ConfigurationError("threshold requires a normalized inner similarity")
    hit = inner.value > cutoff if strict else inner.value >= cutoff
    return SimScore(1.0 if hit else 0.0)
