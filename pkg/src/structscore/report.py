"""Per-metric result records carrying both raw overlap sums and ratios.

Raw sums are kept alongside the normalized values so corpus-level micro
aggregation is lossless: summing the sums and renormalizing reproduces
the aggregate exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence


def _ratio(num: float, den: float, other_den: float) -> float:
    if den > 0:
        # capped at 1 so one-sided matchings cannot report ratios above 1,
        # mirroring the normalize() convention
        return min(num / den, 1.0)
    # both sides empty counts as perfect; one empty side scores zero
    return 1.0 if other_den == 0 else 0.0


def f_score(p: float, r: float) -> float:
    return 2.0 * p * r / (p + r) if p + r > 0 else 0.0


@dataclass(frozen=True)
class MetricResult:
    """Overlap sums plus the derived P/R/F/J values for one metric.

    ``sigma_pr_recall`` is only set for metrics whose precision and
    recall numerators differ (B-cubed); when present, Jaccard is
    undefined and reported as ``None``.
    """

    sigma_pr: float
    sigma_pp: float
    sigma_rr: float
    sigma_pr_recall: float | None = None

    @property
    def precision(self) -> float:
        return _ratio(self.sigma_pr, self.sigma_pp, self.sigma_rr)

    @property
    def recall(self) -> float:
        num = self.sigma_pr if self.sigma_pr_recall is None else self.sigma_pr_recall
        return _ratio(num, self.sigma_rr, self.sigma_pp)

    @property
    def f1(self) -> float:
        if self.sigma_pp == 0 and self.sigma_rr == 0:
            return 1.0
        return f_score(self.precision, self.recall)

    @property
    def jaccard(self) -> float | None:
        if self.sigma_pr_recall is not None:
            return None
        if self.sigma_pp == 0 and self.sigma_rr == 0:
            return 1.0
        denom = self.sigma_pp + self.sigma_rr - self.sigma_pr
        return min(self.sigma_pr / denom, 1.0) if denom > 0 else 1.0

    def to_json(self, report: Sequence[str] = ("P", "R", "F", "J")) -> dict:
        out: dict = {
            "sigma_pr": self.sigma_pr,
            "sigma_pp": self.sigma_pp,
            "sigma_rr": self.sigma_rr,
        }
        if self.sigma_pr_recall is not None:
            out["sigma_pr_recall"] = self.sigma_pr_recall
        values = {
            "P": self.precision,
            "R": self.recall,
            "F": self.f1,
            "J": self.jaccard,
        }
        for key in report:
            if key == "J" and values["J"] is None:
                continue
            out[key] = values[key]
        return out

    @classmethod
    def merge(cls, results: Iterable["MetricResult"]) -> "MetricResult":
        """Micro merge: sum every overlap field across documents."""
        pr = pp = rr = 0.0
        pr_recall = 0.0
        any_recall = False
        for res in results:
            pr += res.sigma_pr
            pp += res.sigma_pp
            rr += res.sigma_rr
            if res.sigma_pr_recall is not None:
                any_recall = True
                pr_recall += res.sigma_pr_recall
            else:
                pr_recall += res.sigma_pr
        return cls(pr, pp, rr, pr_recall if any_recall else None)


@dataclass(frozen=True)
class ProductResult:
    """Two-factor product score (template-type F1 times slot-filler F1)."""

    type_result: MetricResult
    slot_result: MetricResult

    @property
    def score(self) -> float:
        return self.type_result.f1 * self.slot_result.f1

    def to_json(self, report: Sequence[str] = ("P", "R", "F", "J")) -> dict:
        return {
            "score": self.score,
            "type": self.type_result.to_json(report),
            "slots": self.slot_result.to_json(report),
        }

    @classmethod
    def merge(cls, results: Iterable["ProductResult"]) -> "ProductResult":
        items = list(results)
        return cls(
            MetricResult.merge(r.type_result for r in items),
            MetricResult.merge(r.slot_result for r in items),
        )


MetricValue = MetricResult | ProductResult


def macro_average(results: Sequence[MetricValue]) -> Mapping[str, float | None]:
    """Average per-document normalized values (macro aggregation)."""
    if not results:
        return {}
    if isinstance(results[0], ProductResult):
        return {"score": sum(r.score for r in results) / len(results)}
    ps = [r.precision for r in results]
    rs = [r.recall for r in results]
    fs = [r.f1 for r in results]
    js = [r.jaccard for r in results]
    out: dict[str, float | None] = {
        "P": sum(ps) / len(ps),
        "R": sum(rs) / len(rs),
        "F": sum(fs) / len(fs),
    }
    if all(j is not None for j in js):
        out["J"] = sum(js) / len(js)  # type: ignore[arg-type]
    return out
