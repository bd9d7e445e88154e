"""Classic structured prediction metrics built on the matching core.

Every metric here is an instantiation of the same recipe: pick a
similarity for the elements, pick a matching constraint, normalize the
resulting overlap sums. Each scorer also exposes a detail variant that
returns the witness alignments for diagnostics.
"""

from __future__ import annotations

from typing import Callable, Sequence

from .errors import DataError
from .matching import (
    MatchConstraint,
    Matching,
    WeightMatrix,
    match_score,
    self_overlap,
    set_match_triple,
)
from .records import (
    Argument,
    DatasetConfig,
    Dependency,
    Entity,
    Event,
    IndexMention,
    NAryRelation,
    Relation,
    RoleFillerEntity,
    SlotFiller,
    Template,
    TypePath,
    Ontology,
)
from .report import MetricResult
from .similarity import Normalizer, SimScore, normalize
from .errors import ConfigurationError

ONE = MatchConstraint.ONE_TO_ONE


def _result(triple) -> MetricResult:
    return MetricResult(triple.sigma_pr, triple.sigma_pp, triple.sigma_rr)


def _pairs_detail(matching: Matching) -> list[dict]:
    return [{"pred": i, "gold": j} for i, j in matching.pairs]


# ---------------------------------------------------------------------------
# relations and dependency edges

def _relation_sim(a: Relation, b: Relation) -> float:
    return 1.0 if (a.type == b.type and a.subj == b.subj and a.obj == b.obj) else 0.0


def rel_f1(pred: Sequence[Relation], gold: Sequence[Relation]) -> MetricResult:
    """Binary relation F: exact match on type and both argument spans."""
    triple, _ = set_match_triple(pred, gold, _relation_sim)
    return _result(triple)


def rel_f1_detail(pred, gold) -> tuple[MetricResult, dict]:
    triple, matching = set_match_triple(pred, gold, _relation_sim)
    return _result(triple), {"alignment": _pairs_detail(matching)}


def attachment_scores(pred: Sequence[Dependency], gold: Sequence[Dependency]) -> dict[str, MetricResult]:
    """Unlabeled and labeled attachment scores over dependency edges."""
    uas, _ = set_match_triple(pred, gold, lambda a, b: float(a.gov == b.gov and a.dep == b.dep))
    las, _ = set_match_triple(
        pred, gold, lambda a, b: float(a.gov == b.gov and a.dep == b.dep and a.rel == b.rel)
    )
    return {"uas": _result(uas), "las": _result(las)}


# ---------------------------------------------------------------------------
# events

def _trigger_sim(a: Event, b: Event) -> float:
    return 1.0 if a.trig == b.trig else 0.0


def _event_arg_sim(a: Event, b: Event) -> float:
    if a is b:  # self-overlap denominators count arguments directly
        return float(len(a.args))
    if a.trig != b.trig:
        return 0.0
    triple, _ = set_match_triple(a.args, b.args, lambda x, y: float(x == y))
    return triple.sigma_pr


def event_scores(pred: Sequence[Event], gold: Sequence[Event]) -> dict[str, MetricResult]:
    """Trigger F and argument F over 1:1 matched events.

    The argument score is a nested matching: event pairs are weighted
    by their raw matched-argument counts, and the denominators are the
    total argument counts on each side.
    """
    trig, _ = set_match_triple(pred, gold, _trigger_sim)
    args, _ = set_match_triple(pred, gold, _event_arg_sim)
    return {"trig_f1": _result(trig), "arg_f1": _result(args)}


def event_scores_detail(pred, gold) -> tuple[dict[str, MetricResult], dict]:
    results = event_scores(pred, gold)
    _, matching = set_match_triple(pred, gold, _event_arg_sim)
    detail = []
    for i, j in matching.pairs:
        _, inner = set_match_triple(pred[i].args, gold[j].args, lambda x, y: float(x == y))
        detail.append({"pred": i, "gold": j, "args": _pairs_detail(inner)})
    return results, {"alignment": detail}


# ---------------------------------------------------------------------------
# coreference

def _check_unique_mentions(entities: Sequence[Entity], side: str):
    seen = set()
    for e in entities:
        dup = seen & e.mentions
        if dup:
            raise DataError(
                f"mention {sorted(map(repr, dup))[0]} appears in multiple {side} entities"
            )
        seen |= e.mentions


def _overlap(a: Entity, b: Entity) -> int:
    return len(a.mentions & b.mentions)


def _phi3(a: Entity, b: Entity) -> float:
    return float(_overlap(a, b))


def _phi4(a: Entity, b: Entity) -> float:
    return 2.0 * _overlap(a, b) / (len(a.mentions) + len(b.mentions))


def _phi_link(a: Entity, b: Entity) -> float:
    return float(max(0, _overlap(a, b) - 1))


def _b3_memberships(entities: Sequence[Entity]) -> list[tuple[object, Entity]]:
    rels = [(m, e) for e in entities for m in e.sorted_mentions()]
    return sorted(rels, key=lambda r: repr(r[0]))


def coref_scores(pred: Sequence[Entity], gold: Sequence[Entity]) -> dict[str, MetricResult]:
    """MUC, B-cubed, and both CEAF variants over entity sets.

    Mentions must be unique within each side; duplicated mentions would
    let B-cubed award credit twice for one reference mention.
    """
    _check_unique_mentions(pred, "predicted")
    _check_unique_mentions(gold, "reference")

    ceaf3, _ = set_match_triple(pred, gold, _phi3)
    ceaf4, _ = set_match_triple(pred, gold, _phi4)
    muc, _ = set_match_triple(pred, gold, _phi_link, MatchConstraint.MANY_TO_MANY)

    pred_rels = _b3_memberships(pred)
    gold_rels = _b3_memberships(gold)

    def b3_p(a, b):
        (m1, e1), (m2, e2) = a, b
        return float(m1 == m2) * _overlap(e1, e2) / len(e1.mentions)

    def b3_r(a, b):
        (m1, e1), (m2, e2) = a, b
        return float(m1 == m2) * _overlap(e1, e2) / len(e2.mentions)

    precision_side, _ = set_match_triple(pred_rels, gold_rels, b3_p)
    recall_side, _ = set_match_triple(pred_rels, gold_rels, b3_r)
    b3 = MetricResult(
        sigma_pr=precision_side.sigma_pr,
        sigma_pp=precision_side.sigma_pp,
        sigma_rr=recall_side.sigma_rr,
        sigma_pr_recall=recall_side.sigma_pr,
    )
    return {
        "muc": _result(muc),
        "b3": b3,
        "ceaf_phi3": _result(ceaf3),
        "ceaf_phi4": _result(ceaf4),
    }


def coref_scores_detail(pred, gold) -> tuple[dict[str, MetricResult], dict]:
    results = coref_scores(pred, gold)
    detail = {}
    for name, phi in (("ceaf_phi3", _phi3), ("ceaf_phi4", _phi4)):
        _, matching = set_match_triple(pred, gold, phi)
        detail[name] = {"alignment": _pairs_detail(matching)}
    _, muc_matching = set_match_triple(pred, gold, _phi_link, MatchConstraint.MANY_TO_MANY)
    detail["muc"] = {"linked_pairs": _pairs_detail(muc_matching)}
    by_mention = []
    gold_of = {m: e for e in gold for m in e.mentions}
    for i, entity in enumerate(pred):
        for m in entity.sorted_mentions():
            r = gold_of.get(m)
            overlap = _overlap(entity, r) if r is not None else 0
            by_mention.append({
                "mention": repr(m),
                "pred_entity": i,
                "precision": overlap / len(entity.mentions),
                "recall": overlap / len(r.mentions) if r is not None else 0.0,
            })
    detail["b3"] = {"mentions": by_mention}
    return results, detail


# ---------------------------------------------------------------------------
# role filler entities

def _subset(a: Entity, b: Entity) -> float:
    return 1.0 if a.mentions <= b.mentions else 0.0


def _ree_sim(phi: Callable[[Entity, Entity], float]) -> Callable:
    def sim(a: RoleFillerEntity, b: RoleFillerEntity) -> float:
        if a.role != b.role:
            return 0.0
        return phi(a.entity, b.entity)

    return sim


def ree_scores(pred: NAryRelation, gold: NAryRelation) -> dict[str, MetricResult]:
    """CEAF-REE and its one-sided CEAF-RME relaxations for one template.

    REE matches role fillers 1:1 with the subset entity similarity;
    RME relaxes to an N:1 matching, with either the subset indicator or
    the shared-mention count as the entity similarity.
    """
    ree, _ = set_match_triple(pred.args, gold.args, _ree_sim(_subset))
    rme_sub, _ = set_match_triple(
        pred.args, gold.args, _ree_sim(_subset), MatchConstraint.MANY_TO_ONE
    )
    rme_phi3, _ = set_match_triple(
        pred.args, gold.args, _ree_sim(_phi3), MatchConstraint.MANY_TO_ONE
    )
    return {
        "ceaf_ree": _result(ree),
        "ceaf_rme_subset": _result(rme_sub),
        "ceaf_rme_phi3": _result(rme_phi3),
    }


def ree_scores_detail(pred, gold) -> tuple[dict[str, MetricResult], dict]:
    results = ree_scores(pred, gold)
    detail = {}
    for name, phi, c in (
        ("ceaf_ree", _subset, ONE),
        ("ceaf_rme_subset", _subset, MatchConstraint.MANY_TO_ONE),
        ("ceaf_rme_phi3", _phi3, MatchConstraint.MANY_TO_ONE),
    ):
        _, matching = set_match_triple(pred.args, gold.args, _ree_sim(phi), c)
        detail[name] = {"alignment": _pairs_detail(matching)}
    return results, detail


# ---------------------------------------------------------------------------
# SciREX quaternary relations

SCIREX_ARITY = 4


def _scirex_mention_sim(a: IndexMention, b: IndexMention) -> float:
    jaccard = len(a.indices & b.indices) / len(a.indices | b.indices)
    return 1.0 if jaccard > 0.5 else 0.0


def _scirex_rfe_sim(a: RoleFillerEntity, b: RoleFillerEntity) -> float:
    if a.role != b.role:
        return 0.0
    triple, _ = set_match_triple(
        a.entity.sorted_mentions(), b.entity.sorted_mentions(), _scirex_mention_sim
    )
    return 1.0 if normalize(Normalizer.PRECISION, triple).value > 0.5 else 0.0


def _scirex_relation_sim(a: NAryRelation, b: NAryRelation) -> float:
    triple, _ = set_match_triple(a.args, b.args, _scirex_rfe_sim)
    return 1.0 if normalize(Normalizer.F, triple).value >= 1.0 - 1e-9 else 0.0


def _check_arity(rels: Sequence[NAryRelation], side: str):
    for i, r in enumerate(rels):
        if len(r.args) != SCIREX_ARITY:
            raise DataError(f"{side} relation {i} has {len(r.args)} role fillers, expected {SCIREX_ARITY}")


def scirex_score(pred: Sequence[NAryRelation], gold: Sequence[NAryRelation]) -> MetricResult:
    """SciREX 4-ary relation F.

    Mentions match above 0.5 Jaccard of token indices, entities match
    when more than half the predicted mentions land in the reference
    entity with the same role, and a relation only counts when all four
    role fillers match.
    """
    _check_arity(pred, "predicted")
    _check_arity(gold, "reference")
    triple, _ = set_match_triple(pred, gold, _scirex_relation_sim)
    return _result(triple)


def scirex_score_detail(pred, gold) -> tuple[MetricResult, dict]:
    result = scirex_score(pred, gold)
    _, matching = set_match_triple(pred, gold, _scirex_relation_sim)
    detail = []
    for i, j in matching.pairs:
        _, inner = set_match_triple(pred[i].args, gold[j].args, _scirex_rfe_sim)
        detail.append({"pred": i, "gold": j, "args": _pairs_detail(inner)})
    return result, {"alignment": detail}


# ---------------------------------------------------------------------------
# MUC-4 template filling

def _words(value) -> list[frozenset[str]]:
    """Uppercased word bags for each string of a filler value."""
    strings = [value] if isinstance(value, str) else list(value)
    return [frozenset(str(s).upper().split()) for s in strings]


def _phi_str(pred_value, gold_value, premodifiers: frozenset[str]) -> float:
    """Word-overlap string similarity: 1 iff some non-premodifier word
    is shared between a predicted string and any reference string."""
    for pw in _words(pred_value):
        usable = pw - premodifiers
        for gw in _words(gold_value):
            if usable & (gw - premodifiers):
                return 1.0
    return 0.0


def _phi_set(pred_value, gold_value, ontology: Ontology) -> float:
    if pred_value == gold_value:
        return 1.0
    if isinstance(pred_value, str) and isinstance(gold_value, str):
        if ontology.is_strict_subtype(pred_value, gold_value):
            return 0.5
    return 0.0


def _slot_kind(filler: SlotFiller, config: DatasetConfig) -> str:
    kind = config.slots.get(filler.slot)
    if kind is not None:
        return kind
    # unconfigured slots fall back on the value shape
    return "string" if isinstance(filler.value, tuple) else "set"


def _filler_sim(config: DatasetConfig) -> Callable:
    def sim(a: SlotFiller, b: SlotFiller) -> float:
        if a.slot != b.slot:
            return 0.0
        if _slot_kind(b, config) == "string":
            return _phi_str(a.value, b.value, config.premodifiers)
        return _phi_set(a.value, b.value, config.ontology)

    return sim


def _template_sim(config: DatasetConfig) -> Callable:
    filler_sim = _filler_sim(config)

    def sim(a: Template, b: Template) -> float:
        if a is b:  # self-overlap denominators sum per-filler self-scores
            return self_overlap(a.fillers, filler_sim)
        if a.type != b.type:
            return 0.0
        triple, _ = set_match_triple(a.fillers, b.fillers, filler_sim)
        return triple.sigma_pr

    return sim


def muc4_score(pred: Sequence[Template], gold: Sequence[Template],
               config: DatasetConfig | None = None) -> MetricResult:
    """MUC-4 overall score: F over slot fillers of 1:1 matched templates.

    Set-fill slots earn half credit for a strict subtype of the
    reference value; string-fill slots need a shared non-premodifier
    word with any string of the reference entity.
    """
    config = config or DatasetConfig()
    triple, _ = set_match_triple(pred, gold, _template_sim(config))
    return _result(triple)


def muc4_score_detail(pred, gold, config=None) -> tuple[MetricResult, dict]:
    config = config or DatasetConfig()
    result = muc4_score(pred, gold, config)
    _, matching = set_match_triple(pred, gold, _template_sim(config))
    filler_sim = _filler_sim(config)
    detail = []
    for i, j in matching.pairs:
        _, inner = set_match_triple(pred[i].fillers, gold[j].fillers, filler_sim)
        detail.append({"pred": i, "gold": j, "fillers": _pairs_detail(inner)})
    return result, {"alignment": detail}


# epsilon used only to break slot-score ties toward type-matching pairs
_TYPE_TIEBREAK = 1e-9


def better_granular_parts(pred: Sequence[Template], gold: Sequence[Template],
                          config: DatasetConfig | None = None) -> tuple[MetricResult, MetricResult, Matching]:
    """Template-type F and slot-filler F under a shared template alignment.

    The alignment is optimized against the slot-filler score; ties are
    nudged toward pairs whose types agree so that a fillerless template
    pair still counts for the type factor.
    """
    config = config or DatasetConfig()
    tmpl_sim = _template_sim(config)
    slot_w = [[tmpl_sim(a, b) for b in gold] for a in pred]
    type_w = [[1.0 if a.type == b.type else 0.0 for b in gold] for a in pred]
    augmented = [
        [slot_w[i][j] + _TYPE_TIEBREAK * type_w[i][j] for j in range(len(gold))]
        for i in range(len(pred))
    ]
    matching = match_score(WeightMatrix(augmented or [[]]), ONE)
    slot_sigma = sum(slot_w[i][j] for i, j in matching.pairs)
    type_sigma = sum(type_w[i][j] for i, j in matching.pairs)
    slot_result = MetricResult(
        slot_sigma, self_overlap(pred, tmpl_sim), self_overlap(gold, tmpl_sim)
    )
    type_result = MetricResult(type_sigma, float(len(pred)), float(len(gold)))
    return type_result, slot_result, matching


def better_granular_score(pred: Sequence[Template], gold: Sequence[Template],
                          config: DatasetConfig | None = None) -> float:
    """BETTER Granular overall score: type F times slot-filler F."""
    type_result, slot_result, _ = better_granular_parts(pred, gold, config)
    return type_result.f1 * slot_result.f1


# ---------------------------------------------------------------------------
# hierarchical type similarities

def type_similarity_level(pred: TypePath, gold: TypePath) -> SimScore:
    """Depth-discounted type score: 2^(d - D) for the deepest correct
    level d, zero when even the most general level is wrong."""
    if pred.depth != gold.depth:
        raise ConfigurationError(
            f"type paths have different depths ({pred.depth} vs {gold.depth})"
        )
    d = 0
    for a, b in zip(pred.levels, gold.levels):
        if a != b:
            break
        d += 1
    return SimScore(0.0 if d == 0 else 2.0 ** (d - pred.depth))


def type_similarity_supertypes(pred: Sequence[str], gold: Sequence[str], o: Ontology) -> SimScore:
    """F over the ancestor closures of predicted and reference labels."""
    s_pred = frozenset().union(*(o.supertypes(t) for t in pred)) if pred else frozenset()
    s_gold = frozenset().union(*(o.supertypes(t) for t in gold)) if gold else frozenset()
    triple, _ = set_match_triple(sorted(s_pred), sorted(s_gold), lambda a, b: float(a == b))
    return normalize(Normalizer.F, triple)
