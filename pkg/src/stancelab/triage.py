"""Annotation triage: the reviewable item queue and decision bookkeeping.

The queue holds one item per confident tweet (a tweet supporting several
candidate edges appears once, under its highest-confidence reading), ordered
most confident first. Decisions are latest-wins per item; applying them
turns confirmed stances into tweet labels, relabels the graph, and reports
per-class hit rates (newly labeled edges over tweets reviewed).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .labels import CLASS_INDEX, Provenance, Stance, StanceLabel
from .network import (
    POLARIZED_STATUS,
    CandidateEdge,
    EdgeKey,
    EdgeStatus,
    RetweetGraph,
    label_edges,
)

POLARIZED_CLASSES = tuple(POLARIZED_STATUS)


class Verdict(enum.Enum):
    PRO_RUSSIAN = "pro_russian"
    PRO_UKRAINIAN = "pro_ukrainian"
    NEUTRAL = "neutral"
    SKIP = "skip"

    def as_stance(self) -> Stance | None:
        if self is Verdict.SKIP:
            return None
        return Stance(self.value)


class ItemState(enum.Enum):
    PENDING = "pending"
    DECIDED = "decided"
    SKIPPED = "skipped"


@dataclass(frozen=True)
class TriageItem:
    item_id: str
    tweet_id: str
    raw_text: str
    predicted_class: Stance
    confidence: float
    edge: EdgeKey
    state: ItemState = ItemState.PENDING

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} out of [0, 1]")
        if self.predicted_class not in POLARIZED_STATUS:
            raise ValueError("queue items are always polarized predictions")


@dataclass(frozen=True)
class AnnotationDecision:
    item_id: str
    verdict: Verdict
    annotator_id: str
    decided_at: float  # unix seconds

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "annotator_id": self.annotator_id,
                "decided_at": self.decided_at,
                "item_id": self.item_id,
                "verdict": self.verdict.value,
            },
            sort_keys=True,
            separators=(",", ":"),
        )

    @classmethod
    def from_json_line(cls, line: str) -> "AnnotationDecision":
        data = json.loads(line)
        return cls(
            item_id=str(data["item_id"]),
            verdict=Verdict(data["verdict"]),
            annotator_id=str(data["annotator_id"]),
            decided_at=float(data["decided_at"]),
        )


@dataclass(frozen=True)
class ClassTriageStats:
    pending: int
    reviewed: int
    confirmed: int
    new_edges: int
    hit_rate: float | None  # null exactly when nothing was reviewed


@dataclass(frozen=True)
class TriageStats:
    per_class: Mapping[Stance, ClassTriageStats]

    def to_dict(self) -> dict:
        return {
            stance.value: {
                "pending": s.pending,
                "reviewed": s.reviewed,
                "confirmed": s.confirmed,
                "new_edges": s.new_edges,
                "hit_rate": s.hit_rate,
            }
            for stance, s in sorted(self.per_class.items(),
                                    key=lambda kv: CLASS_INDEX[kv[0]])
        }


def build_queue(candidates: Sequence[CandidateEdge],
                texts: Mapping[str, str]) -> list[TriageItem]:
    """Flatten candidates into review items, one per tweet.

    A tweet supporting multiple (edge, class) candidates keeps its
    highest-confidence reading; ties break toward the earlier class in the
    fixed class order, then the smaller edge key. Items are ordered by
    confidence descending, tweet id ascending.
    """
    best: dict[str, tuple[tuple[float, int, EdgeKey], Stance]] = {}
    for cand in candidates:
        for tweet_id, confidence in cand.support:
            rank = (-confidence, CLASS_INDEX[cand.stance], cand.edge)
            if tweet_id not in best or rank < best[tweet_id][0]:
                best[tweet_id] = (rank, cand.stance)
    items = []
    missing = [t for t in best if t not in texts]
    if missing:
        raise ValueError(
            f"{len(missing)} queued tweets lack raw text, e.g. {missing[0]!r}"
        )
    for tweet_id, ((neg_conf, _, edge), stance) in best.items():
        items.append(TriageItem(
            item_id=f"item-{tweet_id}",
            tweet_id=tweet_id,
            raw_text=texts[tweet_id],
            predicted_class=stance,
            confidence=-neg_conf,
            edge=edge,
        ))
    items.sort(key=lambda it: (-it.confidence, it.tweet_id))
    return items


def save_queue(items: Sequence[TriageItem], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for item in items:
            fh.write(json.dumps(
                {
                    "item_id": item.item_id,
                    "tweet_id": item.tweet_id,
                    "raw_text": item.raw_text,
                    "predicted_class": item.predicted_class.value,
                    "confidence": item.confidence,
                    "edge": list(item.edge),
                    "state": item.state.value,
                },
                sort_keys=True,
                separators=(",", ":"),
                ensure_ascii=False,
            ) + "\n")


def load_queue(path: str | Path) -> list[TriageItem]:
    items = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
                edge = data["edge"]
                items.append(TriageItem(
                    item_id=str(data["item_id"]),
                    tweet_id=str(data["tweet_id"]),
                    raw_text=str(data["raw_text"]),
                    predicted_class=Stance(data["predicted_class"]),
                    confidence=float(data["confidence"]),
                    edge=(str(edge[0]), str(edge[1])),
                    state=ItemState(data.get("state", "pending")),
                ))
            except (KeyError, ValueError, TypeError, IndexError) as exc:
                raise ValueError(f"{path}:{lineno}: bad queue item: {exc}")
    return items


@dataclass(frozen=True)
class RejectedDecision:
    decision: AnnotationDecision
    reason: str


@dataclass(frozen=True)
class DecisionOutcome:
    graph: RetweetGraph
    stats: TriageStats
    items: tuple[TriageItem, ...]
    confirmed_labels: Mapping[str, StanceLabel]
    rejected: tuple[RejectedDecision, ...]


def effective_decisions(
        decisions: Iterable[AnnotationDecision],
        items: Mapping[str, TriageItem]) -> tuple[
            dict[str, AnnotationDecision], list[RejectedDecision]]:
    """Latest-wins reduction in log order; unknown items become rejections."""
    effective: dict[str, AnnotationDecision] = {}
    rejected = []
    for decision in decisions:
        if decision.item_id not in items:
            rejected.append(RejectedDecision(
                decision=decision,
                reason=f"unknown item {decision.item_id!r}"))
            continue
        effective[decision.item_id] = decision
    return effective, rejected


def apply_decisions(graph: RetweetGraph,
                    decisions: Sequence[AnnotationDecision],
                    items: Sequence[TriageItem]) -> DecisionOutcome:
    """Merge reviewed verdicts into the graph and measure the yield.

    Confirmed stances become tweet labels with review provenance; the graph
    is relabeled with prior edge labels kept and the new ones added. The
    per-class hit rate is newly polarized edges over tweets reviewed, null
    when nothing of that class was reviewed.
    """
    by_id = {item.item_id: item for item in items}
    if len(by_id) != len(items):
        raise ValueError("duplicate item_id in queue")
    effective, rejected = effective_decisions(decisions, by_id)

    confirmed_labels: dict[str, StanceLabel] = {}
    for item_id, decision in effective.items():
        stance = decision.verdict.as_stance()
        if stance is not None:
            confirmed_labels[by_id[item_id].tweet_id] = StanceLabel(
                stance=stance, provenance=Provenance.TRIAGE_CONFIRMED)

    # relabel on top of what each edge already carries
    prior: dict[str, StanceLabel] = {}
    for record in graph.edges.values():
        for tweet_id, stance in record.labeled_tweets.items():
            prior[tweet_id] = StanceLabel(stance=stance,
                                          provenance=Provenance.MANUAL)
    merged = dict(prior)
    merged.update(confirmed_labels)
    new_graph = label_edges(graph, merged)

    new_edges = {stance: 0 for stance in POLARIZED_CLASSES}
    for key, record in new_graph.edges.items():
        if graph.edges[key].status is not EdgeStatus.UNLABELED:
            continue
        for stance, status in POLARIZED_STATUS.items():
            if record.status is status:
                new_edges[stance] += 1

    per_class = {}
    for stance in POLARIZED_CLASSES:
        class_items = [it for it in items if it.predicted_class is stance]
        decided = [effective[it.item_id] for it in class_items
                   if it.item_id in effective]
        reviewed = len(decided)
        confirmed = sum(1 for d in decided
                        if d.verdict.as_stance() is stance)
        pending = len(class_items) - reviewed
        hit_rate = new_edges[stance] / reviewed if reviewed > 0 else None
        per_class[stance] = ClassTriageStats(
            pending=pending, reviewed=reviewed, confirmed=confirmed,
            new_edges=new_edges[stance], hit_rate=hit_rate)

    updated_items = []
    for item in items:
        decision = effective.get(item.item_id)
        if decision is None:
            updated_items.append(item)
        elif decision.verdict is Verdict.SKIP:
            updated_items.append(replace(item, state=ItemState.SKIPPED))
        else:
            updated_items.append(replace(item, state=ItemState.DECIDED))

    return DecisionOutcome(
        graph=new_graph,
        stats=TriageStats(per_class=per_class),
        items=tuple(updated_items),
        confirmed_labels=confirmed_labels,
        rejected=tuple(rejected),
    )
