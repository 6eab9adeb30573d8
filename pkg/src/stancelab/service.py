"""HTTP triage service: queue reads, durable decision writes, live stats.

The append-only decision log is the single source of truth; an acknowledged
decision has been flushed and fsynced before the response leaves. Restart
recovery replays the log over the queue file. Only a corrupt final line is
tolerated (the torn tail of a crashed write): it is truncated away with a
warning, while corruption earlier in the log is an error.
"""

# no lazy annotations here: the request model below is local to create_app,
# and FastAPI must see it as a real class, not a deferred string
import logging
import os
import time
from pathlib import Path
from typing import Mapping

from .labels import Stance
from .triage import (
    POLARIZED_CLASSES,
    AnnotationDecision,
    ClassTriageStats,
    ItemState,
    TriageItem,
    TriageStats,
    Verdict,
    load_queue,
)
from .network import POLARIZED_STATUS, EdgeKey, status_from_counts

logger = logging.getLogger(__name__)


class UnknownItemError(KeyError):
    pass


def replay_log(log_path: str | Path) -> list[AnnotationDecision]:
    """Parse the decision log, truncating a corrupt trailing line in place."""
    log_path = Path(log_path)
    raw = log_path.read_bytes()
    segments = []  # (offset, bytes)
    offset = 0
    for seg in raw.split(b"\n"):
        if seg:
            segments.append((offset, seg))
        offset += len(seg) + 1

    decisions = []
    for index, (start, seg) in enumerate(segments):
        try:
            decisions.append(
                AnnotationDecision.from_json_line(seg.decode("utf-8")))
        except Exception as exc:
            if index == len(segments) - 1:
                logger.warning(
                    "decision log %s: truncating corrupt trailing line "
                    "(%d bytes dropped): %s", log_path, len(raw) - start, exc)
                with open(log_path, "wb") as fh:
                    fh.write(raw[:start])
                break
            raise ValueError(
                f"decision log {log_path} corrupt before its final line "
                f"(entry {index + 1}): {exc}"
            ) from exc
    return decisions


class TriageService:
    """Queue plus decision log; one writer, any number of readers."""

    def __init__(self, items: list[TriageItem], log_path: str | Path):
        ids = [it.item_id for it in items]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate item_id in queue")
        self.items: dict[str, TriageItem] = {it.item_id: it for it in items}
        self.queue_order: list[str] = ids
        self.log_path = Path(log_path)
        self.effective: dict[str, AnnotationDecision] = {}
        self.last_ts = 0.0
        self._log_fh = None

    @classmethod
    def recover(cls, queue_path: str | Path,
                log_path: str | Path) -> "TriageService":
        """Load the queue and fold the decision log over it."""
        service = cls(load_queue(queue_path), log_path)
        if Path(log_path).exists():
            for decision in replay_log(log_path):
                if decision.item_id not in service.items:
                    logger.warning("log decision for unknown item %s ignored",
                                   decision.item_id)
                    continue
                service._absorb(decision)
        return service

    def _absorb(self, decision: AnnotationDecision) -> None:
        self.effective[decision.item_id] = decision
        self.last_ts = max(self.last_ts, decision.decided_at)
        state = (ItemState.SKIPPED if decision.verdict is Verdict.SKIP
                 else ItemState.DECIDED)
        item = self.items[decision.item_id]
        self.items[decision.item_id] = TriageItem(
            item_id=item.item_id, tweet_id=item.tweet_id,
            raw_text=item.raw_text, predicted_class=item.predicted_class,
            confidence=item.confidence, edge=item.edge, state=state)

    def _append_durably(self, decision: AnnotationDecision) -> None:
        if self._log_fh is None:
            self._log_fh = open(self.log_path, "a", encoding="utf-8")
        self._log_fh.write(decision.to_json_line() + "\n")
        self._log_fh.flush()
        os.fsync(self._log_fh.fileno())

    def close(self) -> None:
        if self._log_fh is not None:
            self._log_fh.close()
            self._log_fh = None

    def post_decision(self, item_id: str, verdict: str, annotator_id: str,
                      decided_at: float | None = None) -> AnnotationDecision:
        """Validate, persist, then apply. The caller may assume durability
        once this returns."""
        if item_id not in self.items:
            raise UnknownItemError(item_id)
        try:
            parsed = Verdict(verdict)
        except ValueError:
            raise ValueError(f"unknown verdict {verdict!r}") from None
        ts = time.time() if decided_at is None else float(decided_at)
        # timestamps are monotone within the log; clamp clock regressions
        ts = max(ts, self.last_ts)
        decision = AnnotationDecision(item_id=item_id, verdict=parsed,
                                      annotator_id=annotator_id,
                                      decided_at=ts)
        self._append_durably(decision)
        self._absorb(decision)
        return decision

    def pending(self, stance: Stance | None = None,
                limit: int | None = None) -> list[TriageItem]:
        out = []
        for item_id in self.queue_order:
            item = self.items[item_id]
            if item.state is not ItemState.PENDING:
                continue
            if stance is not None and item.predicted_class is not stance:
                continue
            out.append(item)
            if limit is not None and len(out) >= limit:
                break
        return out

    def _edge_outcomes(self) -> dict[EdgeKey, object]:
        """Status each queue edge would take under the confirmed verdicts."""
        by_edge: dict[EdgeKey, dict[Stance, int]] = {}
        for item_id, decision in self.effective.items():
            stance = decision.verdict.as_stance()
            if stance is None:
                continue
            edge = self.items[item_id].edge
            counts = by_edge.setdefault(edge, {s: 0 for s in Stance})
            counts[stance] += 1
        return {
            edge: status_from_counts(counts[Stance.PRO_RUSSIAN],
                                     counts[Stance.PRO_UKRAINIAN],
                                     counts[Stance.NEUTRAL])
            for edge, counts in by_edge.items()
        }

    def stats(self) -> TriageStats:
        outcomes = self._edge_outcomes()
        new_edges = {stance: 0 for stance in POLARIZED_CLASSES}
        for status in outcomes.values():
            for stance, polarized in POLARIZED_STATUS.items():
                if status is polarized:
                    new_edges[stance] += 1

        per_class = {}
        for stance in POLARIZED_CLASSES:
            class_items = [self.items[i] for i in self.queue_order
                           if self.items[i].predicted_class is stance]
            reviewed = sum(1 for it in class_items
                           if it.state is not ItemState.PENDING)
            confirmed = sum(
                1 for it in class_items
                if it.item_id in self.effective
                and self.effective[it.item_id].verdict.as_stance() is stance)
            pending = len(class_items) - reviewed
            hit_rate = new_edges[stance] / reviewed if reviewed > 0 else None
            per_class[stance] = ClassTriageStats(
                pending=pending, reviewed=reviewed, confirmed=confirmed,
                new_edges=new_edges[stance], hit_rate=hit_rate)
        return TriageStats(per_class=per_class)


def item_to_dict(item: TriageItem) -> dict:
    return {
        "item_id": item.item_id,
        "tweet_id": item.tweet_id,
        "raw_text": item.raw_text,
        "predicted_class": item.predicted_class.value,
        "confidence": item.confidence,
        "edge": list(item.edge),
        "state": item.state.value,
    }


def create_app(service: TriageService):
    """FastAPI application over one service instance."""
    from fastapi import FastAPI, HTTPException, Query
    from fastapi.middleware.cors import CORSMiddleware
    from pydantic import BaseModel

    class DecisionIn(BaseModel):
        item_id: str
        verdict: str
        annotator_id: str = "anonymous"
        decided_at: float | None = None

    app = FastAPI(title="stance triage")
    # the review page is served from elsewhere during development
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    @app.get("/api/queue")
    def get_queue(class_: str | None = Query(default=None, alias="class"),
                  limit: int = Query(default=20, ge=1)):
        stance = None
        if class_ is not None:
            try:
                stance = Stance(class_)
            except ValueError:
                raise HTTPException(status_code=400,
                                    detail=f"unknown class {class_!r}")
            if stance not in POLARIZED_CLASSES:
                raise HTTPException(
                    status_code=400,
                    detail=f"queue holds only polarized classes, not {class_!r}")
        items = service.pending(stance=stance, limit=limit)
        return {"items": [item_to_dict(it) for it in items]}

    @app.post("/api/decisions")
    def post_decision(body: DecisionIn):
        try:
            decision = service.post_decision(
                item_id=body.item_id, verdict=body.verdict,
                annotator_id=body.annotator_id, decided_at=body.decided_at)
        except UnknownItemError:
            raise HTTPException(status_code=404,
                                detail=f"unknown item {body.item_id!r}")
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {
            "ok": True,
            "item_id": decision.item_id,
            "verdict": decision.verdict.value,
            "decided_at": decision.decided_at,
            "stats": service.stats().to_dict(),
        }

    @app.get("/api/stats")
    def get_stats():
        return service.stats().to_dict()

    return app
