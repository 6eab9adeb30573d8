"""Service durability, log replay, and the HTTP surface."""

import json
import logging

import pytest
from fastapi.testclient import TestClient

from stancelab.labels import Stance
from stancelab.service import (
    TriageService,
    UnknownItemError,
    create_app,
    replay_log,
)
from stancelab.triage import (
    AnnotationDecision,
    ItemState,
    TriageItem,
    Verdict,
    save_queue,
)

R, U = Stance.PRO_RUSSIAN, Stance.PRO_UKRAINIAN


def item(tweet_id, stance=R, confidence=0.9, edge=None):
    return TriageItem(item_id=f"item-{tweet_id}", tweet_id=tweet_id,
                      raw_text=f"text of {tweet_id}", predicted_class=stance,
                      confidence=confidence,
                      edge=edge or ("a", f"z{tweet_id}"))


def five_items():
    return [
        item("t1", R, 0.95),
        item("t2", U, 0.90),
        item("t3", R, 0.85),
        item("t4", U, 0.80),
        item("t5", R, 0.75),
    ]


@pytest.fixture
def service(tmp_path):
    svc = TriageService(five_items(), tmp_path / "decisions.jsonl")
    yield svc
    svc.close()


class TestServiceCore:
    def test_pending_respects_class_and_limit(self, service):
        assert [it.tweet_id for it in service.pending()] == \
            ["t1", "t2", "t3", "t4", "t5"]
        assert [it.tweet_id for it in service.pending(stance=U)] == \
            ["t2", "t4"]
        assert [it.tweet_id for it in service.pending(limit=2)] == \
            ["t1", "t2"]

    def test_decided_items_leave_the_pending_view(self, service):
        service.post_decision("item-t1", "pro_russian", "ann")
        assert "t1" not in [it.tweet_id for it in service.pending()]
        assert service.items["item-t1"].state is ItemState.DECIDED

    def test_unknown_item_raises(self, service):
        with pytest.raises(UnknownItemError):
            service.post_decision("item-ghost", "skip", "ann")

    def test_unknown_verdict_raises(self, service):
        with pytest.raises(ValueError, match="verdict"):
            service.post_decision("item-t1", "sideways", "ann")

    def test_duplicate_queue_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="duplicate"):
            TriageService([item("t1"), item("t1")],
                          tmp_path / "log.jsonl")

    def test_ack_is_on_disk_before_return(self, service):
        service.post_decision("item-t1", "pro_russian", "ann",
                              decided_at=123.0)
        lines = service.log_path.read_text().splitlines()
        assert len(lines) == 1
        decision = AnnotationDecision.from_json_line(lines[0])
        assert decision.item_id == "item-t1"
        assert decision.verdict is Verdict.PRO_RUSSIAN
        assert decision.decided_at == 123.0

    def test_timestamps_never_regress(self, service):
        service.post_decision("item-t1", "skip", "ann", decided_at=500.0)
        second = service.post_decision("item-t2", "skip", "ann",
                                       decided_at=100.0)
        assert second.decided_at == 500.0
        third = service.post_decision("item-t3", "skip", "ann",
                                      decided_at=600.0)
        assert third.decided_at == 600.0

    def test_stats_track_confirmations_and_edges(self, service):
        service.post_decision("item-t1", "pro_russian", "ann")
        service.post_decision("item-t3", "neutral", "ann")
        service.post_decision("item-t2", "pro_ukrainian", "ann")
        stats = service.stats().per_class
        assert stats[R].reviewed == 2
        assert stats[R].confirmed == 1
        assert stats[R].new_edges == 1
        assert stats[R].hit_rate == pytest.approx(0.5)
        assert stats[U].reviewed == 1
        assert stats[U].confirmed == 1
        assert stats[U].pending == 1

    def test_unreviewed_class_has_null_hit_rate(self, service):
        service.post_decision("item-t1", "pro_russian", "ann")
        assert service.stats().per_class[U].hit_rate is None


class TestRecovery:
    def _start(self, tmp_path):
        queue_path = tmp_path / "queue.jsonl"
        save_queue(five_items(), queue_path)
        return queue_path, tmp_path / "decisions.jsonl"

    def test_replay_restores_decided_state(self, tmp_path):
        queue_path, log_path = self._start(tmp_path)
        first = TriageService.recover(queue_path, log_path)
        first.post_decision("item-t1", "pro_russian", "ann", decided_at=10.0)
        first.post_decision("item-t2", "skip", "ann", decided_at=20.0)
        first.close()

        second = TriageService.recover(queue_path, log_path)
        assert second.items["item-t1"].state is ItemState.DECIDED
        assert second.items["item-t2"].state is ItemState.SKIPPED
        assert [it.tweet_id for it in second.pending()] == ["t3", "t4", "t5"]
        assert second.last_ts == 20.0
        assert second.stats().to_dict() == first.stats().to_dict()
        second.close()

    def test_replay_keeps_latest_decision_per_item(self, tmp_path):
        queue_path, log_path = self._start(tmp_path)
        first = TriageService.recover(queue_path, log_path)
        first.post_decision("item-t1", "pro_russian", "ann", decided_at=10.0)
        first.post_decision("item-t1", "neutral", "ann", decided_at=20.0)
        first.close()

        second = TriageService.recover(queue_path, log_path)
        assert second.effective["item-t1"].verdict is Verdict.NEUTRAL
        second.close()

    def test_missing_log_file_is_a_fresh_start(self, tmp_path):
        queue_path, log_path = self._start(tmp_path)
        svc = TriageService.recover(queue_path, log_path)
        assert len(svc.pending()) == 5
        svc.close()

    def test_corrupt_trailing_line_truncated_with_warning(self, tmp_path,
                                                          caplog):
        queue_path, log_path = self._start(tmp_path)
        first = TriageService.recover(queue_path, log_path)
        first.post_decision("item-t1", "pro_russian", "ann", decided_at=10.0)
        first.close()
        good = log_path.read_bytes()
        with open(log_path, "ab") as fh:
            fh.write(b'{"item_id": "item-t2", "verd')  # torn write

        with caplog.at_level(logging.WARNING):
            decisions = replay_log(log_path)
        assert len(decisions) == 1
        assert "truncat" in caplog.text
        assert log_path.read_bytes() == good

    def test_recover_after_torn_write_loses_only_the_tail(self, tmp_path):
        queue_path, log_path = self._start(tmp_path)
        first = TriageService.recover(queue_path, log_path)
        first.post_decision("item-t1", "pro_russian", "ann", decided_at=10.0)
        first.post_decision("item-t2", "neutral", "ann", decided_at=11.0)
        first.close()
        with open(log_path, "ab") as fh:
            fh.write(b"not json at all")

        svc = TriageService.recover(queue_path, log_path)
        assert svc.items["item-t1"].state is ItemState.DECIDED
        assert svc.items["item-t2"].state is ItemState.DECIDED
        assert svc.items["item-t3"].state is ItemState.PENDING
        svc.close()

    def test_corruption_before_the_tail_is_fatal(self, tmp_path):
        queue_path, log_path = self._start(tmp_path)
        lines = [
            "garbage line",
            AnnotationDecision(item_id="item-t1", verdict=Verdict.SKIP,
                               annotator_id="a",
                               decided_at=1.0).to_json_line(),
        ]
        log_path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ValueError, match="before its final line"):
            replay_log(log_path)

    def test_decisions_for_unknown_items_are_ignored_on_replay(self, tmp_path):
        queue_path, log_path = self._start(tmp_path)
        log_path.write_text(AnnotationDecision(
            item_id="item-ghost", verdict=Verdict.SKIP, annotator_id="a",
            decided_at=1.0).to_json_line() + "\n")
        svc = TriageService.recover(queue_path, log_path)
        assert len(svc.pending()) == 5
        svc.close()

    def test_appends_after_recovery_extend_the_same_log(self, tmp_path):
        queue_path, log_path = self._start(tmp_path)
        first = TriageService.recover(queue_path, log_path)
        first.post_decision("item-t1", "skip", "ann", decided_at=10.0)
        first.close()
        second = TriageService.recover(queue_path, log_path)
        second.post_decision("item-t2", "skip", "ann", decided_at=20.0)
        second.close()
        assert len(log_path.read_text().splitlines()) == 2


@pytest.fixture
def client(service):
    return TestClient(create_app(service))


class TestHttpApi:
    def test_queue_endpoint_returns_pending_items(self, client):
        data = client.get("/api/queue").json()
        assert [it["tweet_id"] for it in data["items"]] == \
            ["t1", "t2", "t3", "t4", "t5"]
        first = data["items"][0]
        assert first["item_id"] == "item-t1"
        assert first["predicted_class"] == "pro_russian"
        assert first["state"] == "pending"
        assert first["edge"] == ["a", "zt1"]

    def test_queue_class_filter_and_limit(self, client):
        data = client.get("/api/queue",
                          params={"class": "pro_ukrainian", "limit": 1}).json()
        assert [it["tweet_id"] for it in data["items"]] == ["t2"]

    def test_queue_unknown_class_is_400(self, client):
        assert client.get("/api/queue",
                          params={"class": "sideways"}).status_code == 400

    def test_queue_neutral_class_is_400(self, client):
        response = client.get("/api/queue", params={"class": "neutral"})
        assert response.status_code == 400
        assert "polarized" in response.json()["detail"]

    def test_decision_round_trip_updates_stats(self, client):
        response = client.post("/api/decisions", json={
            "item_id": "item-t1", "verdict": "pro_russian",
            "annotator_id": "ann", "decided_at": 50.0})
        assert response.status_code == 200
        body = response.json()
        assert body["ok"] is True
        assert body["decided_at"] == 50.0
        assert body["stats"]["pro_russian"]["confirmed"] == 1

        stats = client.get("/api/stats").json()
        assert stats == body["stats"]
        assert stats["pro_russian"]["hit_rate"] == pytest.approx(1.0)
        assert stats["pro_ukrainian"]["hit_rate"] is None

    def test_unknown_item_is_404(self, client):
        response = client.post("/api/decisions", json={
            "item_id": "item-ghost", "verdict": "skip"})
        assert response.status_code == 404

    def test_unknown_verdict_is_400(self, client):
        response = client.post("/api/decisions", json={
            "item_id": "item-t1", "verdict": "sideways"})
        assert response.status_code == 400

    def test_default_annotator_is_anonymous(self, service, client):
        client.post("/api/decisions", json={
            "item_id": "item-t1", "verdict": "skip"})
        assert service.effective["item-t1"].annotator_id == "anonymous"

    def test_cors_allows_the_dev_origin(self, client):
        response = client.get("/api/stats",
                              headers={"Origin": "http://localhost:5173"})
        assert response.headers["access-control-allow-origin"] == "*"
