"""Retweet graph construction, k-core peeling, and edge labeling."""

import itertools

import numpy as np
import pytest

from conftest import corpus_from_rows, graph_of, tweet_row
from oracles import bf_k_core
from stancelab.evaluation import Calibration
from stancelab.labels import ProbDist, Stance, StanceLabel, Provenance
from stancelab.network import (
    CandidateEdge,
    EdgeRecord,
    EdgeStatus,
    RetweetGraph,
    build_graph,
    candidate_edges,
    count_edges_by_status,
    dump_graph,
    edge_key,
    k_core,
    label_edges,
    load_graph,
    status_from_counts,
)

R, U, N = Stance.PRO_RUSSIAN, Stance.PRO_UKRAINIAN, Stance.NEUTRAL


def manual(stance):
    return StanceLabel(stance=stance, provenance=Provenance.MANUAL)


def random_graph(rng, max_nodes=50):
    n = int(rng.integers(2, max_nodes + 1))
    names = [f"u{i:02d}" for i in range(n)]
    density = float(rng.uniform(0.02, 0.3))
    edges = [(a, b) for a, b in itertools.combinations(names, 2)
             if rng.random() < density]
    return graph_of(edges, extra_nodes=names)


class TestEdgeKey:
    def test_orders_the_pair(self):
        assert edge_key("zoe", "amy") == ("amy", "zoe")
        assert edge_key("amy", "zoe") == ("amy", "zoe")

    def test_rejects_self_loop(self):
        with pytest.raises(ValueError, match="self-loop"):
            edge_key("amy", "amy")


class TestStatusFromCounts:
    def test_rules(self):
        assert status_from_counts(0, 0, 0) is EdgeStatus.UNLABELED
        assert status_from_counts(2, 0, 1) is EdgeStatus.PRO_RUSSIAN
        assert status_from_counts(0, 1, 5) is EdgeStatus.PRO_UKRAINIAN
        assert status_from_counts(0, 0, 3) is EdgeStatus.NEUTRAL
        assert status_from_counts(1, 1, 0) is EdgeStatus.CONFLICTED

    def test_polarity_beats_any_amount_of_neutral(self):
        assert status_from_counts(1, 0, 99) is EdgeStatus.PRO_RUSSIAN


class TestBuildGraph:
    def test_retweet_creates_one_edge_per_pair(self, tmp_path, retweet_rows):
        corpus = corpus_from_rows(tmp_path, retweet_rows)
        graph = build_graph(corpus)
        assert set(graph.edges) == {("alice", "bob"), ("alice", "carol")}
        assert graph.edges[("alice", "bob")].tweet_ids == {"t2"}
        assert graph.edges[("alice", "carol")].tweet_ids == {"t3"}

    def test_every_user_is_a_node_even_without_edges(self, tmp_path,
                                                     retweet_rows):
        corpus = corpus_from_rows(tmp_path, retweet_rows)
        graph = build_graph(corpus)
        assert "dave" in graph.nodes

    def test_repeat_retweets_accumulate_on_one_edge(self, tmp_path):
        rows = [
            tweet_row("t1", "alice", "situation update from the field",
                      timestamp=100),
            tweet_row("t2", "bob", "RT @alice: situation update from the field",
                      timestamp=200),
            tweet_row("t3", "bob", "RT @alice: situation update from the field",
                      timestamp=300),
        ]
        graph = build_graph(corpus_from_rows(tmp_path, rows))
        assert set(graph.edges) == {("alice", "bob")}
        assert graph.edges[("alice", "bob")].tweet_ids == {"t2", "t3"}

    def test_self_retweet_creates_no_edge(self, tmp_path):
        rows = [
            tweet_row("t1", "alice", "posting my own report", timestamp=100),
            tweet_row("t2", "alice", "RT @alice: posting my own report",
                      timestamp=200),
        ]
        graph = build_graph(corpus_from_rows(tmp_path, rows))
        assert not graph.edges

    def test_unprepared_corpus_rejected(self, tmp_path, retweet_rows):
        from stancelab.corpus import ingest_corpus
        from conftest import write_jsonl
        path = tmp_path / "raw.jsonl"
        write_jsonl(path, retweet_rows)
        with pytest.raises(ValueError, match="prepared"):
            build_graph(ingest_corpus(path))

    def test_new_edges_start_unlabeled(self, tmp_path, retweet_rows):
        graph = build_graph(corpus_from_rows(tmp_path, retweet_rows))
        assert all(rec.status is EdgeStatus.UNLABELED
                   for rec in graph.edges.values())


class TestGraphInvariants:
    def test_unsorted_edge_key_rejected(self):
        with pytest.raises(ValueError, match="sorted"):
            RetweetGraph(nodes=frozenset({"a", "b"}),
                         edges={("b", "a"): EdgeRecord(frozenset({"t"}))})

    def test_edge_to_unknown_node_rejected(self):
        with pytest.raises(ValueError, match="unknown node"):
            RetweetGraph(nodes=frozenset({"a"}),
                         edges={("a", "b"): EdgeRecord(frozenset({"t"}))})

    def test_neighbors_are_symmetric(self):
        graph = graph_of([("a", "b"), ("b", "c")])
        adj = graph.neighbors()
        assert adj["a"] == {"b"} and adj["b"] == {"a", "c"} and adj["c"] == {"b"}


class TestKCore:
    def test_triangle_survives_its_own_2_core(self):
        graph = graph_of([("a", "b"), ("b", "c"), ("a", "c")])
        core = k_core(graph, 2)
        assert core.nodes == {"a", "b", "c"}
        assert len(core.edges) == 3

    def test_path_dissolves_at_k2(self):
        graph = graph_of([("a", "b"), ("b", "c"), ("c", "d")])
        core = k_core(graph, 2)
        assert not core.nodes and not core.edges

    def test_pendant_vertex_peels_and_cascades(self):
        # d hangs off a triangle; e hangs off d
        graph = graph_of([("a", "b"), ("b", "c"), ("a", "c"),
                          ("c", "d"), ("d", "e")])
        core = k_core(graph, 2)
        assert core.nodes == {"a", "b", "c"}

    def test_k1_drops_only_isolated_nodes(self):
        graph = graph_of([("a", "b")], extra_nodes=["loner"])
        core = k_core(graph, 1)
        assert core.nodes == {"a", "b"}

    def test_multiplicity_does_not_raise_degree(self):
        # many tweets on one edge still leave both endpoints at degree 1
        graph = graph_of([("a", "b", {"t1", "t2", "t3", "t4"})])
        assert not k_core(graph, 2).nodes

    def test_min_degree_of_result_is_at_least_k(self):
        rng = np.random.default_rng(21)
        for _ in range(40):
            graph = random_graph(rng)
            k = int(rng.integers(1, 5))
            core = k_core(graph, k)
            adj = core.neighbors()
            for node in core.nodes:
                assert len(adj[node]) >= k

    def test_idempotent(self):
        rng = np.random.default_rng(22)
        for _ in range(20):
            graph = random_graph(rng)
            once = k_core(graph, 2)
            twice = k_core(once, 2)
            assert twice.nodes == once.nodes
            assert set(twice.edges) == set(once.edges)

    def test_matches_brute_force_peeling(self):
        rng = np.random.default_rng(23)
        for _ in range(40):
            graph = random_graph(rng)
            k = int(rng.integers(1, 5))
            core = k_core(graph, k)
            expect = bf_k_core(graph.nodes, set(graph.edges), k)
            assert core.nodes == expect
            assert set(core.edges) == {e for e in graph.edges
                                       if e[0] in expect and e[1] in expect}

    def test_k_below_one_rejected(self):
        with pytest.raises(ValueError):
            k_core(graph_of([("a", "b")]), 0)

    def test_records_survive_with_their_tweets(self):
        graph = graph_of([("a", "b", {"x", "y"}), ("b", "c", {"z"}),
                          ("a", "c", {"w"})])
        core = k_core(graph, 2)
        assert core.edges[("a", "b")].tweet_ids == {"x", "y"}


class TestLabelEdges:
    def test_single_polarized_tweet_labels_the_edge(self):
        graph = graph_of([("a", "b", {"t1", "t2"})])
        labeled = label_edges(graph, {"t1": manual(R)})
        record = labeled.edges[("a", "b")]
        assert record.status is EdgeStatus.PRO_RUSSIAN
        assert record.labeled_tweets == {"t1": R}

    def test_opposite_polarities_conflict(self):
        graph = graph_of([("a", "b", {"t1", "t2"})])
        labeled = label_edges(graph, {"t1": manual(R), "t2": manual(U)})
        assert labeled.edges[("a", "b")].status is EdgeStatus.CONFLICTED

    def test_neutral_only_labels_neutral(self):
        graph = graph_of([("a", "b", {"t1"})])
        labeled = label_edges(graph, {"t1": manual(N)})
        assert labeled.edges[("a", "b")].status is EdgeStatus.NEUTRAL

    def test_labels_for_other_tweets_are_ignored(self):
        graph = graph_of([("a", "b", {"t1"})])
        labeled = label_edges(graph, {"elsewhere": manual(R)})
        assert labeled.edges[("a", "b")].status is EdgeStatus.UNLABELED

    def test_relabeling_with_more_labels_only_refines(self):
        # growing the label set can move Unlabeled -> polarized ->
        # Conflicted but never back to Unlabeled
        graph = graph_of([("a", "b", {"t1", "t2"})])
        step1 = label_edges(graph, {"t1": manual(R)})
        step2 = label_edges(step1, {"t1": manual(R), "t2": manual(U)})
        assert step1.edges[("a", "b")].status is EdgeStatus.PRO_RUSSIAN
        assert step2.edges[("a", "b")].status is EdgeStatus.CONFLICTED

    def test_count_edges_by_status(self):
        graph = graph_of([("a", "b", {"t1"}), ("b", "c", {"t2"}),
                          ("c", "d", {"t3"})])
        labeled = label_edges(graph, {"t1": manual(R), "t2": manual(U)})
        counts = count_edges_by_status(labeled)
        assert counts[EdgeStatus.PRO_RUSSIAN] == 1
        assert counts[EdgeStatus.PRO_UKRAINIAN] == 1
        assert counts[EdgeStatus.UNLABELED] == 1
        assert counts[EdgeStatus.CONFLICTED] == 0


def calib_at(threshold, stance):
    return Calibration(target_precision=0.8, threshold=threshold,
                       achieved_precision=0.9, achieved_recall=0.5,
                       achievable=True, stance=stance)


def dist(pr, pu):
    return ProbDist.from_array(np.array([pr, pu, 1.0 - pr - pu]))


CALIB = {R: calib_at(0.7, R), U: calib_at(0.7, U)}


class TestCandidateEdges:
    def test_confident_tweet_yields_a_candidate(self):
        graph = graph_of([("a", "b", {"t1"})])
        cands = candidate_edges(graph, {"t1": dist(0.9, 0.05)}, CALIB)
        assert len(cands) == 1
        assert cands[0].edge == ("a", "b")
        assert cands[0].stance is R
        assert cands[0].support == (("t1", pytest.approx(0.9)),)
        assert not cands[0].conflicting

    def test_below_threshold_is_silent(self):
        graph = graph_of([("a", "b", {"t1"})])
        assert candidate_edges(graph, {"t1": dist(0.6, 0.2)}, CALIB) == []

    def test_already_labeled_edges_are_skipped(self):
        graph = graph_of([("a", "b", {"t1"})])
        labeled = label_edges(graph, {"t1": manual(R)})
        assert candidate_edges(labeled, {"t1": dist(0.99, 0.0)}, CALIB) == []

    def test_both_classes_fire_as_two_conflicting_candidates(self):
        graph = graph_of([("a", "b", {"t1", "t2"})])
        preds = {"t1": dist(0.9, 0.05), "t2": dist(0.05, 0.9)}
        cands = candidate_edges(graph, preds, CALIB)
        assert len(cands) == 2
        assert {c.stance for c in cands} == {R, U}
        assert all(c.conflicting for c in cands)

    def test_ranked_by_top_confidence_descending(self):
        graph = graph_of([("a", "b", {"t1"}), ("c", "d", {"t2"}),
                          ("e", "f", {"t3"})])
        preds = {"t1": dist(0.8, 0.1), "t2": dist(0.95, 0.02),
                 "t3": dist(0.02, 0.88)}
        cands = candidate_edges(graph, preds, CALIB)
        assert [c.edge for c in cands] == [("c", "d"), ("e", "f"), ("a", "b")]

    def test_support_sorted_by_confidence_within_edge(self):
        graph = graph_of([("a", "b", {"t1", "t2"})])
        preds = {"t1": dist(0.75, 0.1), "t2": dist(0.92, 0.02)}
        cands = candidate_edges(graph, preds, CALIB)
        assert [tid for tid, _ in cands[0].support] == ["t2", "t1"]
        assert cands[0].max_confidence == pytest.approx(0.92)

    def test_missing_predictions_are_tolerated(self):
        graph = graph_of([("a", "b", {"t1", "t2"})])
        cands = candidate_edges(graph, {"t1": dist(0.9, 0.02)}, CALIB)
        assert len(cands) == 1

    def test_unachievable_calibration_refused(self):
        bad = Calibration(target_precision=0.8, threshold=None,
                          achieved_precision=0.5, achieved_recall=1.0,
                          achievable=False, stance=U)
        graph = graph_of([("a", "b", {"t1"})])
        with pytest.raises(ValueError, match="precision target"):
            candidate_edges(graph, {"t1": dist(0.9, 0.0)}, {R: calib_at(0.7, R),
                                                           U: bad})

    def test_missing_calibration_refused(self):
        graph = graph_of([("a", "b", {"t1"})])
        with pytest.raises(ValueError, match="missing calibration"):
            candidate_edges(graph, {"t1": dist(0.9, 0.0)},
                            {R: calib_at(0.7, R)})

    def test_neutral_never_produces_candidates(self):
        graph = graph_of([("a", "b", {"t1"})])
        cands = candidate_edges(graph, {"t1": dist(0.01, 0.01)}, CALIB)
        assert cands == []
        with pytest.raises(ValueError, match="polarized"):
            CandidateEdge(edge=("a", "b"), stance=N,
                          support=(("t1", 0.9),))


class TestDumpLoad:
    def test_round_trip_preserves_edges_and_statuses(self, tmp_path):
        graph = graph_of([("a", "b", {"t1"}), ("b", "c", {"t2", "t3"})])
        labeled = label_edges(graph, {"t1": manual(R)})
        path = tmp_path / "graph.tsv"
        dump_graph(labeled, path)
        back = load_graph(path)
        assert set(back.edges) == set(labeled.edges)
        for key in labeled.edges:
            assert back.edges[key].status is labeled.edges[key].status
            assert back.edges[key].tweet_ids == labeled.edges[key].tweet_ids

    def test_dump_rows_are_sorted(self, tmp_path):
        graph = graph_of([("z", "y", {"t2"}), ("a", "b", {"t1"})])
        path = tmp_path / "graph.tsv"
        dump_graph(graph, path)
        rows = path.read_text().splitlines()
        assert rows == sorted(rows)

    def test_malformed_row_rejected(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("a\tb\tunlabeled\n")
        with pytest.raises(ValueError, match="4 fields"):
            load_graph(path)

    def test_unknown_status_rejected(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("a\tb\tsideways\tt1\n")
        with pytest.raises(ValueError, match="unknown status"):
            load_graph(path)

    def test_duplicate_edge_rejected(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("a\tb\tunlabeled\tt1\nb\ta\tunlabeled\tt2\n")
        with pytest.raises(ValueError, match="duplicate"):
            load_graph(path)
