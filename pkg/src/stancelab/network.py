"""Retweet graph construction, k-core extraction, and edge polarization.

Edges are unordered user pairs carrying the retweet tweet ids between the
two endpoints; retweet direction is discarded. An edge is polarized when at
least one of its labeled tweets is polarized and no tweet of the opposite
polarity appears; both polarities on one edge surface as Conflicted rather
than being hidden. Degree, for the k-core, counts distinct neighbors, not
tweet multiplicity.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Corpus
from .evaluation import Calibration
from .labels import CLASS_INDEX, ProbDist, Stance, StanceLabel

logger = logging.getLogger(__name__)

EdgeKey = tuple[str, str]


class EdgeStatus(enum.Enum):
    UNLABELED = "unlabeled"
    PRO_RUSSIAN = "pro_russian"
    PRO_UKRAINIAN = "pro_ukrainian"
    NEUTRAL = "neutral"
    CONFLICTED = "conflicted"


POLARIZED_STATUS = {
    Stance.PRO_RUSSIAN: EdgeStatus.PRO_RUSSIAN,
    Stance.PRO_UKRAINIAN: EdgeStatus.PRO_UKRAINIAN,
}


def edge_key(user_a: str, user_b: str) -> EdgeKey:
    if user_a == user_b:
        raise ValueError(f"self-loop edge for user {user_a!r}")
    return (user_a, user_b) if user_a < user_b else (user_b, user_a)


def status_from_counts(n_pro_r: int, n_pro_u: int, n_neutral: int) -> EdgeStatus:
    if n_pro_r > 0 and n_pro_u > 0:
        return EdgeStatus.CONFLICTED
    if n_pro_r > 0:
        return EdgeStatus.PRO_RUSSIAN
    if n_pro_u > 0:
        return EdgeStatus.PRO_UKRAINIAN
    if n_neutral > 0:
        return EdgeStatus.NEUTRAL
    return EdgeStatus.UNLABELED


@dataclass(frozen=True)
class EdgeRecord:
    """One undirected edge: the retweets behind it plus its label state.

    labeled_tweets keeps the per-tweet stances actually applied, so
    relabeling after new annotations cannot double count.
    """

    tweet_ids: frozenset[str]
    status: EdgeStatus = EdgeStatus.UNLABELED
    labeled_tweets: Mapping[str, Stance] = field(default_factory=dict)

    def evidence(self) -> dict[Stance, int]:
        counts = {s: 0 for s in Stance}
        for stance in self.labeled_tweets.values():
            counts[stance] += 1
        return counts


@dataclass(frozen=True)
class RetweetGraph:
    nodes: frozenset[str]
    edges: Mapping[EdgeKey, EdgeRecord]

    def __post_init__(self):
        for (a, b), record in self.edges.items():
            if a == b:
                raise ValueError(f"self-loop edge {a!r}")
            if a > b:
                raise ValueError(f"edge key not in sorted order: {(a, b)}")
            if a not in self.nodes or b not in self.nodes:
                raise ValueError(f"edge {(a, b)} references unknown node")

    def neighbors(self) -> dict[str, set[str]]:
        adj: dict[str, set[str]] = {node: set() for node in self.nodes}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj


def build_graph(corpus: Corpus) -> RetweetGraph:
    """One edge per unordered user pair with at least one retweet between
    them; the retweet tweet ids are attached. Self-retweets are dropped."""
    if not corpus.groups or not corpus.processed:
        raise ValueError("corpus must be prepared (processed and grouped) "
                         "before graph construction")
    edge_tweets: dict[EdgeKey, set[str]] = {}
    for group in corpus.groups.values():
        original_author = corpus.tweet_by_id[group.original_id].user_id
        for member_id in group.member_ids:
            if member_id == group.original_id:
                continue
            if not corpus.processed[member_id].is_retweet:
                continue
            retweeter = corpus.tweet_by_id[member_id].user_id
            if retweeter == original_author:
                continue
            key = edge_key(retweeter, original_author)
            edge_tweets.setdefault(key, set()).add(member_id)
    nodes = frozenset(t.user_id for t in corpus.tweets)
    edges = {key: EdgeRecord(tweet_ids=frozenset(ids))
             for key, ids in edge_tweets.items()}
    return RetweetGraph(nodes=nodes, edges=edges)


def k_core(graph: RetweetGraph, k: int) -> RetweetGraph:
    """Repeatedly delete nodes with fewer than k distinct neighbors until no
    deletion applies, then return the induced subgraph."""
    if k < 1:
        raise ValueError("k must be at least 1")
    adj = graph.neighbors()
    alive = set(graph.nodes)
    changed = True
    while changed:
        changed = False
        for node in list(alive):
            degree = sum(1 for nb in adj[node] if nb in alive)
            if degree < k:
                alive.discard(node)
                changed = True
    edges = {key: record for key, record in graph.edges.items()
             if key[0] in alive and key[1] in alive}
    return RetweetGraph(nodes=frozenset(alive), edges=edges)


def label_edges(graph: RetweetGraph,
                labels: Mapping[str, StanceLabel]) -> RetweetGraph:
    """Recompute every edge's status from the labels covering its tweets."""
    edges = {}
    for key, record in graph.edges.items():
        labeled = {tid: labels[tid].stance
                   for tid in record.tweet_ids if tid in labels}
        counts = {s: 0 for s in Stance}
        for stance in labeled.values():
            counts[stance] += 1
        status = status_from_counts(counts[Stance.PRO_RUSSIAN],
                                    counts[Stance.PRO_UKRAINIAN],
                                    counts[Stance.NEUTRAL])
        edges[key] = EdgeRecord(tweet_ids=record.tweet_ids, status=status,
                                labeled_tweets=labeled)
    return RetweetGraph(nodes=graph.nodes, edges=edges)


@dataclass(frozen=True)
class CandidateEdge:
    """A previously unlabeled edge with confident support for one class."""

    edge: EdgeKey
    stance: Stance
    support: tuple[tuple[str, float], ...]  # (tweet_id, confidence), conf desc
    conflicting: bool = False

    def __post_init__(self):
        if self.stance not in POLARIZED_STATUS:
            raise ValueError("candidates exist only for polarized classes")
        if not self.support:
            raise ValueError("candidate without supporting tweets")

    @property
    def max_confidence(self) -> float:
        return self.support[0][1]


def candidate_edges(graph: RetweetGraph,
                    predictions: Mapping[str, ProbDist],
                    calib: Mapping[Stance, Calibration]) -> list[CandidateEdge]:
    """Confident per-class candidates among currently unlabeled edges.

    A tweet supports a class when its predicted probability for that class
    reaches the calibrated threshold. One candidate is emitted per
    (edge, class) with support; an edge confident for both classes yields
    two candidates, each flagged conflicting. Ranked by top confidence.
    """
    thresholds = {}
    for stance in POLARIZED_STATUS:
        c = calib.get(stance)
        if c is None:
            raise ValueError(f"missing calibration for {stance.value}")
        if not c.achievable or c.threshold is None:
            raise ValueError(
                f"calibration for {stance.value} did not reach its "
                f"precision target; refusing to emit candidates"
            )
        thresholds[stance] = c.threshold

    out = []
    for key, record in graph.edges.items():
        if record.status is not EdgeStatus.UNLABELED:
            continue
        support: dict[Stance, list[tuple[str, float]]] = {
            s: [] for s in POLARIZED_STATUS
        }
        for tid in record.tweet_ids:
            dist = predictions.get(tid)
            if dist is None:
                logger.debug("no prediction for tweet %s on edge %s", tid, key)
                continue
            for stance, threshold in thresholds.items():
                confidence = dist.prob(stance)
                if confidence >= threshold:
                    support[stance].append((tid, confidence))
        present = [s for s in POLARIZED_STATUS if support[s]]
        for stance in present:
            ranked = tuple(sorted(support[stance],
                                  key=lambda tc: (-tc[1], tc[0])))
            out.append(CandidateEdge(edge=key, stance=stance, support=ranked,
                                     conflicting=len(present) > 1))
    out.sort(key=lambda c: (-c.max_confidence, c.edge, CLASS_INDEX[c.stance]))
    return out


def count_edges_by_status(graph: RetweetGraph) -> dict[EdgeStatus, int]:
    counts = {status: 0 for status in EdgeStatus}
    for record in graph.edges.values():
        counts[record.status] += 1
    return counts


def dump_graph(graph: RetweetGraph, path: str | Path) -> None:
    """Edge list as user_a<TAB>user_b<TAB>status<TAB>tweet_ids, sorted rows."""
    with open(path, "w", encoding="utf-8") as fh:
        for (a, b) in sorted(graph.edges):
            record = graph.edges[(a, b)]
            tweet_ids = ",".join(sorted(record.tweet_ids))
            fh.write(f"{a}\t{b}\t{record.status.value}\t{tweet_ids}\n")


def load_graph(path: str | Path) -> RetweetGraph:
    """Read an edge-list dump back. Per-tweet label assignments and isolated
    nodes are not part of the dump, so only edges and statuses survive a
    round trip."""
    edges: dict[EdgeKey, EdgeRecord] = {}
    nodes = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 fields, "
                                 f"got {len(parts)}")
            a, b, status_text, tweet_text = parts
            key = edge_key(a, b)
            if key in edges:
                raise ValueError(f"{path}:{lineno}: duplicate edge {key}")
            try:
                status = EdgeStatus(status_text)
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: unknown status {status_text!r}"
                ) from None
            tweet_ids = frozenset(t for t in tweet_text.split(",") if t)
            edges[key] = EdgeRecord(tweet_ids=tweet_ids, status=status)
            nodes.update(key)
    return RetweetGraph(nodes=frozenset(nodes), edges=edges)
