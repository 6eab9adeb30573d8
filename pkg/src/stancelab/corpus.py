"""Tweet ingestion, text preprocessing, duplicate grouping and label propagation.

The corpus file format is UTF-8 JSON-lines: one object per line with fields
``id``, ``user_id``, ``timestamp``, ``text`` and optional ``label`` (one of
``pro_russian`` / ``pro_ukrainian`` / ``neutral``) and ``lang``. A standalone
labels file is tab-separated ``tweet_id<TAB>label`` lines.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

from .labels import Provenance, Stance, StanceLabel, parse_stance

logger = logging.getLogger(__name__)

RT_PLACEHOLDER = "<rt>"
URL_PLACEHOLDER = "<url>"
USER_PLACEHOLDER = "<user>"
PLACEHOLDERS = frozenset({RT_PLACEHOLDER, URL_PLACEHOLDER, USER_PLACEHOLDER})

_RT_PREFIX_RE = re.compile(r"^\s*rt\s+@\w+\s*:\s*", re.IGNORECASE)
_URL_RE = re.compile(r"(?:https?://\S+|www\.\S+)", re.IGNORECASE)
_MENTION_RE = re.compile(r"@\w+")
# A token is a placeholder or a maximal run of unicode alphanumerics, dashes
# and hashmarks; everything else is a boundary. `[^\W_]` is "\w minus _".
_TOKEN_RE = re.compile(r"<url>|<user>|<rt>|(?:[^\W_]|[#-])+")
_ALNUM_RE = re.compile(r"[^\W_]")


class DuplicateTweetIdError(ValueError):
    def __init__(self, tweet_id: str):
        super().__init__(f"duplicate tweet id: {tweet_id!r}")
        self.tweet_id = tweet_id


@dataclass(frozen=True)
class Tweet:
    id: str
    user_id: str
    timestamp: int
    raw_text: str
    language: str | None = None


@dataclass(frozen=True)
class PreprocessedTweet:
    tweet_id: str
    tokens: tuple[str, ...]
    is_retweet: bool
    canonical_key: str


@dataclass(frozen=True)
class TweetGroup:
    original_id: str
    member_ids: tuple[str, ...]


def _tokenize(text: str) -> list[str]:
    """Lowercase ``text`` and split it into surviving tokens, hashmarks intact.

    Placeholder tokens pass through; any other run must contain at least one
    alphanumeric character to survive (a bare ``-`` or pure punctuation does
    not).
    """
    tokens = []
    for tok in _TOKEN_RE.findall(text.lower()):
        if tok in PLACEHOLDERS or _ALNUM_RE.search(tok):
            tokens.append(tok)
    return tokens


def preprocess(raw_text: str, tweet_id: str = "") -> PreprocessedTweet:
    """Run the preprocessing pipeline on one tweet's raw text.

    URLs, the leading retweet prefix (``RT @name:``) and @-mentions are
    replaced by placeholders, the text is lowercased and tokenized at
    whitespace/punctuation boundaries (intra-word dashes kept), and hashmarks
    are stripped from the surviving tokens. The canonical key is the space-join
    of the tokens with placeholders excluded, which makes retweets and
    duplicates of the same original collapse onto one key.
    """
    if not raw_text:
        raise ValueError("raw_text must be non-empty")

    is_retweet = False
    text = raw_text
    match = _RT_PREFIX_RE.match(text)
    if match:
        is_retweet = True
        text = RT_PLACEHOLDER + " " + text[match.end():]
    text = _URL_RE.sub(URL_PLACEHOLDER, text)
    text = _MENTION_RE.sub(USER_PLACEHOLDER, text)

    tokens = tuple(
        tok if tok in PLACEHOLDERS else tok.replace("#", "")
        for tok in _tokenize(text)
    )
    if not tokens:
        logger.debug("tweet %s preprocessed to zero tokens: %r", tweet_id, raw_text)
    canonical_key = " ".join(t for t in tokens if t not in PLACEHOLDERS)
    return PreprocessedTweet(
        tweet_id=tweet_id,
        tokens=tokens,
        is_retweet=is_retweet,
        canonical_key=canonical_key,
    )


def extract_hashtags(raw_text: str) -> frozenset[str]:
    """Return the normalized hashtags of a tweet, e.g. ``{"#mh17"}``.

    Uses the same replacement and tokenization rules as :func:`preprocess`,
    so hashtags inside URLs or mention handles are not picked up.
    """
    text = _RT_PREFIX_RE.sub(" ", raw_text)
    text = _URL_RE.sub(" ", text)
    text = _MENTION_RE.sub(" ", text)
    hashtags = set()
    for tok in _tokenize(text):
        if tok.startswith("#") and tok not in PLACEHOLDERS:
            hashtags.add("#" + tok.replace("#", ""))
    return frozenset(hashtags)


@dataclass(frozen=True)
class Corpus:
    """An immutable collection of tweets with labels, token data and groups.

    ``processed`` and ``groups`` start empty and are filled by
    :func:`preprocess_corpus` / :func:`group_tweets`; all update operations
    return a new corpus. ``train_only`` marks auxiliary tweets that must never
    enter dev/test folds.
    """

    tweets: tuple[Tweet, ...] = ()
    labels: dict[str, StanceLabel] = field(default_factory=dict)
    processed: dict[str, PreprocessedTweet] = field(default_factory=dict)
    groups: dict[str, TweetGroup] = field(default_factory=dict)
    train_only: frozenset[str] = frozenset()
    n_malformed: int = 0

    def __post_init__(self):
        seen = set()
        for t in self.tweets:
            if t.id in seen:
                raise DuplicateTweetIdError(t.id)
            seen.add(t.id)
        for tweet_id in self.labels:
            if tweet_id not in seen:
                raise ValueError(f"label for unknown tweet id {tweet_id!r}")

    @cached_property
    def tweet_by_id(self) -> dict[str, Tweet]:
        return {t.id: t for t in self.tweets}

    def __len__(self) -> int:
        return len(self.tweets)


def ingest_corpus(path: str | Path, format: str = "jsonl") -> Corpus:
    """Read a corpus file. Malformed lines are skipped, counted and logged.

    Raises :class:`DuplicateTweetIdError` on a repeated tweet id and ``OSError``
    if the file cannot be read.
    """
    if format != "jsonl":
        raise ValueError(f"unknown corpus format: {format!r}")
    tweets: list[Tweet] = []
    labels: dict[str, StanceLabel] = {}
    seen: set[str] = set()
    n_malformed = 0
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = _parse_record(line)
            if record is None:
                n_malformed += 1
                continue
            tweet, label = record
            if tweet.id in seen:
                raise DuplicateTweetIdError(tweet.id)
            seen.add(tweet.id)
            tweets.append(tweet)
            if label is not None:
                labels[tweet.id] = StanceLabel(label, Provenance.MANUAL)
    if n_malformed:
        logger.warning("%s: skipped %d malformed line(s)", path, n_malformed)
    return Corpus(tweets=tuple(tweets), labels=labels, n_malformed=n_malformed)


def _parse_record(line: str) -> tuple[Tweet, Stance | None] | None:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError:
        return None
    if not isinstance(obj, dict):
        return None
    tweet_id = obj.get("id")
    user_id = obj.get("user_id")
    timestamp = obj.get("timestamp")
    text = obj.get("text")
    lang = obj.get("lang")
    if not isinstance(tweet_id, str) or not isinstance(user_id, str):
        return None
    if isinstance(timestamp, bool) or not isinstance(timestamp, int):
        return None
    if not isinstance(text, str) or not text:
        return None
    if lang is not None and not isinstance(lang, str):
        return None
    label = None
    if "label" in obj:
        try:
            label = parse_stance(obj["label"])
        except (ValueError, TypeError):
            return None
    tweet = Tweet(id=tweet_id, user_id=user_id, timestamp=timestamp,
                  raw_text=text, language=lang)
    return tweet, label


def serialize_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus in canonical JSON-lines form (stable field order)."""
    with open(path, "w", encoding="utf-8") as fh:
        for tweet in corpus.tweets:
            obj: dict = {
                "id": tweet.id,
                "user_id": tweet.user_id,
                "timestamp": tweet.timestamp,
                "text": tweet.raw_text,
            }
            label = corpus.labels.get(tweet.id)
            if label is not None:
                obj["label"] = label.stance.value
            if tweet.language is not None:
                obj["lang"] = tweet.language
            fh.write(json.dumps(obj, ensure_ascii=False, separators=(",", ":")))
            fh.write("\n")


def load_labels(path: str | Path) -> dict[str, Stance]:
    """Read a ``tweet_id<TAB>label`` file."""
    out: dict[str, Stance] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected tweet_id<TAB>label")
            out[parts[0]] = parse_stance(parts[1])
    return out


def save_labels(labels: dict[str, Stance], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tweet_id in sorted(labels):
            fh.write(f"{tweet_id}\t{labels[tweet_id].value}\n")


def preprocess_corpus(corpus: Corpus) -> Corpus:
    """Return a corpus with ``processed`` filled for every tweet."""
    processed = dict(corpus.processed)
    for tweet in corpus.tweets:
        if tweet.id not in processed:
            processed[tweet.id] = preprocess(tweet.raw_text, tweet.id)
    return dataclasses.replace(corpus, processed=processed)


def group_tweets(corpus: Corpus) -> dict[str, TweetGroup]:
    """Group tweets sharing a canonical key; the groups partition the corpus.

    The designated original of a group is its earliest-timestamp non-retweet
    member (ties broken by smallest id); if a group consists of retweets only,
    the earliest retweet stands in as original.
    """
    members: dict[str, list[str]] = {}
    for tweet in corpus.tweets:
        pt = corpus.processed.get(tweet.id)
        if pt is None:
            raise ValueError(f"tweet {tweet.id!r} not preprocessed; run preprocess_corpus first")
        members.setdefault(pt.canonical_key, []).append(tweet.id)

    by_id = corpus.tweet_by_id
    groups: dict[str, TweetGroup] = {}
    for key, ids in members.items():
        original = min(
            ids,
            key=lambda i: (corpus.processed[i].is_retweet, by_id[i].timestamp, i),
        )
        groups[key] = TweetGroup(original_id=original, member_ids=tuple(sorted(ids)))
    return groups


def prepare_corpus(corpus: Corpus) -> Corpus:
    """Preprocess all tweets and attach the duplicate groups."""
    corpus = preprocess_corpus(corpus)
    return dataclasses.replace(corpus, groups=group_tweets(corpus))


def propagate_labels(corpus: Corpus) -> Corpus:
    """Copy each labeled original's class onto its group's unlabeled members.

    Already-labeled members are left untouched; the propagated labels carry
    provenance ``PROPAGATED``.
    """
    if corpus.tweets and not corpus.groups:
        raise ValueError("corpus has no groups; run prepare_corpus first")
    labels = dict(corpus.labels)
    for group in corpus.groups.values():
        original_label = labels.get(group.original_id)
        if original_label is None:
            continue
        for member_id in group.member_ids:
            if member_id not in labels:
                labels[member_id] = StanceLabel(original_label.stance, Provenance.PROPAGATED)
    return dataclasses.replace(corpus, labels=labels)


def merge_auxiliary(corpus: Corpus, aux: Corpus, stance: Stance) -> Corpus:
    """Append an auxiliary corpus as train-only examples with a fixed label.

    Every auxiliary tweet is labeled ``stance`` with provenance ``MANUAL`` and
    marked train-only so it never enters dev/test folds. An id collision with
    the main corpus raises :class:`DuplicateTweetIdError`.
    """
    existing = {t.id for t in corpus.tweets}
    for tweet in aux.tweets:
        if tweet.id in existing:
            raise DuplicateTweetIdError(tweet.id)
    labels = dict(corpus.labels)
    for tweet in aux.tweets:
        labels[tweet.id] = StanceLabel(stance, Provenance.MANUAL)
    merged = dataclasses.replace(
        corpus,
        tweets=corpus.tweets + aux.tweets,
        labels=labels,
        processed={**corpus.processed, **aux.processed},
        train_only=corpus.train_only | {t.id for t in aux.tweets},
        groups={},
    )
    return merged
