"""
Greedy vs. window-scan speed experiment on a reproducible synthetic corpus.

Documents are drawn from a fixed support-ticket lexicon and each one gets a
single planted keyword, either verbatim or mutated (split into two words,
merged into one word, or with one character changed).
"""
import logging
import time
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field

from .errors import InvalidParameterError
from .greedy import CompiledKeyword, LengthBounds, build_word_profile
from .similarity import DEFAULT_NGRAM, build_profile, normalize, scan_normalized

logger = logging.getLogger(__name__)

LEXICON = (
    "the", "a", "an", "and", "or", "but", "is", "are", "was", "were", "be", "been",
    "my", "our", "your", "their", "this", "that", "these", "it", "we", "you", "they",
    "i", "have", "has", "had", "not", "no", "yes", "can", "could", "would", "should",
    "please", "help", "thanks", "hello", "hi", "team", "support", "ticket", "issue",
    "problem", "error", "working", "broken", "since", "yesterday", "today", "morning",
    "after", "before", "when", "while", "again", "still", "already", "just", "now",
    "website", "site", "page", "pages", "account", "dashboard", "settings", "plan",
    "billing", "invoice", "payment", "upgrade", "customer", "users", "visitors",
    "traffic", "request", "requests", "response", "timeout", "slow", "fast", "down",
    "online", "offline", "update", "changed", "added", "removed", "enabled",
    "disabled", "configured", "setup", "migration", "moved", "provider", "hosting",
    "browser", "mobile", "desktop", "login", "password", "email", "address",
    "screenshot", "attached", "logs", "header", "status", "code", "returns",
    "shows", "seeing", "getting", "tried", "checked", "cleared", "restarted",
    "urgent", "production", "staging", "server", "network", "connection", "secure",
    "zone", "record", "records", "value", "option", "feature", "documentation",
    "guide", "steps", "following", "minutes", "hours", "days", "week", "every",
    "some", "many", "all", "only", "also", "very", "much", "more", "less",
)

KEYWORDS = (
    "name servers", "ssl certificate", "dns record", "load balancer", "page rules",
    "rate limiting", "origin server", "cache purge", "firewall rules", "api token",
    "web analytics", "bot management", "email routing", "zero trust",
    "domain transfer", "worker scripts", "image resizing", "video stream",
    "access policy", "ddos attack", "nameservers", "certificate", "redirect",
    "subdomain",
)

MUTATIONS = ("verbatim", "split", "merged", "edit")
MUTATION_WEIGHTS = (0.4, 0.2, 0.2, 0.2)
_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


class PlantedDocument(BaseModel):
    text: str
    keyword: str
    planted: str
    mutation: str


class BenchResult(BaseModel):
    method: Literal["baseline", "greedy"]
    corpus_size: int
    keyword_count: int
    mean_seconds: float = Field(ge=0.0)
    median_seconds: float = Field(ge=0.0)
    matches: int
    planted_matches: dict[str, int] = Field(default_factory=dict)


class BenchReport(BaseModel):
    seed: int
    theta: float
    doc_length: int
    baseline: BenchResult
    greedy: BenchResult
    ratio: Optional[float] = None
    planted_counts: dict[str, int] = Field(default_factory=dict)


def mutate(keyword: str, kind: str, rng: np.random.Generator) -> str:
    """Apply one mutation; mutations that do not apply leave the keyword as is."""
    if kind == "split":
        words = keyword.split(" ")
        longest = max(range(len(words)), key=lambda i: len(words[i]))
        word = words[longest]
        if len(word) < 2:
            return keyword
        cut = len(word) // 2
        words[longest] = f"{word[:cut]} {word[cut:]}"
        return " ".join(words)
    if kind == "merged":
        return keyword.replace(" ", "", 1)
    if kind == "edit":
        positions = [i for i, ch in enumerate(keyword) if ch != " "]
        pos = positions[int(rng.integers(len(positions)))]
        choices = [ch for ch in _ALPHABET if ch != keyword[pos]]
        return keyword[:pos] + choices[int(rng.integers(len(choices)))] + keyword[pos + 1:]
    return keyword


def generate_corpus(
    docs: int,
    doc_length: int,
    keywords: tuple[str, ...],
    seed: int,
) -> list[PlantedDocument]:
    """Same arguments always give the same documents."""
    rng = np.random.default_rng(seed)
    corpus = []
    for _ in range(docs):
        keyword = keywords[int(rng.integers(len(keywords)))]
        kind = MUTATIONS[int(rng.choice(len(MUTATIONS), p=MUTATION_WEIGHTS))]
        planted = mutate(keyword, kind, rng)
        words: list[str] = []
        size = len(planted)
        while size < doc_length:
            word = LEXICON[int(rng.integers(len(LEXICON)))]
            words.append(word)
            size += len(word) + 1
        words.insert(int(rng.integers(len(words) + 1)), planted)
        corpus.append(PlantedDocument(text=" ".join(words), keyword=keyword, planted=planted, mutation=kind))
    return corpus


def _run(
    method: str,
    corpus: list[PlantedDocument],
    keywords: tuple[str, ...],
    theta: float,
    n: int,
    bounds: LengthBounds,
    warmup: int,
) -> BenchResult:
    if method == "greedy":
        compiled = [CompiledKeyword.compile(k, theta, n, bounds) for k in keywords]

        def process(text: str) -> list[bool]:
            profile = build_word_profile(text, n)
            return [kw.search(profile) is not None for kw in compiled]
    else:
        profiles = [(build_profile(k, n), len(normalize(k))) for k in keywords]

        def process(text: str) -> list[bool]:
            normalized = normalize(text)
            return [scan_normalized(p, width, normalized, theta) is not None for p, width in profiles]

    for doc in corpus[:warmup]:
        process(doc.text)

    times = np.empty(len(corpus))
    matches = 0
    planted: dict[str, int] = {kind: 0 for kind in MUTATIONS}
    index = {k: i for i, k in enumerate(keywords)}
    for i, doc in enumerate(corpus):
        start = time.perf_counter()
        hits = process(doc.text)
        times[i] = time.perf_counter() - start
        matches += sum(hits)
        if hits[index[doc.keyword]]:
            planted[doc.mutation] += 1

    result = BenchResult(
        method=method,
        corpus_size=len(corpus),
        keyword_count=len(keywords),
        mean_seconds=float(np.mean(times)) if len(corpus) else 0.0,
        median_seconds=float(np.median(times)) if len(corpus) else 0.0,
        matches=matches,
        planted_matches=planted,
    )
    logger.info("%s: mean %.6fs median %.6fs matches %d",
                method, result.mean_seconds, result.median_seconds, matches)
    return result


def run_bench(
    docs: int = 500,
    doc_length: int = 1000,
    keyword_count: int = 20,
    theta: float = 0.85,
    seed: int = 42,
    n: int = DEFAULT_NGRAM,
    bounds: LengthBounds = LengthBounds.TOLERANCE,
    warmup: int = 10,
) -> BenchReport:
    """
    Time both methods over identical inputs.

    Args:
        docs: Number of synthetic documents.
        doc_length: Approximate characters per document.
        keyword_count: How many of the built-in keywords to search for.
        theta: Similarity threshold shared by both methods.
        seed: Corpus generator seed.
        n: Gram size.
        bounds: Length gate of the greedy search.
        warmup: Documents processed once, untimed, before measuring.
    """
    if docs < 1 or doc_length < 1 or keyword_count < 1:
        raise InvalidParameterError("docs, doc length and keyword count must be positive")
    if keyword_count > len(KEYWORDS):
        raise InvalidParameterError(f"at most {len(KEYWORDS)} keywords are available")
    if warmup < 0:
        raise InvalidParameterError(f"warmup must not be negative, got {warmup}")
    keywords = KEYWORDS[:keyword_count]
    corpus = generate_corpus(docs, doc_length, keywords, seed)

    baseline = _run("baseline", corpus, keywords, theta, n, bounds, warmup)
    greedy = _run("greedy", corpus, keywords, theta, n, bounds, warmup)
    return BenchReport(
        seed=seed,
        theta=theta,
        doc_length=doc_length,
        baseline=baseline,
        greedy=greedy,
        ratio=baseline.mean_seconds / greedy.mean_seconds if greedy.mean_seconds else None,
        planted_counts={kind: sum(1 for d in corpus if d.mutation == kind) for kind in MUTATIONS},
    )
