"""
Character n-gram profiles, string similarity metrics and the baseline
character-window keyword scanner.
"""
from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Optional

from rapidfuzz.distance import Levenshtein

from .errors import InvalidParameterError

logger = logging.getLogger(__name__)

DEFAULT_NGRAM = 2


def normalize(text: str) -> str:
    """Simple case folding only; punctuation and whitespace are kept."""
    return text.lower()


@dataclass(frozen=True, slots=True)
class NGramProfile:
    """Multiset of character n-grams of one string."""
    n: int
    counts: Mapping[str, int]
    total: int
    sum_squares: int
    norm: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "norm", math.sqrt(self.sum_squares))

    @classmethod
    def from_counts(cls, n: int, counts: Mapping[str, int]) -> NGramProfile:
        return cls(
            n=n,
            counts=counts,
            total=sum(counts.values()),
            sum_squares=sum(c * c for c in counts.values()),
        )

    @classmethod
    def empty(cls, n: int) -> NGramProfile:
        return cls(n=n, counts={}, total=0, sum_squares=0)

    def __len__(self) -> int:
        return len(self.counts)

    def __add__(self, other: NGramProfile) -> NGramProfile:
        _check_same_n(self, other)
        merged = Counter(self.counts)
        merged.update(other.counts)
        return NGramProfile.from_counts(self.n, merged)


@dataclass(frozen=True, slots=True)
class WindowMatch:
    offset: int
    window: str
    score: float


def _check_n(n: int) -> None:
    if n < 1:
        raise InvalidParameterError(f"gram size must be >= 1, got {n}")


def _check_same_n(p: NGramProfile, q: NGramProfile) -> None:
    if p.n != q.n:
        raise InvalidParameterError(f"gram size mismatch: {p.n} != {q.n}")


def check_theta(theta: float) -> None:
    if not 0.0 < theta <= 1.0:
        raise InvalidParameterError(f"theta must be in (0, 1], got {theta}")


def count_grams(text: str, n: int) -> Counter:
    """Count every contiguous length-n substring of `text` as given."""
    return Counter(text[i:i + n] for i in range(len(text) - n + 1))


def build_profile(text: str, n: int = DEFAULT_NGRAM) -> NGramProfile:
    """
    Build the n-gram profile of a string.

    The text is lowercased first. No start/end padding is added, so a
    string shorter than n has an empty profile.
    """
    _check_n(n)
    return NGramProfile.from_counts(n, count_grams(normalize(text), n))


def _dot(p: NGramProfile, q: NGramProfile) -> int:
    small, large = (p, q) if len(p.counts) <= len(q.counts) else (q, p)
    large_counts = large.counts
    return sum(c * large_counts.get(g, 0) for g, c in small.counts.items())


def cosine(p: NGramProfile, q: NGramProfile) -> float:
    """Cosine of the angle between two gram count vectors; 0 if either is empty."""
    _check_same_n(p, q)
    if not p.sum_squares or not q.sum_squares:
        return 0.0
    dot = _dot(p, q)
    if not dot:
        return 0.0
    return min(1.0, dot / math.sqrt(p.sum_squares * q.sum_squares))


def dice(p: NGramProfile, q: NGramProfile) -> float:
    """Dice coefficient over gram multisets."""
    _check_same_n(p, q)
    denominator = p.total + q.total
    if not denominator:
        return 0.0
    small, large = (p, q) if len(p.counts) <= len(q.counts) else (q, p)
    shared = sum(min(c, large.counts.get(g, 0)) for g, c in small.counts.items())
    return 2 * shared / denominator


def edit_distance(x: str, y: str) -> int:
    """Levenshtein distance with unit change, delete and insert costs."""
    return Levenshtein.distance(x, y)


def edit_similarity(x: str, y: str) -> float:
    """Edit distance scaled into [0, 1]; two empty strings are identical."""
    longest = max(len(x), len(y))
    if not longest:
        return 1.0
    return 1.0 - edit_distance(x, y) / longest


METRICS = {
    "cosine": cosine,
    "dice": dice,
}


def scan_normalized(
    keyword: NGramProfile,
    width: int,
    text: str,
    theta: float,
) -> Optional[WindowMatch]:
    """
    Slide a window of `width` characters over already-normalised `text`.

    The window profile is updated one gram out, one gram in per step, and
    each offset is scored against the keyword profile with the cosine
    formula. Returns the first offset scoring at least theta.
    """
    n = keyword.n
    if width > len(text) or not keyword.sum_squares:
        return None

    kw = keyword.counts
    window = count_grams(text[:width], n)
    dot = sum(c * kw.get(g, 0) for g, c in window.items())
    window_sq = sum(c * c for c in window.values())
    kw_sq = keyword.sum_squares
    gate = theta * theta * kw_sq * (1.0 - 1e-9)

    last = len(text) - width
    offset = 0
    while True:
        if dot > 0 and dot * dot >= gate * window_sq:
            score = min(1.0, dot / math.sqrt(kw_sq * window_sq))
            if score >= theta:
                return WindowMatch(offset=offset, window=text[offset:offset + width], score=score)
        if offset == last:
            return None
        offset += 1
        if width < n:
            continue
        outgoing = text[offset - 1:offset - 1 + n]
        incoming = text[offset + width - n:offset + width]
        if outgoing == incoming:
            continue
        c = window[outgoing]
        window[outgoing] = c - 1
        window_sq -= 2 * c - 1
        dot -= kw.get(outgoing, 0)
        c = window[incoming]
        window[incoming] = c + 1
        window_sq += 2 * c + 1
        dot += kw.get(incoming, 0)


def window_scan(
    keyword: str,
    text: str,
    theta: float = 0.8,
    n: int = DEFAULT_NGRAM,
) -> Optional[WindowMatch]:
    """
    Baseline keyword search: scan `text` in windows of the keyword's length.

    Args:
        keyword: Searched string; must be non-empty.
        text: Scanned text. Whitespace inside a window takes part in grams.
        theta: Similarity threshold in (0, 1].
        n: Gram size.

    Returns:
        The earliest window whose cosine score reaches theta, or None.
    """
    if not keyword:
        raise InvalidParameterError("keyword must be non-empty")
    check_theta(theta)
    profile = build_profile(keyword, n)
    match = scan_normalized(profile, len(normalize(keyword)), normalize(text), theta)
    logger.debug("window_scan %r: %s", keyword, match)
    return match
