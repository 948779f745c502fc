"""
Greedy word-tokenised fuzzy keyword search.

Both the keyword and the scanned text are split into words by white space.
The text is scanned word by word; at every start word the spans one word
shorter, equal to and one word longer than the keyword are scored, and the
scan stops at the first start whose best span reaches the threshold.
"""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .errors import InvalidParameterError
from .similarity import (
    DEFAULT_NGRAM,
    METRICS,
    NGramProfile,
    check_theta,
    count_grams,
    normalize,
)

logger = logging.getLogger(__name__)

# Evaluation order doubles as the tie-break order: equal width, shorter, longer.
WIDTH_CLASSES = (0, -1, 1)


@dataclass(frozen=True, slots=True)
class WordProfile:
    """Words of a text in order, with their lengths and gram profiles."""
    n: int
    words: tuple[str, ...]
    lengths: tuple[int, ...]
    grams: tuple[NGramProfile, ...]
    offsets: tuple[int, ...]  # prefix sums of lengths, one longer than words
    sq_offsets: tuple[int, ...]  # prefix sums of per-word sum_squares
    gram_index: dict[str, tuple[int, ...]]  # gram -> indices of words containing it

    @property
    def word_count(self) -> int:
        return len(self.words)

    @property
    def char_length(self) -> int:
        return self.offsets[-1]

    def span(self, start: int, width: int) -> SpanRef:
        if start < 0 or width < 0 or start + width > self.word_count:
            raise InvalidParameterError(
                f"span ({start}, {width}) out of range for {self.word_count} words"
            )
        return SpanRef(
            start=start,
            width=width,
            char_length=self.offsets[start + width] - self.offsets[start],
        )


@dataclass(frozen=True, slots=True)
class SpanRef:
    start: int
    width: int
    char_length: int

    @property
    def end(self) -> int:
        return self.start + self.width


@dataclass(frozen=True, slots=True)
class MatchResult:
    score: float
    span: SpanRef
    width_class: int


class LengthBounds(str, Enum):
    """
    Character-length gate applied before a span is scored.

    TOLERANCE treats 1 - theta as the allowed relative deviation from the
    keyword's length; LITERAL applies (1 - theta) and (1 + theta) as factors.
    """
    TOLERANCE = "tolerance"
    LITERAL = "literal"

    def limits(self, theta: float, keyword_chars: int) -> tuple[float, float]:
        if self is LengthBounds.TOLERANCE:
            return theta * keyword_chars, (2.0 - theta) * keyword_chars
        return (1.0 - theta) * keyword_chars, (1.0 + theta) * keyword_chars


def build_word_profile(text: str, n: int = DEFAULT_NGRAM) -> WordProfile:
    """
    Split normalised text into words on runs of white space.

    Args:
        text: Source text; blank text gives a profile with no words.
        n: Gram size for the per-word profiles.
    """
    if n < 1:
        raise InvalidParameterError(f"gram size must be >= 1, got {n}")
    words = tuple(normalize(text).split())
    lengths = tuple(len(w) for w in words)
    grams = tuple(NGramProfile.from_counts(n, count_grams(w, n)) for w in words)
    offsets = [0]
    sq_offsets = [0]
    index: dict[str, list[int]] = {}
    for i, (length, profile) in enumerate(zip(lengths, grams)):
        offsets.append(offsets[-1] + length)
        sq_offsets.append(sq_offsets[-1] + profile.sum_squares)
        for gram in profile.counts:
            index.setdefault(gram, []).append(i)
    return WordProfile(
        n=n,
        words=words,
        lengths=lengths,
        grams=grams,
        offsets=tuple(offsets),
        sq_offsets=tuple(sq_offsets),
        gram_index={g: tuple(ids) for g, ids in index.items()},
    )


def _sum_grams(profile: WordProfile, start: int, width: int) -> NGramProfile:
    if width == 1:
        return profile.grams[start]
    if width == 0:
        return NGramProfile.empty(profile.n)
    merged: Counter = Counter()
    for grams in profile.grams[start:start + width]:
        merged.update(grams.counts)
    return NGramProfile.from_counts(profile.n, merged)


def span_profile(p: WordProfile, span: SpanRef) -> NGramProfile:
    """Multiset sum of the span's word profiles; grams never cross words."""
    if span.start < 0 or span.width < 0 or span.end > p.word_count:
        raise InvalidParameterError(
            f"span ({span.start}, {span.width}) out of range for {p.word_count} words"
        )
    return _sum_grams(p, span.start, span.width)


@dataclass(frozen=True, slots=True)
class CompiledKeyword:
    """A keyword with its profile and length gate precomputed."""
    keyword: str
    theta: float
    profile: WordProfile
    grams: NGramProfile
    lower: float
    upper: float
    metric: str = "cosine"

    @classmethod
    def compile(
        cls,
        keyword: str,
        theta: float = 0.8,
        n: int = DEFAULT_NGRAM,
        bounds: LengthBounds = LengthBounds.TOLERANCE,
        metric: str = "cosine",
    ) -> CompiledKeyword:
        check_theta(theta)
        if metric not in METRICS:
            raise InvalidParameterError(f"unknown metric {metric!r}")
        profile = build_word_profile(keyword, n)
        if not profile.word_count:
            raise InvalidParameterError("keyword must not be blank")
        lower, upper = LengthBounds(bounds).limits(theta, profile.char_length)
        return cls(
            keyword=keyword,
            theta=theta,
            profile=profile,
            grams=_sum_grams(profile, 0, profile.word_count),
            lower=lower,
            upper=upper,
            metric=metric,
        )

    @property
    def word_count(self) -> int:
        return self.profile.word_count

    def search(self, text: WordProfile) -> Optional[MatchResult]:
        """Scan a prebuilt text profile; first start reaching theta wins."""
        if text.n != self.profile.n:
            raise InvalidParameterError(f"gram size mismatch: {self.profile.n} != {text.n}")
        score_fn = METRICS[self.metric]
        c = self.word_count
        widths = [(c + j, j) for j in WIDTH_CLASSES if c + j > 0]
        offsets = text.offsets
        sq_offsets = text.sq_offsets
        total = text.word_count
        lower, upper = self.lower, self.upper

        # Per-word dot products with the keyword. A span's dot product is the
        # sum over its words, so spans without any shared gram score 0.
        dots: dict[int, int] = {}
        for gram, count in self.grams.counts.items():
            for i in text.gram_index.get(gram, ()):
                dots[i] = dots.get(i, 0) + count * text.grams[i].counts[gram]
        if not dots:
            return None
        reach = c + 1
        starts = sorted({s for i in dots for s in range(max(0, i - reach + 1), i + 1)})

        # |span|^2 >= sum of its words' |w|^2, which bounds the cosine from
        # above; spans whose bound is below theta cannot reach it.
        bound = self.theta * self.theta * self.grams.sum_squares * (1.0 - 1e-9)
        use_bound = self.metric == "cosine"

        for start in starts:
            best: Optional[tuple[float, int, int]] = None
            for width, width_class in widths:
                end = start + width
                if end > total:
                    continue
                chars = offsets[end] - offsets[start]
                if chars < lower or chars > upper:
                    continue
                dot = sum(dots.get(i, 0) for i in range(start, end))
                if not dot:
                    continue
                if use_bound and dot * dot < bound * (sq_offsets[end] - sq_offsets[start]):
                    continue
                score = score_fn(self.grams, _sum_grams(text, start, width))
                if best is None or score > best[0]:
                    best = (score, width, width_class)
            if best is not None and best[0] >= self.theta:
                score, width, width_class = best
                span = SpanRef(start=start, width=width,
                               char_length=offsets[start + width] - offsets[start])
                logger.debug("%r matched at word %d (width %d): %.4f",
                             self.keyword, start, width, score)
                return MatchResult(score=score, span=span, width_class=width_class)
        return None


def greedy_search(
    keyword: str,
    text: str,
    theta: float = 0.8,
    n: int = DEFAULT_NGRAM,
    bounds: LengthBounds = LengthBounds.TOLERANCE,
    metric: str = "cosine",
) -> Optional[MatchResult]:
    """
    Find the first span of `text` similar enough to `keyword`.

    Args:
        keyword: Searched string; must contain at least one word.
        text: Scanned text.
        theta: Similarity threshold in (0, 1].
        n: Gram size.
        bounds: Span length gate.
        metric: "cosine" or "dice".

    Returns:
        MatchResult for the first qualifying span, or None.
    """
    compiled = CompiledKeyword.compile(keyword, theta, n, bounds, metric)
    return compiled.search(build_word_profile(text, n))
