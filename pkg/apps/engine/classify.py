"""
Keyword-category classifier built on the greedy search, plus the
rules-file loader and precision/recall tallies.
"""
import logging
from collections import Counter
from typing import Iterable, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import InvalidParameterError, RulesFormatError
from .greedy import CompiledKeyword, LengthBounds, build_word_profile
from .similarity import DEFAULT_NGRAM, normalize

logger = logging.getLogger(__name__)

UNCLASSIFIED = "UNCLASSIFIED"


class KeywordRule(BaseModel):
    """One keyword and the threshold it must reach."""
    model_config = ConfigDict(frozen=True)

    keyword: str
    theta: float = Field(default=0.8, gt=0.0, le=1.0)

    @field_validator("keyword")
    @classmethod
    def _keyword_not_blank(cls, value: str) -> str:
        if not normalize(value).split():
            raise ValueError("keyword must not be blank")
        return value


class CategoryRuleSet(BaseModel):
    category: str
    rules: list[KeywordRule] = Field(min_length=1)


class Classification(BaseModel):
    """Outcome for one text: winning category (None if unclassified)."""
    category: Optional[str] = None
    score: float = 0.0
    keyword: Optional[str] = None

    @property
    def label(self) -> str:
        return self.category or UNCLASSIFIED


class KeywordClassifier:
    """
    Precompiled rule sets. Safe to share between threads: all state is
    built in __init__ and never mutated.
    """

    def __init__(
        self,
        categories: list[CategoryRuleSet],
        n: int = DEFAULT_NGRAM,
        bounds: LengthBounds = LengthBounds.TOLERANCE,
        metric: str = "cosine",
    ):
        names = [c.category for c in categories]
        duplicates = sorted(name for name, count in Counter(names).items() if count > 1)
        if duplicates:
            raise InvalidParameterError(f"duplicate category names: {', '.join(duplicates)}")
        self.n = n
        self.categories = [
            (rule_set.category,
             [CompiledKeyword.compile(r.keyword, r.theta, n, bounds, metric) for r in rule_set.rules])
            for rule_set in categories
        ]

    def classify_detailed(self, text: str) -> Classification:
        profile = build_word_profile(text, self.n)
        best = Classification()
        for category, compiled in self.categories:
            for keyword in compiled:
                match = keyword.search(profile)
                # strict > keeps the earlier category on ties
                if match is not None and (best.category is None or match.score > best.score):
                    best = Classification(category=category, score=match.score, keyword=keyword.keyword)
        return best

    def classify(self, text: str) -> Optional[str]:
        return self.classify_detailed(text).category


def classify(
    text: str,
    categories: list[CategoryRuleSet],
    n: int = DEFAULT_NGRAM,
) -> Optional[str]:
    """Category whose rule matched with the highest score, or None."""
    return KeywordClassifier(categories, n).classify(text)


def parse_rules(lines: Iterable[str], default_theta: float = 0.8) -> list[CategoryRuleSet]:
    """
    Parse `category<TAB>keyword[<TAB>theta]` lines.

    Blank lines and lines starting with '#' are skipped. Categories keep the
    order of their first appearance.
    """
    grouped: dict[str, list[KeywordRule]] = {}
    for number, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) not in (2, 3):
            raise RulesFormatError(number, line, f"expected 2 or 3 tab-separated fields, got {len(fields)}")
        category, keyword = fields[0].strip(), fields[1].strip()
        if not category:
            raise RulesFormatError(number, line, "empty category")
        theta = default_theta
        if len(fields) == 3:
            try:
                theta = float(fields[2])
            except ValueError:
                raise RulesFormatError(number, line, "theta is not a number") from None
        try:
            rule = KeywordRule(keyword=keyword, theta=theta)
        except ValidationError as exc:
            reason = exc.errors()[0]["msg"]
            raise RulesFormatError(number, line, reason) from None
        grouped.setdefault(category, []).append(rule)
    return [CategoryRuleSet(category=c, rules=r) for c, r in grouped.items()]


def load_rules(path: str, default_theta: float = 0.8) -> list[CategoryRuleSet]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            rule_sets = parse_rules(handle, default_theta)
    except UnicodeDecodeError as exc:
        raise InvalidParameterError(f"{path}: not valid UTF-8: {exc.reason}") from exc
    logger.info("Loaded %d categories from %s", len(rule_sets), path)
    return rule_sets


# =============================================================================
# Evaluation
# =============================================================================

class CategoryScore(BaseModel):
    category: str
    true_positives: int
    false_positives: int
    false_negatives: int
    precision: float
    recall: float
    missed_into: dict[str, int] = Field(default_factory=dict)  # predicted label -> count, for misses


class ClassificationSummary(BaseModel):
    """Tallies in the shape of a per-product classification run."""
    total: int = 0
    counts: dict[str, int] = Field(default_factory=dict)
    unclassified: int = 0


def summarize(labels: list[str], categories: list[str]) -> ClassificationSummary:
    """Count predictions per category; every declared category is listed."""
    counts = {c: 0 for c in categories}
    unclassified = 0
    for label in labels:
        if label == UNCLASSIFIED:
            unclassified += 1
        else:
            counts[label] = counts.get(label, 0) + 1
    return ClassificationSummary(total=len(labels), counts=counts, unclassified=unclassified)


def precision_recall(gold: list[str], predicted: list[str]) -> list[CategoryScore]:
    """
    Per-category precision and recall.

    An unclassified prediction is a miss for the gold category and a false
    positive for nothing. Categories are reported in order of first gold
    appearance.
    """
    if len(gold) != len(predicted):
        raise InvalidParameterError("gold and predicted labels differ in length")
    scores = []
    for category in dict.fromkeys(g for g in gold if g != UNCLASSIFIED):
        tp = sum(1 for g, p in zip(gold, predicted) if g == category and p == category)
        fp = sum(1 for g, p in zip(gold, predicted) if g != category and p == category)
        missed = Counter(p for g, p in zip(gold, predicted) if g == category and p != category)
        fn = sum(missed.values())
        scores.append(CategoryScore(
            category=category,
            true_positives=tp,
            false_positives=fp,
            false_negatives=fn,
            precision=tp / (tp + fp) if tp + fp else 0.0,
            recall=tp / (tp + fn) if tp + fn else 0.0,
            missed_into=dict(sorted(missed.items())),
        ))
    return scores
