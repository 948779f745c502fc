"""
Rank-profile language identification.

Each language is a ranked list of its most frequent character grams of
sizes one to five; a message is assigned to the language whose ranking is
closest by out-of-place distance.
"""
from __future__ import annotations

import glob
import logging
import os
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional

from pydantic import BaseModel

from .errors import InvalidParameterError

logger = logging.getLogger(__name__)

DEFAULT_K = 300
CONFIDENCE_FLOOR = 10
GRAM_SIZES = range(1, 6)
BOUNDARY = "_"
MODEL_SUFFIX = ".model"
CORPUS_SUFFIX = ".txt"

_WORD_RE = re.compile(r"[^\W\d_]+")
_WHITESPACE_RE = re.compile(r"\s+")
_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n"}
_UNESCAPES = {"\\\\": "\\", "\\t": "\t", "\\n": "\n"}
_UNESCAPE_RE = re.compile(r"\\[\\tn]")


@dataclass(frozen=True, slots=True)
class LanguageModel:
    """Top-K grams of one language, most frequent first."""
    language: str
    ranked_grams: tuple[str, ...]
    k: int = DEFAULT_K
    ranks: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.ranked_grams)) != len(self.ranked_grams):
            raise InvalidParameterError(f"duplicate grams in model {self.language!r}")
        if len(self.ranked_grams) > self.k:
            raise InvalidParameterError(f"model {self.language!r} holds more than K={self.k} grams")
        object.__setattr__(self, "ranks", {g: i for i, g in enumerate(self.ranked_grams)})

    def __len__(self) -> int:
        return len(self.ranked_grams)


class LanguagePrediction(BaseModel):
    language: str
    distance: int
    confident: bool


def normalized_length(text: str) -> int:
    """Characters of the lowercased text with white space runs collapsed."""
    return len(_WHITESPACE_RE.sub(" ", text.lower()).strip())


def count_grams(text: str) -> Counter:
    """Grams of sizes 1-5 over boundary-padded words of the lowercased text."""
    counts: Counter = Counter()
    for word in _WORD_RE.findall(text.lower()):
        padded = f"{BOUNDARY}{word}{BOUNDARY}"
        length = len(padded)
        for size in GRAM_SIZES:
            counts.update(padded[i:i + size] for i in range(length - size + 1))
    return counts


def _rank(counts: Counter, k: int) -> tuple[str, ...]:
    ordered = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return tuple(gram for gram, _ in ordered[:k])


def _build(text: str, language: str, k: int) -> LanguageModel:
    return LanguageModel(language=language, ranked_grams=_rank(count_grams(text), k), k=k)


def train_model(corpus: str, language: str, k: int = DEFAULT_K) -> LanguageModel:
    """
    Train a rank profile from a corpus.

    Ties in frequency are ordered lexicographically so training is
    deterministic.
    """
    if not corpus.strip():
        raise InvalidParameterError(f"corpus for {language!r} is blank")
    if k < 1:
        raise InvalidParameterError(f"K must be >= 1, got {k}")
    model = _build(corpus, language, k)
    logger.debug("Trained %s model with %d grams", language, len(model))
    return model


def _distance(doc: LanguageModel, lang: LanguageModel) -> int:
    ranks = lang.ranks
    penalty = lang.k
    total = 0
    for i, gram in enumerate(doc.ranked_grams):
        r = ranks.get(gram)
        total += penalty if r is None else abs(i - r)
    return total


def out_of_place(doc_model: LanguageModel, lang_model: LanguageModel) -> int:
    """Sum of rank differences; grams missing from lang_model cost K each."""
    if not doc_model.ranked_grams or not lang_model.ranked_grams:
        raise InvalidParameterError("out-of-place distance needs two non-empty models")
    return _distance(doc_model, lang_model)


def identify(
    message: str,
    models: list[LanguageModel],
    confidence_floor: int = CONFIDENCE_FLOOR,
) -> LanguagePrediction:
    """
    Pick the language whose model is closest to the message.

    Args:
        message: Text to classify; may be empty.
        models: Trained models; earlier models win ties.
        confidence_floor: Messages with fewer normalised characters are
            flagged as not confident.
    """
    if not models:
        raise InvalidParameterError("identify needs at least one language model")
    k = max(m.k for m in models)
    doc = _build(message, "", k)
    confident = normalized_length(message) >= confidence_floor

    best: Optional[tuple[int, str]] = None
    for model in models:
        distance = _distance(doc, model)
        if best is None or distance < best[0]:
            best = (distance, model.language)
    distance, language = best
    return LanguagePrediction(language=language, distance=distance, confident=confident)


# =============================================================================
# Persistence
# =============================================================================

def _escape(gram: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in gram)


def _unescape(text: str) -> str:
    return _UNESCAPE_RE.sub(lambda m: _UNESCAPES[m.group(0)], text)


def dump_model(model: LanguageModel) -> str:
    lines = [f"{model.language}\t{model.k}"]
    lines.extend(f"{_escape(gram)}\t{rank}" for rank, gram in enumerate(model.ranked_grams))
    return "\n".join(lines) + "\n"


def parse_model(lines: Iterable[str]) -> LanguageModel:
    iterator = iter(lines)
    header = next(iterator, "").rstrip("\n")
    try:
        language, k_text = header.split("\t")
        k = int(k_text)
    except ValueError:
        raise InvalidParameterError(f"bad model header: {header!r}") from None

    ranked: list[tuple[int, str]] = []
    for line in iterator:
        line = line.rstrip("\n")
        if not line:
            continue
        gram_text, _, rank_text = line.rpartition("\t")
        try:
            ranked.append((int(rank_text), _unescape(gram_text)))
        except ValueError:
            raise InvalidParameterError(f"bad model line: {line!r}") from None
    ranked.sort()
    return LanguageModel(language=language, ranked_grams=tuple(g for _, g in ranked), k=k)


def save_model(model: LanguageModel, directory: str) -> str:
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, f"{model.language}{MODEL_SUFFIX}")
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(dump_model(model))
    return path


def load_model(path: str) -> LanguageModel:
    with open(path, "r", encoding="utf-8", newline="\n") as handle:
        return parse_model(handle)


def train_corpora(directory: str, k: int = DEFAULT_K) -> list[LanguageModel]:
    """Train one model per `<code>.txt` corpus, sorted by language code."""
    models = []
    for path in sorted(glob.glob(os.path.join(directory, f"*{CORPUS_SUFFIX}"))):
        language = os.path.basename(path)[:-len(CORPUS_SUFFIX)]
        with open(path, "r", encoding="utf-8") as handle:
            models.append(train_model(handle.read(), language, k))
    return models


def load_models(directory: str, k: int = DEFAULT_K) -> list[LanguageModel]:
    """
    Load every `*.model` file in a directory, sorted by file name.

    A directory holding only `*.txt` corpora is trained on the fly with K=k.
    """
    if not os.path.isdir(directory):
        raise InvalidParameterError(f"models directory not found: {directory}")
    paths = sorted(glob.glob(os.path.join(directory, f"*{MODEL_SUFFIX}")))
    if paths:
        models = [load_model(p) for p in paths]
    else:
        models = train_corpora(directory, k)
    if not models:
        raise InvalidParameterError(f"no language models or corpora in {directory}")
    logger.info("Loaded %d language models from %s", len(models), directory)
    return models


def train_models(corpora_dir: str, out_dir: str, k: int = DEFAULT_K) -> list[str]:
    """Train every corpus in corpora_dir and write the model files."""
    models = train_corpora(corpora_dir, k)
    if not models:
        raise InvalidParameterError(f"no corpora in {corpora_dir}")
    return [save_model(m, out_dir) for m in models]


# =============================================================================
# Evaluation
# =============================================================================

class BinAccuracy(BaseModel):
    lower: int
    upper: Optional[int]
    correct: int
    total: int

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0


def binned_accuracy(
    samples: list[tuple[str, str]],
    models: list[LanguageModel],
    edges: tuple[int, ...] = (0, 20, 60),
) -> list[BinAccuracy]:
    """Accuracy of identify() over (language, sentence) pairs grouped by length."""
    bins = [[lo, hi, 0, 0] for lo, hi in zip(edges, list(edges[1:]) + [None])]
    for language, sentence in samples:
        length = normalized_length(sentence)
        for row in bins:
            if length >= row[0] and (row[1] is None or length < row[1]):
                row[3] += 1
                if identify(sentence, models).language == language:
                    row[2] += 1
                break
    return [BinAccuracy(lower=lo, upper=hi, correct=c, total=t) for lo, hi, c, t in bins]


def load_labelled(path: str) -> list[tuple[str, str]]:
    """Read `code<TAB>sentence` lines."""
    samples = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            language, _, sentence = line.partition("\t")
            samples.append((language, sentence))
    return samples
