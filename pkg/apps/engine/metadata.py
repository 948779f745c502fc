"""
Language metadata agreement: Accept-Language parsing, country languages,
and how often both agree with the classified language of a chat.
"""
from __future__ import annotations

import logging
import re
from collections import Counter, defaultdict
from enum import Enum
from typing import Iterable, Optional

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator

from .errors import InvalidParameterError
from .langid import CONFIDENCE_FLOOR, LanguageModel, identify, normalized_length

logger = logging.getLogger(__name__)

DEFAULT_QUALITY = 1.0
WILDCARD = "*"
TOP_HEADER_LANGUAGES = 10
TOP_COUNTRIES = 20

_RANGE_RE = re.compile(r"^(?:\*|[A-Za-z]{1,8}(?:[-_][A-Za-z0-9]{1,8})*)$")
_QUALITY_RE = re.compile(r"^\d+(?:\.\d{1,3})?$")


# =============================================================================
# Accept-Language
# =============================================================================

class LanguageRange(BaseModel):
    model_config = ConfigDict(frozen=True)

    language_range: str
    quality: float = Field(default=DEFAULT_QUALITY, ge=0.0, le=1.0)

    @property
    def base_code(self) -> Optional[str]:
        """Primary subtag in lowercase; the wildcard has none."""
        if self.language_range == WILDCARD:
            return None
        return re.split(r"[-_]", self.language_range, maxsplit=1)[0].lower()


class AcceptLanguage(BaseModel):
    """Parsed header entries in header order."""
    model_config = ConfigDict(frozen=True)

    entries: tuple[LanguageRange, ...] = ()

    @property
    def primary_codes(self) -> list[str]:
        """
        Base codes by descending quality (header order on ties), deduplicated.
        Entries with q=0 are "not acceptable" and contribute nothing.
        """
        ordered = sorted(enumerate(self.entries), key=lambda item: (-item[1].quality, item[0]))
        codes: list[str] = []
        for _, entry in ordered:
            code = entry.base_code
            if code and entry.quality > 0 and code not in codes:
                codes.append(code)
        return codes

    @property
    def top_code(self) -> Optional[str]:
        codes = self.primary_codes
        return codes[0] if codes else None

    def to_header(self) -> str:
        return ",".join(_format_entry(e) for e in self.entries)


def _format_entry(entry: LanguageRange) -> str:
    if entry.quality == DEFAULT_QUALITY:
        return entry.language_range
    quality = f"{entry.quality:.3f}".rstrip("0").rstrip(".")
    return f"{entry.language_range};q={quality}"


def _parse_entry(segment: str) -> Optional[LanguageRange]:
    parts = [p.strip() for p in segment.split(";")]
    language_range = parts[0]
    if not _RANGE_RE.match(language_range):
        return None
    quality = DEFAULT_QUALITY
    for param in parts[1:]:
        name, sep, value = param.partition("=")
        if not sep:
            return None
        if name.strip().lower() != "q":
            continue
        value = value.strip()
        if not _QUALITY_RE.match(value):
            return None
        quality = min(max(float(value), 0.0), 1.0)
    return LanguageRange(language_range=language_range, quality=quality)


def parse_accept_language(header: Optional[str]) -> AcceptLanguage:
    """
    Parse an Accept-Language header leniently.

    Malformed entries are skipped; quality values with one to three decimal
    places are accepted and clamped into [0, 1].

    :Example:

        >>> parse_accept_language("en-GB,en;q=0.9,fr;q=0.8").primary_codes
        ['en', 'fr']
    """
    if not header:
        return AcceptLanguage()
    entries = []
    for segment in header.split(","):
        if not segment.strip():
            continue
        entry = _parse_entry(segment)
        if entry is None:
            logger.debug("Skipping malformed Accept-Language entry %r", segment)
            continue
        entries.append(entry)
    return AcceptLanguage(entries=tuple(entries))


# =============================================================================
# Country languages
# =============================================================================

class CountryLanguageTable(BaseModel):
    """ISO 3166-1 alpha-2 country → ordered ISO 639-1 languages."""
    model_config = ConfigDict(frozen=True)

    languages: dict[str, tuple[str, ...]] = Field(default_factory=dict)

    @field_validator("languages", mode="before")
    @classmethod
    def _normalize(cls, value: dict) -> dict:
        table = {}
        for country, codes in value.items():
            unique = tuple(dict.fromkeys(c.strip().lower() for c in codes if c.strip()))
            if not unique:
                raise ValueError(f"country {country!r} has no languages")
            table[country.strip().upper()] = unique
        return table

    def __len__(self) -> int:
        return len(self.languages)


def parse_country_table(lines: Iterable[str]) -> CountryLanguageTable:
    """Read `CC<TAB>ll,ll,ll` lines; blank and '#' lines are skipped."""
    table: dict[str, list[str]] = {}
    for number, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        country, sep, codes = line.partition("\t")
        if not sep or not codes.strip():
            logger.warning("Skipping country table line %d: %r", number, line)
            continue
        table[country] = codes.split(",")
    return CountryLanguageTable(languages=table)


def load_country_table(path: str) -> CountryLanguageTable:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            table = parse_country_table(handle)
    except UnicodeDecodeError as exc:
        raise InvalidParameterError(f"{path}: not valid UTF-8: {exc.reason}") from exc
    logger.info("Loaded %d countries from %s", len(table), path)
    return table


def country_languages(table: CountryLanguageTable, country: Optional[str]) -> list[str]:
    """Languages of a country; unknown or absent countries give []."""
    if not country:
        return []
    return list(table.languages.get(country.strip().upper(), ()))


# =============================================================================
# Agreement
# =============================================================================

class Bucket(str, Enum):
    ALL = "ALL"
    HEADER_ONLY = "HEADER_ONLY"
    COUNTRY_ONLY = "COUNTRY_ONLY"
    NONE = "NONE"

    @classmethod
    def of(cls, header_match: bool, country_match: bool) -> Bucket:
        if header_match and country_match:
            return cls.ALL
        if header_match:
            return cls.HEADER_ONLY
        if country_match:
            return cls.COUNTRY_ONLY
        return cls.NONE


class ChatRecord(BaseModel):
    """First message of a chat and the metadata seen with it."""
    id: str
    message: str
    accept_language: Optional[str] = None
    country: Optional[str] = None
    label: Optional[str] = None  # gold category, only read by classify --labeled


class AgreementRecord(BaseModel):
    id: str
    classified: str
    message_length: int
    header_match: bool
    country_match: bool
    header_language: Optional[str] = None
    country: Optional[str] = None
    confident: bool = True

    @computed_field
    @property
    def bucket(self) -> Bucket:
        return Bucket.of(self.header_match, self.country_match)


def evaluate_record(
    record: ChatRecord,
    models: list[LanguageModel],
    table: CountryLanguageTable,
    confidence_floor: int = CONFIDENCE_FLOOR,
) -> AgreementRecord:
    """Classify the message and compare it with both metadata signals."""
    prediction = identify(record.message, models, confidence_floor)
    header = parse_accept_language(record.accept_language)
    country = record.country.strip().upper() if record.country and record.country.strip() else None
    return AgreementRecord(
        id=record.id,
        classified=prediction.language,
        message_length=normalized_length(record.message),
        header_match=prediction.language in header.primary_codes,
        country_match=prediction.language in country_languages(table, country),
        header_language=header.top_code,
        country=country,
        confident=prediction.confident,
    )


class LengthBin(BaseModel):
    lower: int
    upper: Optional[int]
    count: int
    header_match_rate: float
    country_match_rate: float
    either_match_rate: float
    all_match_rate: float


class AgreementReport(BaseModel):
    total: int
    counts: dict[Bucket, int]
    fractions: dict[Bucket, float]
    header_match_rate: float
    country_match_rate: float
    either_match_rate: float
    header_lift: Optional[float] = None
    either_gain: Optional[float] = None
    length_bins: list[LengthBin] = Field(default_factory=list)
    header_crosstab: dict[str, dict[str, int]] = Field(default_factory=dict)
    country_crosstab: dict[str, dict[str, int]] = Field(default_factory=dict)


def _rate(count: int, total: int) -> float:
    return count / total if total else 0.0


def bin_ranges(bin_edges: list[int]) -> list[tuple[int, Optional[int]]]:
    """
    Right-open bins between consecutive edges, a leading [0, e0) bin when
    the first edge is positive, and a final overflow bin.
    """
    if any(b <= a for a, b in zip(bin_edges, bin_edges[1:])):
        raise InvalidParameterError(f"bin edges must be strictly ascending: {bin_edges}")
    if any(e < 0 for e in bin_edges):
        raise InvalidParameterError(f"bin edges must be non-negative: {bin_edges}")
    if not bin_edges:
        return [(0, None)]
    edges = list(bin_edges)
    if edges[0] > 0:
        edges.insert(0, 0)
    return list(zip(edges, edges[1:])) + [(edges[-1], None)]


def _crosstab(pairs: Iterable[tuple[Optional[str], str]], top: int) -> dict[str, dict[str, int]]:
    table: dict[str, Counter] = defaultdict(Counter)
    for key, classified in pairs:
        if key:
            table[key][classified] += 1
    ranked = sorted(table.items(), key=lambda item: (-sum(item[1].values()), item[0]))[:top]
    return {key: dict(sorted(counter.items())) for key, counter in ranked}


def aggregate(
    records: list[AgreementRecord],
    bin_edges: list[int],
    top_headers: int = TOP_HEADER_LANGUAGES,
    top_countries: int = TOP_COUNTRIES,
) -> AgreementReport:
    """
    Bucket counts, match rates and per-length-bin rates over a dataset.

    Empty input gives a report with total 0 and every rate 0.
    """
    ranges = bin_ranges(bin_edges)
    total = len(records)
    counts = Counter(r.bucket for r in records)
    counts = {b: counts.get(b, 0) for b in Bucket}
    header_count = counts[Bucket.ALL] + counts[Bucket.HEADER_ONLY]
    country_count = counts[Bucket.ALL] + counts[Bucket.COUNTRY_ONLY]
    either_count = total - counts[Bucket.NONE]

    header_rate = _rate(header_count, total)
    country_rate = _rate(country_count, total)
    either_rate = _rate(either_count, total)
    all_rate = _rate(counts[Bucket.ALL], total)

    bins = []
    for lower, upper in ranges:
        members = [r for r in records
                   if r.message_length >= lower and (upper is None or r.message_length < upper)]
        n = len(members)
        bins.append(LengthBin(
            lower=lower,
            upper=upper,
            count=n,
            header_match_rate=_rate(sum(r.header_match for r in members), n),
            country_match_rate=_rate(sum(r.country_match for r in members), n),
            either_match_rate=_rate(sum(r.header_match or r.country_match for r in members), n),
            all_match_rate=_rate(sum(r.header_match and r.country_match for r in members), n),
        ))

    return AgreementReport(
        total=total,
        counts=counts,
        fractions={b: _rate(c, total) for b, c in counts.items()},
        header_match_rate=header_rate,
        country_match_rate=country_rate,
        either_match_rate=either_rate,
        header_lift=header_rate / country_rate - 1.0 if country_rate else None,
        either_gain=(either_rate - all_rate) / either_rate if either_rate else None,
        length_bins=bins,
        header_crosstab=_crosstab(((r.header_language, r.classified) for r in records), top_headers),
        country_crosstab=_crosstab(((r.country, r.classified) for r in records), top_countries),
    )


def load_chat_records(path: str) -> list[ChatRecord]:
    """Read one JSON object per line; blank lines are skipped."""
    records = []
    seen: set[str] = set()
    number = 0
    try:
        with open(path, "r", encoding="utf-8") as handle:
            for number, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    record = ChatRecord.model_validate_json(line)
                except ValueError as exc:
                    raise InvalidParameterError(f"{path}:{number}: invalid record: {exc}") from exc
                if record.id in seen:
                    raise InvalidParameterError(f"{path}:{number}: duplicate record id {record.id!r}")
                seen.add(record.id)
                records.append(record)
    except UnicodeDecodeError as exc:
        # decoding runs ahead of the line loop, so this is a lower bound
        raise InvalidParameterError(f"{path}: not valid UTF-8 after line {number}: {exc.reason}") from exc
    return records


def render_report(report: AgreementReport) -> str:
    """Plain-text table of an AgreementReport."""
    lines = [f"Records: {report.total}", "", f"{'bucket':<14}{'count':>8}{'fraction':>10}"]
    for bucket in Bucket:
        lines.append(f"{bucket.value:<14}{report.counts[bucket]:>8}{report.fractions[bucket]:>10.3f}")
    lines += [
        "",
        f"{'header match rate':<22}{report.header_match_rate:>8.3f}",
        f"{'country match rate':<22}{report.country_match_rate:>8.3f}",
        f"{'either match rate':<22}{report.either_match_rate:>8.3f}",
    ]
    if report.header_lift is not None:
        lines.append(f"{'header lift':<22}{report.header_lift:>8.3f}")
    if report.either_gain is not None:
        lines.append(f"{'either gain':<22}{report.either_gain:>8.3f}")
    lines += ["", f"{'length':<12}{'count':>7}{'header':>8}{'country':>9}{'either':>8}{'all':>7}"]
    for b in report.length_bins:
        label = f"{b.lower}-{b.upper}" if b.upper is not None else f"{b.lower}+"
        lines.append(
            f"{label:<12}{b.count:>7}{b.header_match_rate:>8.3f}{b.country_match_rate:>9.3f}"
            f"{b.either_match_rate:>8.3f}{b.all_match_rate:>7.3f}"
        )
    for title, crosstab in (("Accept-Language", report.header_crosstab), ("Country", report.country_crosstab)):
        if not crosstab:
            continue
        lines += ["", f"{title} vs classified language"]
        for key, row in crosstab.items():
            cells = ", ".join(f"{lang}={count}" for lang, count in row.items())
            lines.append(f"  {key:<8}{cells}")
    return "\n".join(lines)
