"""
Command-line front end.

Run from the repository root:

    python -m apps.engine search "name servers" "my nameservers are broken"
    python -m apps.engine bench --seed 42

Exit status: 0 success or match, 1 clean no-result, 2 usage or input error.
"""
import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Optional, TypeVar

from .bench import KEYWORDS, run_bench
from .classify import (
    UNCLASSIFIED,
    KeywordClassifier,
    load_rules,
    precision_recall,
    summarize,
)
from .config import DEFAULT_COUNTRY_TABLE, Settings, load_settings
from .errors import InvalidParameterError
from .greedy import LengthBounds, greedy_search
from .langid import identify, load_models, train_models
from .metadata import aggregate, evaluate_record, load_chat_records, load_country_table, render_report
from .similarity import window_scan

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NO_RESULT = 1
EXIT_USAGE = 2

T = TypeVar("T")
R = TypeVar("R")


def _theta(value: str) -> float:
    try:
        theta = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {value!r}") from None
    if not 0.0 < theta <= 1.0:
        raise argparse.ArgumentTypeError(f"theta must be in (0, 1], got {value}")
    return theta


def _positive_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {value!r}") from None
    if number < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return number


def _non_negative_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {value!r}") from None
    if number < 0:
        raise argparse.ArgumentTypeError(f"must not be negative, got {value}")
    return number


def _bins(value: str) -> list[int]:
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bins must be comma-separated integers: {value!r}") from None


def _read_source(text: Optional[str], path: Optional[str]) -> str:
    if path is not None:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    return text or ""


def _fan_out(func: Callable[[T], R], items: Iterable[T], workers: int) -> list[R]:
    """Map in input order, on a thread pool when workers > 1."""
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(func, items))
    return [func(item) for item in items]


# =============================================================================
# Commands
# =============================================================================

def cmd_search(args: argparse.Namespace, settings: Settings) -> int:
    if (args.text is None) == (args.file is None):
        print("error: give either TEXT or --file", file=sys.stderr)
        return EXIT_USAGE
    text = _read_source(args.text, args.file)
    theta = args.theta or settings.theta
    n = args.n or settings.ngram

    if args.method == "window":
        match = window_scan(args.keyword, text, theta, n)
        if match is None:
            print("no match")
            return EXIT_NO_RESULT
        print(f"score={match.score:.4f}\toffset={match.offset}\twindow={match.window!r}")
        return EXIT_OK

    bounds = LengthBounds(args.bounds or settings.bounds)
    match = greedy_search(args.keyword, text, theta, n, bounds, args.metric)
    if match is None:
        print("no match")
        return EXIT_NO_RESULT
    words = text.lower().split()[match.span.start:match.span.end]
    print(
        f"score={match.score:.4f}\tstart={match.span.start}\twidth={match.span.width}"
        f"\twidth_class={match.width_class}\tspan={' '.join(words)!r}"
    )
    return EXIT_OK


def cmd_classify(args: argparse.Namespace, settings: Settings) -> int:
    theta = args.theta or settings.theta
    rule_sets = load_rules(args.rules, default_theta=theta)
    classifier = KeywordClassifier(
        rule_sets,
        n=args.n or settings.ngram,
        bounds=LengthBounds(args.bounds or settings.bounds),
    )
    records = load_chat_records(args.dataset)
    workers = args.parallel or settings.workers
    results = _fan_out(lambda r: classifier.classify_detailed(r.message), records, workers)

    for record, result in zip(records, results):
        print(f"{record.id}\t{result.label}\t{result.score:.4f}")

    summary = summarize([r.label for r in results], [rs.category for rs in rule_sets])
    print()
    for category, count in summary.counts.items():
        print(f"{category}\t{count}")
    print(f"{UNCLASSIFIED}\t{summary.unclassified}")
    print(f"TOTAL\t{summary.total}")

    if args.labeled:
        gold = [r.label or UNCLASSIFIED for r in records]
        print()
        for score in precision_recall(gold, [r.label for r in results]):
            print(f"{score.category}\tprecision={score.precision:.3f}\trecall={score.recall:.3f}"
                  f"\ttp={score.true_positives}\tfp={score.false_positives}\tfn={score.false_negatives}"
                  + "".join(f"\tmissed_into_{label}={count}" for label, count in score.missed_into.items()))
    return EXIT_OK


def cmd_langid(args: argparse.Namespace, settings: Settings) -> int:
    if (args.message is None) == (args.file is None):
        print("error: give either MESSAGE or --file", file=sys.stderr)
        return EXIT_USAGE
    models = load_models(args.models, k=settings.langid_k)
    message = _read_source(args.message, args.file)
    prediction = identify(message, models, confidence_floor=settings.confidence_floor)
    print(
        f"language={prediction.language}\tdistance={prediction.distance}"
        f"\tconfident={str(prediction.confident).lower()}"
    )
    return EXIT_OK


def cmd_agree(args: argparse.Namespace, settings: Settings) -> int:
    models = load_models(args.models, k=settings.langid_k)
    table = load_country_table(args.table)
    records = load_chat_records(args.dataset)
    workers = args.parallel or settings.workers
    evaluated = _fan_out(
        lambda r: evaluate_record(r, models, table, settings.confidence_floor), records, workers
    )
    report = aggregate(evaluated, args.bins)

    payload = report.model_dump_json(indent=2)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as handle:
            handle.write(payload + "\n")
    else:
        print(payload)
        print()
    print(render_report(report))
    return EXIT_OK


def cmd_bench(args: argparse.Namespace, settings: Settings) -> int:
    report = run_bench(
        docs=args.docs,
        doc_length=args.doc_length,
        keyword_count=args.keywords,
        theta=args.theta,
        seed=args.seed,
        n=args.n or settings.ngram,
        bounds=LengthBounds(args.bounds or settings.bounds),
        warmup=args.warmup,
    )
    print(f"{'method':<10}{'docs':>6}{'keywords':>10}{'mean_s':>12}{'median_s':>12}{'matches':>9}")
    for row in (report.baseline, report.greedy):
        print(f"{row.method:<10}{row.corpus_size:>6}{row.keyword_count:>10}"
              f"{row.mean_seconds:>12.6f}{row.median_seconds:>12.6f}{row.matches:>9}")
    if report.ratio is not None:
        print(f"ratio (baseline/greedy mean): {report.ratio:.2f}")
    print()
    print(f"{'planted':<10}{'docs':>6}{'baseline':>10}{'greedy':>8}")
    for kind, count in report.planted_counts.items():
        print(f"{kind:<10}{count:>6}{report.baseline.planted_matches[kind]:>10}"
              f"{report.greedy.planted_matches[kind]:>8}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as handle:
            handle.write(report.model_dump_json(indent=2) + "\n")
    return EXIT_OK


def cmd_train(args: argparse.Namespace, settings: Settings) -> int:
    paths = train_models(args.corpora, args.out, k=args.k or settings.langid_k)
    for path in paths:
        print(path)
    return EXIT_OK


# =============================================================================
# Parser
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fuzzyscan", description="Fuzzy keyword search and language metadata analysis")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="More logging (repeatable)")
    parser.add_argument("--env-file", help="dotenv file with FUZZYSCAN_* settings")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_search_options(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--theta", type=_theta, help="Similarity threshold in (0, 1]")
        sub.add_argument("--n", type=_positive_int, help="Gram size (default: 2)")
        sub.add_argument("--bounds", choices=[b.value for b in LengthBounds], help="Span length gate")

    search = subparsers.add_parser("search", help="Search one keyword in a text")
    search.add_argument("keyword")
    search.add_argument("text", nargs="?", help="Text to scan (or use --file)")
    search.add_argument("-f", "--file", help="Read the text from a file")
    search.add_argument("--method", choices=["greedy", "window"], default="greedy")
    search.add_argument("--metric", choices=["cosine", "dice"], default="cosine")
    add_search_options(search)
    search.set_defaults(func=cmd_search)

    classify = subparsers.add_parser("classify", help="Classify dataset records with keyword rules")
    classify.add_argument("rules", help="category<TAB>keyword[<TAB>theta] per line")
    classify.add_argument("dataset", help="One JSON record per line")
    classify.add_argument("--labeled", action="store_true", help="Report precision and recall from 'label'")
    classify.add_argument("--parallel", type=_positive_int, help="Worker threads (default: FUZZYSCAN_WORKERS)")
    add_search_options(classify)
    classify.set_defaults(func=cmd_classify)

    langid = subparsers.add_parser("langid", help="Identify the language of a message")
    langid.add_argument("models", help="Directory of *.model files or *.txt corpora")
    langid.add_argument("message", nargs="?", help="Message text (or use --file)")
    langid.add_argument("-f", "--file", help="Read the message from a file")
    langid.set_defaults(func=cmd_langid)

    agree = subparsers.add_parser("agree", help="Agreement between classified language and metadata")
    agree.add_argument("models", help="Directory of *.model files or *.txt corpora")
    agree.add_argument("table", nargs="?", default=DEFAULT_COUNTRY_TABLE, help="Country language table")
    agree.add_argument("dataset", help="One JSON record per line")
    agree.add_argument("--bins", type=_bins, default=[0, 20, 60], help="Length bin edges, e.g. 0,20,60")
    agree.add_argument("--json", help="Write the machine-readable report here")
    agree.add_argument("--parallel", type=_positive_int, help="Worker threads (default: FUZZYSCAN_WORKERS)")
    agree.set_defaults(func=cmd_agree)

    bench = subparsers.add_parser("bench", help="Time greedy search against the window scan")
    bench.add_argument("--keywords", type=_positive_int, default=20,
                       help=f"Keywords to search, at most {len(KEYWORDS)} (default: %(default)d)")
    bench.add_argument("--docs", type=_positive_int, default=500, help="Documents (default: %(default)d)")
    bench.add_argument("--doc-length", type=_positive_int, default=1000,
                       help="Characters per document (default: %(default)d)")
    bench.add_argument("--theta", type=_theta, default=0.85, help="Similarity threshold (default: %(default)s)")
    bench.add_argument("--seed", type=int, default=42, help="Corpus seed (default: %(default)d)")
    bench.add_argument("--warmup", type=_non_negative_int, default=10,
                       help="Untimed warm-up documents (default: %(default)d)")
    bench.add_argument("--n", type=_positive_int, help="Gram size (default: 2)")
    bench.add_argument("--bounds", choices=[b.value for b in LengthBounds], help="Span length gate")
    bench.add_argument("--json", help="Write the machine-readable report here")
    bench.set_defaults(func=cmd_bench)

    train = subparsers.add_parser("train", help="Train language models from <code>.txt corpora")
    train.add_argument("corpora", help="Directory of <code>.txt corpora")
    train.add_argument("out", help="Directory for <code>.model files")
    train.add_argument("--k", type=_positive_int, help="Grams kept per language (default: 300)")
    train.set_defaults(func=cmd_train)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    try:
        settings = load_settings(args.env_file)
    except InvalidParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    level = logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else settings.log_level
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)

    try:
        return args.func(args, settings)
    except (InvalidParameterError, OSError, UnicodeDecodeError) as exc:
        logger.debug("Command failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
