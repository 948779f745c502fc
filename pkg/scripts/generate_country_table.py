import argparse
import json
import os
import sys

import httpx

DEFAULT_OUT = os.path.join(os.path.dirname(__file__), "..", "apps", "engine", "data", "countries.tsv")

HEADER = "# ISO 3166-1 alpha-2 country<TAB>ISO 639-1 languages, most common first\n"


def fetch_countries(url):
    # countries.json from the open-source country dataset, keyed by alpha-2 code
    response = httpx.get(url, timeout=30.0, follow_redirects=True)
    response.raise_for_status()
    return response.json()


def build_table(countries):
    lines = []
    for code in sorted(countries):
        languages = [lang.lower() for lang in countries[code].get("languages", []) if lang]
        if len(code) != 2 or not languages:
            continue
        lines.append(f"{code.upper()}\t{','.join(dict.fromkeys(languages))}\n")
    return lines


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Regenerate the country language table")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--url", help="URL of a countries.json file")
    source.add_argument("--source", help="Path to a local countries.json file")
    parser.add_argument("--out", default=DEFAULT_OUT, help="Output TSV path")
    args = parser.parse_args()

    try:
        if args.url:
            countries = fetch_countries(args.url)
        else:
            with open(args.source, "r", encoding="utf-8") as f:
                countries = json.load(f)
    except (httpx.HTTPError, OSError, ValueError) as e:
        print(f"Error: {e}")
        sys.exit(1)

    lines = build_table(countries)
    with open(args.out, "w", encoding="utf-8") as f:
        f.write(HEADER)
        f.writelines(lines)
    print(f"Wrote {len(lines)} countries to {args.out}")
