import pytest

from apps.engine.classify import (
    UNCLASSIFIED,
    CategoryRuleSet,
    KeywordClassifier,
    KeywordRule,
    classify,
    load_rules,
    parse_rules,
    precision_recall,
    summarize,
)
from apps.engine.errors import InvalidParameterError, RulesFormatError


def rule_set(category, *rules):
    return CategoryRuleSet(category=category, rules=[KeywordRule(keyword=k, theta=t) for k, t in rules])


@pytest.fixture
def categories():
    return [
        rule_set("DNS", ("name servers", 0.9)),
        rule_set("Crypto", ("certificate", 0.9)),
    ]


class TestClassify:
    def test_single_matching_category(self, categories):
        assert classify("my nameservers are broken", categories) == "DNS"

    def test_unclassified(self, categories):
        assert classify("the invoice was paid twice", categories) is None
        assert KeywordClassifier(categories).classify_detailed("hello").label == UNCLASSIFIED

    def test_highest_score_wins(self):
        categories = [
            rule_set("DNS", ("nameservers", 0.9)),
            rule_set("Crypto", ("certificate", 0.9)),
        ]
        result = KeywordClassifier(categories).classify_detailed("my name servers and certificate")
        assert result.category == "Crypto"
        assert result.score == pytest.approx(1.0)
        assert result.keyword == "certificate"

    def test_tie_keeps_declaration_order(self):
        categories = [rule_set("First", ("dns", 0.8)), rule_set("Second", ("dns", 0.8))]
        assert classify("dns is down", categories) == "First"

    def test_duplicate_category_names(self):
        with pytest.raises(InvalidParameterError):
            KeywordClassifier([rule_set("DNS", ("dns", 0.8)), rule_set("DNS", ("zone", 0.8))])

    def test_per_rule_theta(self):
        strict = [rule_set("DNS", ("name servers", 0.99))]
        assert classify("my nameservers are broken", strict) is None


class TestKeywordRule:
    def test_defaults(self):
        assert KeywordRule(keyword="dns").theta == 0.8

    @pytest.mark.parametrize("theta", [0.0, -0.1, 1.2])
    def test_theta_range(self, theta):
        with pytest.raises(ValueError):
            KeywordRule(keyword="dns", theta=theta)

    def test_blank_keyword(self):
        with pytest.raises(ValueError):
            KeywordRule(keyword="   ")


class TestParseRules:
    def test_parses_groups_in_order(self):
        rules = parse_rules([
            "# category<TAB>keyword<TAB>theta\n",
            "DNS\tname servers\t0.9\n",
            "\n",
            "Crypto\tcertificate\n",
            "DNS\tdns record\t0.85\n",
        ], default_theta=0.75)
        assert [r.category for r in rules] == ["DNS", "Crypto"]
        assert [(k.keyword, k.theta) for k in rules[0].rules] == [("name servers", 0.9), ("dns record", 0.85)]
        assert rules[1].rules[0].theta == 0.75

    @pytest.mark.parametrize("line", [
        "DNS",
        "DNS\tdns\t0.9\textra",
        "DNS\tdns\tabc",
        "DNS\t   \t0.9",
        "DNS\tdns\t1.5",
        "\tdns\t0.9",
    ])
    def test_bad_lines_name_the_line(self, line):
        with pytest.raises(RulesFormatError) as info:
            parse_rules(["DNS\tdns\t0.9", line])
        assert info.value.line_number == 2
        assert "line 2" in str(info.value)

    def test_load_rules(self, tmp_path):
        path = tmp_path / "rules.tsv"
        path.write_text("DNS\tname servers\t0.9\nCrypto\tcertificate\t0.9\n", encoding="utf-8")
        rules = load_rules(str(path))
        assert len(rules) == 2


class TestEvaluation:
    def test_precision_recall_with_planted_errors(self):
        gold = ["DNS"] * 12 + ["BILLING"] * 8
        predicted = ["DNS"] * 9 + [UNCLASSIFIED] * 3 + ["DNS"] * 2 + ["BILLING"] * 6
        scores = {s.category: s for s in precision_recall(gold, predicted)}

        dns = scores["DNS"]
        assert (dns.true_positives, dns.false_positives, dns.false_negatives) == (9, 2, 3)
        assert dns.precision == pytest.approx(0.818, abs=0.001)
        assert dns.recall == pytest.approx(0.75)

        billing = scores["BILLING"]
        assert billing.precision == pytest.approx(1.0)
        assert billing.recall == pytest.approx(0.75)
        assert dns.missed_into == {UNCLASSIFIED: 3}
        assert billing.missed_into == {"DNS": 2}

    def test_length_mismatch(self):
        with pytest.raises(InvalidParameterError):
            precision_recall(["DNS"], [])

    def test_summarize(self):
        summary = summarize(["DNS", UNCLASSIFIED, "DNS"], ["DNS", "Crypto"])
        assert summary.total == 3
        assert summary.counts == {"DNS": 2, "Crypto": 0}
        assert summary.unclassified == 1

    def test_summarize_empty(self):
        summary = summarize([], ["DNS"])
        assert summary.total == 0
        assert summary.counts == {"DNS": 0}
