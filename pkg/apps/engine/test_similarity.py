from collections import Counter

import numpy as np
import pytest

from apps.engine.errors import InvalidParameterError
from apps.engine.similarity import (
    build_profile,
    cosine,
    dice,
    edit_distance,
    edit_similarity,
    window_scan,
)


def _random_string(rng, alphabet, max_length, min_length=0):
    length = int(rng.integers(min_length, max_length + 1))
    return "".join(alphabet[int(i)] for i in rng.integers(0, len(alphabet), size=length))


def _dp_edit_distance(x, y):
    previous = list(range(len(y) + 1))
    for i, a in enumerate(x, start=1):
        current = [i]
        for j, b in enumerate(y, start=1):
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (a != b)))
        previous = current
    return previous[-1]


class TestBuildProfile:
    def test_counts_repeated_grams(self):
        p = build_profile("abab", 2)
        assert dict(p.counts) == {"ab": 2, "ba": 1}
        assert p.total == 3

    def test_shorter_than_n_is_empty(self):
        p = build_profile("a", 2)
        assert len(p) == 0
        assert p.total == 0

    def test_lowercases(self):
        assert dict(build_profile("Name", 2).counts) == {"na": 1, "am": 1, "me": 1}

    def test_zero_n_rejected(self):
        with pytest.raises(InvalidParameterError):
            build_profile("abc", 0)


class TestMetrics:
    def test_cosine_examples(self):
        abcd = build_profile("abcd")
        assert cosine(abcd, build_profile("abcd")) == pytest.approx(1.0)
        assert cosine(abcd, build_profile("wxyz")) == 0.0
        assert cosine(abcd, build_profile("abce")) == pytest.approx(2 / 3)

    def test_dice_examples(self):
        abcd = build_profile("abcd")
        assert dice(abcd, build_profile("abcd")) == pytest.approx(1.0)
        assert dice(abcd, build_profile("wxyz")) == 0.0
        assert dice(abcd, build_profile("abce")) == pytest.approx(2 / 3)

    def test_mismatched_n_rejected(self):
        with pytest.raises(InvalidParameterError):
            cosine(build_profile("abcd", 2), build_profile("abcd", 3))
        with pytest.raises(InvalidParameterError):
            dice(build_profile("abcd", 2), build_profile("abcd", 3))

    def test_empty_profile_scores_zero(self):
        assert cosine(build_profile(""), build_profile("abc")) == 0.0
        assert dice(build_profile(""), build_profile("")) == 0.0

    def test_same_gram_multiset_scores_one(self):
        # grams of "xyzx" and "zxyz" are {xy, yz, zx} each
        p, q = build_profile("xyzx"), build_profile("zxyz")
        assert Counter(p.counts) == Counter(q.counts)
        assert cosine(p, q) == pytest.approx(1.0)
        assert dice(p, q) == pytest.approx(1.0)

    def test_random_axioms(self):
        rng = np.random.default_rng(7)
        strings = [_random_string(rng, "abcde ", 64) for _ in range(1000)]
        profiles = [build_profile(s) for s in strings]
        for p, q in zip(profiles, profiles[1:]):
            for metric in (cosine, dice):
                score = metric(p, q)
                assert 0.0 <= score <= 1.0
                assert score == metric(q, p)
            if p.total:
                assert cosine(p, p) == pytest.approx(1.0, abs=1e-9)
                assert dice(p, p) == pytest.approx(1.0, abs=1e-9)


class TestEditDistance:
    def test_examples(self):
        assert edit_distance("abc", "abc") == 0
        assert edit_distance("", "abc") == 3
        assert edit_distance("kitten", "sitting") == 3

    def test_agrees_with_dp(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            x = _random_string(rng, "abcd", 12)
            y = _random_string(rng, "abcd", 12)
            z = _random_string(rng, "abcd", 12)
            d = edit_distance(x, y)
            assert d == _dp_edit_distance(x, y)
            assert d <= max(len(x), len(y))
            assert d <= edit_distance(x, z) + edit_distance(z, y)

    def test_similarity(self):
        assert edit_similarity("", "") == 1.0
        assert edit_similarity("abcd", "abce") == pytest.approx(0.75)


class TestWindowScan:
    def test_exact_substring(self):
        match = window_scan("dns", "the dns broke", 0.99, 2)
        assert match.offset == 4
        assert match.score == pytest.approx(1.0)

    def test_no_match(self):
        assert window_scan("dns", "no match here", 0.8, 2) is None

    def test_first_offset_reaching_theta_wins(self):
        # " nameserver" at offset 2 shares 11 of 12 units with the keyword
        match = window_scan("nameservers", "my nameservers are broken", 0.9, 2)
        assert match.offset == 2
        assert match.window == " nameserver"
        assert match.score == pytest.approx(11 / 12)

        exact = window_scan("nameservers", "my nameservers are broken", 0.95, 2)
        assert exact.offset == 3
        assert exact.score == pytest.approx(1.0)

    def test_keyword_longer_than_text(self):
        assert window_scan("name servers", "nameservers", 0.9) is None

    def test_invalid_arguments(self):
        with pytest.raises(InvalidParameterError):
            window_scan("", "text")
        with pytest.raises(InvalidParameterError):
            window_scan("dns", "text", theta=0.0)
        with pytest.raises(InvalidParameterError):
            window_scan("dns", "text", theta=1.5)

    def test_theta_one_finds_first_equal_gram_multiset(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            keyword = _random_string(rng, "ab ", 5, min_length=2)
            text = _random_string(rng, "ab ", 30)
            target = Counter(keyword[i:i + 2] for i in range(len(keyword) - 1))
            expected = None
            for offset in range(len(text) - len(keyword) + 1):
                window = text[offset:offset + len(keyword)]
                if Counter(window[i:i + 2] for i in range(len(window) - 1)) == target:
                    expected = offset
                    break
            match = window_scan(keyword, text, 1.0, 2)
            assert (match.offset if match else None) == expected
