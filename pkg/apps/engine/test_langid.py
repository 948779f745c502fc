import os

import pytest

from apps.engine.config import DEFAULT_CORPORA_DIR, DEFAULT_HELDOUT
from apps.engine.errors import InvalidParameterError
from apps.engine.langid import (
    LanguageModel,
    binned_accuracy,
    dump_model,
    identify,
    load_labelled,
    load_models,
    load_model,
    out_of_place,
    parse_model,
    save_model,
    train_corpora,
    train_model,
    train_models,
)

LANGUAGES = ["de", "en", "es", "fr", "pl"]


@pytest.fixture(scope="module")
def models():
    return train_corpora(DEFAULT_CORPORA_DIR)


def _corpus(language):
    with open(os.path.join(DEFAULT_CORPORA_DIR, f"{language}.txt"), "r", encoding="utf-8") as handle:
        return handle.read()


class TestTrainModel:
    def test_ties_are_lexicographic(self):
        model = train_model("aaa bbb", "xx", k=10)
        unigrams = [g for g in model.ranked_grams if len(g) == 1]
        assert unigrams.index("a") < unigrams.index("b")

    def test_k_one_keeps_most_frequent(self):
        model = train_model("aaa bbb", "xx", k=1)
        # "_" opens and closes both words: four occurrences beat three of each letter
        assert model.ranked_grams == ("_",)

    def test_deterministic(self):
        assert train_model(_corpus("en"), "en") == train_model(_corpus("en"), "en")

    def test_blank_corpus(self):
        with pytest.raises(InvalidParameterError):
            train_model("  \n", "en")

    def test_digits_and_punctuation_ignored(self):
        assert train_model("abc 123 !!", "xx") == train_model("abc", "xx")


class TestOutOfPlace:
    def test_identical(self):
        model = LanguageModel(language="x", ranked_grams=("a", "b", "c"), k=3)
        assert out_of_place(model, model) == 0

    def test_all_absent(self):
        doc = LanguageModel(language="", ranked_grams=("x", "y"), k=300)
        lang = LanguageModel(language="l", ranked_grams=("a", "b", "c"), k=300)
        assert out_of_place(doc, lang) == 2 * 300

    def test_adjacent_swap(self):
        doc = LanguageModel(language="", ranked_grams=("a", "b", "c"), k=3)
        lang = LanguageModel(language="l", ranked_grams=("b", "a", "c"), k=3)
        assert out_of_place(doc, lang) == 2

    def test_empty_model(self):
        empty = LanguageModel(language="", ranked_grams=(), k=3)
        full = LanguageModel(language="l", ranked_grams=("a",), k=3)
        with pytest.raises(InvalidParameterError):
            out_of_place(empty, full)

    def test_model_invariants(self):
        with pytest.raises(InvalidParameterError):
            LanguageModel(language="x", ranked_grams=("a", "a"), k=3)
        with pytest.raises(InvalidParameterError):
            LanguageModel(language="x", ranked_grams=("a", "b"), k=1)


class TestIdentify:
    def test_self_identification(self, models):
        for model in models:
            prediction = identify(_corpus(model.language), models)
            assert prediction.language == model.language
            assert prediction.distance == 0
            assert prediction.confident

    def test_english_sentence(self, models):
        prediction = identify("Could you please tell me why my website is so slow today?", models)
        assert prediction.language == "en"

    def test_empty_message(self, models):
        prediction = identify("", models)
        assert prediction.language == models[0].language
        assert prediction.distance == 0
        assert not prediction.confident

    def test_short_message_not_confident(self, models):
        assert not identify("danke", models).confident

    def test_single_model(self, models):
        only = [m for m in models if m.language == "pl"]
        assert identify("the quick brown fox", only).language == "pl"

    def test_no_models(self):
        with pytest.raises(InvalidParameterError):
            identify("hello", [])

    def test_deterministic(self, models):
        message = "Wir haben Ihre Anfrage erhalten."
        assert identify(message, models) == identify(message, models)


class TestHeldOut:
    def test_long_sentences(self, models):
        samples = load_labelled(DEFAULT_HELDOUT)
        bins = binned_accuracy(samples, models)
        assert [b.lower for b in bins] == [0, 20, 60]
        assert bins[2].total >= 30
        assert bins[2].accuracy >= 0.9

    def test_accuracy_does_not_drop_with_length(self, models):
        bins = binned_accuracy(load_labelled(DEFAULT_HELDOUT), models)
        accuracies = [b.accuracy for b in bins]
        assert all(b.total for b in bins)
        assert accuracies == sorted(accuracies)


class TestPersistence:
    def test_dump_and_parse(self):
        model = LanguageModel(language="xx", ranked_grams=("a", "\\", "b\tc", "d\ne", "_x_"), k=5)
        text = dump_model(model)
        assert text.splitlines()[0] == "xx\t5"
        assert parse_model(text.splitlines(keepends=True)) == model

    def test_bad_header(self):
        with pytest.raises(InvalidParameterError):
            parse_model(["not a header\n"])

    def test_save_and_load(self, tmp_path):
        model = train_model(_corpus("fr"), "fr")
        path = save_model(model, str(tmp_path))
        assert os.path.basename(path) == "fr.model"
        assert load_model(path) == model

    def test_train_models_then_load(self, tmp_path):
        paths = train_models(DEFAULT_CORPORA_DIR, str(tmp_path), k=50)
        assert sorted(os.path.basename(p) for p in paths) == [f"{code}.model" for code in LANGUAGES]
        loaded = load_models(str(tmp_path))
        assert [m.language for m in loaded] == LANGUAGES
        assert all(m.k == 50 for m in loaded)

    def test_load_models_trains_corpora(self):
        assert [m.language for m in load_models(DEFAULT_CORPORA_DIR)] == LANGUAGES

    def test_load_models_errors(self, tmp_path):
        with pytest.raises(InvalidParameterError):
            load_models(str(tmp_path / "missing"))
        with pytest.raises(InvalidParameterError):
            load_models(str(tmp_path))
