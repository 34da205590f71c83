import hashlib
import random
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adthemes.ingestion import Ad, RangeMetric
from adthemes.textpipe import (
    LexiconFormatError,
    LinguisticLexicon,
    ProcessedText,
    analyze,
    combine_variants,
    dedup,
    lemma_offsets,
    load_processed,
    normalize_for_key,
    process_ad,
    save_processed,
    transliterate,
)
from oracles import nfkd_ascii

from conftest import FIXTURE_CORPUS


def make_ad(bodies=(), titles=(), descriptions=(), captions=(), ad_id="A1"):
    from datetime import date

    return Ad(
        id=ad_id,
        page_id="P1",
        page_name="p",
        party="x",
        start_date=date(2021, 1, 1),
        end_date=None,
        currency="EUR",
        spend=RangeMetric(0, 99),
        impressions=RangeMetric(1000, 1999),
        audience=None,
        demographics=(),
        creative_bodies=tuple(bodies),
        link_titles=tuple(titles),
        link_descriptions=tuple(descriptions),
        link_captions=tuple(captions),
    )


class TestCombineVariants:
    def test_order_bodies_titles_descriptions(self):
        ad = make_ad(bodies=["A", "B"], titles=["T"])
        assert combine_variants(ad) == "A. B. T."

    def test_empty_ad_gives_empty_text(self):
        assert combine_variants(make_ad()) == ""

    def test_captions_excluded(self):
        ad = make_ad(bodies=["A"], captions=["example.com"])
        assert combine_variants(ad) == "A."

    def test_existing_punctuation_not_doubled(self):
        ad = make_ad(bodies=["Stem nu!"], titles=["Waarom?"])
        assert combine_variants(ad) == "Stem nu! Waarom?"

    def test_deterministic_for_equal_ads(self):
        a = make_ad(bodies=["A"], titles=["T"], descriptions=["D"], ad_id="A1")
        b = make_ad(bodies=["A"], titles=["T"], descriptions=["D"], ad_id="A2")
        assert combine_variants(a) == combine_variants(b)


class TestTransliterate:
    def test_diacritics_stripped(self):
        assert transliterate("café") == "cafe"

    def test_emoji_becomes_space(self):
        assert transliterate("Stem \U0001f5f3 nu") == "Stem   nu"
        # with an explicit variation selector both codepoints map to spaces
        assert transliterate("Stem \U0001f5f3️ nu") == "Stem    nu"

    def test_mathematical_bold(self):
        assert transliterate("𝗕𝗼𝗹𝗱") == "Bold"

    def test_matches_decomposition_oracle_on_fixture_corpus(self):
        # Derived check: the per-character decomposition oracle agrees on
        # every shipped ad text.
        lines = FIXTURE_CORPUS.read_text(encoding="utf-8").splitlines()
        for line in lines:
            assert transliterate(line) == nfkd_ascii(line)
            assert transliterate(line).isascii()

    def test_idempotent_output_is_ascii(self):
        samples = ["𝗕𝗼𝗹𝗱", "café", "ﬁets", "½ prijs", "naïef", "🗳️"]
        for text in samples:
            once = transliterate(text)
            assert once.isascii()
            assert transliterate(once) == once


@pytest.fixture()
def mini_lexicon():
    return LinguisticLexicon(
        {
            "cars": [("noun", "car")],
            "better": [("adj", "good")],
            "the": [("other", "the")],
            "and": [("other", "and")],
            "or": [("other", "or")],
            # ambiguous: noun analysis must win over adjective
            "arm": [("adj", "arm"), ("noun", "armnoun")],
            "loop": [("propn", "loopname"), ("noun", "loopnoun")],
        }
    )


class TestAnalyze:
    def test_lemmatizes_plural_noun(self, mini_lexicon):
        assert analyze("cars", mini_lexicon).lemmas == {"car"}

    def test_lemmatizes_comparative_adjective(self, mini_lexicon):
        assert analyze("better", mini_lexicon).lemmas == {"good"}

    def test_pos_filter_drops_function_words(self, mini_lexicon):
        assert analyze("the and or", mini_lexicon).lemmas == frozenset()

    def test_unknown_tokens_kept_self_lemmatized(self, mini_lexicon):
        assert analyze("stikstof", mini_lexicon).lemmas == {"stikstof"}

    def test_noun_priority_beats_adjective_and_propn(self, mini_lexicon):
        assert analyze("arm", mini_lexicon).lemmas == {"armnoun"}
        assert analyze("loop", mini_lexicon).lemmas == {"loopnoun"}

    def test_short_tokens_and_numbers_dropped(self, mini_lexicon):
        assert analyze("a 17 2021 ok", mini_lexicon).lemmas == {"ok"}

    def test_counts_are_per_occurrence(self, mini_lexicon):
        pt = analyze("cars cars better", mini_lexicon)
        assert pt.lemma_counts == {"car": 2, "good": 1}
        assert pt.lemmas == set(pt.lemma_counts)

    def test_tokenizes_on_non_alphanumeric_runs(self, mini_lexicon):
        pt = analyze("co2-uitstoot, snel/goedkoop", mini_lexicon)
        assert pt.lemmas == {"co2", "uitstoot", "snel", "goedkoop"}


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=80))
def test_analyze_idempotent_under_retransliteration(text):
    lexicon = LinguisticLexicon({"cars": [("noun", "car")]})
    once = transliterate(text)
    twice = transliterate(once)
    assert analyze(once, lexicon) == analyze(twice, lexicon)


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=80))
def test_output_alphabet(text):
    import re

    lexicon = LinguisticLexicon({})
    pt = analyze(transliterate(text), lexicon)
    for lemma in pt.lemmas:
        assert re.fullmatch(r"[a-z0-9]+", lemma)
        assert len(lemma) >= 2


class TestTextKey:
    def test_equal_elements_equal_key(self, mini_lexicon):
        a = process_ad(make_ad(bodies=["Hello World"], ad_id="A1"), mini_lexicon)
        b = process_ad(make_ad(bodies=["Hello World"], ad_id="A2"), mini_lexicon)
        assert a.text_key == b.text_key

    def test_key_is_sha256_of_normalized_text(self):
        text = "Vote  NOW"
        expected = hashlib.sha256(normalize_for_key(text).encode()).hexdigest()
        lexicon = LinguisticLexicon({})
        assert analyze(text, lexicon).text_key == expected


class TestDedup:
    def test_merges_shared_texts(self, mini_lexicon):
        ads = [
            make_ad(bodies=["Same text"], ad_id="A1"),
            make_ad(bodies=["Same text"], ad_id="A2"),
            make_ad(bodies=["Other"], ad_id="A3"),
        ]
        out = dedup(process_ad(ad, mini_lexicon) for ad in ads)
        assert len(out) == 2
        merged = next(pt for pt in out if len(pt.ad_ids) == 2)
        assert merged.ad_ids == ("A1", "A2")

    def test_identity_on_distinct_corpus(self, mini_lexicon):
        ads = [make_ad(bodies=[f"text {i} unik{i}"], ad_id=f"A{i}") for i in range(5)]
        out = dedup(process_ad(ad, mini_lexicon) for ad in ads)
        assert len(out) == 5

    def test_conserves_ad_count(self, mini_lexicon):
        rng = random.Random(7)
        bodies = [f"body {rng.randrange(4)}" for _ in range(30)]
        ads = [make_ad(bodies=[b], ad_id=f"A{i:02d}") for i, b in enumerate(bodies)]
        out = dedup(process_ad(ad, mini_lexicon) for ad in ads)
        assert sum(len(pt.ad_ids) for pt in out) == 30

    def test_fixture_corpus_has_41_unique_texts(self, fixture_corpus, ling, fixture_texts):
        # Independent hash-set count over the raw fixture texts.
        keys = set()
        for ad in fixture_corpus:
            keys.add(hashlib.sha256(normalize_for_key(combine_variants(ad)).encode()).hexdigest())
        assert len(keys) == 41
        assert len(fixture_texts) == 41
        assert sum(len(pt.ad_ids) for pt in fixture_texts) == len(fixture_corpus) == 50


class TestCacheRoundTrip:
    def test_save_load_identity(self, tmp_path, fixture_texts):
        path = tmp_path / "processed.ndjson"
        save_processed(fixture_texts, path)
        loaded = load_processed(path)
        assert loaded == sorted(fixture_texts, key=lambda t: t.text_key)


class TestLexiconFile:
    def test_shipped_examples(self, ling):
        assert analyze("cars", ling).lemmas == {"car"}
        assert analyze("better", ling).lemmas == {"good"}

    def test_bad_pos_rejected(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("token\tverb\ttoken\n")
        with pytest.raises(LexiconFormatError):
            LinguisticLexicon.from_file(path)

    def test_bad_column_count_rejected(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("token noun token\n")
        with pytest.raises(LexiconFormatError):
            LinguisticLexicon.from_file(path)


class TestLemmaOffsets:
    def test_offsets_point_at_surface_tokens(self, ling):
        text = "Nieuwe woningen en een woning voor starters."
        spans = lemma_offsets(text, ling, "woning")
        assert [text[a:b] for a, b in spans] == ["woningen", "woning"]
