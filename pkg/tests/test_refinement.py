import logging
import random
from collections import Counter

import pytest

from adthemes.lexicon import apply_decision
from adthemes.matcher import MatcherConfig, match_corpus
from adthemes.refinement import (
    IterationRecord,
    RefinementError,
    ScriptedVerdicts,
    UnknownCandidateError,
    accept_all,
    append_iteration,
    converged,
    read_iterations,
    reject_all,
    run_iteration,
    suggest_candidates,
)
from adthemes.textpipe import ProcessedText

from oracles import make_lexicon


def pt(lemmas, key, ad_ids=None):
    return ProcessedText(
        text_key=key,
        lemmas=frozenset(lemmas),
        lemma_counts={w: 1 for w in sorted(lemmas)},
        ad_ids=tuple(ad_ids or (f"ad-{key}",)),
    )


@pytest.fixture()
def housing_corpus():
    """Five housing-matched texts plus background texts; candidate words
    appear only inside the matched set, so accepts never move the match."""
    texts = [
        pt({"huis", "huur", "hypotheek", "makelaar"}, "t1"),
        pt({"huis", "huur", "hypotheek"}, "t2"),
        pt({"huis", "huur", "hypotheek", "tuin"}, "t3"),
        pt({"huis", "huur", "hypotheek", "makelaar"}, "t4"),
        pt({"huis", "huur", "tuin"}, "t5"),
        pt({"iets", "anders"}, "t6"),
        pt({"klimaat"}, "t7"),
    ]
    lexicon = make_lexicon({"housing": {"huis", "huur"}, "climate": {"klimaat", "energie"}})
    return texts, lexicon


def results_for(texts, lexicon, config=MatcherConfig()):
    return match_corpus(texts, lexicon, config)[0]


class TestSuggestCandidates:
    def test_top_candidate_counts_verified_independently(self, housing_corpus):
        texts, lexicon = housing_corpus
        results = results_for(texts, lexicon)
        candidates = suggest_candidates(
            "housing", results, texts, lexicon, k=30, df_ceiling=0.9
        )
        # independent frequency script over the constructed fixture
        matched_keys = {r.text_key for r in results if "housing" in r.matched_themes}
        counts = Counter()
        for text in texts:
            if text.text_key in matched_keys:
                counts.update(text.lemmas)
        assert matched_keys == {"t1", "t2", "t3", "t4", "t5"}
        assert counts["hypotheek"] == 4
        assert candidates[0].lemma == "hypotheek"
        assert candidates[0].match_count == 4
        assert [c.lemma for c in candidates] == ["hypotheek", "makelaar", "tuin"]

    def test_df_ceiling_filters_campaign_generic_words(self):
        # "stem" appears in 8 of 10 texts (df 0.8), well above the ceiling.
        texts = [pt({"huis", "huur", "stem"}, f"m{i}") for i in range(8)]
        texts += [pt({"anders"}, "x1"), pt({"nogiets"}, "x2")]
        lexicon = make_lexicon({"housing": {"huis", "huur"}})
        results = results_for(texts, lexicon)
        candidates = suggest_candidates(
            "housing", results, texts, lexicon, df_ceiling=0.5
        )
        assert all(c.lemma != "stem" for c in candidates)

    def test_rejected_pair_never_resuggested(self, housing_corpus):
        texts, lexicon = housing_corpus
        results = results_for(texts, lexicon)
        apply_decision(lexicon, "hypotheek", "housing", "reject", 1)
        candidates = suggest_candidates(
            "housing", results, texts, lexicon, df_ceiling=0.9
        )
        assert all(c.lemma != "hypotheek" for c in candidates)

    def test_listed_words_excluded_everywhere(self, housing_corpus):
        texts, lexicon = housing_corpus
        results = results_for(texts, lexicon)
        apply_decision(lexicon, "hypotheek", "climate", "accept", 1)  # other theme
        candidates = suggest_candidates(
            "housing", results, texts, lexicon, df_ceiling=0.9
        )
        assert all(c.lemma != "hypotheek" for c in candidates)

    def test_stopwords_excluded(self, housing_corpus):
        texts, lexicon = housing_corpus
        results = results_for(texts, lexicon)
        candidates = suggest_candidates(
            "housing", results, texts, lexicon, df_ceiling=0.9,
            stopwords=frozenset({"hypotheek"}),
        )
        assert all(c.lemma != "hypotheek" for c in candidates)

    def test_zero_matched_texts_empty_with_diagnostic(self, housing_corpus, caplog):
        texts, lexicon = housing_corpus
        results = results_for(texts, lexicon)
        with caplog.at_level(logging.WARNING):
            out = suggest_candidates("climate", results, texts, lexicon)
        assert out == []
        assert any("climate" in rec.message for rec in caplog.records)

    def test_ties_broken_lexicographically(self):
        texts = [
            pt({"huis", "huur", "bb", "aa"}, "t1"),
            pt({"huis", "huur", "aa", "bb"}, "t2"),
        ]
        lexicon = make_lexicon({"housing": {"huis", "huur"}})
        results = results_for(texts, lexicon)
        candidates = suggest_candidates("housing", results, texts, lexicon, df_ceiling=1.0)
        assert [c.lemma for c in candidates] == ["aa", "bb"]

    def test_sample_text_keys_capped_at_five(self):
        texts = [pt({"huis", "huur", "kandidaat"}, f"t{i}") for i in range(9)]
        lexicon = make_lexicon({"housing": {"huis", "huur"}})
        results = results_for(texts, lexicon)
        candidates = suggest_candidates("housing", results, texts, lexicon, df_ceiling=1.0)
        assert len(candidates[0].sample_text_keys) == 5

    def test_unknown_theme_raises(self, housing_corpus):
        texts, lexicon = housing_corpus
        with pytest.raises(RefinementError):
            suggest_candidates("sports", [], texts, lexicon)


class TestRunIteration:
    def test_reject_all_converges_in_one_iteration(self, housing_corpus):
        texts, lexicon = housing_corpus
        lists_before = {t: dict(e) for t, e in lexicon.lists.items()}
        record, _ = run_iteration(
            texts, lexicon, reject_all, iteration=1, df_ceiling=0.9
        )
        assert record.accepted == 0
        assert record.rejected == record.suggested > 0
        assert all(record.converged.values())
        assert lexicon.lists == lists_before
        assert len(lexicon.ledger) == record.rejected
        assert converged([record])

    def test_accepting_only_housing_keeps_other_lists_unchanged(self, housing_corpus):
        texts, lexicon = housing_corpus
        climate_before = dict(lexicon.lists["climate"])
        verdicts = ScriptedVerdicts({("hypotheek", "housing"): "accept"})
        record, _ = run_iteration(
            texts, lexicon, verdicts, iteration=1, df_ceiling=0.9
        )
        assert record.accepted == 1
        assert not record.converged["housing"]
        assert record.converged["climate"]
        assert lexicon.lists["climate"] == climate_before
        assert lexicon.lists["housing"]["hypotheek"] == "accepted@1"

    def test_three_iteration_session_suggestions_non_increasing(self, housing_corpus):
        texts, lexicon = housing_corpus
        sessions = [
            ScriptedVerdicts(
                {("hypotheek", "housing"): "accept", ("makelaar", "housing"): "reject"}
            ),
            ScriptedVerdicts({("tuin", "housing"): "reject"}),
            ScriptedVerdicts({}),
        ]
        counts = []
        for i, verdicts in enumerate(sessions, start=1):
            record, _ = run_iteration(
                texts, lexicon, verdicts, iteration=i, df_ceiling=0.9
            )
            counts.append(record.suggested)
        assert counts == sorted(counts, reverse=True)
        assert counts[-1] == 0
        assert converged(
            [IterationRecord(1, 0, 0, 0, 1, 0, {})],
        ) is False

    def test_per_theme_independence_with_disjoint_matched_sets(self):
        texts = [
            pt({"huis", "huur", "hypotheek"}, "h1"),
            pt({"huis", "huur", "makelaar"}, "h2"),
            pt({"klimaat", "energie", "zon"}, "c1"),
            pt({"klimaat", "energie", "wind"}, "c2"),
        ]
        lexicon = make_lexicon({"housing": {"huis", "huur"}, "climate": {"klimaat", "energie"}})
        results = results_for(texts, lexicon)
        climate_before = suggest_candidates("climate", results, texts, lexicon, df_ceiling=1.0)
        apply_decision(lexicon, "hypotheek", "housing", "accept", 1)
        results_after = results_for(texts, lexicon)
        climate_after = suggest_candidates("climate", results_after, texts, lexicon, df_ceiling=1.0)
        assert climate_after == climate_before

    def test_verdict_for_unknown_candidate_errors(self, housing_corpus):
        texts, lexicon = housing_corpus
        verdicts = ScriptedVerdicts({("bestaatniet", "housing"): "accept"})
        with pytest.raises(UnknownCandidateError, match="bestaatniet"):
            run_iteration(texts, lexicon, verdicts, iteration=1, df_ceiling=0.9)

    def test_accept_all_grows_lists_and_rematches(self, housing_corpus):
        texts, lexicon = housing_corpus
        record, results_after = run_iteration(
            texts, lexicon, accept_all, iteration=1, df_ceiling=0.9
        )
        assert record.accepted == record.suggested
        assert record.lexicon_version_after == record.accepted
        assert all(r.lexicon_version == lexicon.version for r in results_after)

    def test_suggestion_soundness(self):
        rng = random.Random(9)
        vocab = [f"w{i}" for i in range(60)]
        for _ in range(20):
            lists = {
                t: set(rng.sample(vocab, 4)) for t in ("ta", "tb", "tc")
            }
            lexicon = make_lexicon(lists)
            texts = [
                pt(set(rng.sample(vocab, rng.randrange(2, 14))), f"k{i}")
                for i in range(30)
            ]
            results = results_for(texts, lexicon)
            for theme in lists:
                matched = [
                    t for t in texts
                    if any(t.text_key == r.text_key and theme in r.matched_themes for r in results)
                ]
                for cand in suggest_candidates(theme, results, texts, lexicon, df_ceiling=1.0):
                    assert any(cand.lemma in t.lemmas for t in matched)


class TestConverged:
    def test_examples(self):
        done = IterationRecord(1, 0, 0, 5, 0, 5, {})
        active = IterationRecord(1, 0, 3, 5, 3, 2, {})
        assert converged([done]) is True
        assert converged([active]) is False
        with pytest.raises(RefinementError):
            converged([])


class TestIterationJournal:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "iterations.ndjson"
        records = [
            IterationRecord(1, 0, 4, 10, 3, 1, {"housing": False, "climate": True}),
            IterationRecord(2, 4, 4, 2, 0, 2, {"housing": True, "climate": True}),
        ]
        for record in records:
            append_iteration(path, record)
        assert read_iterations(path) == records
