"""Iterative word-list refinement.

After a matching run, the words most frequent in a theme's matched ads are
candidate additions for that theme's list. Relevance is a human call: this
module computes frequencies, filters out campaign-generic and already
decided words, collects verdicts, rematches, and flags convergence (an
iteration that accepts nothing).
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .lexicon import (
    ThemeLexicon,
    VERDICT_ACCEPT,
    VERDICT_REJECT,
    apply_decision,
)
from .matcher import MatcherConfig, MatchResult, match_corpus
from .textpipe import ProcessedText

logger = logging.getLogger(__name__)

VERDICT_SKIP = "skip"
_VALID_VERDICTS = (VERDICT_ACCEPT, VERDICT_REJECT, VERDICT_SKIP)


class RefinementError(Exception):
    pass


class UnknownCandidateError(RefinementError):
    """A scripted verdict referenced a candidate that was never suggested."""


@dataclass(frozen=True)
class CandidateWord:
    """A word proposed for one theme, with enough context to judge it."""

    lemma: str
    theme_id: str
    match_count: int
    corpus_doc_frequency: float
    sample_text_keys: tuple[str, ...] = ()


@dataclass(frozen=True)
class IterationRecord:
    """Outcome of one refine-and-rematch round."""

    iteration: int
    lexicon_version_before: int
    lexicon_version_after: int
    suggested: int
    accepted: int
    rejected: int
    converged: Mapping[str, bool]

    def to_json(self) -> dict:
        return {
            "iteration": self.iteration,
            "lexicon_version_before": self.lexicon_version_before,
            "lexicon_version_after": self.lexicon_version_after,
            "suggested": self.suggested,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "converged": dict(self.converged),
        }

    @classmethod
    def from_json(cls, record: dict) -> "IterationRecord":
        return cls(
            iteration=int(record["iteration"]),
            lexicon_version_before=int(record["lexicon_version_before"]),
            lexicon_version_after=int(record["lexicon_version_after"]),
            suggested=int(record["suggested"]),
            accepted=int(record["accepted"]),
            rejected=int(record["rejected"]),
            converged={str(k): bool(v) for k, v in record["converged"].items()},
        )


def load_stopwords(path: str | Path) -> frozenset[str]:
    """One lemma per line, '#' comments."""
    words = set()
    with open(path, encoding="utf-8") as handle:
        for raw in handle:
            line = raw.split("#", 1)[0].strip().casefold()
            if line:
                words.add(line)
    return frozenset(words)


def suggest_candidates(
    theme_id: str,
    results: Sequence[MatchResult],
    texts: Sequence[ProcessedText],
    lexicon: ThemeLexicon,
    k: int = 30,
    df_ceiling: float = 0.05,
    stopwords: frozenset[str] = frozenset(),
) -> list[CandidateWord]:
    """Top-k new words among texts matched to a theme.

    Counts are per text (document frequency within matched texts), so one
    verbose ad cannot dominate. Excluded: words already on any list,
    ledger-rejected pairs, stopwords, and words whose share of ALL corpus
    texts exceeds ``df_ceiling`` (too generic to pin to one theme).
    """
    if theme_id not in lexicon.themes:
        raise RefinementError(f"unknown theme {theme_id!r}")
    by_key = {pt.text_key: pt for pt in texts}
    matched_texts = [
        by_key[result.text_key]
        for result in results
        if theme_id in result.matched_themes and result.text_key in by_key
    ]
    if not matched_texts:
        logger.warning("theme %s has no matched texts; nothing to suggest", theme_id)
        return []

    corpus_df: Counter[str] = Counter()
    for pt in texts:
        corpus_df.update(pt.lemmas)
    match_counts: Counter[str] = Counter()
    for pt in matched_texts:
        match_counts.update(pt.lemmas)

    listed = lexicon.all_listed_lemmas()
    n_texts = len(texts)
    candidates = []
    for lemma, count in match_counts.items():
        if lemma in listed or lemma in stopwords:
            continue
        if (lemma, theme_id) in lexicon.ledger:
            continue
        doc_frequency = corpus_df[lemma] / n_texts
        if doc_frequency > df_ceiling:
            continue
        samples = tuple(
            sorted(pt.text_key for pt in matched_texts if lemma in pt.lemmas)[:5]
        )
        candidates.append(
            CandidateWord(
                lemma=lemma,
                theme_id=theme_id,
                match_count=count,
                corpus_doc_frequency=doc_frequency,
                sample_text_keys=samples,
            )
        )
    candidates.sort(key=lambda c: (-c.match_count, c.lemma))
    return candidates[:k]


VerdictSource = Callable[[CandidateWord], str]


class ScriptedVerdicts:
    """Verdicts from a fixed (lemma, theme_id) -> verdict mapping.

    Makes the whole loop testable without a human; leftover entries that
    were never suggested are an error, surfaced by ``assert_exhausted``.
    """

    def __init__(self, verdicts: Mapping[tuple[str, str], str], default: str = VERDICT_SKIP):
        for verdict in verdicts.values():
            if verdict not in _VALID_VERDICTS:
                raise ValueError(f"invalid verdict {verdict!r}")
        self._verdicts = dict(verdicts)
        self._default = default
        self._unseen = set(self._verdicts)

    def __call__(self, candidate: CandidateWord) -> str:
        key = (candidate.lemma, candidate.theme_id)
        if key in self._verdicts:
            self._unseen.discard(key)
            return self._verdicts[key]
        return self._default

    def assert_exhausted(self) -> None:
        if self._unseen:
            listed = ", ".join(f"({l}, {t})" for l, t in sorted(self._unseen))
            raise UnknownCandidateError(f"verdicts for candidates never suggested: {listed}")


def reject_all(candidate: CandidateWord) -> str:
    return VERDICT_REJECT


def accept_all(candidate: CandidateWord) -> str:
    return VERDICT_ACCEPT


def run_iteration(
    texts: Sequence[ProcessedText],
    lexicon: ThemeLexicon,
    verdict_source: VerdictSource,
    *,
    iteration: int,
    config: MatcherConfig = MatcherConfig(),
    k: int = 30,
    df_ceiling: float = 0.05,
    stopwords: frozenset[str] = frozenset(),
) -> tuple[IterationRecord, list[MatchResult]]:
    """One full refinement round: match, suggest, decide, rematch.

    Suggestions for every theme are computed against the frozen
    pre-iteration lexicon; verdicts are then applied through the lexicon's
    single writer, and the rematch runs against the updated lists. A theme
    converged iff it accepted zero words this round.
    """
    version_before = lexicon.version
    results, _ = match_corpus(texts, lexicon, config)

    suggestions = {
        theme_id: suggest_candidates(
            theme_id, results, texts, lexicon, k=k, df_ceiling=df_ceiling, stopwords=stopwords
        )
        for theme_id in lexicon.themes
    }

    suggested = accepted = rejected = 0
    accepted_by_theme = {theme_id: 0 for theme_id in lexicon.themes}
    for theme_id, candidates in suggestions.items():
        suggested += len(candidates)
        for candidate in candidates:
            verdict = verdict_source(candidate)
            if verdict == VERDICT_SKIP:
                continue
            if verdict not in (VERDICT_ACCEPT, VERDICT_REJECT):
                raise RefinementError(
                    f"verdict source returned {verdict!r} for ({candidate.lemma}, {theme_id})"
                )
            apply_decision(lexicon, candidate.lemma, theme_id, verdict, iteration)
            if verdict == VERDICT_ACCEPT:
                accepted += 1
                accepted_by_theme[theme_id] += 1
            else:
                rejected += 1

    if isinstance(verdict_source, ScriptedVerdicts):
        verdict_source.assert_exhausted()

    results_after, _ = match_corpus(texts, lexicon, config)
    record = IterationRecord(
        iteration=iteration,
        lexicon_version_before=version_before,
        lexicon_version_after=lexicon.version,
        suggested=suggested,
        accepted=accepted,
        rejected=rejected,
        converged={theme_id: count == 0 for theme_id, count in accepted_by_theme.items()},
    )
    return record, results_after


def converged(history: Sequence[IterationRecord]) -> bool:
    """The loop is done when the latest iteration accepted nothing."""
    if not history:
        raise RefinementError("no iterations recorded yet")
    return history[-1].accepted == 0


def append_iteration(path: str | Path, record: IterationRecord) -> None:
    with open(path, "a", encoding="utf-8", newline="\n") as handle:
        handle.write(json.dumps(record.to_json(), ensure_ascii=False) + "\n")
        handle.flush()


def read_iterations(path: str | Path) -> list[IterationRecord]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                records.append(IterationRecord.from_json(json.loads(line)))
    return records
