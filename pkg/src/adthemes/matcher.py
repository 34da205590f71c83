"""Theme matching by word-list intersection.

For each text, intersect its lemma set with every theme word list. If the
largest intersection has at most ``min_exclusive`` common words, nothing
matches (parties also advertise events and memberships). Otherwise every
theme achieving the maximum matches, and any theme whose intersection
exceeds ``multi_threshold`` matches as well, so long omnibus ads can carry
several themes.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .formatting import format_pct
from .ingestion import Corpus
from .lexicon import ThemeLexicon
from .textpipe import ProcessedText

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MatcherConfig:
    """The two fixed thresholds of the matching rule.

    Defaults are locked to the published values (1 and 5); overriding them
    is allowed for experiments and always echoed in reports.
    """

    min_exclusive: int = 1
    multi_threshold: int = 5

    def __post_init__(self):
        if not 0 <= self.min_exclusive < self.multi_threshold:
            raise ValueError(
                f"need 0 <= min_exclusive < multi_threshold, got "
                f"{self.min_exclusive} / {self.multi_threshold}"
            )


@dataclass(frozen=True)
class MatchResult:
    """Matched themes for one unique text, with all intersection sizes kept
    for auditability and the lexicon version they were computed against."""

    text_key: str
    ad_ids: tuple[str, ...]
    matched_themes: frozenset[str]
    intersection_sizes: Mapping[str, int]
    lexicon_version: int


@dataclass(frozen=True)
class PartySummary:
    party: str
    n_ads: int
    n_matched: int

    @property
    def pct_matched(self) -> float:
        return 100.0 * self.n_matched / self.n_ads if self.n_ads else 0.0


@dataclass(frozen=True)
class MatchSummary:
    config: MatcherConfig
    lexicon_version: int
    rows: tuple[PartySummary, ...]


def intersection_sizes(
    lemmas: frozenset[str] | set[str], lists: Mapping[str, Iterable[str]]
) -> dict[str, int]:
    """|text lemmas ∩ list(T)| per theme; set semantics, duplicates count once."""
    sizes = {}
    for theme_id, words in lists.items():
        words = words if isinstance(words, (set, frozenset)) else set(words)
        sizes[theme_id] = len(lemmas & words)
    return sizes


def decide_matches(sizes: Mapping[str, int], config: MatcherConfig) -> frozenset[str]:
    """Apply the threshold rule to a map of intersection sizes."""
    if not sizes:
        return frozenset()
    top = max(sizes.values())
    if top <= config.min_exclusive:
        return frozenset()
    return frozenset(
        theme_id
        for theme_id, size in sizes.items()
        if size == top or size > config.multi_threshold
    )


def match_text(
    text: ProcessedText,
    lexicon: ThemeLexicon,
    config: MatcherConfig = MatcherConfig(),
) -> MatchResult:
    """Match one processed text against a frozen lexicon version."""
    sizes = intersection_sizes(
        text.lemmas, {tid: set(entries) for tid, entries in lexicon.lists.items()}
    )
    return MatchResult(
        text_key=text.text_key,
        ad_ids=text.ad_ids,
        matched_themes=decide_matches(sizes, config),
        intersection_sizes=sizes,
        lexicon_version=lexicon.version,
    )


def match_corpus(
    texts: Sequence[ProcessedText],
    lexicon: ThemeLexicon,
    config: MatcherConfig = MatcherConfig(),
    corpus: Corpus | None = None,
) -> tuple[list[MatchResult], MatchSummary]:
    """Match every unique text; summarize matched percentage per party.

    Results are merged in text_key order so repeated runs over the same
    inputs are bit-identical. The summary expands texts through their
    ad_ids; an ad matched to several themes still counts once.
    """
    word_sets = {tid: set(entries) for tid, entries in lexicon.lists.items()}
    results = []
    for text in sorted(texts, key=lambda t: t.text_key):
        sizes = intersection_sizes(text.lemmas, word_sets)
        results.append(
            MatchResult(
                text_key=text.text_key,
                ad_ids=text.ad_ids,
                matched_themes=decide_matches(sizes, config),
                intersection_sizes=sizes,
                lexicon_version=lexicon.version,
            )
        )

    rows: tuple[PartySummary, ...] = ()
    if corpus is not None:
        matched_ids: set[str] = set()
        for result in results:
            if result.matched_themes:
                matched_ids.update(result.ad_ids)
        per_party: dict[str, list[int]] = {}
        for ad in corpus:
            counts = per_party.setdefault(ad.party, [0, 0])
            counts[0] += 1
            if ad.id in matched_ids:
                counts[1] += 1
        rows = tuple(
            PartySummary(party, n_ads, n_matched)
            for party, (n_ads, n_matched) in sorted(per_party.items())
        )
    return results, MatchSummary(config=config, lexicon_version=lexicon.version, rows=rows)


# ---------------------------------------------------------------------------
# Results persistence


def save_results(results: Sequence[MatchResult], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for result in results:
            record = {
                "text_key": result.text_key,
                "ad_ids": list(result.ad_ids),
                "matched_themes": sorted(result.matched_themes),
                "intersection_sizes": dict(sorted(result.intersection_sizes.items())),
                "lexicon_version": result.lexicon_version,
            }
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_results(path: str | Path) -> list[MatchResult]:
    results = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            results.append(
                MatchResult(
                    text_key=record["text_key"],
                    ad_ids=tuple(record["ad_ids"]),
                    matched_themes=frozenset(record["matched_themes"]),
                    intersection_sizes={
                        str(k): int(v) for k, v in record["intersection_sizes"].items()
                    },
                    lexicon_version=int(record["lexicon_version"]),
                )
            )
    return results


def summary_csv(summary: MatchSummary) -> str:
    """Per-party matched percentages as CSV (party, n_ads, pct_matched)."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["party", "n_ads", "pct_matched"])
    for row in summary.rows:
        writer.writerow([row.party, row.n_ads, format_pct(row.pct_matched)])
    return buffer.getvalue()
