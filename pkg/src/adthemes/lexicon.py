"""Theme definitions and curated per-theme word lists.

Lists carry per-word provenance (seed vs accepted at iteration N) and a
rejection ledger so a word turned down once is never suggested again.
Every mutation is journaled; replaying the journal over the seed lists
reproduces the current state exactly.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .textpipe import LEMMA_RE, LinguisticLexicon, analyze, transliterate

logger = logging.getLogger(__name__)

SEED_PROVENANCE = "seed"
THEMES_FILENAME = "themes.csv"
DECISIONS_FILENAME = "decisions.ndjson"

VERDICT_ACCEPT = "accept"
VERDICT_REJECT = "reject"


class LexiconError(Exception):
    """Theme-lexicon structural problem (unknown theme, bad layout)."""


class DecisionConflict(LexiconError):
    """A (lemma, theme) pair was already decided.

    Carries the prior verdict ("seed", "accept" or "reject") and, where
    applicable, the iteration it was decided in.
    """

    def __init__(self, lemma: str, theme_id: str, prior_verdict: str, iteration: int | None):
        self.lemma = lemma
        self.theme_id = theme_id
        self.prior_verdict = prior_verdict
        self.iteration = iteration
        where = f" at iteration {iteration}" if iteration is not None else ""
        super().__init__(
            f"({lemma}, {theme_id}) already decided: {prior_verdict}{where}"
        )


@dataclass(frozen=True)
class Theme:
    """A policy-debate category, possibly merging several codebook codes."""

    id: str
    display_name: str
    cap_categories: tuple[int, ...]
    description: str = ""


@dataclass(frozen=True)
class LedgerEntry:
    lemma: str
    theme_id: str
    iteration: int
    reason: str = ""


@dataclass(frozen=True)
class Decision:
    """One journaled curation decision."""

    lemma: str
    theme_id: str
    verdict: str
    iteration: int
    timestamp: float
    reason: str = ""

    def to_json(self) -> dict:
        return {
            "lemma": self.lemma,
            "theme_id": self.theme_id,
            "verdict": self.verdict,
            "iteration": self.iteration,
            "timestamp": self.timestamp,
            "reason": self.reason,
        }

    @classmethod
    def from_json(cls, record: dict) -> "Decision":
        return cls(
            lemma=record["lemma"],
            theme_id=record["theme_id"],
            verdict=record["verdict"],
            iteration=int(record["iteration"]),
            timestamp=float(record["timestamp"]),
            reason=record.get("reason") or "",
        )


@dataclass
class ThemeLexicon:
    """Themes, word lists with provenance, rejection ledger, version counter.

    Single-writer: all mutations go through :func:`apply_decision`, which
    bumps ``version`` by exactly one and appends to the in-memory journal.
    """

    themes: dict[str, Theme]
    lists: dict[str, dict[str, str]]  # theme_id -> lemma -> provenance
    ledger: dict[tuple[str, str], LedgerEntry] = field(default_factory=dict)
    version: int = 0
    journal: list[Decision] = field(default_factory=list)

    def theme_ids(self) -> list[str]:
        return list(self.themes)

    def words(self, theme_id: str) -> set[str]:
        return set(self.lists[theme_id])

    def all_listed_lemmas(self) -> set[str]:
        out: set[str] = set()
        for entries in self.lists.values():
            out.update(entries)
        return out


def accepted_provenance(iteration: int) -> str:
    return f"accepted@{iteration}"


def normalize_word(word: str, ling: LinguisticLexicon) -> list[str]:
    """Run one raw word through the same normalization as ad texts.

    May yield zero lemmas (dropped by the POS filter) or several (the line
    contained separators); callers decide how to handle those.
    """
    pt = analyze(transliterate(word), ling)
    # analyze() returns a set; recover token order for multi-token lines.
    ordered: list[str] = []
    for lemma in sorted(pt.lemma_counts):
        if lemma not in ordered:
            ordered.append(lemma)
    return ordered


def load_themes(path: str | Path) -> dict[str, Theme]:
    """Read themes.csv (theme_id,display_name,cap_categories)."""
    themes: dict[str, Theme] = {}
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        required = {"theme_id", "display_name", "cap_categories"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise LexiconError(f"{path}: expected CSV header theme_id,display_name,cap_categories")
        for row in reader:
            theme_id = row["theme_id"].strip()
            if theme_id in themes:
                raise LexiconError(f"{path}: duplicate theme id {theme_id}")
            codes = tuple(
                int(code) for code in row["cap_categories"].split(";") if code.strip()
            )
            if not codes:
                raise LexiconError(f"{path}: theme {theme_id} has no codebook categories")
            themes[theme_id] = Theme(
                id=theme_id,
                display_name=row["display_name"].strip(),
                cap_categories=codes,
                description=(row.get("description") or "").strip(),
            )
    if not themes:
        raise LexiconError(f"{path}: no themes defined")
    return themes


def load_lexicon(directory: str | Path, ling: LinguisticLexicon) -> ThemeLexicon:
    """Load the seed lexicon from a directory of themes.csv + <theme_id>.txt.

    Seed words are normalized through the text pipeline on load, so lists
    and ad texts always meet in the same lemma space. A word-list file for
    an unknown theme is terminal; an empty list only warns.
    """
    directory = Path(directory)
    themes = load_themes(directory / THEMES_FILENAME)

    known_files = {f"{theme_id}.txt" for theme_id in themes}
    for txt in sorted(directory.glob("*.txt")):
        if txt.name not in known_files and txt.name != "README.txt":
            raise LexiconError(f"word list {txt.name} does not match any theme in themes.csv")

    lists: dict[str, dict[str, str]] = {}
    for theme_id in themes:
        path = directory / f"{theme_id}.txt"
        entries: dict[str, str] = {}
        if not path.exists():
            logger.warning("theme %s has no word-list file (%s)", theme_id, path)
            lists[theme_id] = entries
            continue
        with open(path, encoding="utf-8") as handle:
            for lineno, raw in enumerate(handle, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                lemmas = normalize_word(line, ling)
                if not lemmas:
                    logger.warning(
                        "%s:%d: %r normalizes to nothing and was skipped", path, lineno, line
                    )
                for lemma in lemmas:
                    if lemma in entries:
                        logger.warning(
                            "%s:%d: duplicate word %r kept once", path, lineno, lemma
                        )
                        continue
                    entries[lemma] = SEED_PROVENANCE
        if not entries:
            logger.warning("theme %s has an empty word list", theme_id)
        lists[theme_id] = entries

    return ThemeLexicon(themes=themes, lists=lists)


def cross_list_report(lexicon: ThemeLexicon) -> list[tuple[str, tuple[str, ...]]]:
    """Lemmas present in two or more theme lists, with their themes.

    A word relevant to several themes is probably too broad; this is a
    guideline, so duplicates are reported rather than forbidden.
    """
    containing: dict[str, list[str]] = {}
    for theme_id, entries in lexicon.lists.items():
        for lemma in entries:
            containing.setdefault(lemma, []).append(theme_id)
    return [
        (lemma, tuple(sorted(themes)))
        for lemma, themes in sorted(containing.items())
        if len(themes) > 1
    ]


def apply_decision(
    lexicon: ThemeLexicon,
    lemma: str,
    theme_id: str,
    verdict: str,
    iteration: int,
    *,
    reason: str = "",
    timestamp: float | None = None,
) -> int:
    """Record an accept/reject verdict for (lemma, theme); returns the new version.

    Decisions are append-only: re-deciding a pair raises DecisionConflict
    naming the prior verdict. Seed entries are immutable (there is no
    removal operation at all).
    """
    if theme_id not in lexicon.themes:
        raise LexiconError(f"unknown theme {theme_id!r}")
    if verdict not in (VERDICT_ACCEPT, VERDICT_REJECT):
        raise ValueError(f"verdict must be accept or reject, got {verdict!r}")
    if not LEMMA_RE.fullmatch(lemma):
        raise ValueError(f"lemma {lemma!r} is not normalized (expected [a-z0-9]{{2,}})")

    prior = lexicon.lists[theme_id].get(lemma)
    if prior is not None:
        if prior == SEED_PROVENANCE:
            raise DecisionConflict(lemma, theme_id, SEED_PROVENANCE, None)
        raise DecisionConflict(
            lemma, theme_id, VERDICT_ACCEPT, int(prior.split("@", 1)[1])
        )
    if (lemma, theme_id) in lexicon.ledger:
        entry = lexicon.ledger[(lemma, theme_id)]
        raise DecisionConflict(lemma, theme_id, VERDICT_REJECT, entry.iteration)

    if timestamp is None:
        timestamp = time.time()
    if verdict == VERDICT_ACCEPT:
        lexicon.lists[theme_id][lemma] = accepted_provenance(iteration)
    else:
        lexicon.ledger[(lemma, theme_id)] = LedgerEntry(lemma, theme_id, iteration, reason)
    lexicon.version += 1
    lexicon.journal.append(Decision(lemma, theme_id, verdict, iteration, timestamp, reason))
    return lexicon.version


# ---------------------------------------------------------------------------
# Journal persistence


def append_decision(path: str | Path, decision: Decision) -> None:
    """Append one decision to the NDJSON journal and flush it to disk
    before the caller acknowledges anything (the journal is the source of
    truth after a crash)."""
    with open(path, "a", encoding="utf-8", newline="\n") as handle:
        handle.write(json.dumps(decision.to_json(), ensure_ascii=False) + "\n")
        handle.flush()


def read_journal(path: str | Path) -> list[Decision]:
    decisions = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                decisions.append(Decision.from_json(json.loads(line)))
    return decisions


def replay_journal(lexicon: ThemeLexicon, decisions: Iterable[Decision]) -> None:
    """Apply journaled decisions, in order, onto a freshly loaded seed lexicon."""
    for decision in decisions:
        apply_decision(
            lexicon,
            decision.lemma,
            decision.theme_id,
            decision.verdict,
            decision.iteration,
            reason=decision.reason,
            timestamp=decision.timestamp,
        )


def load_lexicon_with_journal(
    directory: str | Path, ling: LinguisticLexicon
) -> ThemeLexicon:
    """Seed lists plus any decisions journaled alongside them."""
    directory = Path(directory)
    lexicon = load_lexicon(directory, ling)
    journal_path = directory / DECISIONS_FILENAME
    if journal_path.exists():
        replay_journal(lexicon, read_journal(journal_path))
    return lexicon


def list_snapshot(lexicon: ThemeLexicon) -> dict[str, dict[str, str]]:
    """Deep copy of the lists, for before/after comparisons in callers."""
    return {theme_id: dict(entries) for theme_id, entries in lexicon.lists.items()}
