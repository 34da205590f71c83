"""Normalization of ad text into bags of lemmas.

The processing chain is: combine an ad's text variants into one string,
transliterate it to ASCII, tokenize, filter by part of speech against a
lookup lexicon, lemmatize, and finally deduplicate identical texts across
the corpus. Every step is a pure function, so the whole chain is
deterministic and trivially parallelizable per ad.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Iterator, Mapping, Sequence

if TYPE_CHECKING:
    from .ingestion import Ad

logger = logging.getLogger(__name__)

TOKEN_RE = re.compile(r"[a-z0-9]+")
LEMMA_RE = re.compile(r"[a-z0-9]{2,}")

#: Parts of speech kept by the filter, in lemma-selection priority order.
KEPT_POS = ("noun", "propn", "adj")
VALID_POS = frozenset({"noun", "propn", "adj", "other"})

_TERMINAL_PUNCT = (".", "!", "?")


class LexiconFormatError(ValueError):
    """A linguistic-lexicon resource file is malformed."""


class LinguisticLexicon:
    """Case-folded surface token -> ordered (pos, lemma) analyses.

    Loaded from a plain-text resource, one entry per line:
    ``token<TAB>pos<TAB>lemma`` with ``#`` comments. A token may have
    several analyses (one line each); file order is preserved and breaks
    priority ties.
    """

    def __init__(self, entries: Mapping[str, Sequence[tuple[str, str]]] | None = None):
        self._entries: dict[str, tuple[tuple[str, str], ...]] = {
            token: tuple(analyses) for token, analyses in (entries or {}).items()
        }

    @classmethod
    def from_file(cls, path: str | Path) -> "LinguisticLexicon":
        entries: dict[str, list[tuple[str, str]]] = {}
        with open(path, encoding="utf-8") as handle:
            for lineno, raw in enumerate(handle, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise LexiconFormatError(
                        f"{path}:{lineno}: expected token<TAB>pos<TAB>lemma, got {line!r}"
                    )
                token, pos, lemma = (part.strip().casefold() for part in parts)
                if pos not in VALID_POS:
                    raise LexiconFormatError(
                        f"{path}:{lineno}: unknown pos {pos!r} (expected one of {sorted(VALID_POS)})"
                    )
                analyses = entries.setdefault(token, [])
                if (pos, lemma) not in analyses:
                    analyses.append((pos, lemma))
        return cls(entries)

    def analyses(self, token: str) -> tuple[tuple[str, str], ...]:
        return self._entries.get(token, ())

    def __contains__(self, token: str) -> bool:
        return token in self._entries

    def __len__(self) -> int:
        return len(self._entries)


@dataclass(frozen=True)
class ProcessedText:
    """Deduplicated bag of lemmas for one unique ad text.

    ``lemmas`` is the support of ``lemma_counts``; ``ad_ids`` lists every
    ad sharing this text (non-empty once attached to a corpus).
    """

    text_key: str
    lemmas: frozenset[str]
    lemma_counts: Mapping[str, int]
    ad_ids: tuple[str, ...] = ()


def combine_variants(ad: "Ad") -> str:
    """Concatenate an ad's text elements into one string.

    Order is all creative bodies, then all link titles, then all link
    descriptions; link captions (bare URLs) are excluded. Elements are
    separated as sentences so downstream tokenization never glues words
    across variants.
    """
    parts = []
    for element in (ad.creative_bodies, ad.link_titles, ad.link_descriptions):
        for text in element:
            text = text.strip()
            if not text:
                continue
            if not text.endswith(_TERMINAL_PUNCT):
                text += "."
            parts.append(text)
    return " ".join(parts)


def transliterate(text: str) -> str:
    """Replace every non-ASCII character by its nearest ASCII equivalent.

    Compatibility decomposition first, combining marks dropped, and any
    remaining unmapped character (emoji, dingbats) becomes a single space.
    Idempotent: the output is pure ASCII.
    """
    out = []
    for char in unicodedata.normalize("NFKD", text):
        if ord(char) < 128:
            out.append(char)
        elif unicodedata.combining(char):
            continue
        else:
            out.append(" ")
    return "".join(out)


def normalize_for_key(text: str) -> str:
    """Canonical form used for duplicate detection: ASCII, case-folded,
    whitespace collapsed."""
    return " ".join(transliterate(text).casefold().split())


def text_key(text: str) -> str:
    """Stable content hash of a text's canonical form."""
    return hashlib.sha256(normalize_for_key(text).encode("ascii")).hexdigest()


def _token_lemma(token: str, lexicon: LinguisticLexicon) -> str | None:
    """Map one token to its lemma, or None if the POS filter drops it.

    Tokens with no lexicon entry are kept and self-lemmatized (political
    ads are full of fresh coinages the lexicon misses). Known tokens are
    kept iff at least one analysis is a noun, proper noun or adjective;
    the emitted lemma comes from the highest-priority kept analysis.
    """
    if len(token) < 2 or token.isdigit():
        return None
    analyses = lexicon.analyses(token)
    if not analyses:
        return token
    best: str | None = None
    best_rank = len(KEPT_POS)
    for pos, lemma in analyses:
        if pos not in KEPT_POS:
            continue
        rank = KEPT_POS.index(pos)
        if rank < best_rank:
            best_rank = rank
            best = lemma
    if best is None:
        return None
    if not LEMMA_RE.fullmatch(best) or best.isdigit():
        return None
    return best


def analyze(text: str, lexicon: LinguisticLexicon) -> ProcessedText:
    """Tokenize, POS-filter and lemmatize an (already transliterated) text.

    Token boundaries are any non-alphanumeric run; tokens shorter than two
    characters and pure numbers are dropped.
    """
    counts: Counter[str] = Counter()
    for token in TOKEN_RE.findall(text.casefold()):
        lemma = _token_lemma(token, lexicon)
        if lemma is not None:
            counts[lemma] += 1
    ordered = dict(sorted(counts.items()))
    return ProcessedText(
        text_key=text_key(text),
        lemmas=frozenset(ordered),
        lemma_counts=ordered,
    )


def process_ad(ad: "Ad", lexicon: LinguisticLexicon) -> ProcessedText:
    """Full pipeline for one ad: combine, transliterate, analyze."""
    pt = analyze(transliterate(combine_variants(ad)), lexicon)
    return replace(pt, ad_ids=(ad.id,))


def lemma_offsets(text: str, lexicon: LinguisticLexicon, lemma: str) -> list[tuple[int, int]]:
    """Character spans in ``text`` whose tokens lemmatize to ``lemma``.

    Offsets are valid for the given (transliterated) text; ASCII
    case-folding preserves length, so spans computed on the folded text
    apply unchanged.
    """
    spans = []
    for match in TOKEN_RE.finditer(text.casefold()):
        if _token_lemma(match.group(), lexicon) == lemma:
            spans.append((match.start(), match.end()))
    return spans


def dedup(texts: Iterable[ProcessedText]) -> list[ProcessedText]:
    """Merge ProcessedTexts with equal text_key; parties reuse ad copy.

    Merged ad_ids are the union, sorted by ad id; the total ad count is
    conserved. Output order is deterministic (sorted by text_key).
    """
    merged: dict[str, ProcessedText] = {}
    for pt in texts:
        existing = merged.get(pt.text_key)
        if existing is None:
            merged[pt.text_key] = pt
        else:
            ids = tuple(sorted(set(existing.ad_ids) | set(pt.ad_ids)))
            merged[pt.text_key] = replace(existing, ad_ids=ids)
    return [merged[key] for key in sorted(merged)]


def save_processed(texts: Sequence[ProcessedText], path: str | Path) -> None:
    """Write the processed-corpus cache, one ProcessedText per NDJSON line."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for pt in sorted(texts, key=lambda t: t.text_key):
            record = {
                "text_key": pt.text_key,
                "lemmas": sorted(pt.lemmas),
                "lemma_counts": dict(sorted(pt.lemma_counts.items())),
                "ad_ids": list(pt.ad_ids),
            }
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_processed(path: str | Path) -> list[ProcessedText]:
    """Read a processed-corpus cache written by :func:`save_processed`."""
    texts = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            counts = {str(k): int(v) for k, v in record["lemma_counts"].items()}
            texts.append(
                ProcessedText(
                    text_key=record["text_key"],
                    lemmas=frozenset(record["lemmas"]),
                    lemma_counts=counts,
                    ad_ids=tuple(record["ad_ids"]),
                )
            )
    return texts


def iter_corpus_texts(ads: Iterable["Ad"], lexicon: LinguisticLexicon) -> Iterator[ProcessedText]:
    for ad in ads:
        yield process_ad(ad, lexicon)
