"""Local HTTP service for the curation workbench.

Exposes the suggest/decide/iterate loop and the report tables to the
companion UI. Every mutation goes through the same journaled operations as
the CLI, appended to disk before the response is sent, so the journal is
the source of truth after a crash. Binds localhost by default: this is a
researcher's desk tool.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import analytics
from .ingestion import Corpus, PageRegistry, load_corpus
from .lexicon import (
    DECISIONS_FILENAME,
    DecisionConflict,
    LexiconError,
    ThemeLexicon,
    append_decision,
    apply_decision,
    load_lexicon_with_journal,
    normalize_word,
)
from .matcher import MatcherConfig, MatchResult, MatchSummary, match_corpus
from .refinement import (
    CandidateWord,
    IterationRecord,
    append_iteration,
    load_stopwords,
    read_iterations,
    suggest_candidates,
)
from .textpipe import (
    LinguisticLexicon,
    ProcessedText,
    combine_variants,
    dedup,
    lemma_offsets,
    process_ad,
    transliterate,
)

logger = logging.getLogger(__name__)

ITERATIONS_FILENAME = "iterations.ndjson"

REPORT_TABLES = (
    "matched_summary",
    "distribution_ads",
    "distribution_impressions",
    "ownership",
    "demographics_per_theme",
    "demographics_per_party",
)


@dataclass
class RunConfig:
    """Validated startup configuration for the service."""

    corpus_path: Path
    lexicon_dir: Path
    ling_lexicon_path: Path
    baseline_path: Path
    registry_path: Path | None = None
    stopwords_path: Path | None = None
    matcher: MatcherConfig = field(default_factory=MatcherConfig)
    suggestion_k: int = 30
    df_ceiling: float = 0.05
    frontend_dir: Path | None = None

    def validate(self) -> None:
        for label, path in (
            ("corpus", self.corpus_path),
            ("lexicon directory", self.lexicon_dir),
            ("linguistic lexicon", self.ling_lexicon_path),
            ("baseline", self.baseline_path),
        ):
            if not Path(path).exists():
                raise ValueError(f"{label} not found at {path}")
        for label, path in (
            ("registry", self.registry_path),
            ("stopwords", self.stopwords_path),
        ):
            if path is not None and not Path(path).exists():
                raise ValueError(f"{label} not found at {path}")


class DecisionBody(BaseModel):
    lemma: str
    theme_id: str
    verdict: Literal["accept", "reject"]
    reason: str = ""


class Workbench:
    """Single-writer state shared by all requests.

    Reads are served against the current lexicon version; mutations are
    serialized through one lock and journaled before acknowledgment.
    Results and reports are recomputed whenever the lexicon version moved,
    never cached across versions.
    """

    def __init__(self, config: RunConfig):
        config.validate()
        self.config = config
        self._lock = threading.RLock()

        self.ling = LinguisticLexicon.from_file(config.ling_lexicon_path)
        registry = (
            PageRegistry.from_file(config.registry_path) if config.registry_path else None
        )
        self.corpus, self.load_report = load_corpus(config.corpus_path, registry)
        self.lexicon: ThemeLexicon = load_lexicon_with_journal(config.lexicon_dir, self.ling)
        self.stopwords = (
            load_stopwords(config.stopwords_path) if config.stopwords_path else frozenset()
        )
        self.baseline = analytics.load_baseline(config.baseline_path)

        # The service needs raw texts for display, so it processes the
        # corpus itself rather than relying on the CLI's cache file.
        per_ad = [process_ad(ad, self.ling) for ad in self.corpus]
        self.texts: list[ProcessedText] = dedup(per_ad)
        self._display: dict[str, str] = {}
        self._raw: dict[str, str] = {}
        for ad, pt in zip(self.corpus, per_ad):
            combined = combine_variants(ad)
            self._raw.setdefault(pt.text_key, combined)
            self._display.setdefault(pt.text_key, transliterate(combined))

        self.iterations_path = Path(config.lexicon_dir) / ITERATIONS_FILENAME
        self.history: list[IterationRecord] = (
            read_iterations(self.iterations_path) if self.iterations_path.exists() else []
        )
        self.decisions_path = Path(config.lexicon_dir) / DECISIONS_FILENAME
        self._served_pairs: set[tuple[str, str]] = set()
        self._results_cache: tuple[int, list[MatchResult], MatchSummary] | None = None

    # -- matching -----------------------------------------------------

    def current_results(self) -> tuple[list[MatchResult], MatchSummary]:
        with self._lock:
            version = self.lexicon.version
            if self._results_cache is not None and self._results_cache[0] == version:
                return self._results_cache[1], self._results_cache[2]
            results, summary = match_corpus(
                self.texts, self.lexicon, self.config.matcher, self.corpus
            )
            self._results_cache = (version, results, summary)
            return results, summary

    # -- curation -----------------------------------------------------

    def open_iteration(self) -> int:
        return len(self.history) + 1

    def decisions_in_open_iteration(self) -> list:
        iteration = self.open_iteration()
        return [d for d in self.lexicon.journal if d.iteration == iteration]

    def candidates(self, theme_id: str) -> list[CandidateWord]:
        with self._lock:
            if theme_id not in self.lexicon.themes:
                raise KeyError(theme_id)
            results, _ = self.current_results()
            candidates = suggest_candidates(
                theme_id,
                results,
                self.texts,
                self.lexicon,
                k=self.config.suggestion_k,
                df_ceiling=self.config.df_ceiling,
                stopwords=self.stopwords,
            )
            self._served_pairs.update((c.lemma, c.theme_id) for c in candidates)
            return candidates

    def decide(self, body: DecisionBody) -> dict:
        with self._lock:
            if body.theme_id not in self.lexicon.themes:
                raise KeyError(body.theme_id)
            lemmas = normalize_word(body.lemma, self.ling)
            if len(lemmas) != 1:
                raise ValueError(f"{body.lemma!r} normalizes to {lemmas!r}; pass one word")
            iteration = self.open_iteration()
            apply_decision(
                self.lexicon, lemmas[0], body.theme_id, body.verdict, iteration,
                reason=body.reason,
            )
            append_decision(self.decisions_path, self.lexicon.journal[-1])
            return {
                "lemma": lemmas[0],
                "theme_id": body.theme_id,
                "verdict": body.verdict,
                "iteration": iteration,
                "lexicon_version": self.lexicon.version,
            }

    def iterate(self) -> IterationRecord:
        """Close the open iteration: count its verdicts, rematch, journal."""
        with self._lock:
            iteration = self.open_iteration()
            version_before = (
                self.history[-1].lexicon_version_after if self.history else 0
            )
            decisions = self.decisions_in_open_iteration()
            accepted_by_theme = {theme_id: 0 for theme_id in self.lexicon.themes}
            accepted = rejected = 0
            for decision in decisions:
                if decision.verdict == "accept":
                    accepted += 1
                    accepted_by_theme[decision.theme_id] += 1
                else:
                    rejected += 1
            suggested = max(len(self._served_pairs), accepted + rejected)
            record = IterationRecord(
                iteration=iteration,
                lexicon_version_before=version_before,
                lexicon_version_after=self.lexicon.version,
                suggested=suggested,
                accepted=accepted,
                rejected=rejected,
                converged={
                    theme_id: count == 0 for theme_id, count in accepted_by_theme.items()
                },
            )
            append_iteration(self.iterations_path, record)
            self.history.append(record)
            self._served_pairs.clear()
            self.current_results()  # rematch eagerly at the new version
            return record

    # -- presentation helpers ------------------------------------------

    def theme_payload(self, theme_id: str) -> dict:
        theme = self.lexicon.themes[theme_id]
        entries = self.lexicon.lists[theme_id]
        return {
            "id": theme.id,
            "display_name": theme.display_name,
            "cap_categories": list(theme.cap_categories),
            "description": theme.description,
            "words": [
                {"lemma": lemma, "provenance": provenance}
                for lemma, provenance in sorted(entries.items())
            ],
        }

    def candidate_payload(self, candidate: CandidateWord) -> dict:
        samples = []
        for key in candidate.sample_text_keys:
            display = self._display.get(key, "")
            samples.append(
                {
                    "text_key": key,
                    "text": display,
                    "offsets": lemma_offsets(display, self.ling, candidate.lemma),
                }
            )
        return {
            "lemma": candidate.lemma,
            "theme_id": candidate.theme_id,
            "match_count": candidate.match_count,
            "corpus_doc_frequency": candidate.corpus_doc_frequency,
            "samples": samples,
        }

    def text_payload(self, text_key: str) -> dict:
        pt = next((t for t in self.texts if t.text_key == text_key), None)
        if pt is None:
            raise KeyError(text_key)
        ads = [self.corpus.by_id[ad_id] for ad_id in pt.ad_ids]
        return {
            "text_key": text_key,
            "raw": self._raw.get(text_key, ""),
            "text": self._display.get(text_key, ""),
            "lemmas": sorted(pt.lemmas),
            "lemma_counts": dict(sorted(pt.lemma_counts.items())),
            "ads": [
                {
                    "id": ad.id,
                    "page_name": ad.page_name,
                    "party": ad.party,
                    "start_date": ad.start_date.isoformat(),
                    "end_date": ad.end_date.isoformat() if ad.end_date else None,
                    "impressions": {
                        "lower": ad.impressions.lower,
                        "upper": ad.impressions.upper,
                    },
                }
                for ad in ads
            ],
        }

    def report_payload(self, table: str) -> dict:
        results, summary = self.current_results()
        theme_ids = list(self.lexicon.themes)
        payload: dict = {
            "table": table,
            "lexicon_version": self.lexicon.version,
            "config": {
                "min_exclusive": self.config.matcher.min_exclusive,
                "multi_threshold": self.config.matcher.multi_threshold,
            },
        }
        if table == "matched_summary":
            payload["data"] = [
                {
                    "party": row.party,
                    "n_ads": row.n_ads,
                    "n_matched": row.n_matched,
                    "pct_matched": row.pct_matched,
                }
                for row in summary.rows
            ]
        elif table in ("distribution_ads", "distribution_impressions"):
            basis = "ad_count" if table == "distribution_ads" else "impressions"
            data = {}
            for party in self.corpus.parties():
                try:
                    dist = analytics.theme_distribution(
                        results, self.corpus, party, basis, theme_ids
                    )
                    data[party] = dist.rows
                except analytics.AnalyticsError:
                    continue
            payload["basis"] = basis
            payload["data"] = data
        elif table == "ownership":
            rows = analytics.top_parties_per_theme(results, self.corpus, theme_ids)
            payload["data"] = [
                {
                    "theme_id": row.theme_id,
                    "ranked": [
                        {"party": party, "share": share} for party, share in row.ranked
                    ],
                }
                for row in rows
            ]
        elif table in ("demographics_per_theme", "demographics_per_party"):
            grouping = (
                analytics.GROUPING_PER_THEME
                if table == "demographics_per_theme"
                else analytics.GROUPING_PER_PARTY
            )
            dt = analytics.demographic_table(
                results, self.corpus, grouping, self.baseline, theme_ids
            )
            payload["data"] = {
                "grouping": dt.grouping,
                "groups": list(dt.groups),
                "rows": [
                    {
                        "axis": axis,
                        "key": key,
                        "population": dt.baseline.get((axis, key)),
                        "values": dt.rows.get((axis, key), {}),
                    }
                    for axis, key in dt.row_order
                ],
                "coverage": [
                    {"group": group, "axis": axis, "excluded_ads": count}
                    for (group, axis), count in sorted(dt.coverage.items())
                ],
            }
        else:
            raise KeyError(table)
        return payload

    def status_payload(self) -> dict:
        _, summary = self.current_results()
        matched_version = self._results_cache[0] if self._results_cache else None
        return {
            "corpus": {"ads": len(self.corpus), "texts": len(self.texts)},
            "lexicon_version": self.lexicon.version,
            "matched_lexicon_version": matched_version,
            "open_iteration": self.open_iteration(),
            "decisions_in_open_iteration": len(self.decisions_in_open_iteration()),
            "iterations": [record.to_json() for record in self.history],
            "converged": self.history[-1].accepted == 0 if self.history else None,
            "config": {
                "min_exclusive": self.config.matcher.min_exclusive,
                "multi_threshold": self.config.matcher.multi_threshold,
                "suggestion_k": self.config.suggestion_k,
                "df_ceiling": self.config.df_ceiling,
            },
        }


def create_app(config: RunConfig) -> FastAPI:
    """Build the FastAPI app around one Workbench."""
    workbench = Workbench(config)
    app = FastAPI(title="adthemes curation service")
    app.state.workbench = workbench

    @app.get("/themes")
    def get_themes():
        return [workbench.theme_payload(theme_id) for theme_id in workbench.lexicon.themes]

    @app.get("/themes/{theme_id}/candidates")
    def get_candidates(theme_id: str):
        try:
            candidates = workbench.candidates(theme_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown theme {theme_id!r}")
        return [workbench.candidate_payload(c) for c in candidates]

    @app.get("/texts/{text_key}")
    def get_text(text_key: str):
        try:
            return workbench.text_payload(text_key)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown text {text_key!r}")

    @app.post("/decisions")
    def post_decision(body: DecisionBody):
        try:
            return workbench.decide(body)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown theme {body.theme_id!r}")
        except DecisionConflict as exc:
            raise HTTPException(
                status_code=409,
                detail={
                    "message": str(exc),
                    "prior_verdict": exc.prior_verdict,
                    "iteration": exc.iteration,
                },
            )
        except (LexiconError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.post("/iterate")
    def post_iterate():
        return workbench.iterate().to_json()

    @app.get("/reports/{table}")
    def get_report(table: str):
        try:
            return workbench.report_payload(table)
        except KeyError:
            raise HTTPException(
                status_code=404,
                detail=f"unknown table {table!r}; one of {', '.join(REPORT_TABLES)}",
            )

    @app.get("/status")
    def get_status():
        return workbench.status_payload()

    frontend = config.frontend_dir
    if frontend is not None and Path(frontend).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend), html=True), name="ui")

    return app
