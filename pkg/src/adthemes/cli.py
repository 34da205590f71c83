"""Command-line pipeline: fetch, preprocess, match, suggest, decide, iterate, report, serve.

Each command reads and writes only its declared files and exits 0 on
success; failures print one machine-parsable ``error: ...`` line on stderr
and exit nonzero (2 for missing/invalid inputs).
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path
from typing import NoReturn

import click

from . import analytics, ingestion, lexicon as lexmod, matcher as matchmod, refinement
from .textpipe import LinguisticLexicon, dedup, process_ad, load_processed, save_processed

logger = logging.getLogger(__name__)

PROCESSED_FILENAME = "processed.ndjson"
RESULTS_FILENAME = "results.ndjson"
SUMMARY_FILENAME = "matched_summary.csv"
ITERATIONS_FILENAME = "iterations.ndjson"


def fail(message: str, code: int = 2) -> NoReturn:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _require_file(path: Path, what: str, produced_by: str) -> Path:
    if not path.exists():
        fail(f"{what} not found at {path} (run '{produced_by}' first)")
    return path


def _load_ling(path: str) -> LinguisticLexicon:
    try:
        return LinguisticLexicon.from_file(path)
    except (OSError, ValueError) as exc:
        fail(f"cannot load linguistic lexicon: {exc}")


def _load_theme_lexicon(directory: str, ling: LinguisticLexicon) -> lexmod.ThemeLexicon:
    try:
        return lexmod.load_lexicon_with_journal(directory, ling)
    except (OSError, lexmod.LexiconError) as exc:
        fail(f"cannot load theme lexicon: {exc}")


def _load_corpus(path: str, registry_path: str | None):
    registry = None
    if registry_path:
        try:
            registry = ingestion.PageRegistry.from_file(registry_path)
        except (OSError, ingestion.IngestionError) as exc:
            fail(f"cannot load page registry: {exc}")
    corpus_path = Path(path)
    _require_file(corpus_path, "corpus", "adthemes fetch")
    corpus, report = ingestion.load_corpus(
        corpus_path, registry, quarantine_path=str(corpus_path) + ".rejected"
    )
    click.echo(
        f"corpus: {report.accepted} accepted, {report.rejected} rejected"
        + (f" (quarantined to {corpus_path}.rejected)" if report.rejected else "")
    )
    for rejection in report.rejections[:10]:
        click.echo(f"  line {rejection.line}: {rejection.message}", err=True)
    if report.unresolved_pages:
        click.echo(
            "warning: unresolved page_ids (party set to 'unknown'): "
            + ", ".join(report.unresolved_pages),
            err=True,
        )
    return corpus


def _echo_config(config: matchmod.MatcherConfig) -> None:
    click.echo(
        f"matcher config: min_exclusive={config.min_exclusive} "
        f"multi_threshold={config.multi_threshold}"
    )


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Enable debug logging.")
def main(verbose: bool) -> None:
    """Match policy themes to political ads and curate the word lists."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )


@main.command("fetch")
@click.option("--base-url", required=True, help="ads_archive-style endpoint URL.")
@click.option("--access-token", envvar="ADTHEMES_ACCESS_TOKEN", required=True)
@click.option("--page-ids", required=True, help="Comma-separated page ids.")
@click.option("--date-min", type=click.DateTime(["%Y-%m-%d"]), required=True)
@click.option("--date-max", type=click.DateTime(["%Y-%m-%d"]), required=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def cmd_fetch(base_url, access_token, page_ids, date_min, date_max, out_path) -> None:
    """Fetch raw ad records into an NDJSON corpus file."""
    config = ingestion.ApiConfig(base_url=base_url, access_token=access_token)
    ids = [p.strip() for p in page_ids.split(",") if p.strip()]
    errors: list[str] = []
    try:
        stream = ingestion.fetch_ads(
            ids, (date_min.date(), date_max.date()), config, errors=errors
        )
        count = ingestion.save_raw_records(stream, out_path)
    except ingestion.AuthError as exc:
        fail(str(exc))
    except (ingestion.IngestionError, ValueError) as exc:
        fail(str(exc))
    click.echo(f"fetched {count} records to {out_path}")
    for message in errors:
        click.echo(f"warning: {message}", err=True)


@main.command("preprocess")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(dir_okay=False))
@click.option("--ling-lexicon", "ling_path", required=True, type=click.Path(dir_okay=False))
@click.option("--registry", "registry_path", type=click.Path(dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def cmd_preprocess(corpus_path, ling_path, registry_path, out_path) -> None:
    """Normalize ad texts to bags of lemmas and deduplicate them."""
    _require_file(Path(ling_path), "linguistic lexicon", "ship one under data/")
    ling = _load_ling(ling_path)
    corpus = _load_corpus(corpus_path, registry_path)
    texts = dedup(process_ad(ad, ling) for ad in corpus)
    save_processed(texts, out_path)
    click.echo(f"preprocessed {len(corpus)} ads into {len(texts)} unique texts at {out_path}")


def _matcher_options(func):
    func = click.option("--min-exclusive", default=1, show_default=True, type=int)(func)
    func = click.option("--multi-threshold", default=5, show_default=True, type=int)(func)
    return func


def _build_config(min_exclusive: int, multi_threshold: int) -> matchmod.MatcherConfig:
    try:
        return matchmod.MatcherConfig(min_exclusive=min_exclusive, multi_threshold=multi_threshold)
    except ValueError as exc:
        fail(str(exc))


@main.command("match")
@click.option("--processed", "processed_path", required=True, type=click.Path(dir_okay=False))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(dir_okay=False))
@click.option("--registry", "registry_path", type=click.Path(dir_okay=False))
@click.option("--lexicon", "lexicon_dir", required=True, type=click.Path(file_okay=False))
@click.option("--ling-lexicon", "ling_path", required=True, type=click.Path(dir_okay=False))
@_matcher_options
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def cmd_match(
    processed_path, corpus_path, registry_path, lexicon_dir, ling_path,
    min_exclusive, multi_threshold, out_dir,
) -> None:
    """Match every unique text against the theme word lists."""
    _require_file(Path(processed_path), "processed corpus", "adthemes preprocess")
    ling = _load_ling(ling_path)
    theme_lexicon = _load_theme_lexicon(lexicon_dir, ling)
    corpus = _load_corpus(corpus_path, registry_path)
    texts = load_processed(processed_path)
    config = _build_config(min_exclusive, multi_threshold)
    _echo_config(config)

    results, summary = matchmod.match_corpus(texts, theme_lexicon, config, corpus)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    matchmod.save_results(results, out / RESULTS_FILENAME)
    (out / SUMMARY_FILENAME).write_text(matchmod.summary_csv(summary), encoding="utf-8")
    matched_texts = sum(1 for r in results if r.matched_themes)
    click.echo(
        f"matched {matched_texts}/{len(results)} texts "
        f"(lexicon version {theme_lexicon.version}); results in {out}"
    )


@main.command("suggest")
@click.option("--processed", "processed_path", required=True, type=click.Path(dir_okay=False))
@click.option("--results", "results_path", required=True, type=click.Path(dir_okay=False))
@click.option("--lexicon", "lexicon_dir", required=True, type=click.Path(file_okay=False))
@click.option("--ling-lexicon", "ling_path", required=True, type=click.Path(dir_okay=False))
@click.option("--theme", "theme_id", required=True)
@click.option("--top-k", default=30, show_default=True, type=int)
@click.option("--df-ceiling", default=0.05, show_default=True, type=float)
@click.option("--stopwords", "stopwords_path", type=click.Path(dir_okay=False))
def cmd_suggest(
    processed_path, results_path, lexicon_dir, ling_path, theme_id,
    top_k, df_ceiling, stopwords_path,
) -> None:
    """Print candidate words for one theme as JSON lines."""
    _require_file(Path(processed_path), "processed corpus", "adthemes preprocess")
    _require_file(Path(results_path), "match results", "adthemes match")
    ling = _load_ling(ling_path)
    theme_lexicon = _load_theme_lexicon(lexicon_dir, ling)
    if theme_id not in theme_lexicon.themes:
        fail(f"unknown theme {theme_id!r}")
    texts = load_processed(processed_path)
    results = matchmod.load_results(results_path)
    stopwords = refinement.load_stopwords(stopwords_path) if stopwords_path else frozenset()
    candidates = refinement.suggest_candidates(
        theme_id, results, texts, theme_lexicon,
        k=top_k, df_ceiling=df_ceiling, stopwords=stopwords,
    )
    for cand in candidates:
        click.echo(
            json.dumps(
                {
                    "lemma": cand.lemma,
                    "theme_id": cand.theme_id,
                    "match_count": cand.match_count,
                    "corpus_doc_frequency": round(cand.corpus_doc_frequency, 6),
                    "sample_text_keys": list(cand.sample_text_keys),
                }
            )
        )
    if not candidates:
        click.echo(f"no candidates for theme {theme_id}", err=True)


@main.command("decide")
@click.argument("verdict", type=click.Choice(["accept", "reject"]))
@click.argument("word")
@click.argument("theme_id")
@click.option("--lexicon", "lexicon_dir", required=True, type=click.Path(file_okay=False))
@click.option("--ling-lexicon", "ling_path", required=True, type=click.Path(dir_okay=False))
@click.option("--reason", default="")
def cmd_decide(verdict, word, theme_id, lexicon_dir, ling_path, reason) -> None:
    """Record one accept/reject verdict in the decisions journal."""
    ling = _load_ling(ling_path)
    theme_lexicon = _load_theme_lexicon(lexicon_dir, ling)
    lemmas = lexmod.normalize_word(word, ling)
    if len(lemmas) != 1:
        fail(f"{word!r} normalizes to {lemmas!r}; pass exactly one word")
    iteration = _open_iteration(Path(lexicon_dir))
    try:
        lexmod.apply_decision(theme_lexicon, lemmas[0], theme_id, verdict, iteration, reason=reason)
    except lexmod.DecisionConflict as exc:
        fail(str(exc))
    except (lexmod.LexiconError, ValueError) as exc:
        fail(str(exc))
    lexmod.append_decision(
        Path(lexicon_dir) / lexmod.DECISIONS_FILENAME, theme_lexicon.journal[-1]
    )
    click.echo(
        f"{verdict}ed {lemmas[0]!r} for {theme_id} "
        f"(iteration {iteration}, lexicon version {theme_lexicon.version})"
    )


def _open_iteration(lexicon_dir: Path) -> int:
    """Iteration decisions are being taken for: one past the last closed one."""
    path = lexicon_dir / ITERATIONS_FILENAME
    if not path.exists():
        return 1
    return len(refinement.read_iterations(path)) + 1


class _InteractiveVerdicts:
    """Terminal accept/reject prompt for the curation loop."""

    def __init__(self, texts):
        self._texts = {pt.text_key: pt for pt in texts}

    def __call__(self, candidate: refinement.CandidateWord) -> str:
        click.echo(
            f"\n[{candidate.theme_id}] {candidate.lemma!r}: "
            f"in {candidate.match_count} matched text(s), "
            f"corpus df {candidate.corpus_doc_frequency:.3f}"
        )
        for key in candidate.sample_text_keys[:3]:
            pt = self._texts.get(key)
            if pt is not None:
                click.echo(f"  sample lemmas: {', '.join(sorted(pt.lemmas)[:12])}")
        choice = click.prompt(
            "accept/reject/skip", type=click.Choice(["a", "r", "s"]), default="s"
        )
        return {"a": "accept", "r": "reject", "s": "skip"}[choice]


@main.command("iterate")
@click.option("--processed", "processed_path", required=True, type=click.Path(dir_okay=False))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(dir_okay=False))
@click.option("--registry", "registry_path", type=click.Path(dir_okay=False))
@click.option("--lexicon", "lexicon_dir", required=True, type=click.Path(file_okay=False))
@click.option("--ling-lexicon", "ling_path", required=True, type=click.Path(dir_okay=False))
@_matcher_options
@click.option("--top-k", default=30, show_default=True, type=int)
@click.option("--df-ceiling", default=0.05, show_default=True, type=float)
@click.option("--stopwords", "stopwords_path", type=click.Path(dir_okay=False))
@click.option(
    "--policy",
    type=click.Choice(["interactive", "accept-all", "reject-all"]),
    default="interactive",
    show_default=True,
    help="Verdict policy; scripted policies are for tests and dry runs.",
)
def cmd_iterate(
    processed_path, corpus_path, registry_path, lexicon_dir, ling_path,
    min_exclusive, multi_threshold, top_k, df_ceiling, stopwords_path, policy,
) -> None:
    """Run one refinement iteration (suggest, decide, rematch)."""
    _require_file(Path(processed_path), "processed corpus", "adthemes preprocess")
    ling = _load_ling(ling_path)
    theme_lexicon = _load_theme_lexicon(lexicon_dir, ling)
    _load_corpus(corpus_path, registry_path)  # validated for the operator's benefit
    texts = load_processed(processed_path)
    config = _build_config(min_exclusive, multi_threshold)
    _echo_config(config)
    stopwords = refinement.load_stopwords(stopwords_path) if stopwords_path else frozenset()

    verdict_source = {
        "interactive": _InteractiveVerdicts(texts),
        "accept-all": refinement.accept_all,
        "reject-all": refinement.reject_all,
    }[policy]

    lex_dir = Path(lexicon_dir)
    iteration = _open_iteration(lex_dir)
    journal_before = len(theme_lexicon.journal)
    record, _ = refinement.run_iteration(
        texts, theme_lexicon, verdict_source,
        iteration=iteration, config=config,
        k=top_k, df_ceiling=df_ceiling, stopwords=stopwords,
    )
    for decision in theme_lexicon.journal[journal_before:]:
        lexmod.append_decision(lex_dir / lexmod.DECISIONS_FILENAME, decision)
    refinement.append_iteration(lex_dir / ITERATIONS_FILENAME, record)

    flags = ", ".join(t for t, done in record.converged.items() if not done) or "all themes"
    click.echo(
        f"iteration {record.iteration}: suggested {record.suggested}, "
        f"accepted {record.accepted}, rejected {record.rejected}; "
        f"converged: {flags if record.accepted == 0 else 'not yet (' + flags + ' active)'}"
    )


@main.command("report")
@click.option("--processed", "processed_path", required=True, type=click.Path(dir_okay=False))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(dir_okay=False))
@click.option("--registry", "registry_path", type=click.Path(dir_okay=False))
@click.option("--lexicon", "lexicon_dir", required=True, type=click.Path(file_okay=False))
@click.option("--ling-lexicon", "ling_path", required=True, type=click.Path(dir_okay=False))
@click.option("--baseline", "baseline_path", required=True, type=click.Path(dir_okay=False))
@_matcher_options
@click.option("--ownership-k", default=3, show_default=True, type=int)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def cmd_report(
    processed_path, corpus_path, registry_path, lexicon_dir, ling_path,
    baseline_path, min_exclusive, multi_threshold, ownership_k, out_dir,
) -> None:
    """Recompute the match and write every aggregate table."""
    _require_file(Path(processed_path), "processed corpus", "adthemes preprocess")
    _require_file(Path(baseline_path), "population baseline", "ship one under data/")
    ling = _load_ling(ling_path)
    theme_lexicon = _load_theme_lexicon(lexicon_dir, ling)
    corpus = _load_corpus(corpus_path, registry_path)
    texts = load_processed(processed_path)
    config = _build_config(min_exclusive, multi_threshold)
    _echo_config(config)
    baseline = analytics.load_baseline(baseline_path)

    results, summary = matchmod.match_corpus(texts, theme_lexicon, config, corpus)
    bundle = analytics.build_reports(
        results, summary, corpus, theme_lexicon.themes, baseline, ownership_k=ownership_k
    )
    paths = analytics.write_report(bundle, out_dir)
    for path in paths:
        click.echo(f"wrote {path}")


@main.command("serve")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(dir_okay=False))
@click.option("--registry", "registry_path", type=click.Path(dir_okay=False))
@click.option("--lexicon", "lexicon_dir", required=True, type=click.Path(file_okay=False))
@click.option("--ling-lexicon", "ling_path", required=True, type=click.Path(dir_okay=False))
@click.option("--baseline", "baseline_path", required=True, type=click.Path(dir_okay=False))
@click.option("--stopwords", "stopwords_path", type=click.Path(dir_okay=False))
@_matcher_options
@click.option("--top-k", default=30, show_default=True, type=int)
@click.option("--df-ceiling", default=0.05, show_default=True, type=float)
@click.option("--frontend", "frontend_dir", type=click.Path(file_okay=False))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8710, show_default=True, type=int)
def cmd_serve(
    corpus_path, registry_path, lexicon_dir, ling_path, baseline_path,
    stopwords_path, min_exclusive, multi_threshold, top_k, df_ceiling,
    frontend_dir, host, port,
) -> None:
    """Run the local curation service (and UI, when built)."""
    import uvicorn

    from .service import RunConfig, create_app

    config = RunConfig(
        corpus_path=Path(corpus_path),
        registry_path=Path(registry_path) if registry_path else None,
        lexicon_dir=Path(lexicon_dir),
        ling_lexicon_path=Path(ling_path),
        baseline_path=Path(baseline_path),
        stopwords_path=Path(stopwords_path) if stopwords_path else None,
        matcher=_build_config(min_exclusive, multi_threshold),
        suggestion_k=top_k,
        df_ceiling=df_ceiling,
        frontend_dir=Path(frontend_dir) if frontend_dir else None,
    )
    try:
        app = create_app(config)
    except (OSError, ValueError, ingestion.IngestionError, lexmod.LexiconError) as exc:
        fail(str(exc))
    click.echo(f"serving curation workbench on http://{host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
