"""Aggregate tables over match results.

Theme distributions by ad count and by impressions, matched percentages,
issue-ownership rankings, and demographic breakdowns against population
baselines. Ranged impression estimates enter every aggregate through their
midpoint; sums are exact rational arithmetic, converted to float only at
the edges, which keeps ratios invariant under scaling and report bytes
identical across platforms.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Literal, Mapping, Sequence

from .formatting import format_pct
from .ingestion import AXES, Ad, Corpus
from .lexicon import Theme
from .matcher import MatchResult, MatchSummary, summary_csv

logger = logging.getLogger(__name__)

Basis = Literal["ad_count", "impressions"]
Grouping = Literal["per_theme", "per_party"]

GROUPING_PER_THEME = "per_theme"
GROUPING_PER_PARTY = "per_party"


class AnalyticsError(Exception):
    pass


class NoAdsForParty(AnalyticsError):
    """The corpus holds no ads for the requested party."""


class NoMatchedAds(AnalyticsError):
    """The party has ads, but none matched any theme."""


@dataclass(frozen=True)
class ThemeDistribution:
    """Percentage of a party's matched ad-theme pairs per theme.

    Every theme is present, zero rows included; percentages sum to 100.
    An ad matched to several themes contributes full weight to each row,
    which is what makes the columns sum to 100 under multi-matching.
    """

    party: str
    basis: str
    rows: Mapping[str, float]


@dataclass(frozen=True)
class OwnershipRow:
    """Parties ranked by impressions captured for one theme."""

    theme_id: str
    ranked: tuple[tuple[str, float], ...]  # (party, share of theme total), descending


@dataclass(frozen=True)
class Baseline:
    """Population percentages per (axis, key), in file order."""

    rows: tuple[tuple[str, str, float], ...]

    def value(self, axis: str, key: str) -> float | None:
        for row_axis, row_key, pct in self.rows:
            if row_axis == axis and row_key == key:
                return pct
        return None

    def mapping(self) -> dict[tuple[str, str], float]:
        return {(axis, key): pct for axis, key, pct in self.rows}

    def order(self) -> list[tuple[str, str]]:
        return [(axis, key) for axis, key, _ in self.rows]


@dataclass(frozen=True)
class DemographicTable:
    """Impression-weighted demographic shares per group (theme or party).

    ``rows`` maps (axis, key) to per-group percentages; a group missing an
    axis entirely has no entry for that axis and shows up in ``coverage``
    with its count of excluded ads.
    """

    grouping: str
    groups: tuple[str, ...]
    rows: Mapping[tuple[str, str], Mapping[str, float]]
    baseline: Mapping[tuple[str, str], float]
    row_order: tuple[tuple[str, str], ...]
    coverage: Mapping[tuple[str, str], int]


def load_baseline(path: str | Path) -> Baseline:
    """Read population statistics (CSV: axis,key,percentage)."""
    rows = []
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        required = {"axis", "key", "percentage"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise AnalyticsError(f"{path}: expected CSV header axis,key,percentage")
        for row in reader:
            axis = row["axis"].strip()
            if axis not in AXES:
                raise AnalyticsError(f"{path}: unknown axis {axis!r}")
            rows.append((axis, row["key"].strip(), float(row["percentage"])))
    return Baseline(rows=tuple(rows))


def _pair_weight(ad: Ad, basis: str) -> Fraction:
    if basis == "ad_count":
        return Fraction(1)
    if basis == "impressions":
        return ad.impressions.midpoint
    raise ValueError(f"unknown basis {basis!r}")


def theme_distribution(
    results: Sequence[MatchResult],
    corpus: Corpus,
    party: str,
    basis: str,
    theme_ids: Sequence[str],
) -> ThemeDistribution:
    """Distribution of one party's matched ads (or impressions) over themes."""
    acc: dict[str, Fraction] = {theme_id: Fraction(0) for theme_id in theme_ids}
    has_ads = any(ad.party == party for ad in corpus)
    if not has_ads:
        raise NoAdsForParty(f"party {party!r} has no ads in the corpus")

    total = Fraction(0)
    for result in results:
        if not result.matched_themes:
            continue
        for ad_id in result.ad_ids:
            ad = corpus.by_id[ad_id]
            if ad.party != party:
                continue
            weight = _pair_weight(ad, basis)
            for theme_id in result.matched_themes:
                acc[theme_id] += weight
                total += weight

    if total == 0:
        raise NoMatchedAds(
            f"party {party!r} has ads but no matched {'impressions' if basis == 'impressions' else 'ads'}"
        )
    return ThemeDistribution(
        party=party,
        basis=basis,
        rows={theme_id: float(100 * acc[theme_id] / total) for theme_id in theme_ids},
    )


def top_parties_per_theme(
    results: Sequence[MatchResult],
    corpus: Corpus,
    theme_ids: Sequence[str],
    k: int = 3,
) -> list[OwnershipRow]:
    """Which parties captured the most impressions for each theme.

    Shares are fractions of the theme's impression total across ALL
    parties, so the top-k shares sum to at most 1.
    """
    acc: dict[str, dict[str, Fraction]] = {theme_id: {} for theme_id in theme_ids}
    for result in results:
        for ad_id in result.ad_ids:
            ad = corpus.by_id[ad_id]
            weight = ad.impressions.midpoint
            for theme_id in result.matched_themes:
                per_party = acc[theme_id]
                per_party[ad.party] = per_party.get(ad.party, Fraction(0)) + weight

    rows = []
    for theme_id in theme_ids:
        per_party = acc[theme_id]
        total = sum(per_party.values(), Fraction(0))
        if total == 0:
            rows.append(OwnershipRow(theme_id=theme_id, ranked=()))
            continue
        ranked = sorted(
            ((party, weight / total) for party, weight in per_party.items()),
            key=lambda item: (-item[1], item[0]),
        )
        rows.append(
            OwnershipRow(
                theme_id=theme_id,
                ranked=tuple((party, float(share)) for party, share in ranked[:k]),
            )
        )
    return rows


def _group_ads(
    results: Sequence[MatchResult],
    corpus: Corpus,
    grouping: str,
    theme_ids: Sequence[str],
) -> dict[str, list[Ad]]:
    if grouping == GROUPING_PER_THEME:
        # Theme groups span all parties, per the matched results.
        ids: dict[str, list[str]] = {theme_id: [] for theme_id in theme_ids}
        for result in results:
            for theme_id in result.matched_themes:
                ids[theme_id].extend(result.ad_ids)
        return {
            theme_id: [corpus.by_id[ad_id] for ad_id in sorted(set(ad_ids))]
            for theme_id, ad_ids in ids.items()
        }
    if grouping == GROUPING_PER_PARTY:
        # Party groups take every ad of the party, matched or not.
        groups: dict[str, list[Ad]] = {party: [] for party in corpus.parties()}
        for ad in corpus:
            groups[ad.party].append(ad)
        return groups
    raise ValueError(f"unknown grouping {grouping!r}")


def demographic_table(
    results: Sequence[MatchResult],
    corpus: Corpus,
    grouping: str,
    baseline: Baseline,
    theme_ids: Sequence[str],
) -> DemographicTable:
    """Impression-weighted demographic distribution per theme or per party.

    Weight of (ad, axis, key) is midpoint(impressions) x share; shares are
    normalized within each (group, axis). Ads with no data on an axis are
    excluded from that axis and counted in the coverage diagnostic.
    """
    groups = _group_ads(results, corpus, grouping, theme_ids)
    weights: dict[str, dict[str, dict[str, Fraction]]] = {}
    coverage: dict[tuple[str, str], int] = {}

    for group, ads in groups.items():
        per_axis: dict[str, dict[str, Fraction]] = {axis: {} for axis in AXES}
        for ad in ads:
            midpoint = ad.impressions.midpoint
            for axis in AXES:
                cells = ad.axis_cells(axis)
                if not cells:
                    coverage[(group, axis)] = coverage.get((group, axis), 0) + 1
                    continue
                bucket = per_axis[axis]
                for cell in cells:
                    bucket[cell.key] = bucket.get(cell.key, Fraction(0)) + (
                        midpoint * Fraction(cell.share)
                    )
        weights[group] = per_axis

    rows: dict[tuple[str, str], dict[str, float]] = {}
    for group, per_axis in weights.items():
        for axis, bucket in per_axis.items():
            total = sum(bucket.values(), Fraction(0))
            if total == 0:
                continue
            for key, weight in bucket.items():
                rows.setdefault((axis, key), {})[group] = float(100 * weight / total)

    order: list[tuple[str, str]] = []
    for axis in AXES:
        baseline_keys = [(a, k) for a, k in baseline.order() if a == axis]
        order.extend(baseline_keys)
        extras = sorted(
            key for key in rows if key[0] == axis and key not in baseline_keys
        )
        order.extend(extras)

    return DemographicTable(
        grouping=grouping,
        groups=tuple(groups),
        rows=rows,
        baseline=baseline.mapping(),
        row_order=tuple(order),
        coverage=coverage,
    )


# ---------------------------------------------------------------------------
# Rendering


@dataclass
class ReportBundle:
    """Everything one reporting run produces, ready to render."""

    summary: MatchSummary
    distributions: dict[str, dict[str, ThemeDistribution]]  # basis -> party -> dist
    ownership: list[OwnershipRow]
    ownership_k: int
    demographics: dict[str, DemographicTable]  # grouping -> table
    themes: Mapping[str, Theme]
    unmatched_parties: dict[str, list[str]]  # basis -> parties skipped


def build_reports(
    results: Sequence[MatchResult],
    summary: MatchSummary,
    corpus: Corpus,
    themes: Mapping[str, Theme],
    baseline: Baseline,
    ownership_k: int = 3,
) -> ReportBundle:
    """Compute every table family for the current results."""
    theme_ids = list(themes)
    distributions: dict[str, dict[str, ThemeDistribution]] = {}
    unmatched: dict[str, list[str]] = {}
    for basis in ("ad_count", "impressions"):
        per_party: dict[str, ThemeDistribution] = {}
        skipped: list[str] = []
        for party in corpus.parties():
            try:
                per_party[party] = theme_distribution(results, corpus, party, basis, theme_ids)
            except NoMatchedAds:
                skipped.append(party)
        distributions[basis] = per_party
        unmatched[basis] = skipped

    return ReportBundle(
        summary=summary,
        distributions=distributions,
        ownership=top_parties_per_theme(results, corpus, theme_ids, k=ownership_k),
        ownership_k=ownership_k,
        demographics={
            grouping: demographic_table(results, corpus, grouping, baseline, theme_ids)
            for grouping in (GROUPING_PER_THEME, GROUPING_PER_PARTY)
        },
        themes=themes,
        unmatched_parties=unmatched,
    )


def render_distribution_csv(
    per_party: Mapping[str, ThemeDistribution], themes: Mapping[str, Theme]
) -> str:
    """One CSV per basis: theme rows, one percentage column per party."""
    parties = sorted(per_party)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["theme_id", "display_name", *parties])
    if not parties:
        return buffer.getvalue()
    for theme_id, theme in themes.items():
        writer.writerow(
            [theme_id, theme.display_name]
            + [format_pct(per_party[party].rows[theme_id]) for party in parties]
        )
    return buffer.getvalue()


def render_ownership_csv(
    rows: Sequence[OwnershipRow], themes: Mapping[str, Theme]
) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["theme_id", "display_name", "rank", "party", "share_pct"])
    for row in rows:
        theme = themes[row.theme_id]
        for rank, (party, share) in enumerate(row.ranked, start=1):
            writer.writerow(
                [row.theme_id, theme.display_name, rank, party, format_pct(100 * share)]
            )
    return buffer.getvalue()


def _group_label(grouping: str, group: str, themes: Mapping[str, Theme]) -> str:
    if grouping == GROUPING_PER_THEME:
        return themes[group].display_name
    return group


def render_demographics_csv(table: DemographicTable) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["axis", "key", "population_pct", *table.groups])
    for axis, key in table.row_order:
        baseline = table.baseline.get((axis, key))
        cells = table.rows.get((axis, key), {})
        writer.writerow(
            [
                axis,
                key,
                format_pct(baseline) if baseline is not None else "",
                *[
                    format_pct(cells[group]) if group in cells else ""
                    for group in table.groups
                ],
            ]
        )
    return buffer.getvalue()


def _markdown_table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> list[str]:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines.extend("| " + " | ".join(row) + " |" for row in rows)
    return lines


def render_markdown(bundle: ReportBundle) -> str:
    """Combined report mirroring the published table shapes."""
    themes = bundle.themes
    config = bundle.summary.config
    lines = [
        "# Theme matching report",
        "",
        f"Matcher config: min_exclusive={config.min_exclusive}, "
        f"multi_threshold={config.multi_threshold}. "
        f"Lexicon version {bundle.summary.lexicon_version}.",
        "",
        "## Ads matched to at least one theme",
        "",
    ]
    lines += _markdown_table(
        ["Party", "Number of Ads", "Matched", "Not matched"],
        [
            [
                row.party,
                str(row.n_ads),
                f"{format_pct(row.pct_matched)}%",
                f"{format_pct(100 - row.pct_matched)}%",
            ]
            for row in bundle.summary.rows
        ],
    )

    basis_titles = {
        "ad_count": "Theme distribution by number of ads",
        "impressions": "Theme distribution by impressions",
    }
    for basis, title in basis_titles.items():
        lines += ["", f"## {title}"]
        for party, dist in sorted(bundle.distributions[basis].items()):
            lines += ["", f"### {party}", ""]
            ordered = sorted(dist.rows.items(), key=lambda item: (-item[1], item[0]))
            lines += _markdown_table(
                ["Theme", "%"],
                [
                    [themes[theme_id].display_name, f"{format_pct(pct)}%"]
                    for theme_id, pct in ordered
                ],
            )
        for party in bundle.unmatched_parties[basis]:
            lines += ["", f"_{party}: no ads matched any theme._"]

    lines += ["", f"## Top {bundle.ownership_k} parties by impressions per theme", ""]
    rank_headers = [_ordinal(i) for i in range(1, bundle.ownership_k + 1)]
    ownership_rows = []
    for row in bundle.ownership:
        cells = [themes[row.theme_id].display_name]
        for i in range(bundle.ownership_k):
            if i < len(row.ranked):
                party, share = row.ranked[i]
                cells.append(f"{party} ({format_pct(100 * share)}%)")
            else:
                cells.append("")
        ownership_rows.append(cells)
    lines += _markdown_table(["Theme", *rank_headers], ownership_rows)

    grouping_titles = {
        GROUPING_PER_THEME: "Demographic distribution of impressions per theme",
        GROUPING_PER_PARTY: "Demographic distribution of impressions per party",
    }
    for grouping, title in grouping_titles.items():
        table = bundle.demographics[grouping]
        lines += ["", f"## {title}", ""]
        header = ["Demographic", "Population"] + [
            _group_label(grouping, group, themes) for group in table.groups
        ]
        body = []
        for axis, key in table.row_order:
            baseline = table.baseline.get((axis, key))
            cells = table.rows.get((axis, key), {})
            body.append(
                [
                    key,
                    f"{format_pct(baseline)}%" if baseline is not None else "",
                    *[
                        f"{format_pct(cells[group])}%" if group in cells else ""
                        for group in table.groups
                    ],
                ]
            )
        lines += _markdown_table(header, body)
        excluded = sorted(table.coverage.items())
        if excluded:
            lines += [""]
            for (group, axis), count in excluded:
                lines.append(
                    f"_Coverage: {count} ad(s) in {_group_label(grouping, group, themes)} "
                    f"carry no {axis} data and are excluded from that axis._"
                )

    return "\n".join(lines) + "\n"


def _ordinal(i: int) -> str:
    suffix = {1: "st", 2: "nd", 3: "rd"}.get(i if i < 20 else i % 10, "th")
    return f"{i}{suffix}"


REPORT_FILENAMES = (
    "matched_summary.csv",
    "theme_distribution_ads.csv",
    "theme_distribution_impressions.csv",
    "issue_ownership.csv",
    "demographics_per_theme.csv",
    "demographics_per_party.csv",
    "report.md",
)


def write_report(bundle: ReportBundle, out_dir: str | Path) -> list[Path]:
    """Write every table family as CSV plus the combined Markdown report."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    contents = {
        "matched_summary.csv": summary_csv(bundle.summary),
        "theme_distribution_ads.csv": render_distribution_csv(
            bundle.distributions["ad_count"], bundle.themes
        ),
        "theme_distribution_impressions.csv": render_distribution_csv(
            bundle.distributions["impressions"], bundle.themes
        ),
        "issue_ownership.csv": render_ownership_csv(bundle.ownership, bundle.themes),
        "demographics_per_theme.csv": render_demographics_csv(
            bundle.demographics[GROUPING_PER_THEME]
        ),
        "demographics_per_party.csv": render_demographics_csv(
            bundle.demographics[GROUPING_PER_PARTY]
        ),
        "report.md": render_markdown(bundle),
    }
    paths = []
    for name, content in contents.items():
        path = out_dir / name
        path.write_text(content, encoding="utf-8", newline="\n")
        paths.append(path)
    return paths
