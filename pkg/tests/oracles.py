"""Independent reference implementations used to check the real ones.

Everything here is written in the most naive style possible (plain loops,
plain floats) and must stay independent of the code paths it verifies.
"""

from __future__ import annotations

import random
import unicodedata

from adthemes.ingestion import Ad, DemographicCell, RangeMetric
from adthemes.lexicon import Theme, ThemeLexicon
from adthemes.textpipe import ProcessedText


def brute_force_match(lemmas, lists, min_exclusive=1, multi_threshold=5):
    """Naive re-statement of the matching rule: enumerate all theme-text
    pairs, count common words one by one."""
    sizes = {}
    for theme, words in lists.items():
        count = 0
        for word in words:
            if word in lemmas:
                count += 1
        sizes[theme] = count
    largest = 0
    for size in sizes.values():
        if size > largest:
            largest = size
    matched = set()
    if largest > min_exclusive:
        for theme, size in sizes.items():
            if size == largest:
                matched.add(theme)
            if size > multi_threshold:
                matched.add(theme)
    return sizes, matched


def float_midpoint(metric: RangeMetric) -> float:
    if metric.upper is None:
        return float(metric.lower)
    return (metric.lower + metric.upper) / 2.0


def float_demographic_shares(ads, axis):
    """Plain-float weighted share computation for one axis over given ads."""
    totals: dict[str, float] = {}
    for ad in ads:
        mid = float_midpoint(ad.impressions)
        for cell in ad.demographics:
            if cell.axis == axis:
                totals[cell.key] = totals.get(cell.key, 0.0) + mid * cell.share
    denom = sum(totals.values())
    if denom == 0.0:
        return {}
    return {key: 100.0 * value / denom for key, value in totals.items()}


def float_theme_shares(pairs):
    """pairs: iterable of (theme, weight); returns percentage per theme."""
    totals: dict[str, float] = {}
    for theme, weight in pairs:
        totals[theme] = totals.get(theme, 0.0) + weight
    denom = sum(totals.values())
    return {theme: 100.0 * value / denom for theme, value in totals.items()}


def nfkd_ascii(text: str) -> str:
    """Second opinion on transliteration built from raw decomposition data."""
    out = []
    for char in text:
        decomposed = unicodedata.normalize("NFKD", char)
        for piece in decomposed:
            if piece.isascii():
                out.append(piece)
            elif unicodedata.category(piece).startswith("M") and unicodedata.combining(piece):
                continue
            else:
                out.append(" ")
    return "".join(out)


# ---------------------------------------------------------------------------
# Random inputs for property suites


def make_lexicon(lists: dict[str, set[str]], version: int = 0) -> ThemeLexicon:
    themes = {tid: Theme(id=tid, display_name=tid.title(), cap_categories=(1,)) for tid in lists}
    return ThemeLexicon(
        themes=themes,
        lists={tid: {w: "seed" for w in sorted(words)} for tid, words in lists.items()},
        version=version,
    )


def random_word_lists(rng: random.Random, vocab: list[str], n_themes: int = 14):
    return {
        f"t{j:02d}": set(rng.sample(vocab, rng.randrange(0, min(25, len(vocab)) + 1)))
        for j in range(n_themes)
    }


def random_texts(rng: random.Random, vocab: list[str], max_texts: int = 200):
    texts = []
    for i in range(rng.randrange(1, max_texts + 1)):
        lemmas = frozenset(rng.sample(vocab, rng.randrange(0, min(40, len(vocab)) + 1)))
        texts.append(
            ProcessedText(
                text_key=f"{i:05d}",
                lemmas=lemmas,
                lemma_counts={w: 1 for w in sorted(lemmas)},
                ad_ids=(f"a{i:05d}",),
            )
        )
    return texts


GENDERS = ["female", "male"]
AGES = ["13-17", "18-24", "25-34", "35-44", "45-54", "55-64", "65+"]
REGIONS = ["Noord", "Zuid", "Oost", "West"]


def random_cells(rng: random.Random, axes=("gender", "age", "region")):
    cells = []
    for axis, keys in (("gender", GENDERS), ("age", AGES), ("region", REGIONS)):
        if axis not in axes:
            continue
        weights = [rng.uniform(0.1, 1.0) for _ in keys]
        total = sum(weights)
        shares = [round(w / total, 4) for w in weights]
        shares[0] = round(shares[0] + (1.0 - sum(shares)), 4)
        cells.extend(
            DemographicCell(axis=axis, key=key, share=share)
            for key, share in zip(keys, shares)
            if share > 0
        )
    return tuple(cells)


def random_ad(rng: random.Random, index: int, party: str, axes=("gender", "age", "region")) -> Ad:
    from datetime import date, timedelta

    lower = rng.randrange(1, 100) * 1000
    upper = None if rng.random() < 0.1 else lower + rng.randrange(1, 50) * 100
    start = date(2021, 1, 1) + timedelta(days=rng.randrange(0, 60))
    return Ad(
        id=f"ad{index:05d}",
        page_id=f"pg{index % 7}",
        page_name=party,
        party=party,
        start_date=start,
        end_date=start + timedelta(days=rng.randrange(0, 30)) if rng.random() < 0.8 else None,
        currency="EUR",
        spend=RangeMetric(100, 199),
        impressions=RangeMetric(lower, upper),
        audience=None,
        demographics=random_cells(rng, axes),
        creative_bodies=(f"text {index}",),
    )
