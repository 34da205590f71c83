"""Ad archive ingestion: API client, record validation, corpus persistence.

Records come either from an ads_archive-style HTTP endpoint or from local
NDJSON files using the same field names. Validation never silently drops a
record: rejects carry the offending field path and can be quarantined to a
sidecar file.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import dataclass, field
from datetime import date
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import requests

logger = logging.getLogger(__name__)

AXES = ("gender", "age", "region")

#: Fields requested from the archive API, matching corpus NDJSON keys.
DEFAULT_FIELDS = (
    "id",
    "page_id",
    "page_name",
    "currency",
    "ad_delivery_start_time",
    "ad_delivery_stop_time",
    "spend",
    "impressions",
    "estimated_audience_size",
    "demographic_distribution",
    "delivery_by_region",
    "ad_creative_bodies",
    "ad_creative_link_titles",
    "ad_creative_link_descriptions",
    "ad_creative_link_captions",
)

UNKNOWN_PARTY = "unknown"

# Error codes the archive API uses for throttling; retried with backoff.
_RATE_LIMIT_CODES = frozenset({4, 17, 32, 613})
_AUTH_CODES = frozenset({102, 190})

# Source shares are rounded, so axis sums get a small tolerance.
_AXIS_SUM_TOL = 0.02
_SHARE_EPS = 1e-9


class IngestionError(Exception):
    """Base class for ingestion failures."""


class AuthError(IngestionError):
    """The API rejected our credentials; terminal."""


class ApiError(IngestionError):
    """Terminal API failure (exhausted retries, unexpected status)."""


class RecordError(ValueError):
    """A single record failed validation; carries the offending field path."""

    def __init__(self, field_path: str, message: str):
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}")


@dataclass(frozen=True)
class RangeMetric:
    """Lower/upper bound pair; the archive never reports exact numbers.

    An absent upper bound is an open-ended top bucket whose midpoint is
    defined as the lower bound (conservative and deterministic).
    """

    lower: int
    upper: int | None = None

    def __post_init__(self):
        if self.lower < 0:
            raise ValueError(f"lower bound must be non-negative, got {self.lower}")
        if self.upper is not None and self.upper < self.lower:
            raise ValueError(f"upper bound {self.upper} < lower bound {self.lower}")

    @property
    def midpoint(self) -> Fraction:
        if self.upper is None:
            return Fraction(self.lower)
        return Fraction(self.lower + self.upper, 2)


@dataclass(frozen=True)
class DemographicCell:
    """Share of an ad's impressions on one axis (gender, age or region)."""

    axis: str
    key: str
    share: float

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"unknown axis {self.axis!r}")
        if not -_SHARE_EPS <= self.share <= 1 + _SHARE_EPS:
            raise ValueError(f"share {self.share} outside [0, 1]")


@dataclass(frozen=True)
class Ad:
    """One archived ad with ranged metrics and text elements.

    The four text-element tuples are always present (possibly empty);
    values are immutable and safe to share across threads.
    """

    id: str
    page_id: str
    page_name: str
    party: str
    start_date: date
    end_date: date | None
    currency: str
    spend: RangeMetric
    impressions: RangeMetric
    audience: RangeMetric | None
    demographics: tuple[DemographicCell, ...]
    creative_bodies: tuple[str, ...] = ()
    link_titles: tuple[str, ...] = ()
    link_descriptions: tuple[str, ...] = ()
    link_captions: tuple[str, ...] = ()

    def __post_init__(self):
        if self.end_date is not None and self.end_date < self.start_date:
            raise ValueError(f"end_date {self.end_date} before start_date {self.start_date}")

    def axis_cells(self, axis: str) -> tuple[DemographicCell, ...]:
        return tuple(cell for cell in self.demographics if cell.axis == axis)


class PageRegistry:
    """Hand-maintained map from page_id to party label (CSV: page_id,party)."""

    def __init__(self, mapping: Mapping[str, str]):
        self._mapping = dict(mapping)

    @classmethod
    def from_file(cls, path: str | Path) -> "PageRegistry":
        mapping: dict[str, str] = {}
        with open(path, encoding="utf-8", newline="") as handle:
            reader = csv.DictReader(handle)
            if reader.fieldnames is None or not {"page_id", "party"} <= set(reader.fieldnames):
                raise IngestionError(f"{path}: expected CSV header page_id,party")
            for row in reader:
                page_id = row["page_id"].strip()
                party = row["party"].strip()
                if page_id in mapping and mapping[page_id] != party:
                    raise IngestionError(
                        f"{path}: page_id {page_id} mapped to both "
                        f"{mapping[page_id]!r} and {party!r}"
                    )
                mapping[page_id] = party
        return cls(mapping)

    def party_for(self, page_id: str) -> str | None:
        return self._mapping.get(page_id)

    def __len__(self) -> int:
        return len(self._mapping)


@dataclass
class Corpus:
    """A validated, normalized set of ads with unique ids."""

    ads: tuple[Ad, ...]

    @cached_property
    def by_id(self) -> dict[str, Ad]:
        return {ad.id: ad for ad in self.ads}

    def parties(self) -> list[str]:
        return sorted({ad.party for ad in self.ads})

    def __len__(self) -> int:
        return len(self.ads)

    def __iter__(self) -> Iterator[Ad]:
        return iter(self.ads)


@dataclass(frozen=True)
class Rejection:
    line: int
    field_path: str
    message: str


@dataclass
class LoadReport:
    """Counts and reasons for a corpus load; accepted + rejected = records read."""

    accepted: int = 0
    rejected: int = 0
    rejections: list[Rejection] = field(default_factory=list)
    unresolved_pages: list[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Record parsing


def _parse_bound(value, path: str) -> int:
    if isinstance(value, bool):
        raise RecordError(path, f"non-numeric bound {value!r}")
    if isinstance(value, int):
        bound = value
    elif isinstance(value, str):
        try:
            bound = int(value.strip())
        except ValueError:
            raise RecordError(path, f"non-numeric bound {value!r}") from None
    else:
        raise RecordError(path, f"non-numeric bound {value!r}")
    if bound < 0:
        raise RecordError(path, f"negative bound {bound}")
    return bound


def _parse_range(value, path: str) -> RangeMetric:
    if not isinstance(value, dict):
        raise RecordError(path, f"expected an object with lower_bound, got {value!r}")
    if "lower_bound" not in value:
        raise RecordError(f"{path}.lower_bound", "missing")
    lower = _parse_bound(value["lower_bound"], f"{path}.lower_bound")
    upper = None
    if value.get("upper_bound") is not None:
        upper = _parse_bound(value["upper_bound"], f"{path}.upper_bound")
        if upper < lower:
            raise RecordError(f"{path}.upper_bound", f"upper bound {upper} < lower bound {lower}")
    return RangeMetric(lower, upper)


def _parse_date(value, path: str) -> date:
    if not isinstance(value, str):
        raise RecordError(path, f"expected a date string, got {value!r}")
    try:
        return date.fromisoformat(value.strip()[:10])
    except ValueError:
        raise RecordError(path, f"invalid date {value!r}") from None


def _parse_share(value, path: str) -> float:
    try:
        share = float(value)
    except (TypeError, ValueError):
        raise RecordError(path, f"non-numeric share {value!r}") from None
    if not 0 <= share <= 1:
        raise RecordError(path, f"share {share} outside [0, 1]")
    return share


def _parse_texts(record: dict, key: str) -> tuple[str, ...]:
    value = record.get(key)
    if value is None:
        return ()
    if not isinstance(value, list):
        raise RecordError(key, f"expected a list of strings, got {value!r}")
    for i, item in enumerate(value):
        if not isinstance(item, str):
            raise RecordError(f"{key}[{i}]", f"expected a string, got {item!r}")
    return tuple(value)


def _parse_demographics(record: dict) -> tuple[DemographicCell, ...]:
    # demographic_distribution entries carry gender and/or age (the live API
    # reports joint gender x age cells); each present axis accumulates the
    # entry's percentage, which marginalizes joint cells per axis.
    sums: dict[str, dict[str, float]] = {axis: {} for axis in AXES}

    entries = record.get("demographic_distribution") or []
    if not isinstance(entries, list):
        raise RecordError("demographic_distribution", "expected a list")
    for i, entry in enumerate(entries):
        path = f"demographic_distribution[{i}]"
        if not isinstance(entry, dict):
            raise RecordError(path, f"expected an object, got {entry!r}")
        share = _parse_share(entry.get("percentage"), f"{path}.percentage")
        present = [axis for axis in ("gender", "age") if entry.get(axis)]
        if not present:
            raise RecordError(path, "entry has neither gender nor age")
        for axis in present:
            key = str(entry[axis]).strip()
            sums[axis][key] = sums[axis].get(key, 0.0) + share

    regions = record.get("delivery_by_region") or []
    if not isinstance(regions, list):
        raise RecordError("delivery_by_region", "expected a list")
    for i, entry in enumerate(regions):
        path = f"delivery_by_region[{i}]"
        if not isinstance(entry, dict):
            raise RecordError(path, f"expected an object, got {entry!r}")
        share = _parse_share(entry.get("percentage"), f"{path}.percentage")
        if not entry.get("region"):
            raise RecordError(path, "entry missing region")
        key = str(entry["region"]).strip()
        sums["region"][key] = sums["region"].get(key, 0.0) + share

    cells = []
    for axis in AXES:
        if not sums[axis]:
            continue
        total = sum(sums[axis].values())
        if abs(total - 1.0) > _AXIS_SUM_TOL:
            raise RecordError(
                f"demographic_distribution(axis={axis})",
                f"shares sum to {total:.4f}, expected 1 +/- {_AXIS_SUM_TOL}",
            )
        for key, share in sums[axis].items():
            if share > 1 + _SHARE_EPS:
                raise RecordError(
                    f"demographic_distribution(axis={axis}, key={key})",
                    f"share {share} outside [0, 1]",
                )
            cells.append(DemographicCell(axis=axis, key=key, share=min(share, 1.0)))
    return tuple(cells)


def parse_ad_record(record: dict, registry: PageRegistry | None = None) -> Ad:
    """Validate and normalize one raw archive record into an Ad.

    Raises RecordError naming the offending field path; missing optional
    fields become absent, never zero.
    """
    if not isinstance(record, dict):
        raise RecordError("$", f"expected an object, got {type(record).__name__}")

    def require_str(key: str) -> str:
        value = record.get(key)
        if value is None or (isinstance(value, str) and not value.strip()):
            raise RecordError(key, "missing")
        if not isinstance(value, str):
            raise RecordError(key, f"expected a string, got {value!r}")
        return value.strip()

    ad_id = require_str("id")
    page_id = require_str("page_id")
    page_name = str(record.get("page_name") or "")
    currency = require_str("currency")

    start = _parse_date(record.get("ad_delivery_start_time"), "ad_delivery_start_time")
    end = None
    if record.get("ad_delivery_stop_time") is not None:
        end = _parse_date(record["ad_delivery_stop_time"], "ad_delivery_stop_time")
        if end < start:
            raise RecordError("ad_delivery_stop_time", f"stop {end} before start {start}")

    if "spend" not in record:
        raise RecordError("spend", "missing")
    if "impressions" not in record:
        raise RecordError("impressions", "missing")
    spend = _parse_range(record["spend"], "spend")
    impressions = _parse_range(record["impressions"], "impressions")
    audience = None
    if record.get("estimated_audience_size") is not None:
        audience = _parse_range(record["estimated_audience_size"], "estimated_audience_size")

    party = None
    if registry is not None:
        party = registry.party_for(page_id)

    return Ad(
        id=ad_id,
        page_id=page_id,
        page_name=page_name,
        party=party if party is not None else UNKNOWN_PARTY,
        start_date=start,
        end_date=end,
        currency=currency,
        spend=spend,
        impressions=impressions,
        audience=audience,
        demographics=_parse_demographics(record),
        creative_bodies=_parse_texts(record, "ad_creative_bodies"),
        link_titles=_parse_texts(record, "ad_creative_link_titles"),
        link_descriptions=_parse_texts(record, "ad_creative_link_descriptions"),
        link_captions=_parse_texts(record, "ad_creative_link_captions"),
    )


# ---------------------------------------------------------------------------
# Corpus persistence


def _range_to_json(metric: RangeMetric) -> dict:
    out: dict = {"lower_bound": metric.lower}
    if metric.upper is not None:
        out["upper_bound"] = metric.upper
    return out


def ad_to_record(ad: Ad) -> dict:
    """Serialize an Ad back to the archive wire format (party is not
    persisted; it re-resolves through the page registry on load)."""
    record: dict = {
        "id": ad.id,
        "page_id": ad.page_id,
        "page_name": ad.page_name,
        "currency": ad.currency,
        "ad_delivery_start_time": ad.start_date.isoformat(),
        "spend": _range_to_json(ad.spend),
        "impressions": _range_to_json(ad.impressions),
        "ad_creative_bodies": list(ad.creative_bodies),
        "ad_creative_link_titles": list(ad.link_titles),
        "ad_creative_link_descriptions": list(ad.link_descriptions),
        "ad_creative_link_captions": list(ad.link_captions),
    }
    if ad.end_date is not None:
        record["ad_delivery_stop_time"] = ad.end_date.isoformat()
    if ad.audience is not None:
        record["estimated_audience_size"] = _range_to_json(ad.audience)
    demo = [
        {"gender" if cell.axis == "gender" else "age": cell.key, "percentage": cell.share}
        for cell in ad.demographics
        if cell.axis in ("gender", "age")
    ]
    regions = [
        {"region": cell.key, "percentage": cell.share}
        for cell in ad.demographics
        if cell.axis == "region"
    ]
    if demo:
        record["demographic_distribution"] = demo
    if regions:
        record["delivery_by_region"] = regions
    return record


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus as NDJSON, one ad per line, archive field names."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for ad in corpus.ads:
            handle.write(json.dumps(ad_to_record(ad), ensure_ascii=False) + "\n")


def load_corpus(
    path: str | Path,
    registry: PageRegistry | None = None,
    quarantine_path: str | Path | None = None,
) -> tuple[Corpus, LoadReport]:
    """Load and validate an NDJSON corpus.

    Bad lines are skipped with their line number in the report (and written
    to the quarantine sidecar when one is given); unresolved page_ids are
    reported, never dropped.
    """
    report = LoadReport()
    ads: list[Ad] = []
    seen_ids: set[str] = set()
    unresolved: set[str] = set()
    quarantined: list[dict] = []

    try:
        handle = open(path, encoding="utf-8")
    except OSError as exc:
        raise IngestionError(f"cannot read corpus {path}: {exc}") from exc

    with handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                ad = parse_ad_record(record, registry)
                if ad.id in seen_ids:
                    raise RecordError("id", f"duplicate id {ad.id}")
            except RecordError as exc:
                report.rejected += 1
                report.rejections.append(Rejection(lineno, exc.field_path, str(exc)))
                quarantined.append({"line": lineno, "error": str(exc), "raw": line})
                continue
            except json.JSONDecodeError as exc:
                report.rejected += 1
                report.rejections.append(Rejection(lineno, "$", f"invalid JSON: {exc.msg}"))
                quarantined.append({"line": lineno, "error": f"invalid JSON: {exc.msg}", "raw": line})
                continue
            seen_ids.add(ad.id)
            if registry is not None and registry.party_for(ad.page_id) is None:
                unresolved.add(ad.page_id)
            ads.append(ad)
            report.accepted += 1

    report.unresolved_pages = sorted(unresolved)
    if quarantine_path is not None and quarantined:
        with open(quarantine_path, "w", encoding="utf-8", newline="\n") as sidecar:
            for entry in quarantined:
                sidecar.write(json.dumps(entry, ensure_ascii=False) + "\n")
    return Corpus(ads=tuple(ads)), report


# ---------------------------------------------------------------------------
# Archive API client


@dataclass
class ApiConfig:
    """Connection settings for an ads_archive-style endpoint."""

    base_url: str
    access_token: str
    fields: Sequence[str] = DEFAULT_FIELDS
    page_size: int = 250
    max_retries: int = 5
    backoff_base: float = 0.5
    timeout: float = 30.0


def _error_code(body) -> int | None:
    if isinstance(body, dict) and isinstance(body.get("error"), dict):
        code = body["error"].get("code")
        if isinstance(code, int):
            return code
    return None


def fetch_ads(
    page_ids: Sequence[str],
    date_range: tuple[date, date],
    config: ApiConfig,
    *,
    session: requests.Session | None = None,
    sleep: Callable[[float], None] = time.sleep,
    errors: list[str] | None = None,
) -> Iterator[dict]:
    """Stream raw ad records for each page id over a delivery-date window.

    Follows pagination cursors to exhaustion, retries rate-limit responses
    with exponential backoff (up to ``config.max_retries``), and emits each
    archive id at most once per call. Auth failures are terminal; malformed
    records or pages are reported to ``errors`` and the stream continues.
    """
    if not page_ids:
        raise ValueError("page_ids must be non-empty")
    if not config.access_token:
        raise ValueError("api config has no access token")
    date_min, date_max = date_range
    if date_max < date_min:
        raise ValueError(f"date_range is not well-ordered: {date_min} > {date_max}")

    own_session = session is None
    session = session or requests.Session()
    seen_ids: set[str] = set()

    def record_error(message: str) -> None:
        logger.warning("%s", message)
        if errors is not None:
            errors.append(message)

    def get_page(params: dict) -> dict | None:
        attempt = 0
        while True:
            response = session.get(config.base_url, params=params, timeout=config.timeout)
            body = None
            try:
                body = response.json()
            except ValueError:
                pass
            code = _error_code(body)
            if response.status_code in (401, 403) or code in _AUTH_CODES:
                raise AuthError(
                    f"authentication failed against {config.base_url} "
                    f"(HTTP {response.status_code})"
                )
            retryable = (
                response.status_code == 429
                or response.status_code >= 500
                or code in _RATE_LIMIT_CODES
            )
            if retryable:
                if attempt >= config.max_retries:
                    raise ApiError(
                        f"rate limited by {config.base_url}: gave up after "
                        f"{config.max_retries} retries"
                    )
                sleep(config.backoff_base * 2**attempt)
                attempt += 1
                continue
            if response.status_code != 200:
                raise ApiError(
                    f"unexpected HTTP {response.status_code} from {config.base_url}"
                )
            if not isinstance(body, dict) or not isinstance(body.get("data"), list):
                record_error(f"malformed page from {config.base_url}: no data[]")
                return None
            return body

    try:
        for page_id in page_ids:
            params = {
                "search_page_ids": page_id,
                "ad_delivery_date_min": date_min.isoformat(),
                "ad_delivery_date_max": date_max.isoformat(),
                "fields": ",".join(config.fields),
                "access_token": config.access_token,
                "limit": str(config.page_size),
            }
            cursor: str | None = None
            while True:
                if cursor:
                    params["after"] = cursor
                page = get_page(params)
                if page is None:
                    break
                for record in page["data"]:
                    if not isinstance(record, dict):
                        record_error(f"malformed record for page_id {page_id}: {record!r}")
                        continue
                    record_id = record.get("id")
                    if not record_id:
                        record_error(f"record without id for page_id {page_id}")
                        continue
                    if record_id in seen_ids:
                        continue
                    seen_ids.add(record_id)
                    yield record
                next_cursor = (page.get("paging") or {}).get("cursors", {}).get("after")
                if not next_cursor or next_cursor == cursor:
                    break
                cursor = next_cursor
    finally:
        if own_session:
            session.close()


def save_raw_records(records: Iterable[dict], path: str | Path) -> int:
    """Write raw fetched records as NDJSON; returns the record count."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
            count += 1
    return count
