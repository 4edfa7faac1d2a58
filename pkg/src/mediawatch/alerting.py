"""Country x category early-warning statistic.

The unexpectedness score of a cell is the observed 24-hour article count
divided by its expected count: the 14-day mean daily count corrected by a
weekday factor derived from global volume (weekends publish less), floored
so novel cells never divide by zero. The score is a ratio of counts, so
multiplying all stored counts by any positive constant leaves it unchanged
wherever the floor is not binding.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, datetime, timedelta

from .errors import IncompleteHistory
from .store import ArticleStore

BASELINE_DAYS = 14
EXPECTED_FLOOR = 0.5
MIN_SUPPORT = 2
LEVEL_HIGH = 4.0
LEVEL_MEDIUM = 2.0


@dataclass(frozen=True)
class AlertCell:
    country: str
    category_id: str
    observed_24h: int
    baseline_daily: float
    dow_factor: float
    expected: float
    score: float
    level: str

    def to_json(self) -> dict:
        return {
            "country": self.country,
            "category": self.category_id,
            "observed": self.observed_24h,
            "baseline_daily": self.baseline_daily,
            "dow_factor": self.dow_factor,
            "expected": self.expected,
            "score": self.score,
            "level": self.level,
        }


@dataclass(frozen=True)
class SeriesPoint:
    bucket: date
    value: float


def classify_level(score: float, high: float = LEVEL_HIGH, medium: float = LEVEL_MEDIUM) -> str:
    if score >= high:
        return "high"
    if score >= medium:
        return "medium"
    return "low"


def dow_factor(history: list[tuple[date, float]], weekday: int) -> float:
    """Weekday volume correction from 14 consecutive days of global counts.

    factor = mean(count on that weekday) / mean(all 14 days). Degenerate
    histories (zero overall or zero weekday volume) yield the neutral 1.0
    so the factor stays positive.
    """
    if len(history) != BASELINE_DAYS:
        raise IncompleteHistory(f"need {BASELINE_DAYS} days, got {len(history)}")
    days = sorted(d for d, _ in history)
    for earlier, later in zip(days, days[1:]):
        if (later - earlier).days != 1:
            raise IncompleteHistory("history days are not consecutive")
    counts = {d: c for d, c in history}
    same_day = [counts[d] for d in days if d.weekday() == weekday]
    overall_mean = sum(counts.values()) / BASELINE_DAYS
    if overall_mean == 0 or not same_day:
        return 1.0
    weekday_mean = sum(same_day) / len(same_day)
    if weekday_mean == 0:
        return 1.0
    return weekday_mean / overall_mean


def alert_score(
    observed_24h: int,
    baseline_daily: float,
    dow: float,
    floor: float = EXPECTED_FLOOR,
    high: float = LEVEL_HIGH,
    medium: float = LEVEL_MEDIUM,
    country: str = "",
    category_id: str = "",
) -> AlertCell:
    """Score one cell; expected = max(baseline * dow_factor, floor)."""
    if observed_24h < 0 or baseline_daily < 0 or dow <= 0:
        raise ValueError("alert inputs must be non-negative (dow factor positive)")
    expected = max(baseline_daily * dow, floor)
    score = observed_24h / expected
    return AlertCell(
        country=country,
        category_id=category_id,
        observed_24h=observed_24h,
        baseline_daily=baseline_daily,
        dow_factor=dow,
        expected=expected,
        score=score,
        level=classify_level(score, high, medium),
    )


def _baseline_days_for(clock: datetime) -> list[date]:
    """The 14 complete calendar days preceding the 24h observation window."""
    window_start = clock - timedelta(hours=24)
    anchor = window_start.date()
    return [anchor - timedelta(days=k) for k in range(BASELINE_DAYS, 0, -1)]


def global_history(store: ArticleStore, days: list[date]) -> list[tuple[date, float]]:
    return [(day, float(store.cube.global_daily.get(day, 0))) for day in days]


def alert_board(
    store: ArticleStore,
    clock: datetime,
    floor: float = EXPECTED_FLOOR,
    min_support: int = MIN_SUPPORT,
    high: float = LEVEL_HIGH,
    medium: float = LEVEL_MEDIUM,
) -> list[AlertCell]:
    """Ranked board over every (country, category) with observed_24h at or
    above the support minimum; language-independent by construction (the
    counts carry no language dimension).

    Total deterministic order: score desc, observed desc, country, category.
    """
    baseline_days = _baseline_days_for(clock)
    earliest = store.earliest_day()
    if earliest is None or earliest > baseline_days[0]:
        raise IncompleteHistory(
            f"store coverage starts {earliest}, need history from {baseline_days[0]}"
        )
    scored_day = (clock - timedelta(seconds=1)).date()
    dow = dow_factor(global_history(store, baseline_days), scored_day.weekday())

    observed = store.observed_in_window(clock - timedelta(hours=24), clock)
    baseline_counts: dict[tuple[str, str], int] = {}
    for (day, country, category, _lang), count in store.cube.counts.items():
        if baseline_days[0] <= day <= baseline_days[-1]:
            key = (country, category)
            baseline_counts[key] = baseline_counts.get(key, 0) + count

    cells = []
    for (country, category), seen in observed.items():
        if seen < min_support:
            continue
        baseline = baseline_counts.get((country, category), 0) / BASELINE_DAYS
        cells.append(
            alert_score(
                seen,
                baseline,
                dow,
                floor=floor,
                high=high,
                medium=medium,
                country=country,
                category_id=category,
            )
        )
    # scores equal to 9 decimals count as tied so ordering is stable under
    # any count rescaling that moves a score by less than 1e-9
    cells.sort(key=lambda c: (-round(c.score, 9), -c.observed_24h, c.country, c.category_id))
    return cells


def series(
    store: ArticleStore,
    country: str | None,
    category: str | None,
    resolution: str,
    span: tuple[date, date],
    metric: str = "count",
) -> list[SeriesPoint]:
    """Per-bucket article counts or mean tonality for a cell.

    Day buckets emit 0-valued points for empty days; tonality buckets with
    no articles are omitted (no mean exists).
    """
    if resolution not in ("day", "month"):
        raise ValueError(f"unknown resolution {resolution!r}")
    if metric not in ("count", "tonality"):
        raise ValueError(f"unknown metric {metric!r}")
    start, end = span
    if start > end:
        raise ValueError("span start after end")

    def bucket_of(day: date) -> date:
        return day if resolution == "day" else day.replace(day=1)

    buckets: list[date] = []
    cursor = bucket_of(start)
    while cursor <= end:
        buckets.append(cursor)
        if resolution == "day":
            cursor = cursor + timedelta(days=1)
        else:
            cursor = (cursor.replace(day=28) + timedelta(days=4)).replace(day=1)

    if metric == "count":
        totals = {b: 0 for b in buckets}
        for (day, ctry, cat, _lang), count in store.cube.counts.items():
            if not (start <= day <= end):
                continue
            if country is not None and ctry != country:
                continue
            if category is not None and cat != category:
                continue
            totals[bucket_of(day)] += count
        return [SeriesPoint(bucket=b, value=float(totals[b])) for b in buckets]

    sums: dict[date, float] = {b: 0.0 for b in buckets}
    counts: dict[date, int] = {b: 0 for b in buckets}
    for record in store.records.values():
        day = record.published_at.date()
        if not (start <= day <= end):
            continue
        if country is not None and record.country_of_source != country:
            continue
        if category is not None and category not in record.categories:
            continue
        bucket = bucket_of(day)
        sums[bucket] += record.tonality
        counts[bucket] += 1
    return [
        SeriesPoint(bucket=b, value=sums[b] / counts[b])
        for b in buckets
        if counts[b] > 0
    ]
