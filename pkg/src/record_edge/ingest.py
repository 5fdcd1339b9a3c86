"""Race-result ingestion and domain codecs.

Race times use the M:SS.ss convention and are held as integer
centiseconds wherever exactness matters (parsing, threshold margins),
converting to float seconds at module boundaries. Seasons run from
July 1 to June 30 and are labelled by their starting calendar year.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import re
import warnings
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import ParseError, ParseWarning

__all__ = [
    "RaceResult",
    "ExceedanceSample",
    "parse_time",
    "format_time",
    "season_of",
    "lap_schedule",
    "to_exceedance",
    "read_results_csv",
    "read_national_records",
    "bundled_national_records",
    "DEFAULT_THRESHOLD_S",
]

# 6:10.00 -- the qualifying cut the whole analysis is anchored at.
DEFAULT_THRESHOLD_S = 370.0

_TIME_RE = re.compile(r"^(\d+):(\d{2})(?:\.(\d{1,2}))?$")

# National-records table row: time with dots, skater name, 3-letter
# nation, one-token venue, two-digit year, MMDD, pair rank.
_TABLE_RE = re.compile(
    r"^\s*(\d+)\.(\d{2})\.(\d{2})\s+(.+?)\s+([A-Z]{3})\s+(\S+)\s+(\d{2})\s+(\d{2})(\d{2})\s+(\d+)\s*$"
)


def parse_time(text: str) -> float:
    """Parse an M:SS.ss race time into seconds, exact to the centisecond."""
    m = _TIME_RE.match(text.strip())
    if m is None:
        raise ParseError(f"not an M:SS.ss time: {text!r}", column=0)
    minutes, seconds, frac = m.group(1), m.group(2), m.group(3) or "0"
    if int(seconds) >= 60:
        raise ParseError(f"seconds field must be < 60 in {text!r}", column=len(minutes) + 1)
    centis = 6000 * int(minutes) + 100 * int(seconds) + int(frac.ljust(2, "0"))
    return centis / 100.0


def format_time(seconds: float) -> str:
    """Format seconds as M:SS.ss, rounding to the centisecond."""
    if not np.isfinite(seconds) or seconds < 0:
        raise ValueError(f"cannot format {seconds!r} as a race time")
    centis = round(seconds * 100)
    minutes, rem = divmod(centis, 6000)
    return f"{minutes}:{rem // 100:02d}.{rem % 100:02d}"


def season_of(date: dt.date) -> int:
    """Starting year of the skating season containing ``date``
    (July 1 of year Y through June 30 of Y+1 -> season Y)."""
    return date.year if date.month >= 7 else date.year - 1


def lap_schedule(total_s: float, opening_s: float, laps: int = 12) -> float:
    """Average lap time implied by a total, an opening split, and a lap count."""
    if laps < 1:
        raise ValueError("laps must be >= 1")
    if not (total_s > opening_s > 0):
        raise ValueError(
            f"need total > opening > 0, got total={total_s!r} opening={opening_s!r}"
        )
    return (total_s - opening_s) / laps


@dataclass(frozen=True)
class RaceResult:
    """One race: who, where, when, and the time in seconds."""

    skater: str
    nation: str | None
    venue: str
    date: dt.date
    time_s: float
    pair_rank: int | None = None

    def __post_init__(self):
        if not (np.isfinite(self.time_s) and self.time_s > 0):
            raise ValueError(f"race time must be positive and finite, got {self.time_s!r}")
        if self.nation is not None and not re.fullmatch(r"[A-Z]{3}", self.nation):
            raise ValueError(f"nation must be 3 uppercase letters, got {self.nation!r}")

    @property
    def season(self) -> int:
        return season_of(self.date)


@dataclass(frozen=True)
class ExceedanceSample:
    """Margins below a threshold, with their seasons and source races.

    ``values[i]`` is threshold_s - time of ``sources[i]`` (strictly
    positive); races at or above the threshold are excluded and counted.
    """

    threshold_s: float
    values: np.ndarray
    seasons: tuple[int, ...]
    sources: tuple[RaceResult, ...] = field(repr=False)
    excluded: int = 0

    def __len__(self) -> int:
        return int(self.values.size)

    def season_groups(self) -> list[tuple[int, np.ndarray]]:
        """Margins grouped by season, sorted by season year."""
        seasons = np.asarray(self.seasons)
        return [
            (int(s), self.values[seasons == s]) for s in sorted(set(self.seasons))
        ]


def to_exceedance(results: list[RaceResult], threshold_s: float = DEFAULT_THRESHOLD_S) -> ExceedanceSample:
    """Translate races into margins y = threshold - time, keeping only
    strictly sub-threshold races; the margin arithmetic is exact to the
    centisecond."""
    if threshold_s <= 0:
        raise ValueError("threshold must be positive")
    thr_centis = round(threshold_s * 100)
    kept, seasons, values = [], [], []
    excluded = 0
    for r in results:
        margin_centis = thr_centis - round(r.time_s * 100)
        if margin_centis <= 0:
            excluded += 1
            continue
        kept.append(r)
        seasons.append(r.season)
        values.append(margin_centis / 100.0)
    return ExceedanceSample(
        threshold_s=float(threshold_s),
        values=np.asarray(values, dtype=float),
        seasons=tuple(seasons),
        sources=tuple(kept),
        excluded=excluded,
    )


_CSV_COLUMNS = ["skater", "nation", "venue", "date", "time"]


def _parse_csv_row(row: dict, line: int) -> RaceResult:
    missing = [c for c in _CSV_COLUMNS if row.get(c) in (None, "")]
    if missing:
        raise ParseError(f"missing fields {missing}", line=line)
    try:
        date = dt.date.fromisoformat(row["date"].strip())
    except ValueError as exc:
        raise ParseError(f"bad date {row['date']!r}: {exc}", line=line) from None
    try:
        time_s = parse_time(row["time"])
    except ParseError as exc:
        raise ParseError(f"bad time: {exc}", line=line) from None
    rank_text = (row.get("pair_rank") or "").strip()
    pair_rank = int(rank_text) if rank_text else None
    nation = row["nation"].strip() or None
    try:
        return RaceResult(
            skater=row["skater"].strip(),
            nation=nation,
            venue=row["venue"].strip(),
            date=date,
            time_s=time_s,
            pair_rank=pair_rank,
        )
    except ValueError as exc:
        raise ParseError(str(exc), line=line) from None


def read_results_csv(source, strict: bool = True) -> list[RaceResult]:
    """Read races from a CSV file (path or text stream).

    Header: skater,nation,venue,date,time with ISO dates and M:SS.ss
    times; an optional pair_rank column is honoured. In strict mode the
    first bad row aborts with its line number; in lenient mode bad rows
    are skipped with one warning each.
    """
    if hasattr(source, "read"):
        return _read_results(source, strict)
    with open(source, newline="", encoding="utf-8") as fh:
        return _read_results(fh, strict)


def _read_results(fh, strict: bool) -> list[RaceResult]:
    reader = csv.DictReader(fh)
    if reader.fieldnames is None:
        return []
    missing = [c for c in _CSV_COLUMNS if c not in reader.fieldnames]
    if missing:
        raise ParseError(f"header is missing columns {missing}", line=1)
    out = []
    for i, row in enumerate(reader, start=2):
        try:
            out.append(_parse_csv_row(row, i))
        except ParseError as exc:
            if strict:
                raise
            warnings.warn(f"skipping row: {exc}", ParseWarning, stacklevel=3)
    return out


def read_national_records(text: str) -> list[RaceResult]:
    """Parse the fixed-width national-records table format.

    Rows carry a dotted time (M.SS.cc), skater name, nation, one-word
    venue, a two-digit year (2000s), MMDD, and the pair rank, e.g.::

        5.58.52 EITREM Sander            NOR Inzell      26 0124  1

    Blank lines are ignored; anything else that does not match is a
    parse error with its line number.
    """
    out = []
    for i, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        m = _TABLE_RE.match(line)
        if m is None:
            raise ParseError(f"unrecognised table row: {line!r}", line=i)
        minutes, ss, cc, name, nation, venue, yy, mm, dd, rank = m.groups()
        if int(ss) >= 60:
            raise ParseError(f"seconds field must be < 60 in {line!r}", line=i)
        time_s = (6000 * int(minutes) + 100 * int(ss) + int(cc)) / 100.0
        out.append(
            RaceResult(
                skater=name.strip(),
                nation=nation,
                venue=venue,
                date=dt.date(2000 + int(yy), int(mm), int(dd)),
                time_s=time_s,
                pair_rank=int(rank),
            )
        )
    return out


def bundled_national_records() -> list[RaceResult]:
    """The packaged 17-row national-records fixture."""
    data = resources.files("record_edge").joinpath("data/national_records.csv").read_text()
    return read_results_csv(io.StringIO(data))
